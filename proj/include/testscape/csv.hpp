#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace testscape {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Strict, locale-free CSV. Plain comma separation, no quoting; fields in this
// project never contain commas. CRLF tolerated on read.
CsvTable read_csv(const std::filesystem::path& path);
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

// Shortest round-trip decimal form (std::to_chars).
std::string format_double(double v);

// Strict parse of a full field; `what` names the field for error messages.
double parse_double(std::string_view field, const std::string& what);

void write_text_file(const std::filesystem::path& path, std::string_view content);
std::string read_text_file(const std::filesystem::path& path);

} // namespace testscape
