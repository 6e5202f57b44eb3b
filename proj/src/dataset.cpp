#include "testscape/dataset.hpp"

#include "testscape/csv.hpp"
#include "testscape/errors.hpp"
#include "testscape/rng.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace testscape {

std::string to_string(Outcome o) {
    return o == Outcome::Effective ? "effective" : "ineffective";
}

Outcome outcome_from_string(std::string_view s) {
    if (s == "effective") return Outcome::Effective;
    if (s == "ineffective") return Outcome::Ineffective;
    throw DataError("unknown outcome '" + std::string(s) + "'");
}

const TelemetryChannel* TestCase::find_channel(std::string_view name) const {
    for (const auto& ch : telemetry)
        if (ch.name == name) return &ch;
    return nullptr;
}

const TestCase* Corpus::find_case(std::string_view id) const {
    for (const auto& c : cases)
        if (c.id == id) return &c;
    return nullptr;
}

void validate_case(const TestCase& c) {
    auto fail = [&](const std::string& reason) {
        throw DataError("malformed case " + c.id + ": " + reason);
    };
    if (c.road.size() < 2) fail("road has fewer than 2 points");
    for (const auto& p : c.road)
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) fail("non-finite road coordinate");
    for (std::size_t i = 1; i < c.road.size(); ++i)
        if (c.road[i].x == c.road[i - 1].x && c.road[i].y == c.road[i - 1].y)
            fail("zero-length road segment at point " + std::to_string(i));
    for (const auto& ch : c.telemetry) {
        if (ch.samples.empty()) fail("empty channel " + ch.name);
        for (double v : ch.samples)
            if (!std::isfinite(v)) fail("non-finite sample in channel " + ch.name);
    }
}

namespace {

std::vector<RoadPoint> load_road_file(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header.size() != 2 || table.header[0] != "x" || table.header[1] != "y")
        throw DataError("road file " + path.string() + " must have header x,y");
    std::vector<RoadPoint> road;
    road.reserve(table.rows.size());
    for (const auto& row : table.rows) {
        if (row.size() != 2) throw DataError("road file " + path.string() + " has a malformed row");
        road.push_back({parse_double(row[0], path.string()), parse_double(row[1], path.string())});
    }
    return road;
}

std::vector<TelemetryChannel> load_telemetry_file(const std::filesystem::path& path) {
    const CsvTable table = read_csv(path);
    if (table.header.empty()) throw DataError("telemetry file " + path.string() + " has no channels");
    std::vector<TelemetryChannel> channels(table.header.size());
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        channels[c].name = table.header[c];
        channels[c].samples.reserve(table.rows.size());
    }
    for (const auto& row : table.rows) {
        if (row.size() != table.header.size())
            throw DataError("telemetry file " + path.string() + " has a ragged row");
        for (std::size_t c = 0; c < row.size(); ++c)
            channels[c].samples.push_back(parse_double(row[c], path.string()));
    }
    std::sort(channels.begin(), channels.end(),
              [](const TelemetryChannel& a, const TelemetryChannel& b) { return a.name < b.name; });
    for (std::size_t c = 1; c < channels.size(); ++c)
        if (channels[c].name == channels[c - 1].name)
            throw DataError("telemetry file " + path.string() + " has duplicate channel " + channels[c].name);
    return channels;
}

} // namespace

Corpus load_corpus(const std::filesystem::path& root) {
    const auto index_path = root / "index.csv";
    if (!std::filesystem::exists(index_path))
        throw DataError("corpus not found: " + root.string());

    const CsvTable index = read_csv(index_path);
    const std::vector<std::string> expected = {"id", "technique", "outcome", "road_file", "telemetry_file"};
    if (index.header != expected)
        throw DataError("malformed index: expected columns id,technique,outcome,road_file,telemetry_file");
    if (index.rows.empty()) throw DataError("corpus is empty: " + root.string());

    std::set<std::string> seen_ids;
    Corpus corpus;
    std::vector<std::string> failures;
    for (const auto& row : index.rows) {
        if (row.size() != 5) throw DataError("malformed index row in " + index_path.string());
        const std::string& id = row[0];
        if (!seen_ids.insert(id).second) throw DataError("duplicate id " + id);

        TestCase tc;
        tc.id = id;
        tc.technique = row[1];
        try {
            tc.outcome = outcome_from_string(row[2]);
            tc.road = load_road_file(root / row[3]);
            tc.telemetry = load_telemetry_file(root / row[4]);
            validate_case(tc);
            corpus.cases.push_back(std::move(tc));
        } catch (const DataError& e) {
            std::string msg = e.what();
            if (msg.rfind("malformed case", 0) != 0)
                msg = "malformed case " + id + ": " + msg;
            failures.push_back(std::move(msg));
        }
    }
    if (!failures.empty()) {
        std::sort(failures.begin(), failures.end());
        std::ostringstream all;
        for (std::size_t i = 0; i < failures.size(); ++i) {
            if (i) all << '\n';
            all << failures[i];
        }
        throw DataError(all.str());
    }

    const auto prov_path = root / "provenance.txt";
    if (std::filesystem::exists(prov_path)) corpus.provenance = read_text_file(prov_path);
    return corpus;
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& root) {
    if (corpus.cases.empty()) throw ArgumentError("cannot save an empty corpus");
    std::filesystem::create_directories(root / "roads");
    std::filesystem::create_directories(root / "telemetry");

    std::vector<std::vector<std::string>> index_rows;
    for (const auto& tc : corpus.cases) {
        validate_case(tc);
        const std::string road_rel = "roads/" + tc.id + ".csv";
        const std::string tel_rel = "telemetry/" + tc.id + ".csv";

        std::vector<std::vector<std::string>> road_rows;
        road_rows.reserve(tc.road.size());
        for (const auto& p : tc.road)
            road_rows.push_back({format_double(p.x), format_double(p.y)});
        write_csv(root / road_rel, {"x", "y"}, road_rows);

        std::vector<std::string> tel_header;
        for (const auto& ch : tc.telemetry) tel_header.push_back(ch.name);
        const std::size_t ticks = tc.telemetry.empty() ? 0 : tc.telemetry.front().samples.size();
        for (const auto& ch : tc.telemetry)
            if (ch.samples.size() != ticks)
                throw DataError("malformed case " + tc.id + ": ragged telemetry channels");
        std::vector<std::vector<std::string>> tel_rows(ticks);
        for (std::size_t t = 0; t < ticks; ++t) {
            tel_rows[t].reserve(tc.telemetry.size());
            for (const auto& ch : tc.telemetry) tel_rows[t].push_back(format_double(ch.samples[t]));
        }
        write_csv(root / tel_rel, tel_header, tel_rows);

        index_rows.push_back({tc.id, tc.technique, to_string(tc.outcome), road_rel, tel_rel});
    }
    write_csv(root / "index.csv", {"id", "technique", "outcome", "road_file", "telemetry_file"}, index_rows);
    if (!corpus.provenance.empty()) write_text_file(root / "provenance.txt", corpus.provenance);
}

Corpus balanced_subset(const Corpus& corpus, std::uint64_t seed) {
    // Techniques are processed in sorted name order with per-technique derived
    // seeds, so the draw does not depend on corpus file order.
    std::map<std::string, std::vector<std::size_t>> effective, ineffective;
    for (std::size_t i = 0; i < corpus.cases.size(); ++i) {
        const auto& tc = corpus.cases[i];
        (tc.outcome == Outcome::Effective ? effective : ineffective)[tc.technique].push_back(i);
    }

    std::set<std::string> techniques;
    for (const auto& [t, _] : effective) techniques.insert(t);
    for (const auto& [t, _] : ineffective) techniques.insert(t);

    std::vector<std::size_t> keep;
    std::uint64_t tech_index = 0;
    for (const auto& t : techniques) {
        const auto eff_it = effective.find(t);
        const std::size_t n_eff = eff_it == effective.end() ? 0 : eff_it->second.size();
        if (n_eff == 0) throw DataError("cannot balance technique " + t + ": no effective cases");
        const auto ineff_it = ineffective.find(t);
        const std::size_t n_ineff = ineff_it == ineffective.end() ? 0 : ineff_it->second.size();
        if (n_ineff < n_eff)
            throw DataError("cannot balance technique " + t + ": " + std::to_string(n_eff) +
                            " effective but only " + std::to_string(n_ineff) + " ineffective cases");

        keep.insert(keep.end(), eff_it->second.begin(), eff_it->second.end());
        Rng rng(mix_seed(seed, tech_index++));
        for (std::size_t pick : rng.sample_indices(n_ineff, n_eff))
            keep.push_back(ineff_it->second[pick]);
    }
    std::sort(keep.begin(), keep.end());

    Corpus out;
    out.provenance = corpus.provenance;
    out.cases.reserve(keep.size());
    for (std::size_t i : keep) out.cases.push_back(corpus.cases[i]);
    return out;
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ArgumentError("train_fraction must be in (0, 1)");

    const std::size_t n = corpus.cases.size();
    const auto train_size = std::size_t(std::floor(train_fraction * double(n) + 0.5));

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);

    std::vector<std::size_t> train_idx(order.begin(), order.begin() + std::ptrdiff_t(train_size));
    std::vector<std::size_t> test_idx(order.begin() + std::ptrdiff_t(train_size), order.end());
    std::sort(train_idx.begin(), train_idx.end());
    std::sort(test_idx.begin(), test_idx.end());

    Corpus train, test;
    train.provenance = corpus.provenance;
    test.provenance = corpus.provenance;
    for (std::size_t i : train_idx) train.cases.push_back(corpus.cases[i]);
    for (std::size_t i : test_idx) test.cases.push_back(corpus.cases[i]);
    return {std::move(train), std::move(test)};
}

} // namespace testscape
