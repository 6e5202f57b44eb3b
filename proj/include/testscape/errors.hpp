#pragma once

#include <stdexcept>
#include <string>

namespace testscape {

// Exit-code mapping for the CLI: ArgumentError -> 2, DataError -> 3,
// ConvergenceError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArgumentError : Error {
    using Error::Error;
};

struct DataError : Error {
    using Error::Error;
};

struct ConvergenceError : Error {
    using Error::Error;
};

} // namespace testscape
