#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace antcensus {

/// Bad flag combinations or out-of-range options. CLI exit code 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or missing input data (files, manifests, labels). CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Parse failure inside a text file; carries the 1-based line number.
struct ParseError : DataError {
    ParseError(const std::string& msg, std::size_t line_number)
        : DataError("line " + std::to_string(line_number) + ": " + msg), line(line_number) {}
    std::size_t line = 0;
};

/// Detector backend failure (launch, timeout, contract violation). CLI exit code 3.
struct BackendError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace antcensus
