#pragma once

#include <stdexcept>
#include <string>

namespace havok {

/// Error categories double as CLI exit codes (config=2, data=3, numeric=4).
enum class ErrorCategory : int {
    config = 2,
    data = 3,
    numeric = 4,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, std::string message)
        : std::runtime_error(std::move(message)), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

/// Bad parameters, bad config files, unknown keys, out-of-range knobs.
struct ConfigError : Error {
    explicit ConfigError(std::string message)
        : Error(ErrorCategory::config, std::move(message)) {}
};

/// Malformed or degenerate input data: parse failures, NaN samples,
/// non-uniform sampling, series too short for the requested operation.
struct DataError : Error {
    explicit DataError(std::string message)
        : Error(ErrorCategory::data, std::move(message)) {}
};

/// Numerical failures: singular systems, non-convergent optimizers,
/// fully thresholded (empty) models.
struct NumericError : Error {
    explicit NumericError(std::string message)
        : Error(ErrorCategory::numeric, std::move(message)) {}
};

} // namespace havok
