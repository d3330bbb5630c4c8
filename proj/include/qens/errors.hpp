#pragma once

#include <stdexcept>
#include <string>

namespace qens {

// Broad failure classes; the CLI maps each one to its own exit code.
enum class ErrorCategory { usage = 2, config = 3, ingestion = 4, numeric = 5 };

class Error : public std::runtime_error {
public:
    Error(ErrorCategory category, const std::string& what)
        : std::runtime_error(what), category_(category) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

struct UsageError : Error {
    explicit UsageError(const std::string& what) : Error(ErrorCategory::usage, what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

struct IngestionError : Error {
    explicit IngestionError(const std::string& what) : Error(ErrorCategory::ingestion, what) {}
};

struct NumericError : Error {
    explicit NumericError(const std::string& what) : Error(ErrorCategory::numeric, what) {}
};

// A measurement branch whose probability is below the post-selection floor.
struct ImpossibleOutcome : NumericError {
    using NumericError::NumericError;
};

struct ZeroVector : NumericError {
    using NumericError::NumericError;
};

struct NonNormalizedWeights : NumericError {
    using NumericError::NumericError;
};

// Weighted combination whose denominator vanishes.
struct DegenerateCombination : NumericError {
    using NumericError::NumericError;
};

struct DegenerateLabels : NumericError {
    using NumericError::NumericError;
};

struct DegenerateModel : NumericError {
    using NumericError::NumericError;
};

}  // namespace qens
