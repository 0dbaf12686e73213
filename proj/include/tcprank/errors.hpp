#pragma once

#include <stdexcept>
#include <string>

namespace tcprank {

// Base for dataset ingestion/validation failures. Messages carry the file
// and record location where the problem was found.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Structural problems: missing file, missing column, unparsable field.
struct SchemaError : DataError {
    using DataError::DataError;
};

// A numeric value outside its documented range.
struct RangeError : DataError {
    using DataError::DataError;
};

// A reference to an unknown test/unit/class, or a duplicate record.
struct ConsistencyError : DataError {
    using DataError::DataError;
};

// APFD is undefined when no test fails.
struct NoFailuresError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EmptyInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Wilcoxon signed-rank needs a minimum number of non-zero differences.
struct TooFewSamplesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training window contains no buggy class.
struct NoPositivesError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training data that cannot be standardized (non-finite values).
struct DegenerateDataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteInputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid synthetic-generator specification.
struct SpecError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid experiment/CLI configuration.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tcprank
