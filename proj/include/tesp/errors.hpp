#pragma once

#include <stdexcept>
#include <string>

namespace tesp {

struct DimensionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Singular values at a truncation boundary (or in the D weights) coincide.
struct DegenerateGapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IllPosedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UnsupportedError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct AlignmentError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RankError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace tesp
