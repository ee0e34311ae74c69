#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace loca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Invalid configuration: bad layer lists, unknown enum values, malformed args.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Dimension mismatch between a model/operation and its input.
struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Non-finite values, failed eigensolves, diverged training.
struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Degenerate or otherwise unusable data: clouds with M < 2, empty regions,
// singular projection points, rank-deficient calibration subsets.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace loca
