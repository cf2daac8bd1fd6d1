#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace securelat {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using RowVec = Eigen::RowVectorXd;

/// Raised for invalid arguments or violated preconditions.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical procedure fails (non-convergence, singularity, blow-up).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace linalg {

double spectral_radius(const Mat& m);

/// Singular values above max(rows, cols) * sigma_max * eps count toward rank.
Eigen::Index numerical_rank(const Mat& m);

bool is_symmetric(const Mat& m, double tol);

bool all_finite(const Mat& m);

/// Row-major flattening helpers used for serialization.
std::vector<std::vector<double>> to_rows(const Mat& m);
Mat from_rows(const std::vector<std::vector<double>>& rows);

}  // namespace linalg

/// Seeded generator with platform-independent uniform draws.
/// std::uniform_*_distribution output is implementation-defined, so conversions are done by hand.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1) from the top 53 bits.
    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Uniform integer in [0, n] inclusive, rejection sampled.
    std::uint64_t uniform_int(std::uint64_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace securelat
