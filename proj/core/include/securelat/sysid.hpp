#pragma once

#include "securelat/linalg.hpp"
#include "securelat/plant.hpp"

#include <optional>
#include <vector>

namespace securelat::sysid {

struct DatasetMatrices {
    Mat snap_X;    // n x (m-1), samples 1..m-1
    Mat snap_Xp;   // n x (m-1), samples 2..m
    Mat input_Xi;  // p x (m-1)
    double sample_period_s = 0.01;

    Eigen::Index n() const { return snap_X.rows(); }
    Eigen::Index p() const { return input_Xi.rows(); }
    Eigen::Index width() const { return snap_X.cols(); }
};

struct IdentifiedModel {
    Mat mat_A;
    Mat mat_B;
    int trunc_order = 0;
    double residual_fro = 0.0;
    double sample_period_s = 0.01;
};

/// Discrete lateral model reported for the 100 Hz vehicle data.
IdentifiedModel reference_model();

DatasetMatrices build_matrices(const std::vector<plant::StateVector>& states, const std::vector<double>& inputs,
                               double sample_period_s);

/// Multi-input, general-dimension variant: columns of `states` are samples, rows of `inputs` are channels.
DatasetMatrices build_matrices(const Mat& states, const Mat& inputs, double sample_period_s);

struct PersistencyReport {
    bool passed = false;
    bool length_ok = false;
    Eigen::Index required_length = 0;
    Eigen::Index available_length = 0;
    Eigen::Index hankel_rank = 0;
    Eigen::Index hankel_rows = 0;
};

PersistencyReport persistency_check(const DatasetMatrices& data, int order_ns, int window_ls);

inline constexpr double kDefaultEnergyThreshold = 0.9999;

/// Smallest r whose cumulative energy fraction reaches the threshold.
int select_truncation(const std::vector<double>& singular_values, double threshold = kDefaultEnergyThreshold);

/// Truncation request: a fixed order, or nullopt for the energy rule.
using Truncation = std::optional<int>;

IdentifiedModel dmd_identify(const DatasetMatrices& data, Truncation trunc_order);

/// Frobenius norm of X' - [A B][X; Xi].
double residual(const DatasetMatrices& data, const Mat& A, const Mat& B);

/// x(k+1) = A x(k) + B u(k); returns inputs.cols() + 1 samples as columns.
Mat simulate_discrete(const Mat& A, const Mat& B, const Vec& x0, const Mat& inputs);

/// Uniform pseudo-random excitation in [-amplitude, amplitude].
std::vector<double> random_excitation(std::size_t count, double amplitude, std::uint64_t seed);

}  // namespace securelat::sysid
