#pragma once

#include "securelat/linalg.hpp"

#include <functional>
#include <vector>

namespace securelat::plant {

using StateVector = Eigen::Vector4d;

/// Component indices of the lateral-error state.
enum StateIndex : Eigen::Index { kLateral = 0, kLateralRate = 1, kHeading = 2, kHeadingRate = 3 };

struct VehicleParams {
    double mass_kg = 1573.0;
    double inertia_z_kgm2 = 2873.0;
    double dist_front_m = 1.10;
    double dist_rear_m = 1.58;
    double stiff_front_N_per_rad = 80000.0;
    double stiff_rear_N_per_rad = 80000.0;
    double speed_long_m_per_s = 30.0;

    /// Throws InvalidArgument unless every field is finite and strictly positive.
    void validate() const;
};

struct ContinuousModel {
    Eigen::Matrix4d mat_H = Eigen::Matrix4d::Zero();
    Eigen::Vector4d mat_G = Eigen::Vector4d::Zero();
    /// Coefficient of the desired yaw rate in the state equation (zero on a straight road).
    Eigen::Vector4d mat_Gdes = Eigen::Vector4d::Zero();
};

ContinuousModel continuous_matrices(const VehicleParams& params);

/// One classical RK4 step of xdot = H x + G u + Gdes * yaw_rate_des.
StateVector step_continuous(const ContinuousModel& model, const StateVector& state, double input_rad,
                            double dt_s, double yaw_rate_des = 0.0);

/// Steering angle beyond which the small-angle regime no longer holds (5 degrees).
inline constexpr double kSmallAngleLimitRad = 0.08726646259971647;

struct TrajectoryOptions {
    /// Bound on additive uniform process noise applied after each step; 0 disables it.
    double noise_bound = 0.0;
    std::uint64_t noise_seed = 0;
    /// Optional desired yaw rate per step; empty means zero.
    std::vector<double> yaw_rate_des;
};

/// Entry k of the result is the state before inputs[k] is applied; length is inputs.size() + 1.
std::vector<StateVector> generate_trajectory(const ContinuousModel& model, const StateVector& initial,
                                             const std::vector<double>& inputs, double dt_s,
                                             const TrajectoryOptions& opts = {});

/// Number of inputs outside the small-angle regime (reported as a warning by callers).
std::size_t count_large_angle_inputs(const std::vector<double>& inputs);

}  // namespace securelat::plant
