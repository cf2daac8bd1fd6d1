#include "securelat/plant.hpp"

#include <cmath>
#include <string>

namespace securelat::plant {

namespace {

void require_positive(double v, const char* name) {
    if (!std::isfinite(v) || v <= 0.0)
        throw InvalidArgument(std::string("VehicleParams.") + name + " must be finite and > 0");
}

}  // namespace

void VehicleParams::validate() const {
    require_positive(mass_kg, "mass_kg");
    require_positive(inertia_z_kgm2, "inertia_z_kgm2");
    require_positive(dist_front_m, "dist_front_m");
    require_positive(dist_rear_m, "dist_rear_m");
    require_positive(stiff_front_N_per_rad, "stiff_front_N_per_rad");
    require_positive(stiff_rear_N_per_rad, "stiff_rear_N_per_rad");
    require_positive(speed_long_m_per_s, "speed_long_m_per_s");
}

ContinuousModel continuous_matrices(const VehicleParams& p) {
    p.validate();
    const double m = p.mass_kg, iz = p.inertia_z_kgm2, lf = p.dist_front_m, lr = p.dist_rear_m;
    const double cf = p.stiff_front_N_per_rad, cr = p.stiff_rear_N_per_rad, vx = p.speed_long_m_per_s;
    const double moment = lf * cf - lr * cr;

    ContinuousModel out;
    auto& h = out.mat_H;
    h(0, 1) = 1.0;
    h(1, 1) = -(cf + cr) / (m * vx);
    h(1, 2) = (cf + cr) / m;
    h(1, 3) = -moment / (m * vx);
    h(2, 3) = 1.0;
    h(3, 1) = -moment / (iz * vx);
    h(3, 2) = moment / iz;
    h(3, 3) = -(lf * lf * cf + lr * lr * cr) / (iz * vx);

    out.mat_G(1) = cf / m;
    out.mat_G(3) = lf * cf / iz;

    out.mat_Gdes(1) = -moment / (m * vx) - vx;
    out.mat_Gdes(3) = -(lf * lf * cf + lr * lr * cr) / (iz * vx);
    return out;
}

StateVector step_continuous(const ContinuousModel& model, const StateVector& x, double u, double dt,
                            double yaw_rate_des) {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidArgument("step_continuous: dt must be finite and > 0");
    if (!x.allFinite()) throw InvalidArgument("step_continuous: non-finite state");
    if (!std::isfinite(u) || !std::isfinite(yaw_rate_des))
        throw InvalidArgument("step_continuous: non-finite input");

    const Eigen::Vector4d forcing = model.mat_G * u + model.mat_Gdes * yaw_rate_des;
    auto f = [&](const StateVector& s) -> StateVector { return model.mat_H * s + forcing; };
    const StateVector k1 = f(x);
    const StateVector k2 = f(x + 0.5 * dt * k1);
    const StateVector k3 = f(x + 0.5 * dt * k2);
    const StateVector k4 = f(x + dt * k3);
    return x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

std::vector<StateVector> generate_trajectory(const ContinuousModel& model, const StateVector& initial,
                                             const std::vector<double>& inputs, double dt_s,
                                             const TrajectoryOptions& opts) {
    if (inputs.empty()) throw InvalidArgument("generate_trajectory: inputs must be non-empty");
    if (opts.noise_bound < 0.0) throw InvalidArgument("generate_trajectory: noise bound must be >= 0");
    if (!opts.yaw_rate_des.empty() && opts.yaw_rate_des.size() < inputs.size())
        throw InvalidArgument("generate_trajectory: yaw_rate_des shorter than inputs");

    Rng rng(opts.noise_seed);
    std::vector<StateVector> out;
    out.reserve(inputs.size() + 1);
    out.push_back(initial);
    StateVector x = initial;
    for (std::size_t k = 0; k < inputs.size(); ++k) {
        const double yaw = opts.yaw_rate_des.empty() ? 0.0 : opts.yaw_rate_des[k];
        x = step_continuous(model, x, inputs[k], dt_s, yaw);
        if (opts.noise_bound > 0.0)
            for (Eigen::Index i = 0; i < 4; ++i) x(i) += rng.uniform(-opts.noise_bound, opts.noise_bound);
        out.push_back(x);
    }
    return out;
}

std::size_t count_large_angle_inputs(const std::vector<double>& inputs) {
    std::size_t n = 0;
    for (double u : inputs)
        if (std::abs(u) > kSmallAngleLimitRad) ++n;
    return n;
}

}  // namespace securelat::plant
