#pragma once

#include "securelat/linalg.hpp"

#include <cmath>
#include <deque>
#include <vector>

namespace securelat::control {

enum class SurfaceInit {
    ZeroEps,      // eps(0) = 0, so S(0) = F x(0)
    ZeroSurface,  // eps(0) chosen so that S(0) = 0
};

struct SlidingConfig {
    RowVec surface_row_F;  // B' P
    Mat riccati_P;
    Mat weight_Q = Eigen::Vector4d(10.0, 1.0, 10.0, 1.0).asDiagonal();
    Mat weight_R = Mat::Identity(1, 1);
    double frac_order_gamma = 0.5;
    double frac_weight_lambda = 0.2;
    double switch_kappa = 0.15;
    double switch_rho = 0.2;
    double attack_bound_Qatt = 0.15;
    int memory_len_L = 500;
    double sample_period_s = 0.01;
    /// Boundary-layer width for sgn(S) ~ S / (|S| + phi); 0 keeps the discontinuous law.
    double boundary_phi = 0.0;
    SurfaceInit surface_init = SurfaceInit::ZeroEps;
    /// F B, cached by make_sliding_config.
    double FB = 0.0;

    void validate() const;
};

struct RiccatiResult {
    Mat P;
    int iterations = 0;
    double residual = 0.0;
};

/// Fixed-point iteration of the discrete Riccati map from P0 = Q.
RiccatiResult riccati_solve(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, double tol = 1e-12,
                            int max_iter = 1000000);

/// ||P - A'PA + A'PB (R + B'PB)^-1 B'PA - Q||_F
double riccati_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& P);

/// Solves the Riccati equation and fills P, F = B'P and FB into a copy of `base`.
SlidingConfig make_sliding_config(const Mat& A, const Mat& B, SlidingConfig base);

/// w_0 = 1, w_j = w_{j-1} (1 - (gamma + 1) / j).
std::vector<double> gl_weights(double gamma, std::size_t count);

/// ell^-gamma * sum_{j < min(len, memory)} w_j h[k - j], with h[k] the last element.
double gl_derivative(const std::vector<double>& history, double gamma, double ell, std::size_t memory_len);

/// sgn with sgn(0) = 0, or the boundary-layer approximation when phi > 0.
double sgn(double s, double phi = 0.0);

class SlidingState {
public:
    /// Sets eps(0) according to cfg.surface_init.
    SlidingState(const SlidingConfig& cfg, const Vec& initial_state);

    double eps_current() const { return eps_; }
    const std::deque<double>& eps_history() const { return history_; }
    const std::vector<double>& surface_S() const { return surface_; }

    /// Pushes eps(k) into the memory, evaluates S(k), then advances eps to k+1.
    double step(const SlidingConfig& cfg, const Vec& state, const Mat& A, const Mat& B, const RowVec& gain_K);

private:
    double eps_ = 0.0;
    std::deque<double> history_;
    std::vector<double> surface_;
    std::vector<double> weights_;
};

/// Free-function form of SlidingState::step.
double sliding_surface_step(const SlidingConfig& cfg, const Vec& state, SlidingState& sl, const Mat& A, const Mat& B,
                            const RowVec& gain_K);

/// -kappa sgn(S) + K x(k_s)
double equivalent_control(const RowVec& gain_K, const Vec& last_sent, double S, double kappa, double phi = 0.0);

/// -kappa sgn(S) - (FB)^-1 (rho + Q_att |FB|) sgn(S)
double switching_control(const SlidingConfig& cfg, double S);

/// Y E^-1 x(k_s) - kappa sgn(S) - (FB)^-1 (rho + Q_att |FB|) sgn(S)
double composite_control(const SlidingConfig& cfg, const Mat& Y, const Mat& E, const Vec& last_sent, double S);

/// Same law with the gain already formed.
double composite_control(const SlidingConfig& cfg, const RowVec& gain_K, const Vec& last_sent, double S);

struct SecureDomain {
    double level_xi = 0.0;
    bool contains(double S) const { return std::abs(S) <= level_xi; }
};

/// xi = (rho + 2 Q_att |FB|) / (1 - kappa)
SecureDomain secure_domain(const SlidingConfig& cfg);

struct SmcLyapunovReport {
    std::vector<double> delta_V;  // S(k) (S(k+1) - S(k))
    std::size_t considered = 0;   // steps past the transient with |S| above the band
    std::size_t nonpositive = 0;
    std::size_t negative = 0;

    double fraction_nonpositive() const { return considered ? static_cast<double>(nonpositive) / considered : 1.0; }
    double fraction_negative() const { return considered ? static_cast<double>(negative) / considered : 1.0; }
};

SmcLyapunovReport lyapunov_smc_diagnostic(const std::vector<double>& S, double band = 0.0, std::size_t start = 0);

}  // namespace securelat::control
