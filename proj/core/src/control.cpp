#include "securelat/control.hpp"

#include <cmath>
#include <sstream>

namespace securelat::control {

namespace {

void require_spd(const Mat& m, const char* what) {
    if (m.rows() != m.cols() || m.rows() == 0) throw InvalidArgument(std::string(what) + " must be square");
    if (!linalg::is_symmetric(m, 1e-12 * std::max(1.0, m.cwiseAbs().maxCoeff())))
        throw InvalidArgument(std::string(what) + " must be symmetric");
    Eigen::LLT<Mat> llt(m);
    if (llt.info() != Eigen::Success) throw InvalidArgument(std::string(what) + " must be positive definite");
}

}  // namespace

void SlidingConfig::validate() const {
    require_spd(weight_Q, "SlidingConfig.weight_Q");
    require_spd(weight_R, "SlidingConfig.weight_R");
    if (riccati_P.size() != 0) require_spd(riccati_P, "SlidingConfig.riccati_P");
    if (!(frac_order_gamma > 0.0 && frac_order_gamma <= 1.0)) throw InvalidArgument("SlidingConfig: gamma must lie in (0, 1]");
    if (!(frac_weight_lambda >= 0.0)) throw InvalidArgument("SlidingConfig: lambda must be >= 0");
    if (!(switch_kappa > 0.0 && switch_kappa < 1.0)) throw InvalidArgument("SlidingConfig: kappa must lie in (0, 1)");
    if (!(switch_rho > 0.0 && switch_rho < 1.0)) throw InvalidArgument("SlidingConfig: rho must lie in (0, 1)");
    if (!(attack_bound_Qatt >= 0.0)) throw InvalidArgument("SlidingConfig: attack bound must be >= 0");
    if (memory_len_L < 1) throw InvalidArgument("SlidingConfig: memory length must be >= 1");
    if (!(sample_period_s > 0.0)) throw InvalidArgument("SlidingConfig: sample period must be > 0");
    if (!(boundary_phi >= 0.0)) throw InvalidArgument("SlidingConfig: boundary layer must be >= 0");
}

double riccati_residual(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, const Mat& P) {
    const Mat BtPA = B.transpose() * P * A;
    const Mat S = R + B.transpose() * P * B;
    return (P - A.transpose() * P * A + BtPA.transpose() * S.ldlt().solve(BtPA) - Q).norm();
}

RiccatiResult riccati_solve(const Mat& A, const Mat& B, const Mat& Q, const Mat& R, double tol, int max_iter) {
    const Eigen::Index n = A.rows();
    if (A.cols() != n || B.rows() != n || Q.rows() != n || R.rows() != B.cols())
        throw InvalidArgument("riccati_solve: dimension mismatch");
    require_spd(Q, "riccati_solve: Q");
    require_spd(R, "riccati_solve: R");
    if (!(tol > 0.0) || max_iter < 1) throw InvalidArgument("riccati_solve: tol and max_iter must be positive");

    RiccatiResult out;
    Mat P = Q;
    for (int it = 1; it <= max_iter; ++it) {
        const Mat BtPA = B.transpose() * P * A;
        const Mat S = R + B.transpose() * P * B;
        Mat next = A.transpose() * P * A - BtPA.transpose() * S.ldlt().solve(BtPA) + Q;
        next = 0.5 * (next + next.transpose());
        if (!next.allFinite()) throw NumericalError("riccati_solve: iteration diverged");
        const double diff = (next - P).norm();
        P = std::move(next);
        if (diff < tol) {
            out.P = P;
            out.iterations = it;
            out.residual = riccati_residual(A, B, Q, R, P);
            return out;
        }
    }
    std::ostringstream msg;
    msg << "riccati_solve: no convergence within " << max_iter << " iterations";
    throw NumericalError(msg.str());
}

SlidingConfig make_sliding_config(const Mat& A, const Mat& B, SlidingConfig base) {
    base.validate();
    if (B.cols() != 1) throw InvalidArgument("make_sliding_config: the sliding surface needs a single input");
    base.riccati_P = riccati_solve(A, B, base.weight_Q, base.weight_R).P;
    base.surface_row_F = B.transpose() * base.riccati_P;
    base.FB = (base.surface_row_F * B)(0, 0);
    return base;
}

std::vector<double> gl_weights(double gamma, std::size_t count) {
    std::vector<double> w(count);
    if (count == 0) return w;
    w[0] = 1.0;
    for (std::size_t j = 1; j < count; ++j) w[j] = w[j - 1] * (1.0 - (gamma + 1.0) / static_cast<double>(j));
    return w;
}

double gl_derivative(const std::vector<double>& history, double gamma, double ell, std::size_t memory_len) {
    if (!(gamma > 0.0 && gamma <= 1.0)) throw InvalidArgument("gl_derivative: gamma must lie in (0, 1]");
    if (!(ell > 0.0)) throw InvalidArgument("gl_derivative: ell must be > 0");
    if (history.empty()) throw InvalidArgument("gl_derivative: empty history");
    const std::size_t terms = std::min(history.size(), memory_len);
    double acc = 0.0, w = 1.0;
    const std::size_t k = history.size() - 1;
    for (std::size_t j = 0; j < terms; ++j) {
        if (j > 0) w *= 1.0 - (gamma + 1.0) / static_cast<double>(j);
        acc += w * history[k - j];
    }
    return std::pow(ell, -gamma) * acc;
}

double sgn(double s, double phi) {
    if (phi > 0.0) return s / (std::abs(s) + phi);
    return static_cast<double>((s > 0.0) - (s < 0.0));
}

SlidingState::SlidingState(const SlidingConfig& cfg, const Vec& x0) {
    cfg.validate();
    if (cfg.surface_row_F.size() != x0.size()) throw InvalidArgument("SlidingState: surface row not designed for this state");
    weights_ = gl_weights(cfg.frac_order_gamma, static_cast<std::size_t>(cfg.memory_len_L));
    if (cfg.surface_init == SurfaceInit::ZeroSurface) {
        const double scale = 1.0 + cfg.frac_weight_lambda * std::pow(cfg.sample_period_s, -cfg.frac_order_gamma);
        eps_ = -cfg.surface_row_F.dot(x0) / scale;
    }
}

double SlidingState::step(const SlidingConfig& cfg, const Vec& x, const Mat& A, const Mat& B, const RowVec& K) {
    history_.push_back(eps_);
    if (history_.size() > static_cast<std::size_t>(cfg.memory_len_L)) history_.pop_front();

    double frac = 0.0;
    const std::size_t n = history_.size();
    for (std::size_t j = 0; j < n; ++j) frac += weights_[j] * history_[n - 1 - j];
    frac *= std::pow(cfg.sample_period_s, -cfg.frac_order_gamma);

    const double S = cfg.surface_row_F.dot(x) + eps_ + cfg.frac_weight_lambda * frac;
    surface_.push_back(S);

    const Mat closed = A + B * K;
    eps_ += cfg.surface_row_F.dot(x) - (cfg.surface_row_F * closed).dot(x);
    return S;
}

double sliding_surface_step(const SlidingConfig& cfg, const Vec& state, SlidingState& sl, const Mat& A, const Mat& B,
                            const RowVec& gain_K) {
    return sl.step(cfg, state, A, B, gain_K);
}

double equivalent_control(const RowVec& K, const Vec& last_sent, double S, double kappa, double phi) {
    return -kappa * sgn(S, phi) + K.dot(last_sent);
}

namespace {

double reaching_term(const SlidingConfig& cfg, double S) {
    if (cfg.FB == 0.0) throw InvalidArgument("switching term: FB = 0, the surface does not see the input");
    return -(cfg.switch_rho + cfg.attack_bound_Qatt * std::abs(cfg.FB)) / cfg.FB * sgn(S, cfg.boundary_phi);
}

}  // namespace

double switching_control(const SlidingConfig& cfg, double S) {
    return -cfg.switch_kappa * sgn(S, cfg.boundary_phi) + reaching_term(cfg, S);
}

double composite_control(const SlidingConfig& cfg, const RowVec& K, const Vec& last_sent, double S) {
    return K.dot(last_sent) - cfg.switch_kappa * sgn(S, cfg.boundary_phi) + reaching_term(cfg, S);
}

double composite_control(const SlidingConfig& cfg, const Mat& Y, const Mat& E, const Vec& last_sent, double S) {
    Eigen::FullPivLU<Mat> lu(E);
    if (E.rows() != E.cols() || !lu.isInvertible()) throw InvalidArgument("composite_control: E is singular");
    const RowVec K = (Y * lu.inverse()).row(0);
    return composite_control(cfg, K, last_sent, S);
}

SecureDomain secure_domain(const SlidingConfig& cfg) {
    if (!(cfg.switch_kappa < 1.0)) throw InvalidArgument("secure_domain: kappa must be < 1");
    return {(cfg.switch_rho + 2.0 * cfg.attack_bound_Qatt * std::abs(cfg.FB)) / (1.0 - cfg.switch_kappa)};
}

SmcLyapunovReport lyapunov_smc_diagnostic(const std::vector<double>& S, double band, std::size_t start) {
    SmcLyapunovReport r;
    if (S.size() < 2) return r;
    r.delta_V.reserve(S.size() - 1);
    for (std::size_t k = 0; k + 1 < S.size(); ++k) {
        const double dv = S[k] * (S[k + 1] - S[k]);
        r.delta_V.push_back(dv);
        if (k < start || std::abs(S[k]) <= band) continue;
        ++r.considered;
        if (dv <= 0.0) ++r.nonpositive;
        if (dv < 0.0) ++r.negative;
    }
    return r;
}

}  // namespace securelat::control
