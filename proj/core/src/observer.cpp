#include "securelat/observer.hpp"

#include <cmath>
#include <sstream>

namespace securelat::observer {

const char* to_string(AttackKind k) {
    switch (k) {
        case AttackKind::None: return "none";
        case AttackKind::Sinusoid: return "sinusoid";
        case AttackKind::Constant: return "constant";
        case AttackKind::CustomSequence: return "custom";
    }
    return "unknown";
}

AttackKind attack_kind_from_string(const std::string& s) {
    if (s == "none") return AttackKind::None;
    if (s == "sinusoid") return AttackKind::Sinusoid;
    if (s == "constant") return AttackKind::Constant;
    if (s == "custom" || s == "custom-sequence") return AttackKind::CustomSequence;
    throw InvalidArgument("unknown attack kind '" + s + "'");
}

std::vector<std::string> AttackModel::validate() const {
    std::vector<std::string> warnings;
    if (!std::isfinite(amplitude) || !std::isfinite(freq_hz) || !std::isfinite(start_time_s) || !std::isfinite(bound_Qatt))
        throw InvalidArgument("AttackModel: non-finite parameter");
    if (bound_Qatt < 0.0) throw InvalidArgument("AttackModel: bound must be >= 0");
    if (kind == AttackKind::CustomSequence && !(custom_dt_s > 0.0))
        throw InvalidArgument("AttackModel: custom sequence step must be > 0");

    auto issue = [&](const std::string& msg) {
        if (assumption_compliance) throw InvalidArgument("AttackModel: " + msg);
        warnings.push_back(msg);
    };
    if (bound_Qatt < 0.05 || bound_Qatt > 0.2) issue("attack bound outside [0.05, 0.2]");
    if ((kind == AttackKind::Sinusoid || kind == AttackKind::Constant) && std::abs(amplitude) > bound_Qatt)
        issue("attack amplitude exceeds the bound");
    if (kind == AttackKind::CustomSequence)
        for (double v : custom_values)
            if (std::abs(v) > bound_Qatt) {
                issue("custom attack value exceeds the bound");
                break;
            }
    return warnings;
}

Augmented augment(const Mat& A, const Mat& B, const Mat& C) {
    const Eigen::Index n = A.rows(), p = B.cols();
    if (A.cols() != n || B.rows() != n || C.cols() != n) throw InvalidArgument("augment: dimension mismatch");
    Augmented out;
    out.A_aug = Mat::Zero(n + p, n + p);
    out.A_aug.topLeftCorner(n, n) = A;
    out.A_aug.topRightCorner(n, p) = B;
    out.A_aug.bottomRightCorner(p, p).setIdentity();
    out.B_aug = Mat::Zero(n + p, p);
    out.B_aug.topRows(n) = B;
    out.C_aug = Mat::Zero(C.rows(), n + p);
    out.C_aug.leftCols(n) = C;
    return out;
}

Augmented augment(const sysid::IdentifiedModel& model) {
    return augment(model.mat_A, model.mat_B, Mat::Identity(model.mat_A.rows(), model.mat_A.rows()));
}

Eigen::Index observability_rank(const Mat& A, const Mat& C) {
    const Eigen::Index n = A.rows();
    Mat obs(C.rows() * n, n);
    Mat block = C;
    for (Eigen::Index i = 0; i < n; ++i) {
        obs.middleRows(i * C.rows(), C.rows()) = block;
        block = block * A;
    }
    return linalg::numerical_rank(obs);
}

Mat design_gain(const Mat& A_aug, const Mat& C_aug, double target_radius) {
    const Eigen::Index n = A_aug.rows(), q = C_aug.rows();
    if (A_aug.cols() != n || C_aug.cols() != n || q == 0) throw InvalidArgument("design_gain: dimension mismatch");
    if (!(target_radius > 0.0 && target_radius < 1.0)) throw InvalidArgument("design_gain: target radius must be in (0, 1)");
    if (observability_rank(A_aug, C_aug) < n) throw InvalidArgument("design_gain: pair is not observable");

    // Dual problem: find K with eig(A' - C' K) at the requested poles, then L = K'.
    const Mat At = A_aug.transpose();
    const Mat Ct = C_aug.transpose();
    Mat V(n, n), W(q, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double pole = target_radius * static_cast<double>(n - i) / static_cast<double>(n);
        Mat M(n, n + q);
        M.leftCols(n) = At - pole * Mat::Identity(n, n);
        M.rightCols(q) = -Ct;
        Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
        const Eigen::Index rank = linalg::numerical_rank(M);
        const Mat null = svd.matrixV().rightCols(n + q - rank);
        Mat vpart = null.topRows(n);
        // Pick the null-space direction whose state part is most orthogonal to earlier eigenvectors.
        if (i > 0) {
            Eigen::HouseholderQR<Mat> qr(V.leftCols(i));
            const Mat Q = qr.householderQ() * Mat::Identity(n, i);
            vpart = vpart - Q * (Q.transpose() * vpart);
        }
        Eigen::JacobiSVD<Mat> pick(vpart, Eigen::ComputeFullV);
        const Vec z = null * pick.matrixV().col(0);
        const double nv = z.head(n).norm();
        if (nv < 1e-12) throw NumericalError("design_gain: degenerate eigenvector");
        V.col(i) = z.head(n) / nv;
        W.col(i) = z.tail(q) / nv;
    }
    Eigen::FullPivLU<Mat> lu(V);
    if (!lu.isInvertible()) throw NumericalError("design_gain: eigenvector matrix is singular");
    const Mat L = (W * lu.inverse()).transpose();

    const double radius = linalg::spectral_radius(A_aug - L * C_aug);
    if (radius > target_radius * (1.0 + 1e-9)) {
        std::ostringstream msg;
        msg << "design_gain: achieved spectral radius " << radius << " exceeds target " << target_radius;
        throw NumericalError(msg.str());
    }
    return L;
}

Vec EsoState::stacked() const {
    Vec z(est_state.size() + est_attack.size());
    z << est_state, est_attack;
    return z;
}

EsoState make_eso(const Augmented& aug, const Vec& initial_state_estimate, double target_radius) {
    const Eigen::Index n = aug.C_aug.cols() - aug.B_aug.cols();
    if (initial_state_estimate.size() != n) throw InvalidArgument("make_eso: initial estimate has wrong size");
    EsoState e;
    e.est_state = initial_state_estimate;
    e.est_attack = Vec::Zero(aug.B_aug.cols());
    e.gain_L = design_gain(aug.A_aug, aug.C_aug, target_radius);
    e.out_map_C = aug.C_aug.leftCols(n);
    return e;
}

EsoState eso_step(const EsoState& eso, const Vec& y, const Vec& u, const Augmented& aug) {
    const Vec z = eso.stacked();
    if (y.size() != aug.C_aug.rows() || u.size() != aug.B_aug.cols()) throw InvalidArgument("eso_step: dimension mismatch");
    const Vec next = aug.A_aug * z + aug.B_aug * u + eso.gain_L * (y - aug.C_aug * z);
    EsoState out = eso;
    const Eigen::Index n = eso.est_state.size();
    out.est_state = next.head(n);
    out.est_attack = next.tail(next.size() - n);
    return out;
}

Vec compensate(const Vec& control_nominal, const Vec& est_attack) { return control_nominal - est_attack; }
double compensate(double control_nominal, double est_attack) { return control_nominal - est_attack; }

bool AttackDetector::update(double alpha_hat) {
    if (std::abs(alpha_hat) > threshold_) {
        if (run_ < persistence_) ++run_;
    } else {
        run_ = 0;
    }
    return flagged();
}

}  // namespace securelat::observer
