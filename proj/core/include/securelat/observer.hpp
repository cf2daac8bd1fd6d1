#pragma once

#include "securelat/linalg.hpp"
#include "securelat/sysid.hpp"

#include <string>
#include <vector>

namespace securelat::observer {

enum class AttackKind { None, Sinusoid, Constant, CustomSequence };

const char* to_string(AttackKind k);
AttackKind attack_kind_from_string(const std::string& s);

struct AttackModel {
    AttackKind kind = AttackKind::Sinusoid;
    double amplitude = 0.15;
    double freq_hz = 0.5;
    double start_time_s = 10.0;
    double bound_Qatt = 0.15;
    /// When set, the slow-variation bound and amplitude limits are enforced instead of only warned about.
    bool assumption_compliance = false;
    /// Values for CustomSequence, one per `custom_dt_s` starting at start_time_s.
    std::vector<double> custom_values;
    double custom_dt_s = 0.01;

    /// Throws on hard violations; returns human-readable warnings otherwise.
    std::vector<std::string> validate() const;
};

struct Augmented {
    Mat A_aug;  // [[A, B], [0, I]]
    Mat B_aug;  // [B; 0]
    Mat C_aug;  // [C, 0]
};

/// Augments (A, B) with a constant-attack state; C defaults to full state measurement.
Augmented augment(const Mat& A, const Mat& B, const Mat& C);
Augmented augment(const sysid::IdentifiedModel& model);

/// Rank of the observability matrix of (A, C).
Eigen::Index observability_rank(const Mat& A, const Mat& C);

/// Gain L with spectral radius of (A - L C) <= target_radius, by eigenstructure assignment on the dual pair.
/// Poles are placed at target * (N - i) / N for i = 0..N-1.
Mat design_gain(const Mat& A_aug, const Mat& C_aug, double target_radius);

struct EsoState {
    Vec est_state;   // state estimate
    Vec est_attack;  // attack estimate
    Mat gain_L;
    Mat out_map_C;

    Vec stacked() const;
};

/// Initial ESO state with a designed gain.
EsoState make_eso(const Augmented& aug, const Vec& initial_state_estimate, double target_radius);

/// zeta(k+1) = A_aug zeta + B_aug u + L (y - C_aug zeta).
EsoState eso_step(const EsoState& eso, const Vec& measurement, const Vec& applied_input, const Augmented& aug);

/// u - alpha_hat.
Vec compensate(const Vec& control_nominal, const Vec& est_attack);
double compensate(double control_nominal, double est_attack);

/// Flags an attack once |alpha_hat| exceeds threshold for `persistence` consecutive steps.
class AttackDetector {
public:
    AttackDetector(double threshold, int persistence) : threshold_(threshold), persistence_(persistence) {}
    static AttackDetector for_bound(double bound_Qatt) { return AttackDetector(0.3 * bound_Qatt, 5); }

    /// Returns the flag after consuming one estimate.
    bool update(double alpha_hat);
    bool flagged() const { return run_ >= persistence_; }
    double threshold() const { return threshold_; }

private:
    double threshold_;
    int persistence_;
    int run_ = 0;
};

}  // namespace securelat::observer
