#pragma once

#include "securelat/control.hpp"
#include "securelat/linalg.hpp"
#include "securelat/observer.hpp"
#include "securelat/plant.hpp"
#include "securelat/sysid.hpp"
#include "securelat/trigger.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace securelat::sim {

enum class CaseId { I, II, III };

/// "case1", "case2", "case3"
std::string case_name(CaseId c);
CaseId case_from_string(const std::string& s);

enum class PlantMode { Discrete, Continuous };

struct ScenarioConfig {
    CaseId case_id = CaseId::I;
    double duration_s = 20.0;
    double dt_s = 0.01;
    Vec initial_state = Eigen::Vector4d(0.5, 0.0, 0.5, 0.0);
    sysid::IdentifiedModel model = sysid::reference_model();
    RowVec gain_K = Eigen::RowVector4d(-0.5, -0.6, -0.5, -0.4);
    trigger::TriggerConfig trigger_cfg;
    /// Surface row, P and FB are designed from `model` at run time.
    control::SlidingConfig sliding_cfg;
    observer::AttackModel attack;
    trigger::DelayModel delay;
    std::uint64_t seed = 0;

    double observer_target_radius = 0.9;
    PlantMode plant_mode = PlantMode::Discrete;
    plant::VehicleParams vehicle;
    /// Case III only: cancel the true attack instead of the estimate.
    bool oracle_compensation = false;
    /// Weights used for the logged Lyapunov-Krasovskii value; empty means Riccati P and identities.
    Mat lkf_P, lkf_R, lkf_T;

    /// Throws InvalidArgument on inconsistent settings.
    void validate() const;
};

/// Reference scenario defaults for one case (delay 10 steps bound, zero per-event delay).
ScenarioConfig reference_scenario(CaseId c);

struct StepRecord {
    double t = 0.0;
    Eigen::Vector4d state = Eigen::Vector4d::Zero();
    double u_applied = 0.0;  // controller output before the attack is added
    double alpha_att = 0.0;
    double alpha_hat = 0.0;
    double S = 0.0;
    bool triggered = false;
    int delay_steps = 0;  // age of the state held by the controller
    Eigen::Vector4d trigger_error = Eigen::Vector4d::Zero();
    Eigen::Vector4d trigger_reference = Eigen::Vector4d::Zero();
    double V_lkf = 0.0;
};

struct RunTrace {
    CaseId case_id = CaseId::I;
    double dt_s = 0.01;
    double duration_s = 0.0;
    std::vector<StepRecord> records;
    std::vector<trigger::EventRecord> event_log;
    double attack_start_s = 0.0;
    bool attack_active = false;
    double attack_bound = 0.0;
    double xi = 0.0;
    double FB = 0.0;
    Mat closed_loop;  // A + B K of the controller model
    trigger::TriggerConfig trigger_cfg;
    bool aborted = false;
    std::string abort_message;
};

/// Thrown on numerical blow-up; carries the partial trace.
class SimulationAborted : public NumericalError {
public:
    SimulationAborted(const std::string& msg, RunTrace partial)
        : NumericalError(msg), partial_(std::move(partial)) {}
    const RunTrace& partial() const { return partial_; }

private:
    RunTrace partial_;
};

inline constexpr double kBlowUpNorm = 1e6;

double attack_signal(const observer::AttackModel& attack, double t_s);

RunTrace run_scenario(const ScenarioConfig& cfg);

/// Runs independent scenarios concurrently; results are in input order.
std::vector<RunTrace> run_batch(const std::vector<ScenarioConfig>& cfgs);

struct MetricsReport {
    double lateral_rmse_m = 0.0;
    double heading_rmse_rad = 0.0;
    double max_lateral_m = 0.0;
    double max_heading_rad = 0.0;
    double settling_time_s = 0.0;
    double transmission_ratio_pct = 0.0;
    double avg_transmission_interval_s = 0.0;
    double mean_release_interval_s = 0.0;
    double bandwidth_utilization_pct = 0.0;
    std::optional<double> detection_time_s;
    std::optional<double> fp_rate_pct;
    std::optional<double> fn_rate_pct;
    std::optional<double> estimation_accuracy;
    std::optional<double> estimation_rmse;
    std::optional<double> compensation_effectiveness_pct;
    std::optional<double> residual_effect_pct;
    std::optional<double> observer_convergence_s;
    std::optional<double> max_estimation_error;
    double eig_max_magnitude = 0.0;
    double sliding_convergence_rate = 0.0;
    double sliding_max_deviation = 0.0;
    double stability_margin = 0.0;
};

inline constexpr double kSettlingBand = 0.02;
inline constexpr double kSlidingTransient_s = 2.0;

/// `baseline` is the uncompensated run used for the compensation metrics (Case III only).
MetricsReport compute_metrics(const RunTrace& trace, const RunTrace* baseline = nullptr);

/// Inter-event diagnostic over a finished run.
trigger::Theorem1Report trigger_diagnostic(const RunTrace& trace);

struct SecureDomainReport {
    std::optional<std::size_t> first_entry;
    std::vector<std::size_t> exits;  // steps with |S| > xi after the first entry
    bool ok() const { return exits.empty(); }
};

SecureDomainReport secure_domain_report(const RunTrace& trace);

std::vector<double> surface_series(const RunTrace& trace);

}  // namespace securelat::sim
