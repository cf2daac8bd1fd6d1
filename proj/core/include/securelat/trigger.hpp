#pragma once

#include "securelat/linalg.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace securelat::trigger {

struct TriggerConfig {
    Mat weight_Upsilon = Mat::Identity(4, 4);
    double sensitivity_mu = 0.2;

    void validate() const;
};

struct EventRecord {
    long step = 0;
    long interval = 0;  // steps since the previous event; 0 for the first
};

struct TriggerState {
    Vec last_sent_state = Vec::Zero(4);
    long last_sent_step = -1;
    std::vector<EventRecord> event_log;

    bool has_sent() const { return last_sent_step >= 0; }
    /// Stores `current` as the transmitted state and appends to the event log.
    void record_event(const Vec& current, long step);
};

/// (x - xs)' U (x - xs) >= mu xs' U xs with a nonzero error. Always true before the first transmission.
bool should_trigger(const Vec& current, const TriggerConfig& cfg, const TriggerState& st);

Vec inter_event_error(const Vec& current, const TriggerState& st);

struct DelayModel {
    int max_delay_steps = 0;
    /// Explicit per-event delays, cycled. Ignored when `random` is set.
    std::vector<int> per_event_delay;
    bool random = false;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Draws per-event delays from a DelayModel; every value lies in [0, max_delay_steps].
class DelaySource {
public:
    explicit DelaySource(DelayModel model);
    int next();

private:
    DelayModel model_;
    Rng rng_;
    std::size_t index_ = 0;
};

enum class DelayRegime { CaseA, CaseB_Lambda1, CaseB_Lambda2, CaseB_Lambda3 };

enum class ErrorRule {
    Zero,     // e(k) = 0
    Shifted,  // e(k) = x(k_s) - x(k_s + error_offset)
};

struct ArtificialDelay {
    int delay_steps = 0;
    DelayRegime regime = DelayRegime::CaseA;
    ErrorRule error_rule = ErrorRule::Zero;
    long error_offset = 0;  // l in the second window family, d in the last
    long d = 0;             // Case B window count; 0 in Case A
};

const char* to_string(DelayRegime r);

/// Classifies k in [k_s + delta_s, k_next + delta_next - 1] into the delay regimes.
ArtificialDelay artificial_delay(long k_s, long k_next, int delta_s, int delta_next, int delta_bar, long k);

struct DiagnosticStep {
    Vec error;          // e(k)
    Vec reference;      // state the bound is taken against
    bool triggered = false;
};

struct Theorem1Report {
    std::size_t checked_steps = 0;
    std::vector<std::size_t> violations;
    /// e'Ue / (mu x'Ux) per step; NaN where the right-hand side is zero.
    std::vector<double> ratio;
    /// e'Ue per step, reported as the decay curve.
    std::vector<double> error_energy;

    bool ok() const { return violations.empty(); }
};

/// Checks e' U e <= mu x' U x on every step that did not fire the trigger.
Theorem1Report theorem1_diagnostic(const std::vector<DiagnosticStep>& trace, const TriggerConfig& cfg);

}  // namespace securelat::trigger
