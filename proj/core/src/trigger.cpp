#include "securelat/trigger.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace securelat::trigger {

void TriggerConfig::validate() const {
    if (weight_Upsilon.rows() != weight_Upsilon.cols() || weight_Upsilon.rows() == 0)
        throw InvalidArgument("TriggerConfig: weight must be square and non-empty");
    if (!linalg::is_symmetric(weight_Upsilon, 1e-12)) throw InvalidArgument("TriggerConfig: weight must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(weight_Upsilon, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() <= 0.0) throw InvalidArgument("TriggerConfig: weight must be positive definite");
    if (!(sensitivity_mu >= 0.0 && sensitivity_mu <= 1.0))
        throw InvalidArgument("TriggerConfig: sensitivity mu must lie in [0, 1]");
}

void TriggerState::record_event(const Vec& current, long step) {
    if (!event_log.empty() && step <= event_log.back().step)
        throw InvalidArgument("TriggerState: event steps must be strictly increasing");
    const long interval = event_log.empty() ? 0 : step - event_log.back().step;
    event_log.push_back({step, interval});
    last_sent_state = current;
    last_sent_step = step;
}

bool should_trigger(const Vec& current, const TriggerConfig& cfg, const TriggerState& st) {
    if (!st.has_sent()) return true;
    const Vec e = current - st.last_sent_state;
    const double lhs = e.dot(cfg.weight_Upsilon * e);
    const double rhs = cfg.sensitivity_mu * st.last_sent_state.dot(cfg.weight_Upsilon * st.last_sent_state);
    // A zero error carries no new information, so it never fires (keeps a resting loop silent).
    return lhs > 0.0 && lhs >= rhs;
}

Vec inter_event_error(const Vec& current, const TriggerState& st) { return current - st.last_sent_state; }

void DelayModel::validate() const {
    if (max_delay_steps < 0) throw InvalidArgument("DelayModel: max delay must be >= 0");
    for (int d : per_event_delay)
        if (d < 0 || d > max_delay_steps)
            throw InvalidArgument("DelayModel: delay " + std::to_string(d) + " outside [0, " +
                                  std::to_string(max_delay_steps) + "]");
}

DelaySource::DelaySource(DelayModel model) : model_(std::move(model)), rng_(model_.seed) { model_.validate(); }

int DelaySource::next() {
    if (model_.random) return static_cast<int>(rng_.uniform_int(static_cast<std::uint64_t>(model_.max_delay_steps)));
    if (model_.per_event_delay.empty()) return 0;
    const int d = model_.per_event_delay[index_ % model_.per_event_delay.size()];
    ++index_;
    return d;
}

const char* to_string(DelayRegime r) {
    switch (r) {
        case DelayRegime::CaseA: return "CaseA";
        case DelayRegime::CaseB_Lambda1: return "CaseB-Lambda1";
        case DelayRegime::CaseB_Lambda2: return "CaseB-Lambda2";
        case DelayRegime::CaseB_Lambda3: return "CaseB-Lambda3";
    }
    return "unknown";
}

ArtificialDelay artificial_delay(long k_s, long k_next, int delta_s, int delta_next, int delta_bar, long k) {
    if (delta_bar < 0 || delta_s < 0 || delta_next < 0 || delta_s > delta_bar || delta_next > delta_bar)
        throw InvalidArgument("artificial_delay: delays must lie in [0, delta_bar]");
    if (k_next <= k_s) throw InvalidArgument("artificial_delay: event instants must increase");
    const long lo = k_s + delta_s;
    const long hi = k_next + delta_next - 1;
    if (k < lo || k > hi)
        throw InvalidArgument("artificial_delay: k = " + std::to_string(k) + " outside [" + std::to_string(lo) + ", " +
                              std::to_string(hi) + "]");

    ArtificialDelay out;
    if (k_s + delta_bar + 1 >= hi) {
        out.regime = DelayRegime::CaseA;
        out.delay_steps = static_cast<int>(k - k_s);
        return out;
    }

    // Windows [k_s+db+l, k_s+db+l+1] for l = 1..d-1, then [k_s+db+d, hi] with two samples.
    const long d = hi - 1 - k_s - delta_bar;
    out.d = d;
    if (k <= k_s + delta_bar + 1) {
        out.regime = DelayRegime::CaseB_Lambda1;
        out.delay_steps = static_cast<int>(k - k_s);
    } else if (k >= k_s + delta_bar + d) {
        out.regime = DelayRegime::CaseB_Lambda3;
        out.delay_steps = static_cast<int>(k - k_s - d);
        out.error_rule = ErrorRule::Shifted;
        out.error_offset = d;
    } else {
        const long l = k - k_s - delta_bar;
        out.regime = DelayRegime::CaseB_Lambda2;
        out.delay_steps = static_cast<int>(k - k_s - l);
        out.error_rule = ErrorRule::Shifted;
        out.error_offset = l;
    }
    return out;
}

Theorem1Report theorem1_diagnostic(const std::vector<DiagnosticStep>& trace, const TriggerConfig& cfg) {
    Theorem1Report r;
    r.ratio.reserve(trace.size());
    r.error_energy.reserve(trace.size());
    const Mat& U = cfg.weight_Upsilon;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const auto& s = trace[k];
        const double lhs = s.error.dot(U * s.error);
        const double rhs = cfg.sensitivity_mu * s.reference.dot(U * s.reference);
        r.error_energy.push_back(lhs);
        r.ratio.push_back(rhs > 0.0 ? lhs / rhs : std::numeric_limits<double>::quiet_NaN());
        if (s.triggered) continue;
        ++r.checked_steps;
        if (lhs > rhs) r.violations.push_back(k);
    }
    return r;
}

}  // namespace securelat::trigger
