#include "securelat/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <future>
#include <numbers>
#include <sstream>

namespace securelat::sim {

std::string case_name(CaseId c) {
    switch (c) {
        case CaseId::I: return "case1";
        case CaseId::II: return "case2";
        case CaseId::III: return "case3";
    }
    return "unknown";
}

CaseId case_from_string(const std::string& s) {
    if (s == "case1" || s == "I" || s == "1") return CaseId::I;
    if (s == "case2" || s == "II" || s == "2") return CaseId::II;
    if (s == "case3" || s == "III" || s == "3") return CaseId::III;
    throw InvalidArgument("unknown scenario '" + s + "' (expected case1, case2, case3 or all)");
}

void ScenarioConfig::validate() const {
    if (!(dt_s > 0.0) || !std::isfinite(dt_s)) throw InvalidArgument("ScenarioConfig: dt must be > 0");
    if (!(duration_s >= 0.0) || !std::isfinite(duration_s)) throw InvalidArgument("ScenarioConfig: duration must be >= 0");
    const Eigen::Index n = model.mat_A.rows();
    if (n != 4 || model.mat_A.cols() != 4 || model.mat_B.rows() != 4 || model.mat_B.cols() != 1)
        throw InvalidArgument("ScenarioConfig: the closed loop needs a 4-state, single-input model");
    if (initial_state.size() != 4 || !initial_state.allFinite())
        throw InvalidArgument("ScenarioConfig: initial state must be a finite 4-vector");
    if (gain_K.size() != 4 || !gain_K.allFinite()) throw InvalidArgument("ScenarioConfig: gain K must be a finite 1x4 row");
    trigger_cfg.validate();
    if (trigger_cfg.weight_Upsilon.rows() != 4) throw InvalidArgument("ScenarioConfig: trigger weight must be 4x4");
    sliding_cfg.validate();
    delay.validate();
    attack.validate();
    if (!(observer_target_radius > 0.0 && observer_target_radius < 1.0))
        throw InvalidArgument("ScenarioConfig: observer target radius must lie in (0, 1)");
    if (plant_mode == PlantMode::Continuous) vehicle.validate();
    if (oracle_compensation && case_id != CaseId::III)
        throw InvalidArgument("ScenarioConfig: oracle compensation applies to case3 only");
}

ScenarioConfig reference_scenario(CaseId c) {
    ScenarioConfig cfg;
    cfg.case_id = c;
    cfg.delay.max_delay_steps = 10;
    if (c == CaseId::I) cfg.attack.kind = observer::AttackKind::None;
    return cfg;
}

double attack_signal(const observer::AttackModel& a, double t) {
    if (a.kind == observer::AttackKind::None || t < a.start_time_s) return 0.0;
    switch (a.kind) {
        case observer::AttackKind::Sinusoid: return a.amplitude * std::sin(2.0 * std::numbers::pi * a.freq_hz * t);
        case observer::AttackKind::Constant: return a.amplitude;
        case observer::AttackKind::CustomSequence: {
            const double idx = std::floor((t - a.start_time_s) / a.custom_dt_s + 0.5);
            if (idx < 0.0 || idx >= static_cast<double>(a.custom_values.size())) return 0.0;
            return a.custom_values[static_cast<std::size_t>(idx)];
        }
        case observer::AttackKind::None: break;
    }
    return 0.0;
}

namespace {

struct Packet {
    Vec state;
    long sent = 0;
    long arrival = 0;
};

class LkfAccumulator {
public:
    LkfAccumulator(Mat P, Mat R, Mat T, int delta_bar)
        : P_(std::move(P)), R_(std::move(R)), T_(std::move(T)), db_(delta_bar) {}

    /// Value at the newest stored state.
    double push(const Vec& x) {
        states_.push_back(x);
        const long k = static_cast<long>(states_.size()) - 1;
        double v = x.dot(P_ * x);
        for (long j = std::max(0L, k - db_); j <= k - 1; ++j) v += states_[j].dot(R_ * states_[j]);
        double v3 = 0.0;
        for (long s = -db_ + 1; s <= 0; ++s)
            for (long j = std::max(0L, k + s - 1); j <= k - 1; ++j) {
                const Vec z = states_[j + 1] - states_[j];
                v3 += z.dot(T_ * z);
            }
        return v + static_cast<double>(db_) * v3;
    }

private:
    Mat P_, R_, T_;
    long db_;
    std::vector<Vec> states_;
};

}  // namespace

RunTrace run_scenario(const ScenarioConfig& in) {
    in.validate();
    ScenarioConfig cfg = in;
    if (cfg.case_id == CaseId::I) cfg.attack.kind = observer::AttackKind::None;

    const Mat& A = cfg.model.mat_A;
    const Mat& B = cfg.model.mat_B;
    const RowVec& K = cfg.gain_K;
    cfg.sliding_cfg.sample_period_s = cfg.dt_s;
    const control::SlidingConfig sl_cfg = control::make_sliding_config(A, B, cfg.sliding_cfg);
    const double xi = control::secure_domain(sl_cfg).level_xi;

    const bool compensate = cfg.case_id != CaseId::II;
    const observer::Augmented aug = observer::augment(cfg.model);
    observer::EsoState eso = observer::make_eso(aug, cfg.initial_state, cfg.observer_target_radius);

    std::optional<plant::ContinuousModel> cont;
    if (cfg.plant_mode == PlantMode::Continuous) cont = plant::continuous_matrices(cfg.vehicle);

    const Mat lkfP = cfg.lkf_P.size() ? cfg.lkf_P : sl_cfg.riccati_P;
    const Mat lkfR = cfg.lkf_R.size() ? cfg.lkf_R : Mat::Identity(4, 4);
    const Mat lkfT = cfg.lkf_T.size() ? cfg.lkf_T : Mat::Identity(4, 4);
    LkfAccumulator lkf(lkfP, lkfR, lkfT, cfg.delay.max_delay_steps);

    trigger::DelayModel delay_model = cfg.delay;
    if (delay_model.random) delay_model.seed = cfg.seed;
    trigger::DelaySource delays(delay_model);

    RunTrace trace;
    trace.case_id = cfg.case_id;
    trace.dt_s = cfg.dt_s;
    trace.attack_start_s = cfg.attack.start_time_s;
    trace.attack_active = cfg.attack.kind != observer::AttackKind::None;
    trace.attack_bound = cfg.attack.bound_Qatt;
    trace.xi = xi;
    trace.FB = sl_cfg.FB;
    trace.closed_loop = A + B * K;
    trace.trigger_cfg = cfg.trigger_cfg;

    const long steps = static_cast<long>(std::llround(cfg.duration_s / cfg.dt_s)) + 1;
    trace.duration_s = static_cast<double>(steps - 1) * cfg.dt_s;
    trace.records.reserve(static_cast<std::size_t>(steps));

    control::SlidingState sliding(sl_cfg, cfg.initial_state);
    trigger::TriggerState tstate;
    std::deque<Packet> in_flight;
    long last_arrival = -1;
    Vec held = Vec::Zero(4);
    long held_step = -1;

    Vec x = cfg.initial_state;
    for (long k = 0; k < steps; ++k) {
        const double t = static_cast<double>(k) * cfg.dt_s;
        StepRecord rec;
        rec.t = t;
        rec.state = x;

        rec.triggered = trigger::should_trigger(x, cfg.trigger_cfg, tstate);
        if (rec.triggered) {
            tstate.record_event(x, k);
            const long arrival = std::max(k + delays.next(), last_arrival);
            last_arrival = arrival;
            in_flight.push_back({x, k, arrival});
        }
        rec.trigger_reference = tstate.last_sent_state;
        rec.trigger_error = trigger::inter_event_error(x, tstate);

        while (!in_flight.empty() && in_flight.front().arrival <= k) {
            held = in_flight.front().state;
            held_step = in_flight.front().sent;
            in_flight.pop_front();
        }
        rec.delay_steps = static_cast<int>(held_step >= 0 ? k - held_step : k + 1);

        rec.S = sliding.step(sl_cfg, x, A, B, K);

        const double alpha = attack_signal(cfg.attack, t);
        rec.alpha_att = alpha;
        rec.alpha_hat = eso.est_attack(0);

        double u = cfg.case_id == CaseId::II ? control::equivalent_control(K, held, rec.S, sl_cfg.switch_kappa,
                                                                           sl_cfg.boundary_phi)
                                             : control::composite_control(sl_cfg, K, held, rec.S);
        if (compensate) u = observer::compensate(u, cfg.oracle_compensation ? alpha : rec.alpha_hat);
        rec.u_applied = u;
        rec.V_lkf = lkf.push(x);
        trace.records.push_back(rec);

        if (compensate) eso = observer::eso_step(eso, x, Vec::Constant(1, u), aug);

        const double plant_input = u + alpha;
        if (cont)
            x = plant::step_continuous(*cont, x, plant_input, cfg.dt_s);
        else
            x = A * x + B * plant_input;

        if (!x.allFinite() || x.norm() > kBlowUpNorm) {
            trace.event_log = tstate.event_log;
            trace.aborted = true;
            std::ostringstream msg;
            msg << case_name(cfg.case_id) << ": state norm exceeded " << kBlowUpNorm << " at t = " << t + cfg.dt_s;
            trace.abort_message = msg.str();
            const std::string what = trace.abort_message;
            throw SimulationAborted(what, std::move(trace));
        }
    }
    trace.event_log = tstate.event_log;
    return trace;
}

std::vector<RunTrace> run_batch(const std::vector<ScenarioConfig>& cfgs) {
    std::vector<std::future<RunTrace>> futures;
    futures.reserve(cfgs.size());
    for (const auto& c : cfgs) futures.push_back(std::async(std::launch::async, [&c] { return run_scenario(c); }));
    std::vector<RunTrace> out;
    out.reserve(cfgs.size());
    for (auto& f : futures) out.push_back(f.get());
    return out;
}

namespace {

double rmse(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double acc = 0.0;
    for (double x : v) acc += x * x;
    return std::sqrt(acc / static_cast<double>(v.size()));
}

std::vector<double> column(const RunTrace& tr, Eigen::Index i) {
    std::vector<double> out;
    out.reserve(tr.records.size());
    for (const auto& r : tr.records) out.push_back(r.state(i));
    return out;
}

double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

/// Decay rate of the |S| envelope over the first seconds, from a log-linear fit of windowed maxima.
double envelope_decay_rate(const RunTrace& tr) {
    const double window = 0.5, horizon = 5.0;
    std::vector<double> ts, ls;
    for (double start = 0.0; start + window <= std::min(horizon, tr.duration_s) + 1e-12; start += window) {
        double m = 0.0;
        for (const auto& r : tr.records)
            if (r.t >= start - 1e-12 && r.t < start + window - 1e-12) m = std::max(m, std::abs(r.S));
        if (m > 0.0) {
            ts.push_back(start + 0.5 * window);
            ls.push_back(std::log(m));
        }
    }
    if (ts.size() < 2) return 0.0;
    const double n = static_cast<double>(ts.size());
    double st = 0.0, sl = 0.0, stt = 0.0, stl = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        st += ts[i];
        sl += ls[i];
        stt += ts[i] * ts[i];
        stl += ts[i] * ls[i];
    }
    const double denom = n * stt - st * st;
    if (denom == 0.0) return 0.0;
    return -(n * stl - st * sl) / denom;
}

}  // namespace

MetricsReport compute_metrics(const RunTrace& tr, const RunTrace* baseline) {
    if (tr.records.empty()) throw InvalidArgument("compute_metrics: empty trace");
    MetricsReport m;
    const auto ed = column(tr, plant::kLateral);
    const auto ephi = column(tr, plant::kHeading);
    m.lateral_rmse_m = rmse(ed);
    m.heading_rmse_rad = rmse(ephi);
    m.max_lateral_m = max_abs(ed);
    m.max_heading_rad = max_abs(ephi);

    std::optional<std::size_t> last_out;
    for (std::size_t k = 0; k < ed.size(); ++k)
        if (std::abs(ed[k]) > kSettlingBand) last_out = k;
    if (!last_out)
        m.settling_time_s = 0.0;
    else
        m.settling_time_s = std::min(tr.duration_s, static_cast<double>(*last_out + 1) * tr.dt_s);

    const double steps = static_cast<double>(tr.records.size());
    const double events = static_cast<double>(tr.event_log.size());
    m.transmission_ratio_pct = 100.0 * events / steps;
    m.bandwidth_utilization_pct = m.transmission_ratio_pct;
    m.avg_transmission_interval_s = events > 0 ? tr.duration_s / events : tr.duration_s;
    if (tr.event_log.size() >= 2) {
        double acc = 0.0;
        for (std::size_t i = 1; i < tr.event_log.size(); ++i) acc += static_cast<double>(tr.event_log[i].interval);
        m.mean_release_interval_s = acc / static_cast<double>(tr.event_log.size() - 1) * tr.dt_s;
    } else {
        m.mean_release_interval_s = tr.duration_s;
    }

    m.eig_max_magnitude = linalg::spectral_radius(tr.closed_loop);
    m.stability_margin = 1.0 - m.eig_max_magnitude;

    double dev = 0.0;
    for (const auto& r : tr.records)
        if (r.t > kSlidingTransient_s) dev = std::max(dev, std::abs(r.S));
    m.sliding_max_deviation = dev;
    m.sliding_convergence_rate = envelope_decay_rate(tr);

    if (tr.case_id != CaseId::III || !tr.attack_active) return m;

    // Estimation and detection metrics over the attack window.
    std::vector<double> err;
    double norm_alpha = 0.0, norm_err = 0.0, max_err = 0.0;
    observer::AttackDetector det = observer::AttackDetector::for_bound(tr.attack_bound);
    std::size_t pre = 0, pre_flagged = 0, during = 0, during_missed = 0;
    std::optional<double> detection;
    std::optional<double> last_bad;
    const double conv_tol = 0.3 * tr.attack_bound;
    for (const auto& r : tr.records) {
        const bool flag = det.update(r.alpha_hat);
        if (r.t < tr.attack_start_s) {
            ++pre;
            if (flag) ++pre_flagged;
            continue;
        }
        ++during;
        if (!flag) ++during_missed;
        if (flag && !detection) detection = r.t - tr.attack_start_s;
        const double e = r.alpha_att - r.alpha_hat;
        err.push_back(e);
        norm_alpha += r.alpha_att * r.alpha_att;
        norm_err += e * e;
        max_err = std::max(max_err, std::abs(e));
        if (std::abs(e) > conv_tol) last_bad = r.t;
    }
    if (during == 0) return m;
    m.detection_time_s = detection;
    m.fp_rate_pct = pre ? 100.0 * static_cast<double>(pre_flagged) / static_cast<double>(pre) : 0.0;
    m.fn_rate_pct = 100.0 * static_cast<double>(during_missed) / static_cast<double>(during);
    m.estimation_rmse = rmse(err);
    m.max_estimation_error = max_err;
    if (norm_alpha > 0.0) m.estimation_accuracy = 1.0 - std::sqrt(norm_err) / std::sqrt(norm_alpha);
    m.observer_convergence_s = last_bad ? std::min(tr.duration_s - tr.attack_start_s, *last_bad + tr.dt_s - tr.attack_start_s)
                                        : 0.0;

    if (baseline) {
        const double base = rmse(column(*baseline, plant::kLateral));
        if (base > 0.0) {
            m.compensation_effectiveness_pct = 100.0 * (1.0 - m.lateral_rmse_m / base);
            m.residual_effect_pct = 100.0 - *m.compensation_effectiveness_pct;
        }
    }
    return m;
}

trigger::Theorem1Report trigger_diagnostic(const RunTrace& tr) {
    std::vector<trigger::DiagnosticStep> steps;
    steps.reserve(tr.records.size());
    for (const auto& r : tr.records) steps.push_back({r.trigger_error, r.trigger_reference, r.triggered});
    return trigger::theorem1_diagnostic(steps, tr.trigger_cfg);
}

SecureDomainReport secure_domain_report(const RunTrace& tr) {
    SecureDomainReport rep;
    for (std::size_t k = 0; k < tr.records.size(); ++k) {
        const bool inside = std::abs(tr.records[k].S) <= tr.xi;
        if (!rep.first_entry) {
            if (inside) rep.first_entry = k;
        } else if (!inside) {
            rep.exits.push_back(k);
        }
    }
    return rep;
}

std::vector<double> surface_series(const RunTrace& tr) {
    std::vector<double> s;
    s.reserve(tr.records.size());
    for (const auto& r : tr.records) s.push_back(r.S);
    return s;
}

}  // namespace securelat::sim
