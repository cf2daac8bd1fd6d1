#include "securelat/cli/commands.hpp"

#include "securelat/cli/svg.hpp"
#include "securelat/synthesis.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>

#ifndef SECURELAT_VERSION
#define SECURELAT_VERSION "0.0.0"
#endif

namespace securelat::cli {

namespace fs = std::filesystem;

const char* tool_version() { return SECURELAT_VERSION; }

json RunManifest::to_json() const {
    json j;
    j["config_path"] = config_path ? json(*config_path) : json(nullptr);
    j["output_dir"] = output_dir;
    j["emitted_files"] = emitted_files;
    j["tool_version"] = tool_version;
    j["seed"] = seed;
    j["command"] = command;
    j["status"] = error ? "error" : "ok";
    if (error) j["error"] = *error;
    for (const auto& [k, v] : extra.items()) j[k] = v;
    return j;
}

std::uint64_t resolve_seed(const Options& opts, const SuiteConfig& cfg) {
    if (opts.seed) return *opts.seed;
    if (const char* env = std::getenv("SECURELAT_SEED"); env && *env) {
        const std::string s(env);
        if (s.find_first_not_of("0123456789") != std::string::npos || s.size() > 19)
            throw ConfigError("SECURELAT_SEED must be a non-negative integer, got '" + s + "'");
        return std::stoull(s);
    }
    if (cfg.seed) return *cfg.seed;
    return 0;
}

std::set<std::string> parse_emit(const std::string& list) {
    std::set<std::string> out;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        if (cur != "csv" && cur != "json" && cur != "svg")
            throw ConfigError("--emit accepts csv, json and svg; got '" + cur + "'");
        out.insert(cur);
        cur.clear();
    };
    for (char c : list) {
        if (c == ',') flush();
        else if (c != ' ') cur.push_back(c);
    }
    flush();
    if (out.empty()) throw ConfigError("--emit needs at least one of csv, json, svg");
    return out;
}

namespace {

RunManifest start_manifest(const SuiteConfig& cfg, const Options& opts, const char* command, std::uint64_t seed) {
    RunManifest m;
    m.config_path = opts.config_path;
    if (!m.config_path && cfg.source_path) m.config_path = cfg.source_path;
    m.output_dir = opts.out_dir;
    m.tool_version = tool_version();
    m.seed = seed;
    m.command = command;
    return m;
}

std::string out_path(const Options& opts, const std::string& name) { return (fs::path(opts.out_dir) / name).string(); }

void emit_file(RunManifest& m, const Options& opts, const std::string& name, const std::string& content) {
    write_text(out_path(opts, name), content);
    m.emitted_files.push_back(name);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

sysid::IdentifiedModel resolve_model(const SuiteConfig& cfg) {
    if (cfg.model_path) return parse_model_json(read_text(*cfg.model_path), *cfg.model_path);
    return cfg.scenario.model;
}

std::optional<int> parse_trunc(const std::string& s, Eigen::Index full) {
    if (s == "auto") return std::nullopt;
    if (s == "full") return static_cast<int>(full);
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos || s.size() > 6)
        throw ConfigError("truncation must be 'auto', 'full' or a positive integer, got '" + s + "'");
    const int r = std::stoi(s);
    if (r < 1) throw ConfigError("truncation order must be >= 1");
    return r;
}

}  // namespace

RunManifest cmd_gen_data(const SuiteConfig& cfg, const Options& opts) {
    const std::uint64_t seed = resolve_seed(opts, cfg);
    RunManifest man = start_manifest(cfg, opts, "gen-data", seed);
    const auto& d = cfg.data;

    const auto inputs = sysid::random_excitation(d.samples, d.excitation_amplitude, seed);
    Dataset ds;
    std::vector<plant::StateVector> states;
    if (d.source == DataSource::Continuous) {
        plant::TrajectoryOptions topt;
        topt.noise_bound = cfg.process_noise_bound;
        topt.noise_seed = seed + 1;
        states = plant::generate_trajectory(plant::continuous_matrices(cfg.vehicle), d.initial_state, inputs,
                                            d.sample_period_s, topt);
    } else {
        const auto model = resolve_model(cfg);
        if (model.mat_A.rows() != 4 || model.mat_B.cols() != 1)
            throw ConfigError("discrete data generation needs a 4-state single-input model");
        Mat u(1, static_cast<Eigen::Index>(inputs.size()));
        for (std::size_t k = 0; k < inputs.size(); ++k) u(0, static_cast<Eigen::Index>(k)) = inputs[k];
        const Mat traj = sysid::simulate_discrete(model.mat_A, model.mat_B, d.initial_state, u);
        for (Eigen::Index k = 0; k < traj.cols(); ++k) states.emplace_back(traj.col(k));
    }
    for (std::size_t k = 0; k < d.samples; ++k) {
        ds.t.push_back(static_cast<double>(k) * d.sample_period_s);
        ds.states.push_back(states[k]);
        ds.inputs.push_back(inputs[k]);
    }

    bool persistent = false;
    json detail = nullptr;
    if (ds.states.size() >= 2) {
        const auto dm = sysid::build_matrices(ds.states, ds.inputs, d.sample_period_s);
        const auto pr = sysid::persistency_check(dm, d.order_ns, d.window_ls);
        persistent = pr.passed;
        detail = {{"length_ok", pr.length_ok}, {"hankel_rank", pr.hankel_rank}, {"hankel_rows", pr.hankel_rows}};
    }
    if (!persistent) std::cerr << "warning: excitation is not persistently exciting of the requested order\n";
    const auto large = plant::count_large_angle_inputs(inputs);
    if (large > 0) std::cerr << "warning: " << large << " inputs exceed the small-angle regime\n";

    if (opts.emit.count("csv")) emit_file(man, opts, "dataset.csv", dataset_csv(ds));
    man.extra["rows"] = ds.t.size();
    man.extra["source"] = d.source == DataSource::Continuous ? "continuous" : "discrete";
    man.extra["persistency"] = persistent;
    man.extra["persistency_detail"] = detail;
    man.extra["large_angle_inputs"] = large;
    return man;
}

RunManifest cmd_identify(const SuiteConfig& cfg, const Options& opts) {
    const std::uint64_t seed = resolve_seed(opts, cfg);
    RunManifest man = start_manifest(cfg, opts, "identify", seed);
    const std::string path = cfg.data.dataset_path ? *cfg.data.dataset_path : out_path(opts, "dataset.csv");
    const Dataset ds = parse_dataset_csv(read_text(path), path);
    if (ds.states.size() < 2) throw IoError(path + ": identification needs at least 2 data rows");

    const double ell = ds.t.size() >= 2 ? ds.t[1] - ds.t[0] : cfg.data.sample_period_s;
    const auto dm = sysid::build_matrices(ds.states, ds.inputs, ell > 0 ? ell : cfg.data.sample_period_s);
    const auto pr = sysid::persistency_check(dm, cfg.data.order_ns, cfg.data.window_ls);
    if (!pr.passed) std::cerr << "warning: dataset is not persistently exciting; least-squares fit only\n";
    const auto trunc = parse_trunc(opts.trunc ? *opts.trunc : cfg.data.trunc, dm.n() + dm.p());
    const auto model = sysid::dmd_identify(dm, trunc);

    if (opts.emit.count("json")) emit_file(man, opts, "model.json", dump(model_json(model, &pr)));
    man.extra["dataset_path"] = path;
    man.extra["r"] = model.trunc_order;
    man.extra["residual_fro"] = round12(model.residual_fro);
    man.extra["persistency"] = pr.passed;
    return man;
}

namespace {

std::vector<double> times(const sim::RunTrace& tr) {
    std::vector<double> t;
    for (const auto& r : tr.records) t.push_back(r.t);
    return t;
}

template <typename F>
std::vector<double> pick(const sim::RunTrace& tr, F f) {
    std::vector<double> v;
    for (const auto& r : tr.records) v.push_back(f(r));
    return v;
}

void emit_plots(RunManifest& man, const Options& opts, const std::vector<sim::RunTrace>& traces) {
    using svg::Panel;
    using svg::Series;
    Panel ed{"Lateral error", "t [s]", "e_d [m]", {}, false};
    Panel ephi{"Heading error", "t [s]", "e_phi [rad]", {}, false};
    Panel u{"Steering command", "t [s]", "u [rad]", {}, false};
    Panel atk{"Attack and estimate", "t [s]", "alpha [rad]", {}, false};
    Panel sl{"Sliding variable", "t [s]", "S", {}, false};
    Panel rel{"Release intervals", "t [s]", "interval [s]", {}, true};
    for (const auto& tr : traces) {
        const auto name = sim::case_name(tr.case_id);
        const auto t = times(tr);
        ed.series.push_back({name, t, pick(tr, [](const auto& r) { return r.state(0); })});
        ephi.series.push_back({name, t, pick(tr, [](const auto& r) { return r.state(2); })});
        u.series.push_back({name, t, pick(tr, [](const auto& r) { return r.u_applied; })});
        sl.series.push_back({name, t, pick(tr, [](const auto& r) { return r.S; })});
        if (tr.case_id == sim::CaseId::III) {
            atk.series.push_back({"alpha_att", t, pick(tr, [](const auto& r) { return r.alpha_att; })});
            atk.series.push_back({"alpha_hat", t, pick(tr, [](const auto& r) { return r.alpha_hat; }), true});
        }
        Series ev{name, {}, {}};
        for (std::size_t i = 1; i < tr.event_log.size(); ++i) {
            ev.x.push_back(static_cast<double>(tr.event_log[i].step) * tr.dt_s);
            ev.y.push_back(static_cast<double>(tr.event_log[i].interval) * tr.dt_s);
        }
        rel.series.push_back(std::move(ev));
    }
    if (!traces.empty()) {
        const auto t = times(traces.front());
        const double xi = traces.front().xi;
        sl.series.push_back({"+xi", {t.front(), t.back()}, {xi, xi}, true});
        sl.series.push_back({"-xi", {t.front(), t.back()}, {-xi, -xi}, true});
    }
    std::vector<Panel> control_panels{u};
    if (!atk.series.empty()) control_panels.push_back(atk);
    emit_file(man, opts, "states.svg", svg::render("State trajectories", {ed, ephi}));
    emit_file(man, opts, "control.svg", svg::render("Control input", control_panels));
    emit_file(man, opts, "sliding.svg", svg::render("Sliding surface", {sl}));
    emit_file(man, opts, "release_intervals.svg", svg::render("Event-triggered releases", {rel}));
}

json run_checks(const sim::RunTrace& tr) {
    const auto trig = sim::trigger_diagnostic(tr);
    const auto sd = sim::secure_domain_report(tr);
    const auto lyap = control::lyapunov_smc_diagnostic(sim::surface_series(tr), tr.xi / 10.0,
                                                        static_cast<std::size_t>(sim::kSlidingTransient_s / tr.dt_s));
    return {{"trigger_violations", trig.violations.size()},
            {"secure_domain_xi", round12(tr.xi)},
            {"secure_domain_exits", sd.exits.size()},
            {"lyapunov_nonpositive_fraction", round12(lyap.fraction_nonpositive())}};
}

}  // namespace

RunManifest cmd_simulate(const SuiteConfig& cfg, const Options& opts) {
    const std::uint64_t seed = resolve_seed(opts, cfg);
    RunManifest man = start_manifest(cfg, opts, "simulate", seed);
    const std::string scenario = opts.scenario ? *opts.scenario : cfg.default_scenario;

    std::vector<sim::CaseId> cases;
    if (scenario == "all") {
        cases = {sim::CaseId::I, sim::CaseId::II, sim::CaseId::III};
    } else {
        try {
            cases = {sim::case_from_string(scenario)};
        } catch (const InvalidArgument& ex) {
            throw ConfigError(ex.what());
        }
    }

    SuiteConfig resolved = cfg;
    resolved.scenario.model = resolve_model(cfg);
    std::vector<sim::ScenarioConfig> runs;
    for (auto c : cases) runs.push_back(scenario_for(resolved, c, seed));
    const bool need_baseline = cases.size() == 1 && cases.front() == sim::CaseId::III;
    if (need_baseline) runs.push_back(scenario_for(resolved, sim::CaseId::II, seed));
    for (const auto& r : runs) {
        try {
            r.validate();
        } catch (const InvalidArgument& ex) {
            throw ConfigError(ex.what());
        }
    }

    std::vector<sim::RunTrace> traces;
    try {
        traces = sim::run_batch(runs);
    } catch (const sim::SimulationAborted& ex) {
        const auto& partial = ex.partial();
        if (opts.emit.count("csv"))
            emit_file(man, opts, "trace_" + sim::case_name(partial.case_id) + ".csv", trace_csv(partial));
        man.error = ex.what();
        return man;
    }

    const sim::RunTrace* baseline = nullptr;
    for (const auto& tr : traces)
        if (tr.case_id == sim::CaseId::II) baseline = &tr;

    json comparison;
    json checks;
    std::vector<sim::RunTrace> shown(traces.begin(), traces.begin() + static_cast<std::ptrdiff_t>(cases.size()));
    for (const auto& tr : shown) {
        const auto name = sim::case_name(tr.case_id);
        const auto metrics = sim::compute_metrics(tr, tr.case_id == sim::CaseId::III ? baseline : nullptr);
        if (opts.emit.count("csv")) emit_file(man, opts, "trace_" + name + ".csv", trace_csv(tr));
        if (opts.emit.count("json")) emit_file(man, opts, "metrics_" + name + ".json", dump(metrics_json(metrics)));
        comparison[name] = metrics_json(metrics);
        checks[name] = run_checks(tr);
    }
    if (scenario == "all" && opts.emit.count("json")) {
        json report;
        report["improvement_baseline"] = "case2";
        report["improvement_definition"] = "100 * (1 - case3 / case2) on lateral RMSE";
        report["cases"] = comparison;
        const auto& c2 = comparison["case2"];
        const auto& c3 = comparison["case3"];
        const double r2 = c2["lateral_rmse_m"].get<double>(), r3 = c3["lateral_rmse_m"].get<double>();
        report["improvement_case3_vs_case2_pct"] = r2 > 0 ? json(round12(100.0 * (1.0 - r3 / r2))) : json(nullptr);
        emit_file(man, opts, "comparison.json", dump(report));
    }
    if (opts.emit.count("svg")) emit_plots(man, opts, shown);
    man.extra["scenario"] = scenario;
    man.extra["checks"] = checks;
    return man;
}

RunManifest cmd_verify(const SuiteConfig& cfg, const Options& opts) {
    const std::uint64_t seed = resolve_seed(opts, cfg);
    RunManifest man = start_manifest(cfg, opts, "verify", seed);
    const auto model = resolve_model(cfg);
    const Mat& A = model.mat_A;
    const Mat& B = model.mat_B;
    const double mu = cfg.synthesis.mu.value_or(cfg.scenario.trigger_cfg.sensitivity_mu);
    const int delta_bar = cfg.synthesis.delta_bar_steps.value_or(cfg.scenario.delay.max_delay_steps);
    if (!(mu >= 0.0 && mu <= 1.0)) throw ConfigError("[synthesis] mu must lie in [0, 1]");

    synthesis::SearchOptions so;
    so.budget = cfg.synthesis.budget;
    const auto res = synthesis::search_feasible_theorem4(A, B, mu, delta_bar, so);

    json cert;
    cert["theorem"] = 4;
    cert["feasible"] = res.feasible;
    cert["mu"] = round12(mu);
    cert["delta_bar_steps"] = delta_bar;
    cert["search_iterations"] = res.iterations;
    cert["max_eigenvalue"] = round12(res.best_max_eig);
    cert["message"] = res.message;
    if (res.feasible) {
        cert["reverified"] = synthesis::check_negative_definite(
            synthesis::assemble_theorem4(A, B, mu, delta_bar, res.vars).full());
        cert["K"] = matrix_json(res.K);
        cert["closed_loop_spectral_radius"] = round12(res.closed_loop_radius);
        cert["E"] = matrix_json(res.vars.E);
        cert["Y"] = matrix_json(res.vars.Y);
        cert["Q_hat"] = matrix_json(res.vars.Qh);
        cert["R_hat"] = matrix_json(res.vars.Rh);
        cert["Upsilon_hat"] = matrix_json(res.vars.Upsh);
    } else {
        cert["K"] = nullptr;
        cert["closed_loop_spectral_radius"] = nullptr;
    }

    // Configured gain and sliding design, when they fit the model.
    if (A.rows() == cfg.scenario.gain_K.size() && B.cols() == 1) {
        cert["configured_K"] = matrix_json(cfg.scenario.gain_K);
        cert["configured_spectral_radius"] = round12(linalg::spectral_radius(A + B * cfg.scenario.gain_K));
    }
    try {
        auto sl = cfg.scenario.sliding_cfg;
        sl.sample_period_s = cfg.scenario.dt_s;
        const auto designed = control::make_sliding_config(A, B, sl);
        cert["xi"] = round12(control::secure_domain(designed).level_xi);
        cert["FB"] = round12(designed.FB);
    } catch (const std::exception& ex) {
        cert["xi"] = nullptr;
        cert["FB"] = nullptr;
        cert["xi_unavailable"] = ex.what();
    }

    if (opts.emit.count("json")) emit_file(man, opts, "certificate.json", dump(cert));
    man.extra["feasible"] = res.feasible;
    return man;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-triggered secure lateral control toolkit", "securelat"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1, 1);

    Options opts;
    std::string seed_text, emit_text = "csv,json,svg";
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "Configuration file (key = value in [sections])");
        sub->add_option("--out", opts.out_dir, "Output directory")->capture_default_str();
        sub->add_option("--seed", seed_text, "Seed (falls back to SECURELAT_SEED)");
        sub->add_option("--emit", emit_text, "Output kinds: csv,json,svg")->capture_default_str();
    };
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic excitation dataset");
    auto* ident = app.add_subcommand("identify", "Identify (A, B) from a dataset by DMD");
    auto* simc = app.add_subcommand("simulate", "Run attack scenarios and report metrics");
    auto* ver = app.add_subcommand("verify", "Search for a stability certificate");
    for (auto* s : {gen, ident, simc, ver}) add_common(s);
    ident->add_option("--trunc", opts.trunc, "Truncation order: R, auto or full");
    simc->add_option("--scenario", opts.scenario, "case1, case2, case3 or all");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << tool_version() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    RunManifest man;
    bool have_manifest = false;
    try {
        if (!seed_text.empty()) {
            if (seed_text.find_first_not_of("0123456789") != std::string::npos || seed_text.size() > 19)
                throw ConfigError("--seed must be a non-negative integer");
            opts.seed = std::stoull(seed_text);
        }
        opts.emit = parse_emit(emit_text);
        const SuiteConfig cfg = opts.config_path ? load_config(*opts.config_path) : default_config();
        std::error_code ec;
        fs::create_directories(opts.out_dir, ec);
        if (ec) throw IoError("cannot create output directory '" + opts.out_dir + "': " + ec.message());

        if (gen->parsed()) man = cmd_gen_data(cfg, opts);
        else if (ident->parsed()) man = cmd_identify(cfg, opts);
        else if (simc->parsed()) man = cmd_simulate(cfg, opts);
        else man = cmd_verify(cfg, opts);
        have_manifest = true;
        write_text(out_path(opts, "manifest.json"), dump(man.to_json()));
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        if (!have_manifest) {
            RunManifest fail;
            fail.config_path = opts.config_path;
            fail.output_dir = opts.out_dir;
            fail.tool_version = tool_version();
            fail.seed = opts.seed.value_or(0);
            fail.error = e.what();
            try {
                write_text(out_path(opts, "manifest.json"), dump(fail.to_json()));
            } catch (const std::exception&) {
            }
        }
        return kExitRuntime;
    }

    if (man.error) {
        err << "error: " << *man.error << "\n";
        return kExitRuntime;
    }
    for (const auto& f : man.emitted_files) out << out_path(opts, f) << "\n";
    return kExitOk;
}

}  // namespace securelat::cli
