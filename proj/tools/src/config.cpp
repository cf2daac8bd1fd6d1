#include "securelat/cli/config.hpp"

#include "securelat/cli/io.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>

namespace securelat::cli {

SuiteConfig default_config() {
    SuiteConfig c;
    c.scenario.delay.max_delay_steps = 10;
    return c;
}

namespace {

struct Entry {
    std::string section, key;
    std::vector<std::string> values;
};

std::string where(const Entry& e) { return "[" + e.section + "] " + e.key; }

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

/// Values may be separated by commas, spaces or both.
std::vector<std::string> tokens(const Entry& e) {
    std::vector<std::string> out;
    for (const auto& raw : e.values) {
        std::string cur;
        for (char ch : raw) {
            if (ch == ',' || ch == ' ' || ch == '\t') {
                if (!trim(cur).empty()) out.push_back(trim(cur));
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        if (!trim(cur).empty()) out.push_back(trim(cur));
    }
    return out;
}

double to_double(const std::string& s, const Entry& e) {
    double v = 0.0;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (!s.empty() && *first == '+') ++first;
    const auto r = std::from_chars(first, last, v);
    if (r.ec != std::errc() || r.ptr != last || !std::isfinite(v))
        throw ConfigError(where(e) + ": '" + s + "' is not a finite number");
    return v;
}

std::vector<double> numbers(const Entry& e) {
    std::vector<double> out;
    for (const auto& t : tokens(e)) out.push_back(to_double(t, e));
    if (out.empty()) throw ConfigError(where(e) + ": expected at least one number");
    return out;
}

double number(const Entry& e) {
    const auto v = numbers(e);
    if (v.size() != 1) throw ConfigError(where(e) + ": expected a single number");
    return v.front();
}

long integer(const Entry& e) {
    const double v = number(e);
    if (v != std::floor(v) || std::abs(v) > 9e15) throw ConfigError(where(e) + ": expected an integer");
    return static_cast<long>(v);
}

std::string word(const Entry& e) {
    std::string joined;
    for (const auto& v : e.values) joined += (joined.empty() ? "" : " ") + v;
    joined = trim(joined);
    if (joined.size() >= 2 && (joined.front() == '"' || joined.front() == '\'') && joined.back() == joined.front())
        joined = joined.substr(1, joined.size() - 2);
    if (joined.empty()) throw ConfigError(where(e) + ": empty value");
    return joined;
}

bool boolean(const Entry& e) {
    const auto w = word(e);
    if (w == "true" || w == "1" || w == "yes" || w == "on") return true;
    if (w == "false" || w == "0" || w == "no" || w == "off") return false;
    throw ConfigError(where(e) + ": expected true or false");
}

Vec vector_of(const Entry& e, Eigen::Index n) {
    const auto v = numbers(e);
    if (static_cast<Eigen::Index>(v.size()) != n)
        throw ConfigError(where(e) + ": expected " + std::to_string(n) + " values, got " + std::to_string(v.size()));
    return Eigen::Map<const Vec>(v.data(), n);
}

/// Accepts either n diagonal entries or n*n row-major entries.
Mat square_of(const Entry& e, Eigen::Index n) {
    const auto v = numbers(e);
    if (static_cast<Eigen::Index>(v.size()) == n) return Eigen::Map<const Vec>(v.data(), n).asDiagonal();
    if (static_cast<Eigen::Index>(v.size()) == n * n) {
        Mat m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) m(i, j) = v[static_cast<std::size_t>(i * n + j)];
        return m;
    }
    throw ConfigError(where(e) + ": expected " + std::to_string(n) + " diagonal or " + std::to_string(n * n) +
                      " row-major values");
}

double positive(const Entry& e) {
    const double v = number(e);
    if (!(v > 0.0)) throw ConfigError(where(e) + ": must be > 0");
    return v;
}

std::size_t count_of(const Entry& e) {
    const long v = integer(e);
    if (v < 1) throw ConfigError(where(e) + ": must be >= 1");
    return static_cast<std::size_t>(v);
}

using Handler = std::function<void(const Entry&, SuiteConfig&)>;

struct Pending {
    std::optional<double> max_delay_s;
    std::optional<double> data_duration_s;
    std::optional<std::vector<double>> A, B;
};

std::map<std::string, std::map<std::string, Handler>> handlers(Pending& pend) {
    std::map<std::string, std::map<std::string, Handler>> h;
    auto& plant = h["plant"];
    plant["mass_kg"] = [](const Entry& e, SuiteConfig& c) { c.vehicle.mass_kg = positive(e); };
    plant["inertia_z_kgm2"] = [](const Entry& e, SuiteConfig& c) { c.vehicle.inertia_z_kgm2 = positive(e); };
    plant["dist_front_m"] = [](const Entry& e, SuiteConfig& c) { c.vehicle.dist_front_m = positive(e); };
    plant["dist_rear_m"] = [](const Entry& e, SuiteConfig& c) { c.vehicle.dist_rear_m = positive(e); };
    plant["stiff_front_N_per_rad"] = [](const Entry& e, SuiteConfig& c) { c.vehicle.stiff_front_N_per_rad = positive(e); };
    plant["stiff_rear_N_per_rad"] = [](const Entry& e, SuiteConfig& c) { c.vehicle.stiff_rear_N_per_rad = positive(e); };
    plant["speed_long_m_per_s"] = [](const Entry& e, SuiteConfig& c) { c.vehicle.speed_long_m_per_s = positive(e); };
    plant["noise_bound"] = [](const Entry& e, SuiteConfig& c) {
        c.process_noise_bound = number(e);
        if (c.process_noise_bound < 0.0) throw ConfigError(where(e) + ": must be >= 0");
    };

    auto& data = h["data"];
    data["samples"] = [](const Entry& e, SuiteConfig& c) { c.data.samples = count_of(e); };
    data["duration_s"] = [&pend](const Entry& e, SuiteConfig&) { pend.data_duration_s = positive(e); };
    data["sample_period_s"] = [](const Entry& e, SuiteConfig& c) { c.data.sample_period_s = positive(e); };
    data["excitation_amplitude"] = [](const Entry& e, SuiteConfig& c) {
        c.data.excitation_amplitude = number(e);
        if (c.data.excitation_amplitude < 0.0) throw ConfigError(where(e) + ": must be >= 0");
    };
    data["source"] = [](const Entry& e, SuiteConfig& c) {
        const auto w = word(e);
        if (w == "continuous") c.data.source = DataSource::Continuous;
        else if (w == "discrete") c.data.source = DataSource::Discrete;
        else throw ConfigError(where(e) + ": expected continuous or discrete");
    };
    data["initial_state"] = [](const Entry& e, SuiteConfig& c) { c.data.initial_state = vector_of(e, 4); };
    data["dataset_path"] = [](const Entry& e, SuiteConfig& c) { c.data.dataset_path = word(e); };
    data["trunc"] = [](const Entry& e, SuiteConfig& c) { c.data.trunc = word(e); };
    data["order_ns"] = [](const Entry& e, SuiteConfig& c) { c.data.order_ns = static_cast<int>(integer(e)); };
    data["window_ls"] = [](const Entry& e, SuiteConfig& c) { c.data.window_ls = static_cast<int>(integer(e)); };

    auto& model = h["model"];
    model["A"] = [&pend](const Entry& e, SuiteConfig&) { pend.A = numbers(e); };
    model["B"] = [&pend](const Entry& e, SuiteConfig&) { pend.B = numbers(e); };
    model["sample_period_s"] = [](const Entry& e, SuiteConfig& c) { c.scenario.model.sample_period_s = positive(e); };

    auto& trig = h["trigger"];
    trig["mu"] = [](const Entry& e, SuiteConfig& c) { c.scenario.trigger_cfg.sensitivity_mu = number(e); };
    trig["upsilon"] = [](const Entry& e, SuiteConfig& c) { c.scenario.trigger_cfg.weight_Upsilon = square_of(e, 4); };
    trig["max_delay_steps"] = [](const Entry& e, SuiteConfig& c) {
        c.scenario.delay.max_delay_steps = static_cast<int>(integer(e));
    };
    trig["max_delay_s"] = [&pend](const Entry& e, SuiteConfig&) {
        pend.max_delay_s = number(e);
        if (*pend.max_delay_s < 0.0) throw ConfigError(where(e) + ": must be >= 0");
    };
    trig["random_delay"] = [](const Entry& e, SuiteConfig& c) { c.scenario.delay.random = boolean(e); };
    trig["delays"] = [](const Entry& e, SuiteConfig& c) {
        c.scenario.delay.per_event_delay.clear();
        for (double v : numbers(e)) {
            if (v != std::floor(v) || v < 0) throw ConfigError(where(e) + ": delays must be non-negative integers");
            c.scenario.delay.per_event_delay.push_back(static_cast<int>(v));
        }
    };

    auto& obs = h["observer"];
    obs["target_radius"] = [](const Entry& e, SuiteConfig& c) { c.scenario.observer_target_radius = number(e); };

    auto& ctl = h["control"];
    ctl["K"] = [](const Entry& e, SuiteConfig& c) { c.scenario.gain_K = vector_of(e, 4).transpose(); };
    ctl["Q"] = [](const Entry& e, SuiteConfig& c) { c.scenario.sliding_cfg.weight_Q = square_of(e, 4); };
    ctl["R"] = [](const Entry& e, SuiteConfig& c) { c.scenario.sliding_cfg.weight_R = square_of(e, 1); };
    ctl["gamma"] = [](const Entry& e, SuiteConfig& c) { c.scenario.sliding_cfg.frac_order_gamma = number(e); };
    ctl["lambda"] = [](const Entry& e, SuiteConfig& c) { c.scenario.sliding_cfg.frac_weight_lambda = number(e); };
    ctl["kappa"] = [](const Entry& e, SuiteConfig& c) { c.scenario.sliding_cfg.switch_kappa = number(e); };
    ctl["rho"] = [](const Entry& e, SuiteConfig& c) { c.scenario.sliding_cfg.switch_rho = number(e); };
    ctl["memory_len"] = [](const Entry& e, SuiteConfig& c) {
        c.scenario.sliding_cfg.memory_len_L = static_cast<int>(integer(e));
    };
    ctl["boundary_phi"] = [](const Entry& e, SuiteConfig& c) { c.scenario.sliding_cfg.boundary_phi = number(e); };
    ctl["surface_init"] = [](const Entry& e, SuiteConfig& c) {
        const auto w = word(e);
        if (w == "zero_eps") c.scenario.sliding_cfg.surface_init = control::SurfaceInit::ZeroEps;
        else if (w == "zero_surface") c.scenario.sliding_cfg.surface_init = control::SurfaceInit::ZeroSurface;
        else throw ConfigError(where(e) + ": expected zero_eps or zero_surface");
    };

    auto& atk = h["attack"];
    atk["kind"] = [](const Entry& e, SuiteConfig& c) {
        try {
            c.scenario.attack.kind = observer::attack_kind_from_string(word(e));
        } catch (const InvalidArgument& ex) {
            throw ConfigError(where(e) + ": " + ex.what());
        }
    };
    atk["amplitude"] = [](const Entry& e, SuiteConfig& c) { c.scenario.attack.amplitude = number(e); };
    atk["freq_hz"] = [](const Entry& e, SuiteConfig& c) { c.scenario.attack.freq_hz = number(e); };
    atk["start_time_s"] = [](const Entry& e, SuiteConfig& c) { c.scenario.attack.start_time_s = number(e); };
    atk["bound"] = [](const Entry& e, SuiteConfig& c) {
        c.scenario.attack.bound_Qatt = number(e);
        c.scenario.sliding_cfg.attack_bound_Qatt = c.scenario.attack.bound_Qatt;
    };
    atk["compliance"] = [](const Entry& e, SuiteConfig& c) { c.scenario.attack.assumption_compliance = boolean(e); };
    atk["values"] = [](const Entry& e, SuiteConfig& c) { c.scenario.attack.custom_values = numbers(e); };
    atk["values_dt_s"] = [](const Entry& e, SuiteConfig& c) { c.scenario.attack.custom_dt_s = positive(e); };

    auto& s = h["sim"];
    s["duration_s"] = [](const Entry& e, SuiteConfig& c) { c.scenario.duration_s = number(e); };
    s["dt_s"] = [](const Entry& e, SuiteConfig& c) { c.scenario.dt_s = positive(e); };
    s["initial_state"] = [](const Entry& e, SuiteConfig& c) { c.scenario.initial_state = vector_of(e, 4); };
    s["model_path"] = [](const Entry& e, SuiteConfig& c) { c.model_path = word(e); };
    s["plant"] = [](const Entry& e, SuiteConfig& c) {
        const auto w = word(e);
        if (w == "discrete") c.scenario.plant_mode = sim::PlantMode::Discrete;
        else if (w == "continuous") c.scenario.plant_mode = sim::PlantMode::Continuous;
        else throw ConfigError(where(e) + ": expected discrete or continuous");
    };
    s["oracle_compensation"] = [](const Entry& e, SuiteConfig& c) { c.scenario.oracle_compensation = boolean(e); };
    s["seed"] = [](const Entry& e, SuiteConfig& c) {
        const long v = integer(e);
        if (v < 0) throw ConfigError(where(e) + ": must be >= 0");
        c.seed = static_cast<std::uint64_t>(v);
    };
    s["scenario"] = [](const Entry& e, SuiteConfig& c) { c.default_scenario = word(e); };

    auto& syn = h["synthesis"];
    syn["mu"] = [](const Entry& e, SuiteConfig& c) { c.synthesis.mu = number(e); };
    syn["delta_bar_steps"] = [](const Entry& e, SuiteConfig& c) {
        c.synthesis.delta_bar_steps = static_cast<int>(integer(e));
        if (*c.synthesis.delta_bar_steps < 0) throw ConfigError(where(e) + ": must be >= 0");
    };
    syn["budget"] = [](const Entry& e, SuiteConfig& c) { c.synthesis.budget = static_cast<int>(count_of(e)); };
    return h;
}

}  // namespace

SuiteConfig load_config(const std::string& path) {
    if (!std::filesystem::is_regular_file(path)) throw ConfigError("config file '" + path + "' not found");
    std::vector<CLI::ConfigItem> items;
    try {
        items = CLI::ConfigINI().from_file(path);
    } catch (const std::exception& ex) {
        throw ConfigError("config file '" + path + "': " + ex.what());
    }

    SuiteConfig cfg = default_config();
    cfg.source_path = path;
    Pending pend;
    const auto table = handlers(pend);
    for (const auto& it : items) {
        if (it.name == "++" || it.name == "--") continue;
        Entry e{it.parents.empty() ? "" : it.parents.front(), it.name, it.inputs};
        if (it.parents.size() > 1) throw ConfigError("nested section '" + it.fullname() + "' is not supported");
        const auto sec = table.find(e.section);
        if (sec == table.end())
            throw ConfigError(e.section.empty() ? "key '" + e.key + "' appears outside any section"
                                                : "unknown section [" + e.section + "]");
        const auto h = sec->second.find(e.key);
        if (h == sec->second.end()) throw ConfigError("unknown key '" + e.key + "' in [" + e.section + "]");
        h->second(e, cfg);
    }

    if (pend.data_duration_s) {
        cfg.data.samples = static_cast<std::size_t>(std::llround(*pend.data_duration_s / cfg.data.sample_period_s));
        if (cfg.data.samples < 1) throw ConfigError("[data] duration_s is shorter than one sample");
    }
    if (pend.max_delay_s)
        cfg.scenario.delay.max_delay_steps = static_cast<int>(std::llround(*pend.max_delay_s / cfg.scenario.dt_s));
    if (pend.A || pend.B) {
        if (!pend.A || !pend.B) throw ConfigError("[model] needs both A and B");
        const auto nn = pend.A->size();
        const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(static_cast<double>(nn))));
        if (static_cast<std::size_t>(n * n) != nn) throw ConfigError("[model] A must have n*n entries");
        if (pend.B->size() % static_cast<std::size_t>(n) != 0) throw ConfigError("[model] B must have n*p entries");
        const auto p = static_cast<Eigen::Index>(pend.B->size()) / n;
        Mat A(n, n), B(n, p);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) A(i, j) = (*pend.A)[static_cast<std::size_t>(i * n + j)];
            for (Eigen::Index j = 0; j < p; ++j) B(i, j) = (*pend.B)[static_cast<std::size_t>(i * p + j)];
        }
        cfg.scenario.model.mat_A = A;
        cfg.scenario.model.mat_B = B;
        cfg.model_inline = true;
    }
    if (cfg.model_inline && cfg.model_path) throw ConfigError("[model] and [sim] model_path are mutually exclusive");

    // Semantic checks that do not depend on the command.
    try {
        cfg.vehicle.validate();
        cfg.scenario.trigger_cfg.validate();
        cfg.scenario.sliding_cfg.validate();
        cfg.scenario.delay.validate();
        cfg.scenario.attack.validate();
        if (!(cfg.scenario.observer_target_radius > 0.0 && cfg.scenario.observer_target_radius < 1.0))
            throw InvalidArgument("[observer] target_radius must lie in (0, 1)");
        if (!(cfg.scenario.duration_s >= 0.0)) throw InvalidArgument("[sim] duration_s must be >= 0");
    } catch (const InvalidArgument& ex) {
        throw ConfigError(ex.what());
    }
    return cfg;
}

sim::ScenarioConfig scenario_for(const SuiteConfig& cfg, sim::CaseId c, std::uint64_t seed) {
    sim::ScenarioConfig s = cfg.scenario;
    s.case_id = c;
    s.seed = seed;
    s.vehicle = cfg.vehicle;
    if (c == sim::CaseId::I) s.attack.kind = observer::AttackKind::None;
    if (c != sim::CaseId::III) s.oracle_compensation = false;
    return s;
}

}  // namespace securelat::cli
