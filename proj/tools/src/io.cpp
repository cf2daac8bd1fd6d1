#include "securelat/cli/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace securelat::cli {

std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (v == 0.0) return "0";  // folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

double round12(double v) {
    if (!std::isfinite(v) || v == 0.0) return v == 0.0 ? 0.0 : v;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::strtod(buf, nullptr);
}

json matrix_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(round12(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(round12(v(i)));
    return a;
}

json optional_json(const std::optional<double>& v) { return v ? json(round12(*v)) : json(nullptr); }

void write_text(const std::string& path, const std::string& content) {
    const auto parent = std::filesystem::path(path).parent_path();
    std::error_code ec;
    if (!parent.empty()) std::filesystem::create_directories(parent, ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path + "'");
    out << content;
    out.close();
    if (!out) throw IoError("failed while writing '" + path + "'");
}

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string dataset_csv(const Dataset& d) {
    if (d.states.size() != d.inputs.size() || d.t.size() != d.inputs.size())
        throw InvalidArgument("dataset_csv: column lengths differ");
    std::string out = std::string(kDatasetHeader) + "\n";
    for (std::size_t k = 0; k < d.t.size(); ++k) {
        out += fmt(d.t[k]);
        for (Eigen::Index i = 0; i < 4; ++i) out += "," + fmt(d.states[k](i));
        out += "," + fmt(d.inputs[k]) + "\n";
    }
    return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_cell(const std::string& cell, const std::string& origin, std::size_t line) {
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    const std::string s = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
        throw IoError(origin + ":" + std::to_string(line) + ": '" + s + "' is not a finite number");
    return v;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    Dataset d;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header) {
            if (line != kDatasetHeader)
                throw IoError(origin + ":" + std::to_string(lineno) + ": expected header '" + kDatasetHeader + "'");
            header = true;
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != 6)
            throw IoError(origin + ":" + std::to_string(lineno) + ": expected 6 columns, got " +
                          std::to_string(cells.size()));
        d.t.push_back(parse_cell(cells[0], origin, lineno));
        plant::StateVector x;
        for (int i = 0; i < 4; ++i) x(i) = parse_cell(cells[static_cast<std::size_t>(i + 1)], origin, lineno);
        d.states.push_back(x);
        d.inputs.push_back(parse_cell(cells[5], origin, lineno));
    }
    if (!header) throw IoError(origin + ": empty file");
    return d;
}

std::string trace_csv(const sim::RunTrace& tr) {
    std::string out = std::string(kTraceHeader) + "\n";
    out.reserve(tr.records.size() * 160);
    for (const auto& r : tr.records) {
        out += fmt(r.t);
        for (Eigen::Index i = 0; i < 4; ++i) out += "," + fmt(r.state(i));
        out += "," + fmt(r.u_applied) + "," + fmt(r.alpha_att) + "," + fmt(r.alpha_hat) + "," + fmt(r.S) + "," +
               (r.triggered ? "1" : "0") + "," + std::to_string(r.delay_steps) + "," + fmt(r.V_lkf) + "\n";
    }
    return out;
}

json model_json(const sysid::IdentifiedModel& m, const sysid::PersistencyReport* pr) {
    json j;
    j["A"] = matrix_json(m.mat_A);
    j["B"] = matrix_json(m.mat_B);
    j["r"] = m.trunc_order;
    j["residual_fro"] = round12(m.residual_fro);
    j["sample_period_s"] = round12(m.sample_period_s);
    if (pr) {
        j["persistency"] = pr->passed;
        j["persistency_detail"] = {{"length_ok", pr->length_ok},
                                   {"required_length", pr->required_length},
                                   {"available_length", pr->available_length},
                                   {"hankel_rank", pr->hankel_rank},
                                   {"hankel_rows", pr->hankel_rows}};
    }
    return j;
}

namespace {

Mat matrix_from(const json& j, const std::string& what, const std::string& origin) {
    if (!j.is_array() || j.empty()) throw IoError(origin + ": '" + what + "' must be a non-empty array of rows");
    std::vector<std::vector<double>> rows;
    for (const auto& row : j) {
        if (!row.is_array()) throw IoError(origin + ": '" + what + "' rows must be arrays");
        std::vector<double> r;
        for (const auto& v : row) {
            if (!v.is_number()) throw IoError(origin + ": '" + what + "' entries must be numbers");
            r.push_back(v.get<double>());
        }
        rows.push_back(std::move(r));
    }
    try {
        return linalg::from_rows(rows);
    } catch (const InvalidArgument& ex) {
        throw IoError(origin + ": '" + what + "': " + ex.what());
    }
}

}  // namespace

sysid::IdentifiedModel parse_model_json(const std::string& text, const std::string& origin) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& ex) {
        throw IoError(origin + ": " + ex.what());
    }
    if (!j.is_object() || !j.contains("A") || !j.contains("B")) throw IoError(origin + ": needs 'A' and 'B'");
    sysid::IdentifiedModel m;
    m.mat_A = matrix_from(j["A"], "A", origin);
    m.mat_B = matrix_from(j["B"], "B", origin);
    if (m.mat_A.rows() != m.mat_A.cols() || m.mat_B.rows() != m.mat_A.rows())
        throw IoError(origin + ": A must be square and B must have matching rows");
    m.trunc_order = j.value("r", static_cast<int>(m.mat_A.rows() + m.mat_B.cols()));
    m.residual_fro = j.value("residual_fro", 0.0);
    m.sample_period_s = j.value("sample_period_s", 0.01);
    return m;
}

json metrics_json(const sim::MetricsReport& m) {
    json j;
    j["lateral_rmse_m"] = round12(m.lateral_rmse_m);
    j["heading_rmse_rad"] = round12(m.heading_rmse_rad);
    j["max_lateral_m"] = round12(m.max_lateral_m);
    j["max_heading_rad"] = round12(m.max_heading_rad);
    j["settling_time_s"] = round12(m.settling_time_s);
    j["transmission_ratio_pct"] = round12(m.transmission_ratio_pct);
    j["avg_transmission_interval_s"] = round12(m.avg_transmission_interval_s);
    j["mean_release_interval_s"] = round12(m.mean_release_interval_s);
    j["bandwidth_utilization_pct"] = round12(m.bandwidth_utilization_pct);
    j["detection_time_s"] = optional_json(m.detection_time_s);
    j["fp_rate_pct"] = optional_json(m.fp_rate_pct);
    j["fn_rate_pct"] = optional_json(m.fn_rate_pct);
    j["estimation_accuracy"] = optional_json(m.estimation_accuracy);
    j["estimation_rmse"] = optional_json(m.estimation_rmse);
    j["compensation_effectiveness_pct"] = optional_json(m.compensation_effectiveness_pct);
    j["residual_effect_pct"] = optional_json(m.residual_effect_pct);
    j["observer_convergence_s"] = optional_json(m.observer_convergence_s);
    j["max_estimation_error"] = optional_json(m.max_estimation_error);
    j["eig_max_magnitude"] = round12(m.eig_max_magnitude);
    j["sliding_convergence_rate"] = round12(m.sliding_convergence_rate);
    j["sliding_max_deviation"] = round12(m.sliding_max_deviation);
    j["stability_margin"] = round12(m.stability_margin);
    return j;
}

}  // namespace securelat::cli
