#pragma once

#include "securelat/sim.hpp"
#include "securelat/sysid.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace securelat::cli {

using json = nlohmann::ordered_json;

/// File-system or parse failure at run time (exit code 1).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decimal text with 12 significant digits.
std::string fmt(double v);

/// Value rounded to 12 significant digits so JSON output carries no more.
double round12(double v);
json matrix_json(const Mat& m);
json vector_json(const Vec& v);
json optional_json(const std::optional<double>& v);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

inline const char* kDatasetHeader = "t,e_d,e_d_dot,e_phi,e_phi_dot,u";
inline const char* kTraceHeader = "t,e_d,e_d_dot,e_phi,e_phi_dot,u,alpha_att,alpha_hat,S,triggered,delay_steps,V_lkf";

struct Dataset {
    std::vector<double> t;
    std::vector<plant::StateVector> states;
    std::vector<double> inputs;
};

std::string dataset_csv(const Dataset& d);
/// Throws IoError naming the offending line.
Dataset parse_dataset_csv(const std::string& text, const std::string& origin = "dataset");

std::string trace_csv(const sim::RunTrace& tr);

json model_json(const sysid::IdentifiedModel& m, const sysid::PersistencyReport* pr);
sysid::IdentifiedModel parse_model_json(const std::string& text, const std::string& origin = "model");

json metrics_json(const sim::MetricsReport& m);

}  // namespace securelat::cli
