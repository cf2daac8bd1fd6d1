#pragma once

#include "securelat/cli/config.hpp"
#include "securelat/cli/io.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace securelat::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;

const char* tool_version();

struct Options {
    std::optional<std::string> config_path;
    std::string out_dir = "out";
    std::optional<std::uint64_t> seed;
    std::optional<std::string> scenario;
    std::optional<std::string> trunc;
    std::set<std::string> emit = {"csv", "json", "svg"};
};

struct RunManifest {
    std::optional<std::string> config_path;
    std::string output_dir;
    std::vector<std::string> emitted_files;
    std::string tool_version;
    std::uint64_t seed = 0;
    std::string command;
    std::optional<std::string> error;
    json extra = json::object();

    json to_json() const;
};

/// Explicit flag, then SECURELAT_SEED, then [sim] seed, then 0.
std::uint64_t resolve_seed(const Options& opts, const SuiteConfig& cfg);

std::set<std::string> parse_emit(const std::string& list);

/// Each command writes its outputs and returns the manifest (not yet written).
RunManifest cmd_gen_data(const SuiteConfig& cfg, const Options& opts);
RunManifest cmd_identify(const SuiteConfig& cfg, const Options& opts);
RunManifest cmd_simulate(const SuiteConfig& cfg, const Options& opts);
RunManifest cmd_verify(const SuiteConfig& cfg, const Options& opts);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace securelat::cli
