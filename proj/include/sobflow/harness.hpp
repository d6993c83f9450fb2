/// @file harness.hpp
/// @brief Run configuration and the four commands behind the command-line
/// tool: run-flow, verify, sweep and report.
///
/// Exit status: 0 success, 1 numerical failure / failed check / unreadable
/// input file, 2 usage error or violated configuration invariant.

#pragma once

#include "json.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace sobflow {

/// Bad command line or configuration; maps to exit status 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::string command;                // run-flow | verify | sweep | report
    int d = 5;
    std::string flow;                   // fd | fd-ccl | log; empty: log for d = 2, fd otherwise
    std::string profile;                // empty: default for flow and d
    int n = 512;
    double r_max = 0.0;                 // 0: per-profile default
    std::string spacing = "log_stretched";
    double dt0 = 0.0;                   // 0: flow default
    double eps_ext = 1e-4;
    int max_steps = 200000;
    double t_final = 0.0;               // 0: 0.5 for fd-ccl, 0.2 for log; fd always runs to extinction
    int snapshot_every = 0;
    std::map<std::string, double> tolerances;
    std::string out = "out";
    std::uint64_t seed = 1;
    std::string sweep_axis;             // p | epsilon | n | dt
    std::vector<double> sweep_values;   // empty: axis default
    std::string input;                  // report: report JSON to read (default <out>/report.json)
};

nlohmann::json to_json(const RunConfig& config);

/// Overlays the keys of `j` on `base`. Unknown keys and wrongly typed values
/// throw UsageError.
RunConfig apply_json(RunConfig base, const nlohmann::json& j);
RunConfig load_config_file(RunConfig base, const std::string& path);

/// Throws UsageError when an invariant fails, e.g. flow log with d != 2.
void validate(const RunConfig& config);

/// The profile used when config.profile is empty.
std::string default_profile(const RunConfig& config);

int cmd_run_flow(const RunConfig& config);
int cmd_verify(const RunConfig& config);
int cmd_sweep(const RunConfig& config);
int cmd_report(const RunConfig& config);

/// Validates and dispatches on config.command; converts exceptions into exit
/// statuses and prints a one-line reason to stderr.
int run_command(const RunConfig& config);

/// Writes `text` to `path` through a temporary file and a rename.
void write_atomic(const std::string& path, const std::string& text);

}  // namespace sobflow
