#pragma once

#include <iosfwd>
#include <string>

#include "igd/pipeline.hpp"

namespace igd {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,    // config or I/O problem
    kExitInfeasible = 2,
    kExitGoalUnmet = 3  // goal not met after max_rounds
};

/// Everything a run needs; fully serializable so a persisted config
/// re-executes identically with the mock backend.
struct RunConfig {
    std::string input_path;
    std::string output_path;
    std::string features_path;  // empty: built-in defaults
    std::string lexicon_path;   // empty: built-in lexicon
    std::string plan_path;
    std::string report_path;
    std::string audit_path;
    int epsilon = -1;  // < 0: relative default per table
    int max_retries = 3;
    int max_rounds = 2;
    std::uint64_t seed = 0;
    bool audit_timestamps = true;
    BackendConfig backend;
};

RunConfig load_run_config(const std::string& path);
void save_run_config(const RunConfig& cfg, const std::string& path);
std::string run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const std::string& text);

/// Writes per-(task, feature) bias diagnostics for the input dataset.
int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Persists intervention plans (flows, selected ids, seeds, epsilon).
int cmd_plan(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Runs the rewrite pipeline (from a plan file when given, else planning
/// internally) and writes the debiased dataset plus the audit log.
int cmd_rewrite(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Recomputes everything from the output dataset alone; exit 0 iff every
/// (task, feature) goal is met.
int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Before/after summary: IG deltas, rewrite and failure counts.
int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace igd
