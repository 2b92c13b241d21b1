#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "igd/intervene.hpp"

namespace igd {

/// Append-only audit sink; writes are serialized by the caller.
using AuditSink = std::function<void(const std::string& line)>;

struct PipelineOptions {
    int epsilon = -1;  // < 0: relative default per table
    int max_retries = 3;
    int max_rounds = 2;  // residual replan rounds after the initial pass
    std::uint64_t seed = 0;
    bool audit_timestamps = true;
};

struct FeatureOutcome {
    Task task = Task::OTHER;
    std::string feature;
    BiasReport before;
    BiasReport after;
    std::int64_t rewritten = 0;
    std::int64_t failed = 0;
    int rounds = 0;
};

struct PipelineResult {
    Dataset dataset;
    std::vector<FeatureOutcome> features;
    std::size_t uncovered_samples = 0;  // passed through verbatim
    bool all_goals_met = false;
};

/// One audit line per rewrite outcome (line-delimited JSON).
std::string audit_record(const RewriteOutcome& o, bool with_timestamp);

/// extract_all -> tabulate -> plan -> execute_plan, then residual replans
/// up to max_rounds or until every goal is met. Samples of uncovered tasks
/// pass through verbatim.
PipelineResult debias_pipeline(const Dataset& ds, const std::vector<FeatureSpec>& specs,
                               Backend& backend, const Lexicon& lexicon,
                               const PipelineOptions& opts, const AuditSink& audit = {});

/// Executes pre-computed plans (from a plan file) instead of planning the
/// first pass internally; residual rounds still replan.
PipelineResult execute_pipeline(const Dataset& ds, const std::vector<FeatureSpec>& specs,
                                const std::vector<InterventionPlan>& plans, Backend& backend,
                                const Lexicon& lexicon, const PipelineOptions& opts,
                                const AuditSink& audit = {});

/// Plans for every (task, feature) pair present in the dataset whose goal
/// is not already met. Throws Infeasible with the minimum feasible epsilon.
std::vector<InterventionPlan> plan_all(const Dataset& extracted,
                                       const std::vector<FeatureSpec>& specs,
                                       const PipelineOptions& opts);

std::string serialize_reports(const std::vector<FeatureOutcome>& features, std::size_t uncovered,
                              bool include_after);

/// Per-table tolerance: opts.epsilon when set, the relative default otherwise.
int effective_epsilon(const PipelineOptions& opts, const ContingencyTable& t);

}  // namespace igd
