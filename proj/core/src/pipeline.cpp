#include "igd/pipeline.hpp"

#include <chrono>
#include <set>

#include <json.hpp>

namespace igd {

using nlohmann::json;

namespace {

std::uint64_t derive_seed(std::uint64_t base, const std::string& tag) {
    std::uint64_t h = base ^ 0x9e3779b97f4a7c15ull;
    for (unsigned char c : tag) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    h ^= h >> 29;
    return h;
}

std::string digest(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

bool task_present(const Dataset& ds, Task t) {
    auto it = ds.task_index().find(t);
    return it != ds.task_index().end() && !it->second.empty();
}

}  // namespace

int effective_epsilon(const PipelineOptions& opts, const ContingencyTable& t) {
    return opts.epsilon >= 0 ? opts.epsilon : default_epsilon(t);
}

std::string audit_record(const RewriteOutcome& o, bool with_timestamp) {
    json j;
    j["sample_id"] = o.request.sample.id;
    j["feature"] = o.request.feature;
    j["target_value"] = o.request.target_value;
    j["request_digest"] = digest(build_rewrite_prompt(o.request));
    j["attempts"] = o.attempts;
    j["success"] = o.success;
    json trace = json::array();
    for (const auto& e : o.verification_trace)
        trace.push_back(
            {{"attempt", e.attempt}, {"extracted", e.extracted_value}, {"pass", e.pass}});
    j["verification_trace"] = trace;
    if (with_timestamp) {
        j["timestamp_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(
                                std::chrono::system_clock::now().time_since_epoch())
                                .count();
    }
    return j.dump();
}

std::vector<InterventionPlan> plan_all(const Dataset& extracted,
                                       const std::vector<FeatureSpec>& specs,
                                       const PipelineOptions& opts) {
    std::vector<InterventionPlan> plans;
    for (const FeatureSpec& spec : specs) {
        if (!task_present(extracted, spec.task)) continue;
        ContingencyTable t = tabulate(extracted, spec);
        if (t.total() == 0) continue;
        int eps = effective_epsilon(opts, t);
        CellIds ids = cell_index(extracted, spec);
        std::uint64_t seed = derive_seed(opts.seed, spec.name + "/" + to_string(spec.task));
        plans.push_back(plan(t, spec, eps, seed, &ids));
    }
    return plans;
}

namespace {

struct FeatureRun {
    const FeatureSpec* spec;
    FeatureOutcome outcome;
    std::set<std::string> frozen;
};

void log_outcomes(const std::vector<RewriteOutcome>& outcomes, const AuditSink& audit,
                  bool timestamps, FeatureRun& run) {
    for (const auto& o : outcomes) {
        if (o.success)
            ++run.outcome.rewritten;
        else {
            ++run.outcome.failed;
            run.frozen.insert(o.request.sample.id);
        }
        if (audit) audit(audit_record(o, timestamps));
    }
}

PipelineResult run_pipeline(const Dataset& ds, const std::vector<FeatureSpec>& specs,
                            const std::vector<InterventionPlan>* preplanned, Backend& backend,
                            const Lexicon& lexicon, const PipelineOptions& opts,
                            const AuditSink& audit) {
    Dataset current = extract_all(ds, specs, lexicon, &backend);

    std::size_t uncovered = 0;
    for (const Sample& s : current.samples()) {
        bool covered = false;
        for (const FeatureSpec& spec : specs)
            if (spec.task == s.task) covered = true;
        if (!covered) ++uncovered;
    }

    PipelineResult result;
    result.uncovered_samples = uncovered;
    result.all_goals_met = true;

    for (const FeatureSpec& spec : specs) {
        if (!task_present(current, spec.task)) continue;
        ContingencyTable before = tabulate(current, spec);
        if (before.total() == 0) continue;
        int eps = effective_epsilon(opts, before);

        FeatureRun run{&spec, {}, {}};
        run.outcome.task = spec.task;
        run.outcome.feature = spec.name;
        run.outcome.before = goal_check(before, eps);

        // initial pass: a supplied plan when one names this pair, else fresh
        if (!run.outcome.before.goal_met) {
            InterventionPlan first;
            bool have_plan = false;
            if (preplanned) {
                for (const auto& p : *preplanned)
                    if (p.feature == spec.name && p.task == spec.task) {
                        first = p;
                        have_plan = true;
                    }
            } else {
                CellIds ids = cell_index(current, spec);
                std::uint64_t seed =
                    derive_seed(opts.seed, spec.name + "/" + to_string(spec.task));
                first = plan(before, spec, eps, seed, &ids);
                have_plan = true;
            }
            if (have_plan && first.cost > 0) {
                auto [next, outcomes] = execute_plan(current, first, backend, specs, lexicon,
                                                     &backend, opts.max_retries);
                current = std::move(next);
                log_outcomes(outcomes, audit, opts.audit_timestamps, run);
                run.outcome.rounds = 1;
            }

            for (int round = 0; round < opts.max_rounds; ++round) {
                ContingencyTable t = tabulate(current, spec);
                if (goal_check(t, eps).goal_met) break;
                CellIds ids = cell_index(current, spec);
                std::uint64_t seed = derive_seed(
                    opts.seed, spec.name + "/" + to_string(spec.task) + "#" +
                                   std::to_string(round));
                InterventionPlan residual =
                    replan_residual(t, spec, eps, run.frozen, seed, ids);
                if (residual.cost == 0) break;
                auto [next, outcomes] = execute_plan(current, residual, backend, specs, lexicon,
                                                     &backend, opts.max_retries);
                current = std::move(next);
                log_outcomes(outcomes, audit, opts.audit_timestamps, run);
                ++run.outcome.rounds;
            }
        }

        run.outcome.after = goal_check(tabulate(current, spec), eps);
        result.all_goals_met = result.all_goals_met && run.outcome.after.goal_met;
        result.features.push_back(std::move(run.outcome));
    }

    result.dataset = std::move(current);
    return result;
}

}  // namespace

PipelineResult debias_pipeline(const Dataset& ds, const std::vector<FeatureSpec>& specs,
                               Backend& backend, const Lexicon& lexicon,
                               const PipelineOptions& opts, const AuditSink& audit) {
    return run_pipeline(ds, specs, nullptr, backend, lexicon, opts, audit);
}

PipelineResult execute_pipeline(const Dataset& ds, const std::vector<FeatureSpec>& specs,
                                const std::vector<InterventionPlan>& plans, Backend& backend,
                                const Lexicon& lexicon, const PipelineOptions& opts,
                                const AuditSink& audit) {
    return run_pipeline(ds, specs, &plans, backend, lexicon, opts, audit);
}

namespace {

json report_json(const BiasReport& r) {
    return json{{"counts", r.table.counts},
                {"answer_classes", r.table.answer_classes},
                {"feature_values", r.table.feature_values},
                {"coupled", r.table.coupled},
                {"entropy_answer_bits", r.entropy_answer},
                {"conditional_entropy_bits", r.conditional_entropy},
                {"information_gain_bits", r.information_gain},
                {"max_imbalance", r.max_imbalance},
                {"epsilon", r.epsilon},
                {"goal_met", r.goal_met}};
}

}  // namespace

std::string serialize_reports(const std::vector<FeatureOutcome>& features, std::size_t uncovered,
                              bool include_after) {
    json out;
    out["uncovered_samples"] = uncovered;
    out["reports"] = json::array();
    for (const auto& f : features) {
        json j;
        j["task"] = to_string(f.task);
        j["feature"] = f.feature;
        j["before"] = report_json(f.before);
        if (include_after) {
            j["after"] = report_json(f.after);
            j["information_gain_delta_bits"] =
                f.after.information_gain - f.before.information_gain;
            j["rewritten"] = f.rewritten;
            j["failed"] = f.failed;
            j["rounds"] = f.rounds;
        }
        out["reports"].push_back(std::move(j));
    }
    return out.dump(2) + "\n";
}

}  // namespace igd
