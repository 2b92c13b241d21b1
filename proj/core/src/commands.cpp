#include "igd/commands.hpp"

#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <sstream>

#include <json.hpp>

namespace igd {

using nlohmann::json;

namespace {

int run_guarded(std::ostream& err, const std::function<int()>& fn) {
    try {
        return fn();
    } catch (const Infeasible& e) {
        err << "error: " << e.what() << "\n";
        return kExitInfeasible;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitConfig;
    }
}

std::vector<FeatureSpec> specs_for(const RunConfig& cfg) {
    return cfg.features_path.empty() ? default_feature_specs()
                                     : load_feature_specs(cfg.features_path);
}

Lexicon lexicon_for(const RunConfig& cfg) {
    return cfg.lexicon_path.empty() ? default_negation_lexicon() : load_lexicon(cfg.lexicon_path);
}

PipelineOptions options_for(const RunConfig& cfg) {
    PipelineOptions opts;
    opts.epsilon = cfg.epsilon;
    opts.max_retries = cfg.max_retries;
    opts.max_rounds = cfg.max_rounds;
    opts.seed = cfg.seed;
    opts.audit_timestamps = cfg.audit_timestamps;
    return opts;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoFailure(path);
    f << text;
    if (!f.good()) throw IoFailure(path);
}

// analyze-style diagnostics without any rewriting
std::vector<FeatureOutcome> diagnose(const Dataset& extracted,
                                     const std::vector<FeatureSpec>& specs,
                                     const PipelineOptions& opts) {
    std::vector<FeatureOutcome> outcomes;
    for (const FeatureSpec& spec : specs) {
        auto it = extracted.task_index().find(spec.task);
        if (it == extracted.task_index().end() || it->second.empty()) continue;
        ContingencyTable t = tabulate(extracted, spec);
        if (t.total() == 0) continue;
        FeatureOutcome o;
        o.task = spec.task;
        o.feature = spec.name;
        o.before = goal_check(t, effective_epsilon(opts, t));
        outcomes.push_back(std::move(o));
    }
    return outcomes;
}

std::size_t count_uncovered(const Dataset& ds, const std::vector<FeatureSpec>& specs) {
    std::size_t n = 0;
    for (const Sample& s : ds.samples()) {
        bool covered = false;
        for (const FeatureSpec& spec : specs)
            if (spec.task == s.task) covered = true;
        if (!covered) ++n;
    }
    return n;
}

void print_report_line(std::ostream& out, const FeatureOutcome& o, bool with_after) {
    out << to_string(o.task) << "/" << o.feature << ": IG " << o.before.information_gain
        << " bits, max imbalance " << o.before.max_imbalance << " (epsilon "
        << o.before.epsilon << "), goal " << (o.before.goal_met ? "met" : "unmet");
    if (with_after)
        out << " -> IG " << o.after.information_gain << " bits, max imbalance "
            << o.after.max_imbalance << ", goal " << (o.after.goal_met ? "met" : "unmet")
            << ", rewritten " << o.rewritten << ", failed " << o.failed;
    out << "\n";
}

}  // namespace

int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        auto specs = specs_for(cfg);
        auto lexicon = lexicon_for(cfg);
        auto backend = make_backend(cfg.backend);
        Dataset extracted = extract_all(load_dataset(cfg.input_path), specs, lexicon,
                                        backend.get());
        auto outcomes = diagnose(extracted, specs, options_for(cfg));
        std::string report =
            serialize_reports(outcomes, count_uncovered(extracted, specs), false);
        if (!cfg.report_path.empty()) write_text(cfg.report_path, report);
        for (const auto& o : outcomes) print_report_line(out, o, false);
        return kExitOk;
    });
}

int cmd_plan(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        auto specs = specs_for(cfg);
        auto lexicon = lexicon_for(cfg);
        auto backend = make_backend(cfg.backend);
        Dataset extracted = extract_all(load_dataset(cfg.input_path), specs, lexicon,
                                        backend.get());
        auto plans = plan_all(extracted, specs, options_for(cfg));
        if (cfg.plan_path.empty()) throw ConfigError("plan command requires --plan path");
        write_plans(plans, cfg.plan_path);
        for (const auto& p : plans)
            out << to_string(p.task) << "/" << p.feature << ": cost " << p.cost << ", epsilon "
                << p.epsilon << ", flows " << p.flows.size() << "\n";
        return kExitOk;
    });
}

int cmd_rewrite(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        auto specs = specs_for(cfg);
        auto lexicon = lexicon_for(cfg);
        auto backend = make_backend(cfg.backend);
        Dataset input = load_dataset(cfg.input_path);
        if (cfg.output_path.empty()) throw ConfigError("rewrite command requires --output path");

        std::ofstream audit_file;
        std::mutex audit_mu;
        AuditSink sink;
        if (!cfg.audit_path.empty()) {
            audit_file.open(cfg.audit_path, std::ios::trunc);
            if (!audit_file) throw IoFailure(cfg.audit_path);
            sink = [&](const std::string& line) {
                std::lock_guard lock(audit_mu);
                audit_file << line << '\n';
            };
        }

        PipelineResult result;
        if (!cfg.plan_path.empty()) {
            auto plans = load_plans(cfg.plan_path);
            result = execute_pipeline(input, specs, plans, *backend, lexicon, options_for(cfg),
                                      sink);
        } else {
            result = debias_pipeline(input, specs, *backend, lexicon, options_for(cfg), sink);
        }

        write_dataset(result.dataset, cfg.output_path);
        if (!cfg.report_path.empty())
            write_text(cfg.report_path,
                       serialize_reports(result.features, result.uncovered_samples, true));
        for (const auto& o : result.features) print_report_line(out, o, true);
        if (result.uncovered_samples > 0)
            out << result.uncovered_samples
                << " sample(s) of uncovered tasks passed through verbatim\n";
        return result.all_goals_met ? kExitOk : kExitGoalUnmet;
    });
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        auto specs = specs_for(cfg);
        auto lexicon = lexicon_for(cfg);
        auto backend = make_backend(cfg.backend);
        std::string path = cfg.output_path.empty() ? cfg.input_path : cfg.output_path;
        // feature values are re-extracted from the text; stored values and
        // the audit log are not trusted
        Dataset extracted = extract_all(load_dataset(path), specs, lexicon, backend.get());
        auto outcomes = diagnose(extracted, specs, options_for(cfg));
        bool all_met = true;
        for (const auto& o : outcomes) {
            print_report_line(out, o, false);
            all_met = all_met && o.before.goal_met;
        }
        return all_met ? kExitOk : kExitGoalUnmet;
    });
}

int cmd_report(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return run_guarded(err, [&] {
        auto specs = specs_for(cfg);
        auto lexicon = lexicon_for(cfg);
        auto backend = make_backend(cfg.backend);
        if (cfg.output_path.empty())
            throw ConfigError("report command compares --input against --output");
        Dataset before_ds =
            extract_all(load_dataset(cfg.input_path), specs, lexicon, backend.get());
        Dataset after_ds =
            extract_all(load_dataset(cfg.output_path), specs, lexicon, backend.get());
        PipelineOptions opts = options_for(cfg);

        std::vector<FeatureOutcome> outcomes;
        for (const FeatureSpec& spec : specs) {
            auto it = before_ds.task_index().find(spec.task);
            if (it == before_ds.task_index().end() || it->second.empty()) continue;
            ContingencyTable tb = tabulate(before_ds, spec);
            ContingencyTable ta = tabulate(after_ds, spec);
            if (tb.total() == 0) continue;
            FeatureOutcome o;
            o.task = spec.task;
            o.feature = spec.name;
            int eps = effective_epsilon(opts, tb);
            o.before = goal_check(tb, eps);
            o.after = goal_check(ta, eps);
            for (const Sample& s : after_ds.samples()) {
                if (s.task != spec.task) continue;
                if (s.provenance == Provenance::Rewritten) ++o.rewritten;
                if (s.provenance == Provenance::RewriteFailed) ++o.failed;
            }
            outcomes.push_back(std::move(o));
        }
        std::string report =
            serialize_reports(outcomes, count_uncovered(after_ds, specs), true);
        if (!cfg.report_path.empty())
            write_text(cfg.report_path, report);
        else
            out << report;
        for (const auto& o : outcomes) print_report_line(out, o, true);
        return kExitOk;
    });
}

RunConfig run_config_from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ConfigError("run config must be a JSON object");
    RunConfig cfg;
    cfg.input_path = j.value("input", "");
    cfg.output_path = j.value("output", "");
    cfg.features_path = j.value("features", "");
    cfg.lexicon_path = j.value("lexicon", "");
    cfg.plan_path = j.value("plan", "");
    cfg.report_path = j.value("report", "");
    cfg.audit_path = j.value("audit", "");
    cfg.epsilon = j.value("epsilon", -1);
    cfg.max_retries = j.value("max_retries", 3);
    cfg.max_rounds = j.value("max_rounds", 2);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.audit_timestamps = j.value("audit_timestamps", true);
    if (j.contains("backend")) cfg.backend = backend_config_from_json(j.at("backend").dump());
    return cfg;
}

std::string run_config_to_json(const RunConfig& cfg) {
    json j;
    j["input"] = cfg.input_path;
    j["output"] = cfg.output_path;
    j["features"] = cfg.features_path;
    j["lexicon"] = cfg.lexicon_path;
    j["plan"] = cfg.plan_path;
    j["report"] = cfg.report_path;
    j["audit"] = cfg.audit_path;
    j["epsilon"] = cfg.epsilon;
    j["max_retries"] = cfg.max_retries;
    j["max_rounds"] = cfg.max_rounds;
    j["seed"] = cfg.seed;
    j["audit_timestamps"] = cfg.audit_timestamps;
    j["backend"] = json::parse(backend_config_to_json(cfg.backend));
    return j.dump(2) + "\n";
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoFailure(path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return run_config_from_json(buf.str());
}

void save_run_config(const RunConfig& cfg, const std::string& path) {
    write_text(path, run_config_to_json(cfg));
}

}  // namespace igd
