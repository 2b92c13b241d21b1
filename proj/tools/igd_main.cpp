// Command-line front end: analyze | plan | rewrite | verify | report.
// A --config JSON file supplies defaults; explicit flags override it.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "igd/commands.hpp"

namespace {

struct FlagState {
    std::string config_path;
    igd::RunConfig cfg;
    std::string backend_kind;
    std::string endpoint;
    std::string model;
};

void add_common_flags(CLI::App* cmd, FlagState& st) {
    cmd->add_option("--config", st.config_path, "run config JSON; flags override it");
    cmd->add_option("--input", st.cfg.input_path, "input dataset (JSONL)");
    cmd->add_option("--output", st.cfg.output_path, "output dataset (JSONL)");
    cmd->add_option("--features", st.cfg.features_path, "feature spec config (JSON)");
    cmd->add_option("--lexicon", st.cfg.lexicon_path, "negation lexicon file");
    cmd->add_option("--plan", st.cfg.plan_path, "plan file");
    cmd->add_option("--report", st.cfg.report_path, "report file");
    cmd->add_option("--audit", st.cfg.audit_path, "audit log (JSONL)");
    cmd->add_option("--epsilon", st.cfg.epsilon,
                    "balance tolerance per feature value (-1: relative default)");
    cmd->add_option("--max-retries", st.cfg.max_retries, "semantic rewrite attempts per sample");
    cmd->add_option("--max-rounds", st.cfg.max_rounds, "residual replan rounds");
    cmd->add_option("--seed", st.cfg.seed, "RNG seed for sample selection");
    cmd->add_option("--backend", st.backend_kind, "backend kind: mock | remote");
    cmd->add_option("--endpoint", st.endpoint, "remote backend base URL");
    cmd->add_option("--model", st.model, "remote model name");
}

igd::RunConfig resolve(const CLI::App* cmd, const FlagState& st) {
    igd::RunConfig cfg = st.cfg;
    if (!st.config_path.empty()) {
        igd::RunConfig base = igd::load_run_config(st.config_path);
        auto keep = [&](const std::string& flag) { return cmd->count(flag) > 0; };
        if (!keep("--input")) cfg.input_path = base.input_path;
        if (!keep("--output")) cfg.output_path = base.output_path;
        if (!keep("--features")) cfg.features_path = base.features_path;
        if (!keep("--lexicon")) cfg.lexicon_path = base.lexicon_path;
        if (!keep("--plan")) cfg.plan_path = base.plan_path;
        if (!keep("--report")) cfg.report_path = base.report_path;
        if (!keep("--audit")) cfg.audit_path = base.audit_path;
        if (!keep("--epsilon")) cfg.epsilon = base.epsilon;
        if (!keep("--max-retries")) cfg.max_retries = base.max_retries;
        if (!keep("--max-rounds")) cfg.max_rounds = base.max_rounds;
        if (!keep("--seed")) cfg.seed = base.seed;
        cfg.backend = base.backend;
        cfg.audit_timestamps = base.audit_timestamps;
    }
    if (cmd->count("--backend"))
        cfg.backend.kind =
            st.backend_kind == "remote" ? igd::BackendKind::Remote : igd::BackendKind::Mock;
    if (cmd->count("--endpoint")) cfg.backend.endpoint = st.endpoint;
    if (cmd->count("--model")) cfg.backend.model = st.model;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"information gain guided dataset debiasing"};
    app.require_subcommand(1);

    FlagState st;
    CLI::App* analyze = app.add_subcommand("analyze", "bias diagnostics per (task, feature)");
    CLI::App* plan = app.add_subcommand("plan", "compute minimal intervention plans");
    CLI::App* rewrite = app.add_subcommand("rewrite", "execute rewrites and emit the dataset");
    CLI::App* verify = app.add_subcommand("verify", "recompute goals from a dataset");
    CLI::App* report = app.add_subcommand("report", "before/after summary");
    for (CLI::App* cmd : {analyze, plan, rewrite, verify, report}) add_common_flags(cmd, st);

    CLI11_PARSE(app, argc, argv);

    try {
        if (analyze->parsed())
            return igd::cmd_analyze(resolve(analyze, st), std::cout, std::cerr);
        if (plan->parsed()) return igd::cmd_plan(resolve(plan, st), std::cout, std::cerr);
        if (rewrite->parsed())
            return igd::cmd_rewrite(resolve(rewrite, st), std::cout, std::cerr);
        if (verify->parsed()) return igd::cmd_verify(resolve(verify, st), std::cout, std::cerr);
        if (report->parsed()) return igd::cmd_report(resolve(report, st), std::cout, std::cerr);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return igd::kExitConfig;
    }
    return igd::kExitConfig;
}
