#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "helpers.hpp"
#include "igd/commands.hpp"

using namespace igd;
using igd::testing::make_sa_dataset;
using igd::testing::read_file;
using igd::testing::TempDir;
using igd::testing::write_file;

namespace {

RunConfig base_config(TempDir& dir, const Dataset& input) {
    RunConfig cfg;
    cfg.input_path = dir.file("input.jsonl");
    cfg.output_path = dir.file("output.jsonl");
    cfg.plan_path = dir.file("plans.json");
    cfg.report_path = dir.file("report.json");
    cfg.audit_path = dir.file("audit.jsonl");
    cfg.audit_timestamps = false;
    write_dataset(input, cfg.input_path);
    return cfg;
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text)
        if (c == '\n') ++n;
    return n;
}

}  // namespace

TEST_CASE("run config JSON round-trip") {
    RunConfig cfg;
    cfg.input_path = "/tmp/in.jsonl";
    cfg.epsilon = 3;
    cfg.max_rounds = 5;
    cfg.seed = 99;
    cfg.audit_timestamps = false;
    cfg.backend.mock_seed = 7;
    RunConfig back = run_config_from_json(run_config_to_json(cfg));
    CHECK(back.input_path == cfg.input_path);
    CHECK(back.epsilon == 3);
    CHECK(back.max_rounds == 5);
    CHECK(back.seed == 99);
    CHECK(back.audit_timestamps == false);
    CHECK(back.backend.mock_seed == 7);
    CHECK(back.max_retries == 3);  // default
    CHECK_THROWS_AS(run_config_from_json("nonsense"), ConfigError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/cfg.json"), IoFailure);
}

TEST_CASE("audit records are line-delimited JSON with a stable digest") {
    RewriteOutcome o;
    o.request.sample.id = "s1";
    o.request.sample.task = Task::SA;
    o.request.sample.instruction = "text";
    o.request.sample.answer = "positive";
    o.request.feature = "negation";
    o.request.target_value = "present";
    o.attempts = 2;
    o.success = true;
    o.verification_trace = {{1, "absent", false}, {2, "present", true}};

    std::string line = audit_record(o, false);
    CHECK(line.find('\n') == std::string::npos);
    auto j = nlohmann::json::parse(line);
    CHECK(j.at("sample_id") == "s1");
    CHECK(j.at("feature") == "negation");
    CHECK(j.at("attempts") == 2);
    CHECK(j.at("success") == true);
    CHECK(j.at("verification_trace").size() == 2);
    CHECK(j.at("verification_trace")[0].at("pass") == false);
    CHECK_FALSE(j.contains("timestamp_ms"));
    CHECK(audit_record(o, false) == line);  // deterministic without timestamps

    auto with_ts = nlohmann::json::parse(audit_record(o, true));
    CHECK(with_ts.contains("timestamp_ms"));
}

TEST_CASE("debias pipeline drives a biased SA set to the goal") {
    Dataset input = make_sa_dataset(30, 10, 10, 30);
    BackendConfig bc;
    auto backend = make_backend(bc);
    PipelineOptions opts;
    opts.epsilon = 0;
    opts.audit_timestamps = false;
    std::vector<std::string> audit_lines;
    PipelineResult res =
        debias_pipeline(input, default_feature_specs(), *backend, default_negation_lexicon(),
                        opts, [&](const std::string& l) { audit_lines.push_back(l); });
    CHECK(res.all_goals_met);
    CHECK(res.dataset.size() == input.size());
    REQUIRE(res.features.size() == 1);
    const FeatureOutcome& o = res.features[0];
    CHECK(o.feature == "negation");
    CHECK(o.before.information_gain == doctest::Approx(0.1887).epsilon(1e-3));
    CHECK(o.after.goal_met);
    CHECK(o.after.max_imbalance == 0);
    CHECK(o.after.information_gain <= 1e-9);
    CHECK(o.rewritten == 20);
    CHECK(o.failed == 0);
    CHECK(o.rounds == 1);
    CHECK(audit_lines.size() == 20);
    CHECK(res.uncovered_samples == 0);
}

TEST_CASE("already-balanced input is returned untouched") {
    Dataset input = make_sa_dataset(10, 10, 10, 10);
    BackendConfig bc;
    auto backend = make_backend(bc);
    PipelineOptions opts;
    opts.epsilon = 0;
    PipelineResult res = debias_pipeline(input, default_feature_specs(), *backend,
                                         default_negation_lexicon(), opts);
    CHECK(res.all_goals_met);
    CHECK(res.features[0].rewritten == 0);
    CHECK(res.features[0].rounds == 0);
    for (const Sample& s : res.dataset.samples())
        CHECK(s.provenance == Provenance::Original);
}

TEST_CASE("samples of uncovered tasks pass through verbatim") {
    std::vector<Sample> extra = make_sa_dataset(6, 2, 2, 6).samples();
    Sample other;
    other.id = "misc1";
    other.task = Task::OTHER;
    other.instruction = "summarize this";
    other.answer = "a summary";
    extra.push_back(other);
    Dataset input(extra);
    BackendConfig bc;
    auto backend = make_backend(bc);
    PipelineOptions opts;
    opts.epsilon = 0;
    PipelineResult res = debias_pipeline(input, default_feature_specs(), *backend,
                                         default_negation_lexicon(), opts);
    CHECK(res.uncovered_samples == 1);
    CHECK(res.dataset.at("misc1") == other);
}

TEST_CASE("cmd_analyze writes diagnostics and exits 0") {
    TempDir dir;
    RunConfig cfg = base_config(dir, make_sa_dataset(10, 30, 30, 10));
    std::ostringstream out, err;
    CHECK(cmd_analyze(cfg, out, err) == kExitOk);
    auto j = nlohmann::json::parse(read_file(cfg.report_path));
    REQUIRE(j.at("reports").size() == 1);
    auto& r = j.at("reports")[0];
    CHECK(r.at("task") == "SA");
    CHECK(r.at("feature") == "negation");
    CHECK(r.at("before").at("information_gain_bits").get<double>() ==
          doctest::Approx(0.1887).epsilon(1e-3));
    CHECK(r.at("before").at("goal_met") == false);
    CHECK_FALSE(r.contains("after"));
    CHECK(out.str().find("SA/negation") != std::string::npos);
}

TEST_CASE("plan then rewrite then verify, all through the command layer") {
    TempDir dir;
    RunConfig cfg = base_config(dir, make_sa_dataset(30, 10, 10, 30));
    cfg.epsilon = 0;
    std::ostringstream out, err;

    REQUIRE(cmd_plan(cfg, out, err) == kExitOk);
    auto plans = load_plans(cfg.plan_path);
    REQUIRE(plans.size() == 1);
    CHECK(plans[0].cost == 20);
    CHECK(plans[0].epsilon == 0);
    for (const auto& f : plans[0].flows) CHECK(f.selected.size() == std::size_t(f.amount));

    REQUIRE(cmd_rewrite(cfg, out, err) == kExitOk);
    Dataset output = load_dataset(cfg.output_path);
    CHECK(output.size() == 80);
    int rewritten = 0;
    for (const Sample& s : output.samples())
        if (s.provenance == Provenance::Rewritten) ++rewritten;
    CHECK(rewritten == 20);
    CHECK(count_lines(read_file(cfg.audit_path)) == 20);

    auto report = nlohmann::json::parse(read_file(cfg.report_path));
    CHECK(report.at("reports")[0].at("after").at("goal_met") == true);
    CHECK(report.at("reports")[0].at("information_gain_delta_bits").get<double>() < -0.18);

    RunConfig vcfg = cfg;
    CHECK(cmd_verify(vcfg, out, err) == kExitOk);  // recomputed from output text alone

    // verify against the biased input instead
    vcfg.output_path = cfg.input_path;
    CHECK(cmd_verify(vcfg, out, err) == kExitGoalUnmet);

    REQUIRE(cmd_report(cfg, out, err) == kExitOk);
    auto cmp = nlohmann::json::parse(read_file(cfg.report_path));
    CHECK(cmp.at("reports")[0].at("rewritten") == 20);
    CHECK(cmp.at("reports")[0].at("failed") == 0);
}

TEST_CASE("exit codes: config trouble is 1, infeasible is 2, unmet goal is 3") {
    TempDir dir;
    std::ostringstream out, err;

    SUBCASE("missing input file") {
        RunConfig cfg;
        cfg.input_path = dir.file("absent.jsonl");
        CHECK(cmd_analyze(cfg, out, err) == kExitConfig);
        CHECK(err.str().find("error:") != std::string::npos);
    }
    SUBCASE("plan without a plan path") {
        RunConfig cfg = base_config(dir, make_sa_dataset(4, 2, 2, 4));
        cfg.plan_path.clear();
        CHECK(cmd_plan(cfg, out, err) == kExitConfig);
    }
    SUBCASE("infeasible epsilon") {
        // row totals 9 vs 1: epsilon 0 cannot balance two columns
        RunConfig cfg = base_config(dir, make_sa_dataset(6, 3, 1, 0));
        cfg.epsilon = 0;
        CHECK(cmd_plan(cfg, out, err) == kExitInfeasible);
        CHECK(err.str().find("minimum feasible epsilon") != std::string::npos);
    }
    SUBCASE("goal unmet after exhausting rounds") {
        RunConfig cfg = base_config(dir, make_sa_dataset(30, 10, 10, 30));
        cfg.epsilon = 0;
        cfg.max_rounds = 0;
        cfg.plan_path.clear();  // plan internally; no plan file was written
        // every rewrite fails deterministically
        cfg.backend.mock_fail_rate = 1.0;
        CHECK(cmd_rewrite(cfg, out, err) == kExitGoalUnmet);
        Dataset output = load_dataset(cfg.output_path);
        for (const Sample& s : output.samples())
            CHECK(s.provenance != Provenance::Rewritten);
    }
}

TEST_CASE("rewrite honors a persisted plan file") {
    TempDir dir;
    RunConfig cfg = base_config(dir, make_sa_dataset(12, 4, 4, 12));
    cfg.epsilon = 0;
    std::ostringstream out, err;
    REQUIRE(cmd_plan(cfg, out, err) == kExitOk);
    auto plans = load_plans(cfg.plan_path);
    REQUIRE(cmd_rewrite(cfg, out, err) == kExitOk);
    // the executed rewrites are exactly the planned selections
    Dataset output = load_dataset(cfg.output_path);
    std::set<std::string> planned_ids;
    for (const auto& f : plans[0].flows)
        planned_ids.insert(f.selected.begin(), f.selected.end());
    for (const Sample& s : output.samples()) {
        bool changed = s.provenance == Provenance::Rewritten;
        CHECK(changed == (planned_ids.count(s.id) > 0));
    }
}

TEST_CASE("identical configs reproduce byte-identical artifacts") {
    TempDir dir1, dir2;
    Dataset input = make_sa_dataset(25, 9, 7, 27);
    RunConfig c1 = base_config(dir1, input);
    RunConfig c2 = base_config(dir2, input);
    c1.seed = c2.seed = 1234;
    std::ostringstream out, err;
    REQUIRE(cmd_plan(c1, out, err) == kExitOk);
    REQUIRE(cmd_plan(c2, out, err) == kExitOk);
    CHECK(read_file(c1.plan_path) == read_file(c2.plan_path));
    REQUIRE(cmd_rewrite(c1, out, err) == kExitOk);
    REQUIRE(cmd_rewrite(c2, out, err) == kExitOk);
    CHECK(read_file(c1.output_path) == read_file(c2.output_path));
    CHECK(read_file(c1.report_path) == read_file(c2.report_path));
    CHECK(read_file(c1.audit_path) == read_file(c2.audit_path));

    // a different seed still reaches the goal, generally via other samples
    RunConfig c3 = base_config(dir1, input);
    c3.seed = 777;
    c3.plan_path.clear();  // plan internally instead of reusing c1's plan file
    REQUIRE(cmd_rewrite(c3, out, err) == kExitOk);
}
