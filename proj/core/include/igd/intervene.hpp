#pragma once

#include <functional>
#include <string>
#include <vector>

#include "igd/backends.hpp"
#include "igd/planner.hpp"

namespace igd {

struct VerificationEntry {
    int attempt = 0;
    std::string extracted_value;  // "(error)" when extraction itself failed
    bool pass = false;
};

struct RewriteOutcome {
    RewriteRequest request;
    bool success = false;
    Sample rewritten;  // meaningful only when success
    int attempts = 0;
    std::vector<VerificationEntry> verification_trace;
};

struct ExecuteResult {
    Dataset dataset;
    std::vector<RewriteOutcome> outcomes;
};

/// Default few-shot demonstrations for a rewrite direction; used when no
/// exemplar configuration is supplied.
std::vector<Exemplar> default_exemplars(Extractor extractor, const std::string& target_value);

/// True iff re-extraction on the rewritten sample hits `target` and, for
/// uncoupled specs, the answer class is unchanged. Extraction errors count
/// as a failed verdict. Never trusts the backend's self-report.
bool verify_rewrite(const Sample& original, const Sample& rewritten, const FeatureSpec& spec,
                    const std::string& target, const Lexicon& lexicon, Classifier* oracle);

/// Executes one plan: rewrites each selected sample through the backend with
/// up to `max_retries` semantic attempts, keeps originals on exhaustion
/// (provenance rewrite_failed), and re-extracts features on every success.
ExecuteResult execute_plan(const Dataset& ds, const InterventionPlan& p, Rewriter& backend,
                           const std::vector<FeatureSpec>& specs, const Lexicon& lexicon,
                           Classifier* oracle, int max_retries = 3);

}  // namespace igd
