#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "igd/corpus.hpp"
#include "igd/features.hpp"

namespace igd {

/// Few-shot demonstration for one rewrite direction.
struct Exemplar {
    std::string before_instruction;
    std::string before_answer;
    std::string after_instruction;
    std::string after_answer;
};

/// A do(B=b') request for one sample.
struct RewriteRequest {
    Sample sample;
    std::string feature;
    Extractor extractor = Extractor::NegationPresence;
    std::string source_value;
    std::string target_value;
    std::string target_answer_class;  // equals the sample's class unless coupled
    std::vector<Exemplar> exemplars;
};

struct RewriteResult {
    std::string instruction;
    std::string answer;
    std::string raw;  // untouched completion text, kept for the audit log
};

class Rewriter {
public:
    virtual ~Rewriter() = default;
    virtual RewriteResult rewrite(const RewriteRequest& req) = 0;
};

enum class BackendKind { Remote, Mock };

struct BackendConfig {
    BackendKind kind = BackendKind::Mock;
    std::string endpoint;        // e.g. http://host:port; path is /v1/chat/completions
    std::string model;
    double temperature = 0.0;    // deterministic verification loops by default
    int timeout_ms = 30000;
    std::string credential_env = "IGD_API_KEY";
    double rate_limit_rps = 0.0;  // 0 = unlimited
    int transport_retries = 3;

    // mock knobs
    std::uint64_t mock_seed = 0;
    double mock_fail_rate = 0.0;          // seeded, per sample id
    std::set<std::string> mock_fail_ids;  // deterministic failures
    std::vector<std::string> mock_high_names = {"James", "Taylor Swift", "LeBron James"};
    std::vector<std::string> mock_low_names = {"MORGAN Moses", "Edna Cobb", "Horace Tilling"};

    void validate() const;  // remote requires endpoint + credential
};

/// Both rewriting and popularity classification behind one handle.
class Backend : public Rewriter, public Classifier {
public:
    virtual ~Backend() = default;
};

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg);

/// Deterministic rule-based backend: pure in (request, config, seed).
/// Failure injection (by id set or seeded rate) produces a rewrite that
/// does not meet its target, which the verification loop then rejects.
std::unique_ptr<Backend> make_mock_backend(const BackendConfig& cfg);

/// Chat-completion client over HTTP with bounded transport retries and a
/// simple rate limiter. Distinct from the semantic 3-retry loop upstream.
std::unique_ptr<Backend> make_remote_backend(const BackendConfig& cfg);

/// Prompt text sent for a rewrite request; injective in the sample id.
std::string build_rewrite_prompt(const RewriteRequest& req);

/// Parses a completion into (instruction, answer); accepts a JSON object
/// with those fields or bare text (treated as the rewritten instruction).
RewriteResult parse_rewrite_completion(const std::string& completion, const Sample& original);

BackendConfig backend_config_from_json(const std::string& json_text);
std::string backend_config_to_json(const BackendConfig& cfg);

}  // namespace igd
