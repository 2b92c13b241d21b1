#include "igd/backends.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include <httplib.h>

namespace igd {

using nlohmann::json;

void BackendConfig::validate() const {
    if (kind == BackendKind::Remote) {
        if (endpoint.empty()) throw ConfigError("remote backend requires an endpoint");
        if (credential_env.empty())
            throw ConfigError("remote backend requires a credential env var name");
    }
    if (temperature < 0.0) throw ConfigError("temperature must be non-negative");
    if (mock_fail_rate < 0.0 || mock_fail_rate > 1.0)
        throw ConfigError("mock_fail_rate must be in [0,1]");
}

std::string build_rewrite_prompt(const RewriteRequest& req) {
    std::ostringstream out;
    out << "Rewrite the following " << to_string(req.sample.task)
        << " sample so that its feature `" << req.feature << "` becomes `" << req.target_value
        << "` (currently `" << req.source_value << "`). "
        << "Change only what is tied to that feature; keep all other semantics intact.\n";
    if (req.target_answer_class != req.sample.answer)
        out << "The rewritten answer must belong to class `" << req.target_answer_class << "`.\n";
    out << "Respond with a JSON object {\"instruction\": ..., \"answer\": ...}.\n";
    for (std::size_t i = 0; i < req.exemplars.size(); ++i) {
        const Exemplar& e = req.exemplars[i];
        out << "\nExample " << (i + 1) << ":\nBefore instruction: " << e.before_instruction
            << "\nBefore answer: " << e.before_answer
            << "\nAfter instruction: " << e.after_instruction
            << "\nAfter answer: " << e.after_answer << "\n";
    }
    out << "\n[sample " << req.sample.id << "]\nInstruction: " << req.sample.instruction
        << "\nAnswer: " << req.sample.answer << "\n";
    return out.str();
}

RewriteResult parse_rewrite_completion(const std::string& completion, const Sample& original) {
    if (completion.empty())
        throw BackendFailure(BackendErrorKind::EmptyCompletion, "empty completion");
    RewriteResult r;
    r.raw = completion;
    json j = json::parse(completion, nullptr, false);
    if (j.is_object() && j.contains("instruction")) {
        r.instruction = j.at("instruction").get<std::string>();
        r.answer = j.value("answer", original.answer);
    } else {
        r.instruction = completion;
        r.answer = original.answer;
    }
    return r;
}

namespace {

std::uint64_t mix_hash(std::uint64_t seed, const std::string& id) {
    std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
    for (unsigned char c : id) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdull;
    h ^= h >> 33;
    return h;
}

std::string lowercase(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

bool replace_first(std::string& text, const std::string& from, const std::string& to) {
    auto pos = text.find(from);
    if (pos == std::string::npos) return false;
    text.replace(pos, from.size(), to);
    return true;
}

std::string replace_all_copy(std::string text, const std::string& from, const std::string& to) {
    std::size_t pos = 0;
    while ((pos = text.find(from, pos)) != std::string::npos) {
        text.replace(pos, from.size(), to);
        pos += to.size();
    }
    return text;
}

// ---- mock backend ----

class MockBackend final : public Backend {
public:
    explicit MockBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {}

    RewriteResult rewrite(const RewriteRequest& req) override {
        if (should_fail(req.sample.id)) {
            // an injected failure: hand the sample back untouched so the
            // verification loop rejects it
            return {req.sample.instruction, req.sample.answer, "(mock failure)"};
        }
        switch (req.extractor) {
            case Extractor::NegationPresence:
                return rewrite_negation(req);
            case Extractor::LexicalOverlap:
                return rewrite_overlap(req);
            case Extractor::Popularity:
                return rewrite_popularity(req);
            case Extractor::CustomClassifier:
                break;
        }
        throw BackendFailure(BackendErrorKind::EmptyCompletion,
                             "mock backend cannot rewrite extractor kind for " + req.feature);
    }

    std::string classify(const std::string& prompt) override {
        // entity context is the prompt's last non-empty line
        std::istringstream in(prompt);
        std::string line, entity;
        while (std::getline(in, line))
            if (!line.empty()) entity = line;
        for (const auto& name : cfg_.mock_high_names)
            if (lowercase(entity).find(lowercase(name)) != std::string::npos) return "high";
        return "low";
    }

private:
    bool should_fail(const std::string& id) const {
        if (cfg_.mock_fail_ids.count(id)) return true;
        if (cfg_.mock_fail_rate <= 0.0) return false;
        double u = static_cast<double>(mix_hash(cfg_.mock_seed, id) >> 11) /
                   static_cast<double>(1ull << 53);
        return u < cfg_.mock_fail_rate;
    }

    RewriteResult rewrite_negation(const RewriteRequest& req) const {
        std::string text = req.sample.instruction;
        if (req.target_value == "present") {
            if (!replace_first(text, "remembering", "cannot forget") &&
                !replace_first(text, " is ", " is not ") &&
                !replace_first(text, " was ", " was not ") &&
                !replace_first(text, " are ", " are not ")) {
                text = "It is not wrong that " + text;
            }
        } else {
            text = strip_negations(text);
        }
        return {text, req.sample.answer, "(mock)"};
    }

    std::string strip_negations(const std::string& text) const {
        std::string out = replace_all_copy(text, "cannot forget", "remembering");
        std::istringstream in(out);
        std::string word, rebuilt;
        const Lexicon& lex = default_negation_lexicon();
        while (in >> word) {
            auto tokens = tokenize(word);
            bool negated = std::any_of(tokens.begin(), tokens.end(),
                                       [&](const std::string& t) { return lex.count(t) > 0; });
            if (negated) {
                // keep the stem of n't contractions ("don't" -> "do")
                if (tokens.size() == 2 && tokens[1] == "n't") {
                    if (!rebuilt.empty()) rebuilt += ' ';
                    rebuilt += tokens[0];
                }
                continue;
            }
            if (!rebuilt.empty()) rebuilt += ' ';
            rebuilt += word;
        }
        return rebuilt;
    }

    RewriteResult rewrite_overlap(const RewriteRequest& req) const {
        auto [first, second] = split_sentence_pair(req.sample.instruction);
        std::vector<std::string> base = tokenize(first);
        std::vector<std::string> distinct;
        for (const auto& t : base)
            if (std::find(distinct.begin(), distinct.end(), t) == distinct.end())
                distinct.push_back(t);
        std::string rewritten;
        if (req.target_value == "high") {
            rewritten = first;
        } else if (req.target_value == "low") {
            std::uint64_t h = mix_hash(cfg_.mock_seed, req.sample.id);
            for (int i = 0; i < 5; ++i)
                rewritten += (i ? " " : "") + ("zq" + std::to_string(h % 97) + std::to_string(i));
        } else {
            // half shared, half fresh tokens lands the rate at exactly 0.5
            std::size_t k = std::max<std::size_t>(1, distinct.size() / 2);
            for (std::size_t i = 0; i < k; ++i) rewritten += (i ? " " : "") + distinct[i];
            for (std::size_t i = 0; i < k; ++i) rewritten += " fq" + std::to_string(i);
        }
        std::string instruction = rebuild_pair(req.sample.instruction, rewritten);
        return {instruction, req.sample.answer, "(mock)"};
    }

    static std::string rebuild_pair(const std::string& instruction, const std::string& second) {
        std::istringstream in(instruction);
        std::string line, out;
        bool replaced = false;
        while (std::getline(in, line)) {
            std::string lower = lowercase(line);
            if (!replaced &&
                (lower.rfind("sentence 2:", 0) == 0 || lower.rfind("hypothesis:", 0) == 0)) {
                std::string prefix = line.substr(0, line.find(':') + 1);
                line = prefix + " " + second;
                replaced = true;
            }
            out += line;
            out += '\n';
        }
        if (!out.empty()) out.pop_back();
        return out;
    }

    RewriteResult rewrite_popularity(const RewriteRequest& req) const {
        const auto& table =
            req.target_value == "high" ? cfg_.mock_high_names : cfg_.mock_low_names;
        if (table.empty())
            throw BackendFailure(BackendErrorKind::EmptyCompletion, "empty mock name table");
        std::string replacement =
            table[mix_hash(cfg_.mock_seed, req.sample.id) % table.size()];
        std::string instruction =
            replace_all_copy(req.sample.instruction, req.sample.answer, replacement);
        return {instruction, replacement, "(mock)"};
    }

    BackendConfig cfg_;
};

// ---- remote chat-completion backend ----

class RateLimiter {
public:
    explicit RateLimiter(double rps) : min_interval_(rps > 0.0 ? 1.0 / rps : 0.0) {}

    void acquire() {
        if (min_interval_ <= 0.0) return;
        std::unique_lock lock(mu_);
        auto now = std::chrono::steady_clock::now();
        auto interval = std::chrono::duration<double>(min_interval_);
        if (next_ > now) {
            auto wait = next_ - now;
            next_ += std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval);
            lock.unlock();
            std::this_thread::sleep_for(wait);
            return;
        }
        next_ = now + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval);
    }

private:
    double min_interval_;
    std::mutex mu_;
    std::chrono::steady_clock::time_point next_{};
};

class RemoteBackend final : public Backend {
public:
    explicit RemoteBackend(BackendConfig cfg)
        : cfg_(std::move(cfg)), limiter_(cfg_.rate_limit_rps) {
        const char* key = std::getenv(cfg_.credential_env.c_str());
        if (!key || !*key)
            throw ConfigError("credential env var is not set: " + cfg_.credential_env);
        api_key_ = key;
    }

    RewriteResult rewrite(const RewriteRequest& req) override {
        std::string completion = complete(build_rewrite_prompt(req));
        return parse_rewrite_completion(completion, req.sample);
    }

    std::string classify(const std::string& prompt) override { return complete(prompt); }

private:
    std::string complete(const std::string& prompt) {
        json body;
        body["model"] = cfg_.model;
        body["temperature"] = cfg_.temperature;
        body["messages"] = json::array({{{"role", "user"}, {"content", prompt}}});
        std::string payload = body.dump();

        std::string last_error;
        for (int attempt = 0; attempt < std::max(1, cfg_.transport_retries); ++attempt) {
            if (attempt > 0)
                std::this_thread::sleep_for(std::chrono::milliseconds(200 << attempt));
            limiter_.acquire();
            httplib::Client client(cfg_.endpoint);
            client.set_connection_timeout(0, cfg_.timeout_ms * 1000);
            client.set_read_timeout(cfg_.timeout_ms / 1000, (cfg_.timeout_ms % 1000) * 1000);
            client.set_bearer_token_auth(api_key_);
            auto res = client.Post("/v1/chat/completions", payload, "application/json");
            if (!res) {
                last_error = httplib::to_string(res.error());
                continue;
            }
            if (res->status == 429)
                throw BackendFailure(BackendErrorKind::RateLimited, "server returned 429");
            if (res->status != 200) {
                last_error = "HTTP " + std::to_string(res->status);
                continue;
            }
            json j = json::parse(res->body, nullptr, false);
            if (j.is_discarded())
                throw BackendFailure(BackendErrorKind::EmptyCompletion,
                                     "response is not valid JSON");
            std::string content =
                j.value("choices", json::array()).empty()
                    ? ""
                    : j["choices"][0].value("message", json::object()).value("content", "");
            if (content.empty())
                throw BackendFailure(BackendErrorKind::EmptyCompletion,
                                     "completion has no content");
            return content;
        }
        throw BackendFailure(BackendErrorKind::TransportFailure,
                             "transport failed after retries: " + last_error);
    }

    BackendConfig cfg_;
    RateLimiter limiter_;
    std::string api_key_;
};

}  // namespace

std::unique_ptr<Backend> make_mock_backend(const BackendConfig& cfg) {
    cfg.validate();
    return std::make_unique<MockBackend>(cfg);
}

std::unique_ptr<Backend> make_remote_backend(const BackendConfig& cfg) {
    cfg.validate();
    return std::make_unique<RemoteBackend>(cfg);
}

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg) {
    return cfg.kind == BackendKind::Mock ? make_mock_backend(cfg) : make_remote_backend(cfg);
}

BackendConfig backend_config_from_json(const std::string& json_text) {
    json j = json::parse(json_text, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ConfigError("backend config must be a JSON object");
    BackendConfig cfg;
    std::string kind = j.value("kind", "mock");
    if (kind == "mock")
        cfg.kind = BackendKind::Mock;
    else if (kind == "remote")
        cfg.kind = BackendKind::Remote;
    else
        throw ConfigError("unknown backend kind: " + kind);
    cfg.endpoint = j.value("endpoint", cfg.endpoint);
    cfg.model = j.value("model", cfg.model);
    cfg.temperature = j.value("temperature", cfg.temperature);
    cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
    cfg.credential_env = j.value("credential_env", cfg.credential_env);
    cfg.rate_limit_rps = j.value("rate_limit_rps", cfg.rate_limit_rps);
    cfg.transport_retries = j.value("transport_retries", cfg.transport_retries);
    cfg.mock_seed = j.value("mock_seed", cfg.mock_seed);
    cfg.mock_fail_rate = j.value("mock_fail_rate", cfg.mock_fail_rate);
    if (j.contains("mock_fail_ids"))
        for (const auto& id : j.at("mock_fail_ids"))
            cfg.mock_fail_ids.insert(id.get<std::string>());
    if (j.contains("mock_high_names"))
        cfg.mock_high_names = j.at("mock_high_names").get<std::vector<std::string>>();
    if (j.contains("mock_low_names"))
        cfg.mock_low_names = j.at("mock_low_names").get<std::vector<std::string>>();
    cfg.validate();
    return cfg;
}

std::string backend_config_to_json(const BackendConfig& cfg) {
    json j;
    j["kind"] = cfg.kind == BackendKind::Mock ? "mock" : "remote";
    j["endpoint"] = cfg.endpoint;
    j["model"] = cfg.model;
    j["temperature"] = cfg.temperature;
    j["timeout_ms"] = cfg.timeout_ms;
    j["credential_env"] = cfg.credential_env;
    j["rate_limit_rps"] = cfg.rate_limit_rps;
    j["transport_retries"] = cfg.transport_retries;
    j["mock_seed"] = cfg.mock_seed;
    j["mock_fail_rate"] = cfg.mock_fail_rate;
    j["mock_fail_ids"] = cfg.mock_fail_ids;
    j["mock_high_names"] = cfg.mock_high_names;
    j["mock_low_names"] = cfg.mock_low_names;
    return j.dump(2);
}

}  // namespace igd
