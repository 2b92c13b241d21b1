#include "igd/features.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace igd {

using nlohmann::json;

namespace {

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string extractor_name(Extractor e) {
    switch (e) {
        case Extractor::LexicalOverlap: return "lexical_overlap";
        case Extractor::NegationPresence: return "negation_presence";
        case Extractor::Popularity: return "popularity";
        case Extractor::CustomClassifier: return "custom_classifier";
    }
    return "negation_presence";
}

Extractor extractor_from(const std::string& s) {
    if (s == "lexical_overlap") return Extractor::LexicalOverlap;
    if (s == "negation_presence") return Extractor::NegationPresence;
    if (s == "popularity") return Extractor::Popularity;
    if (s == "custom_classifier") return Extractor::CustomClassifier;
    throw ConfigError("unknown extractor: " + s);
}

}  // namespace

void FeatureSpec::validate() const {
    if (name.empty()) throw ConfigError("feature spec without a name");
    if (value_space.empty()) throw ConfigError(name + ": value_space must be non-empty");
    if (std::set<std::string>(value_space.begin(), value_space.end()).size() != value_space.size())
        throw ConfigError(name + ": value_space values must be distinct");
    if (answer_classes.empty()) throw ConfigError(name + ": answer_classes must be non-empty");
    if (std::set<std::string>(answer_classes.begin(), answer_classes.end()).size() !=
        answer_classes.size())
        throw ConfigError(name + ": answer_classes must be distinct");
    if (!bins.empty()) {
        double prev = -1.0;
        for (const Bin& b : bins) {
            if (b.upper <= prev)
                throw ConfigError(name + ": bin upper bounds must be strictly increasing");
            if (value_index(b.label) < 0)
                throw ConfigError(name + ": bin label not in value_space: " + b.label);
            prev = b.upper;
        }
        if (bins.back().upper < 1.0) throw ConfigError(name + ": bins must cover [0,1]");
    }
    if (coupling == Coupling::AnswerEqualsFeature) {
        if (value_space.size() != answer_classes.size())
            throw ConfigError(name +
                              ": answer_equals_feature coupling requires answer_classes and "
                              "value_space in bijection");
        for (const auto& v : value_space)
            if (class_index(v) < 0)
                throw ConfigError(name + ": coupled value has no matching answer class: " + v);
    }
}

int FeatureSpec::value_index(const std::string& v) const {
    auto it = std::find(value_space.begin(), value_space.end(), v);
    return it == value_space.end() ? -1 : static_cast<int>(it - value_space.begin());
}

int FeatureSpec::class_index(const std::string& y) const {
    auto it = std::find(answer_classes.begin(), answer_classes.end(), y);
    return it == answer_classes.end() ? -1 : static_cast<int>(it - answer_classes.begin());
}

const Lexicon& default_negation_lexicon() {
    static const Lexicon lex = {"not", "n't",    "no",      "never", "none",   "nothing",
                                "neither", "nor", "nobody", "cannot", "without"};
    return lex;
}

Lexicon load_lexicon(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoFailure(path);
    Lexicon lex;
    std::string line;
    while (std::getline(f, line)) {
        std::string w = to_lower(trim(line));
        if (!w.empty() && w[0] != '#') lex.insert(w);
    }
    if (lex.empty()) throw ConfigError("lexicon file is empty: " + path);
    return lex;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        if (cur.empty()) return;
        // split the n't clitic into its own token ("don't" -> "do", "n't")
        if (cur.size() > 3 && cur.compare(cur.size() - 3, 3, "n't") == 0) {
            tokens.push_back(cur.substr(0, cur.size() - 3));
            tokens.push_back("n't");
        } else {
            tokens.push_back(cur);
        }
        cur.clear();
    };
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '\'') {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            flush();
        }
    }
    flush();
    return tokens;
}

double lexical_overlap_rate(const std::string& sentence_a, const std::string& sentence_b) {
    std::set<std::string> a_tokens, b_tokens;
    for (auto& t : tokenize(sentence_a)) a_tokens.insert(t);
    for (auto& t : tokenize(sentence_b)) b_tokens.insert(t);
    if (a_tokens.empty() || b_tokens.empty()) throw EmptyText();
    std::size_t shared = 0;
    for (const auto& t : b_tokens) shared += a_tokens.count(t);
    return static_cast<double>(shared) / static_cast<double>(b_tokens.size());
}

FeatureValue bin_feature(double raw, const FeatureSpec& spec) {
    if (spec.bins.empty()) throw NoBins(spec.name);
    for (const Bin& b : spec.bins) {
        if (raw <= b.upper) return {spec.name, b.label, raw};
    }
    return {spec.name, spec.bins.back().label, raw};
}

FeatureValue detect_negation(const std::string& text, const Lexicon& lexicon) {
    if (lexicon.empty()) throw ConfigError("negation lexicon is empty");
    for (const auto& tok : tokenize(text)) {
        if (lexicon.count(tok)) return {"", "present", std::nullopt};
    }
    return {"", "absent", std::nullopt};
}

namespace {

std::optional<std::string> parse_popularity_verdict(const std::string& raw) {
    bool high = false, low = false;
    for (const auto& tok : tokenize(raw)) {
        if (tok == "high") high = true;
        if (tok == "low") low = true;
    }
    if (high == low) return std::nullopt;  // neither or both
    return high ? std::string("high") : std::string("low");
}

std::string popularity_prompt(const std::string& entity_context) {
    return "Is the following individual or location widely known to the general public? "
           "Answer with exactly one word: high or low.\n" +
           entity_context;
}

}  // namespace

FeatureValue classify_popularity(const std::string& entity_context, Classifier& oracle) {
    std::string raw = oracle.classify(popularity_prompt(entity_context));
    auto verdict = parse_popularity_verdict(raw);
    if (!verdict) {
        raw = oracle.classify(popularity_prompt(entity_context));
        verdict = parse_popularity_verdict(raw);
        if (!verdict) throw UnparsableVerdict(raw);
    }
    return {"", *verdict, std::nullopt};
}

std::pair<std::string, std::string> split_sentence_pair(const std::string& instruction) {
    static const std::vector<std::pair<std::string, std::string>> markers = {
        {"sentence 1:", "sentence 2:"}, {"premise:", "hypothesis:"}};
    std::string first, second;
    std::istringstream in(instruction);
    std::string line;
    while (std::getline(in, line)) {
        std::string lower = to_lower(line);
        for (const auto& [m1, m2] : markers) {
            if (lower.rfind(m1, 0) == 0) first = trim(line.substr(m1.size()));
            if (lower.rfind(m2, 0) == 0) second = trim(line.substr(m2.size()));
        }
    }
    if (first.empty() || second.empty())
        throw Error("instruction lacks a recognizable sentence pair");
    return {first, second};
}

FeatureValue extract_feature(const Sample& s, const FeatureSpec& spec, const Lexicon& lexicon,
                             Classifier* oracle) {
    try {
        switch (spec.extractor) {
            case Extractor::LexicalOverlap: {
                auto [a, b] = split_sentence_pair(s.instruction);
                double raw = spec.overlap_denominator_second ? lexical_overlap_rate(a, b)
                                                             : lexical_overlap_rate(b, a);
                FeatureValue v = bin_feature(raw, spec);
                v.feature = spec.name;
                return v;
            }
            case Extractor::NegationPresence: {
                FeatureValue v = detect_negation(s.instruction, lexicon);
                v.feature = spec.name;
                return v;
            }
            case Extractor::Popularity: {
                if (!oracle) throw OracleUnavailable("no classifier backend configured");
                FeatureValue v = classify_popularity(s.answer, *oracle);
                v.feature = spec.name;
                return v;
            }
            case Extractor::CustomClassifier: {
                if (!oracle) throw OracleUnavailable("no classifier backend configured");
                std::string raw = oracle->classify(s.instruction + "\n" + s.answer);
                std::string value = to_lower(trim(raw));
                if (spec.value_index(value) < 0)
                    throw UnparsableVerdict(raw);
                return {spec.name, value, std::nullopt};
            }
        }
        throw Error("unreachable extractor kind");
    } catch (const ExtractionError&) {
        throw;
    } catch (const Error& e) {
        throw ExtractionError(s.id, e.what());
    }
}

std::string answer_class_of(const Sample& s, const FeatureSpec& spec,
                            const std::string& feature_value) {
    if (spec.coupling == Coupling::AnswerEqualsFeature) return feature_value;
    std::string normalized = to_lower(trim(s.answer));
    for (const auto& y : spec.answer_classes) {
        if (normalized == to_lower(y)) return y;
    }
    throw UnknownAnswerClass(s.id, s.answer);
}

Dataset extract_all(const Dataset& ds, const std::vector<FeatureSpec>& specs,
                    const Lexicon& lexicon, Classifier* oracle) {
    std::vector<Sample> out;
    out.reserve(ds.size());
    for (const Sample& s : ds.samples()) {
        Sample next = s;
        for (const FeatureSpec& spec : specs) {
            if (spec.task != s.task) continue;
            FeatureValue v = extract_feature(s, spec, lexicon, oracle);
            next.feature_values[spec.name] = v.value;
            next.answer_class[spec.name] = answer_class_of(s, spec, v.value);
        }
        out.push_back(std::move(next));
    }
    return Dataset(std::move(out));
}

std::vector<FeatureSpec> default_feature_specs() {
    std::vector<FeatureSpec> specs;

    FeatureSpec qa;
    qa.name = "popularity";
    qa.task = Task::QA;
    qa.extractor = Extractor::Popularity;
    qa.value_space = {"high", "low"};
    qa.answer_classes = {"high", "low"};
    qa.coupling = Coupling::AnswerEqualsFeature;
    specs.push_back(qa);

    FeatureSpec nli;
    nli.name = "overlap";
    nli.task = Task::NLI;
    nli.extractor = Extractor::LexicalOverlap;
    nli.value_space = {"low", "medium", "high"};
    nli.bins = {{0.4, "low"}, {0.6, "medium"}, {1.0, "high"}};
    nli.answer_classes = {"yes", "no"};
    specs.push_back(nli);

    FeatureSpec pi = nli;
    pi.task = Task::PI;
    specs.push_back(pi);

    FeatureSpec sa;
    sa.name = "negation";
    sa.task = Task::SA;
    sa.extractor = Extractor::NegationPresence;
    sa.value_space = {"absent", "present"};
    sa.answer_classes = {"positive", "negative"};
    specs.push_back(sa);

    for (auto& s : specs) s.validate();
    return specs;
}

namespace {

json spec_to_json(const FeatureSpec& s) {
    json j;
    j["name"] = s.name;
    j["task"] = to_string(s.task);
    j["extractor"] = extractor_name(s.extractor);
    j["value_space"] = s.value_space;
    if (!s.bins.empty()) {
        json bins = json::array();
        for (const Bin& b : s.bins) bins.push_back({{"upper", b.upper}, {"label", b.label}});
        j["bins"] = bins;
    }
    j["answer_classes"] = s.answer_classes;
    j["coupling"] =
        s.coupling == Coupling::AnswerEqualsFeature ? "answer_equals_feature" : "independent";
    j["overlap_denominator"] = s.overlap_denominator_second ? "second" : "first";
    return j;
}

FeatureSpec spec_from_json(const json& j) {
    FeatureSpec s;
    try {
        s.name = j.at("name").get<std::string>();
        s.task = task_from_string(j.at("task").get<std::string>());
        s.extractor = extractor_from(j.at("extractor").get<std::string>());
        s.value_space = j.at("value_space").get<std::vector<std::string>>();
        if (j.contains("bins")) {
            for (const auto& b : j.at("bins"))
                s.bins.push_back({b.at("upper").get<double>(), b.at("label").get<std::string>()});
        }
        s.answer_classes = j.at("answer_classes").get<std::vector<std::string>>();
        std::string coupling = j.value("coupling", "independent");
        if (coupling == "answer_equals_feature")
            s.coupling = Coupling::AnswerEqualsFeature;
        else if (coupling == "independent")
            s.coupling = Coupling::Independent;
        else
            throw ConfigError("unknown coupling: " + coupling);
        s.overlap_denominator_second = j.value("overlap_denominator", "second") != "first";
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad feature spec: ") + e.what());
    }
    s.validate();
    return s;
}

}  // namespace

std::vector<FeatureSpec> load_feature_specs(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoFailure(path);
    json j = json::parse(f, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("features"))
        throw ConfigError("feature config must be a JSON object with a `features` array: " + path);
    std::vector<FeatureSpec> specs;
    for (const auto& js : j.at("features")) specs.push_back(spec_from_json(js));
    std::set<std::string> names;
    for (const auto& s : specs)
        if (!names.insert(s.name + "/" + to_string(s.task)).second)
            throw ConfigError("duplicate feature spec: " + s.name);
    return specs;
}

void write_feature_specs(const std::vector<FeatureSpec>& specs, const std::string& path) {
    json j;
    j["features"] = json::array();
    for (const auto& s : specs) j["features"].push_back(spec_to_json(s));
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoFailure(path);
    f << j.dump(2) << '\n';
}

}  // namespace igd
