#include "igd/corpus.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace igd {

using nlohmann::json;

std::string to_string(Task t) {
    switch (t) {
        case Task::NLI: return "NLI";
        case Task::PI: return "PI";
        case Task::SA: return "SA";
        case Task::QA: return "QA";
        case Task::OTHER: return "OTHER";
    }
    return "OTHER";
}

Task task_from_string(const std::string& s) {
    if (s == "NLI") return Task::NLI;
    if (s == "PI") return Task::PI;
    if (s == "SA") return Task::SA;
    if (s == "QA") return Task::QA;
    if (s == "OTHER") return Task::OTHER;
    throw UnknownTask(s);
}

std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::Original: return "original";
        case Provenance::Rewritten: return "rewritten";
        case Provenance::RewriteFailed: return "rewrite_failed";
    }
    return "original";
}

Provenance provenance_from_string(const std::string& s) {
    if (s == "original") return Provenance::Original;
    if (s == "rewritten") return Provenance::Rewritten;
    if (s == "rewrite_failed") return Provenance::RewriteFailed;
    throw Error("unknown provenance: " + s);
}

Dataset::Dataset(std::vector<Sample> samples) : samples_(std::move(samples)) {
    for (std::size_t i = 0; i < samples_.size(); ++i) {
        const Sample& s = samples_[i];
        if (!by_id_.emplace(s.id, i).second) throw DuplicateId(s.id);
        task_index_[s.task].push_back(s.id);
    }
}

const Sample& Dataset::at(const std::string& id) const {
    auto it = by_id_.find(id);
    if (it == by_id_.end()) throw Error("no such sample id: " + id);
    return samples_[it->second];
}

Dataset Dataset::with_replaced(const Sample& s) const {
    auto it = by_id_.find(s.id);
    if (it == by_id_.end()) throw Error("no such sample id: " + s.id);
    std::vector<Sample> out = samples_;
    out[it->second] = s;
    return Dataset(std::move(out));
}

namespace {

Sample sample_from_json(const json& j, std::size_t line) {
    for (const char* field : {"id", "task", "instruction", "answer"}) {
        if (!j.contains(field))
            throw MalformedRecord(line, std::string("missing required field `") + field + "`");
    }
    Sample s;
    try {
        s.id = j.at("id").get<std::string>();
        s.task = task_from_string(j.at("task").get<std::string>());
        s.instruction = j.at("instruction").get<std::string>();
        s.answer = j.at("answer").get<std::string>();
        if (j.contains("provenance"))
            s.provenance = provenance_from_string(j.at("provenance").get<std::string>());
        if (j.contains("attempts")) s.attempts = j.at("attempts").get<int>();
        if (j.contains("feature_values"))
            s.feature_values = j.at("feature_values").get<std::map<std::string, std::string>>();
    } catch (const UnknownTask&) {
        throw;
    } catch (const json::exception& e) {
        throw MalformedRecord(line, e.what());
    }
    if (s.attempts < 0) throw MalformedRecord(line, "attempts must be non-negative");
    return s;
}

json sample_to_json(const Sample& s) {
    json j;
    j["id"] = s.id;
    j["task"] = to_string(s.task);
    j["instruction"] = s.instruction;
    j["answer"] = s.answer;
    j["provenance"] = to_string(s.provenance);
    j["attempts"] = s.attempts;
    j["feature_values"] = s.feature_values;
    return j;
}

}  // namespace

Dataset parse_dataset(const std::string& text) {
    std::vector<Sample> samples;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw MalformedRecord(lineno, "not a JSON object");
        samples.push_back(sample_from_json(j, lineno));
    }
    return Dataset(std::move(samples));
}

Dataset load_dataset(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoFailure(path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_dataset(buf.str());
}

std::string serialize_dataset(const Dataset& ds) {
    std::string out;
    for (const Sample& s : ds.samples()) {
        out += sample_to_json(s).dump();
        out += '\n';
    }
    return out;
}

void write_dataset(const Dataset& ds, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoFailure(path);
    f << serialize_dataset(ds);
    if (!f.good()) throw IoFailure(path);
}

}  // namespace igd
