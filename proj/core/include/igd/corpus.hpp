#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "igd/errors.hpp"

namespace igd {

enum class Task { NLI, PI, SA, QA, OTHER };

enum class Provenance { Original, Rewritten, RewriteFailed };

std::string to_string(Task t);
Task task_from_string(const std::string& s);  // throws UnknownTask
std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// One instruction-tuning record.
struct Sample {
    std::string id;
    Task task = Task::OTHER;
    std::string instruction;
    std::string answer;
    Provenance provenance = Provenance::Original;
    int attempts = 0;
    // feature name -> discrete feature value, populated by feature extraction
    std::map<std::string, std::string> feature_values;
    // answer class (the y of the contingency table); derived, not serialized
    std::map<std::string, std::string> answer_class;

    bool operator==(const Sample& o) const {
        return id == o.id && task == o.task && instruction == o.instruction &&
               answer == o.answer && provenance == o.provenance && attempts == o.attempts &&
               feature_values == o.feature_values;
    }
};

/// An ordered, immutable-by-convention collection of samples.
class Dataset {
public:
    Dataset() = default;
    explicit Dataset(std::vector<Sample> samples);  // throws DuplicateId

    const std::vector<Sample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    bool empty() const { return samples_.empty(); }

    const Sample& at(const std::string& id) const;
    bool contains(const std::string& id) const { return by_id_.count(id) > 0; }

    /// Sample ids per task, in dataset order.
    const std::map<Task, std::vector<std::string>>& task_index() const { return task_index_; }

    /// New dataset with one sample replaced (same id). Order preserved.
    Dataset with_replaced(const Sample& s) const;

    bool operator==(const Dataset& o) const { return samples_ == o.samples_; }

private:
    std::vector<Sample> samples_;
    std::map<std::string, std::size_t> by_id_;
    std::map<Task, std::vector<std::string>> task_index_;
};

/// Loads a line-delimited JSON dataset. Required fields per record:
/// id, task, instruction, answer. Optional: provenance, attempts, feature_values.
Dataset load_dataset(const std::string& path);

/// Parses dataset records from an already-read string (one JSON object per line).
Dataset parse_dataset(const std::string& text);

/// Writes the dataset as line-delimited JSON; load(write(ds)) == ds.
void write_dataset(const Dataset& ds, const std::string& path);

std::string serialize_dataset(const Dataset& ds);

}  // namespace igd
