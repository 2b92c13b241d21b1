// Shared fixtures for the test suites.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "igd/backends.hpp"
#include "igd/features.hpp"
#include "igd/infogain.hpp"

namespace igd::testing {

inline ContingencyTable make_table(std::vector<std::vector<std::int64_t>> counts,
                                   bool coupled = false) {
    ContingencyTable t;
    t.feature = "test";
    t.counts = std::move(counts);
    for (std::size_t y = 0; y < t.counts.size(); ++y)
        t.answer_classes.push_back("y" + std::to_string(y));
    for (std::size_t b = 0; b < t.counts[0].size(); ++b)
        t.feature_values.push_back("b" + std::to_string(b));
    t.coupled = coupled;
    if (coupled) t.answer_classes = t.feature_values;
    return t;
}

inline FeatureSpec spec_for_table(const ContingencyTable& t) {
    FeatureSpec s;
    s.name = t.feature;
    s.task = Task::SA;
    s.extractor = Extractor::CustomClassifier;
    s.value_space = t.feature_values;
    s.answer_classes = t.answer_classes;
    s.coupling = t.coupled ? Coupling::AnswerEqualsFeature : Coupling::Independent;
    return s;
}

inline FeatureSpec sa_negation_spec() {
    for (const auto& s : default_feature_specs())
        if (s.task == Task::SA) return s;
    throw std::runtime_error("no SA spec");
}

// SA dataset with the given cell counts; rows positive/negative, columns
// absent/present (the default SA spec's value order).
inline Dataset make_sa_dataset(std::int64_t pos_absent, std::int64_t pos_present,
                               std::int64_t neg_absent, std::int64_t neg_present) {
    std::vector<Sample> samples;
    int k = 0;
    auto add = [&](std::int64_t n, const std::string& answer, bool negation) {
        for (std::int64_t i = 0; i < n; ++i) {
            Sample s;
            s.id = "sa" + std::to_string(k++);
            s.task = Task::SA;
            s.answer = answer;
            std::string body = negation
                                   ? "the plot was never dull and the cast is sharp"
                                   : "the plot is lively and the cast is sharp";
            s.instruction = body + " review " + std::to_string(k) +
                            ". What is the sentiment of this review?";
            samples.push_back(std::move(s));
        }
    };
    add(pos_absent, "positive", false);
    add(pos_present, "positive", true);
    add(neg_absent, "negative", false);
    add(neg_present, "negative", true);
    return Dataset(std::move(samples));
}

class TempDir {
public:
    TempDir() {
        auto base = std::filesystem::temp_directory_path();
        static std::mt19937_64 rng{std::random_device{}()};
        path_ = base / ("igd_test_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::trunc);
    f << text;
}

inline std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    std::ostringstream buf;
    buf << f.rdbuf();
    return buf.str();
}

}  // namespace igd::testing
