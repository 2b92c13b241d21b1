#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "igd/corpus.hpp"

namespace igd {

enum class Extractor { LexicalOverlap, NegationPresence, Popularity, CustomClassifier };

enum class Coupling { Independent, AnswerEqualsFeature };

/// Minimal classifier interface used by popularity extraction.
/// Returns raw verdict text; parsing is the caller's job.
class Classifier {
public:
    virtual ~Classifier() = default;
    virtual std::string classify(const std::string& prompt) = 0;
};

struct Bin {
    double upper = 0.0;  // upper bound, inclusive
    std::string label;
};

/// A biased feature's definition: how to extract it, its discrete value
/// space, and how it couples to the answer class.
struct FeatureSpec {
    std::string name;
    Task task = Task::OTHER;
    Extractor extractor = Extractor::NegationPresence;
    std::vector<std::string> value_space;     // the b of the contingency table
    std::vector<Bin> bins;                    // for continuous extractors; empty otherwise
    std::vector<std::string> answer_classes;  // the y of the contingency table
    Coupling coupling = Coupling::Independent;
    // which side's token set is the denominator of the overlap rate
    bool overlap_denominator_second = true;

    void validate() const;  // throws ConfigError on a violated invariant
    int value_index(const std::string& v) const;   // -1 if absent
    int class_index(const std::string& y) const;   // -1 if absent
};

struct FeatureValue {
    std::string feature;
    std::string value;
    std::optional<double> raw;
};

using Lexicon = std::set<std::string>;

/// Built-in negation word list; replaceable via a lexicon file.
const Lexicon& default_negation_lexicon();
Lexicon load_lexicon(const std::string& path);

/// Lowercased word tokens, punctuation stripped; "n't" clitics split off.
std::vector<std::string> tokenize(const std::string& text);

/// Directional containment rate: |tokens(b) ∩ tokens(a)| / |tokens(b)|
/// over distinct tokens. Throws EmptyText if either side has no tokens.
double lexical_overlap_rate(const std::string& sentence_a, const std::string& sentence_b);

/// Maps a raw measurement in [0,1] to the label of the first bin whose
/// upper bound is >= raw (upper-inclusive boundaries).
FeatureValue bin_feature(double raw, const FeatureSpec& spec);

/// "present" iff any lexicon word matches a whole token of `text`.
FeatureValue detect_negation(const std::string& text, const Lexicon& lexicon);

/// Queries the oracle for a high/low popularity verdict; one re-query on
/// unparsable output, then UnparsableVerdict.
FeatureValue classify_popularity(const std::string& entity_context, Classifier& oracle);

/// Splits an instruction into its two sentences for overlap features.
/// Recognized line prefixes (case-insensitive): "sentence 1:"/"sentence 2:",
/// "premise:"/"hypothesis:".
std::pair<std::string, std::string> split_sentence_pair(const std::string& instruction);

/// Extracts one feature value for a sample under `spec`.
FeatureValue extract_feature(const Sample& s, const FeatureSpec& spec, const Lexicon& lexicon,
                             Classifier* oracle);

/// Answer class for a sample given the spec: the extracted feature value
/// when coupled, otherwise exact-match parsing of the answer text.
std::string answer_class_of(const Sample& s, const FeatureSpec& spec,
                            const std::string& feature_value);

/// New dataset with feature_values and answer classes filled for every
/// applicable (sample, spec) pair. Idempotent.
Dataset extract_all(const Dataset& ds, const std::vector<FeatureSpec>& specs,
                    const Lexicon& lexicon, Classifier* oracle);

/// Specs encoding the default per-task biased features:
/// QA popularity (coupled), NLI overlap, PI overlap, SA negation.
std::vector<FeatureSpec> default_feature_specs();

std::vector<FeatureSpec> load_feature_specs(const std::string& path);
void write_feature_specs(const std::vector<FeatureSpec>& specs, const std::string& path);

}  // namespace igd
