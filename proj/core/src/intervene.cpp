#include "igd/intervene.hpp"

#include <algorithm>

namespace igd {

std::vector<Exemplar> default_exemplars(Extractor extractor, const std::string& target_value) {
    switch (extractor) {
        case Extractor::NegationPresence:
            if (target_value == "present")
                return {{"you will find yourself remembering this refreshing visit",
                         "positive",
                         "you will find yourself cannot forget this refreshing visit",
                         "positive"},
                        {"the service was quick and friendly", "positive",
                         "the service was not slow and was friendly", "positive"},
                        {"a film everyone will enjoy", "positive",
                         "a film nobody will dislike", "positive"}};
            return {{"this was not a waste of time", "positive",
                     "this was a fine use of time", "positive"},
                    {"I can't complain about the food", "positive",
                     "the food left me satisfied", "positive"},
                    {"never a dull moment here", "positive",
                     "always a lively moment here", "positive"}};
        case Extractor::LexicalOverlap:
            return {{"Sentence 1: the doctor met the lawyer\nSentence 2: the lawyer met the doctor",
                     "yes", "Sentence 1: the doctor met the lawyer\nSentence 2: they had a meeting",
                     "yes"},
                    {"Sentence 1: rain fell on the quiet town\nSentence 2: rain fell on the town",
                     "yes", "Sentence 1: rain fell on the quiet town\nSentence 2: water arrived",
                     "yes"},
                    {"Sentence 1: the committee approved the budget\nSentence 2: the budget",
                     "no", "Sentence 1: the committee approved the budget\nSentence 2: cats sleep",
                     "no"}};
        case Extractor::Popularity:
            return {{"Who holds the record mentioned in the passage?", "James",
                     "Who holds the record mentioned in the passage?", "MORGAN Moses"},
                    {"Name the person described above.", "Taylor Swift",
                     "Name the person described above.", "Edna Cobb"},
                    {"Who proposed the bill?", "LeBron James",
                     "Who proposed the bill?", "Horace Tilling"}};
        case Extractor::CustomClassifier:
            break;
    }
    return {};
}

bool verify_rewrite(const Sample& original, const Sample& rewritten, const FeatureSpec& spec,
                    const std::string& target, const Lexicon& lexicon, Classifier* oracle) {
    try {
        FeatureValue v = extract_feature(rewritten, spec, lexicon, oracle);
        if (v.value != target) return false;
        if (spec.coupling == Coupling::Independent) {
            // feature value plays no role in the class of an uncoupled spec
            return answer_class_of(rewritten, spec, v.value) ==
                   answer_class_of(original, spec, v.value);
        }
        return true;
    } catch (const Error&) {
        return false;
    }
}

namespace {

const FeatureSpec& spec_for(const InterventionPlan& p, const std::vector<FeatureSpec>& specs) {
    for (const FeatureSpec& s : specs)
        if (s.name == p.feature && s.task == p.task) return s;
    throw PlanMismatch("no feature spec named " + p.feature + " for task " + to_string(p.task));
}

// Re-extract every applicable feature on a freshly rewritten sample.
void refresh_features(Sample& s, const std::vector<FeatureSpec>& specs, const Lexicon& lexicon,
                      Classifier* oracle) {
    for (const FeatureSpec& spec : specs) {
        if (spec.task != s.task) continue;
        FeatureValue v = extract_feature(s, spec, lexicon, oracle);
        s.feature_values[spec.name] = v.value;
        s.answer_class[spec.name] = answer_class_of(s, spec, v.value);
    }
}

}  // namespace

ExecuteResult execute_plan(const Dataset& ds, const InterventionPlan& p, Rewriter& backend,
                           const std::vector<FeatureSpec>& specs, const Lexicon& lexicon,
                           Classifier* oracle, int max_retries) {
    const FeatureSpec& spec = spec_for(p, specs);
    ContingencyTable t = tabulate(ds, spec);
    if (!verify_plan(t, p, p.epsilon))
        throw PlanMismatch("plan does not verify against the dataset's contingency table");

    std::vector<Sample> samples = ds.samples();
    std::vector<RewriteOutcome> outcomes;

    for (const Flow& f : p.flows) {
        for (const std::string& id : f.selected) {
            const Sample& original = ds.at(id);
            RewriteRequest req;
            req.sample = original;
            req.feature = spec.name;
            req.extractor = spec.extractor;
            req.source_value = f.value_from;
            req.target_value = f.value_to;
            req.target_answer_class = f.answer_class_to;
            req.exemplars = default_exemplars(spec.extractor, f.value_to);

            RewriteOutcome outcome;
            outcome.request = req;
            Sample candidate = original;
            for (int attempt = 1; attempt <= max_retries; ++attempt) {
                outcome.attempts = attempt;
                RewriteResult result;
                try {
                    result = backend.rewrite(req);
                } catch (const BackendFailure& e) {
                    // transport-level trouble aborts the pass; the dataset is
                    // untouched because we only commit at the end
                    throw BackendUnavailable(e.what());
                }
                candidate = original;
                candidate.instruction = result.instruction;
                candidate.answer = result.answer;
                candidate.provenance = Provenance::Rewritten;
                candidate.attempts = attempt;

                VerificationEntry entry;
                entry.attempt = attempt;
                try {
                    entry.extracted_value =
                        extract_feature(candidate, spec, lexicon, oracle).value;
                } catch (const Error&) {
                    entry.extracted_value = "(error)";
                }
                entry.pass =
                    verify_rewrite(original, candidate, spec, f.value_to, lexicon, oracle);
                outcome.verification_trace.push_back(entry);
                if (entry.pass) {
                    outcome.success = true;
                    break;
                }
            }

            // locate the sample slot
            auto it = std::find_if(samples.begin(), samples.end(),
                                   [&](const Sample& s) { return s.id == id; });
            if (outcome.success) {
                refresh_features(candidate, specs, lexicon, oracle);
                outcome.rewritten = candidate;
                *it = candidate;
            } else {
                it->provenance = Provenance::RewriteFailed;
                it->attempts = max_retries;
            }
            outcomes.push_back(std::move(outcome));
        }
    }
    return {Dataset(std::move(samples)), std::move(outcomes)};
}

}  // namespace igd
