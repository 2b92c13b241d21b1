#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "igd/corpus.hpp"
#include "igd/features.hpp"

namespace igd {

/// Joint counts N(y, b) over answer classes × feature values for one
/// (task, feature) pair.
struct ContingencyTable {
    std::string feature;
    std::vector<std::string> answer_classes;  // row labels, Y
    std::vector<std::string> feature_values;  // column labels, B
    std::vector<std::vector<std::int64_t>> counts;  // counts[y][b]
    // answer class is definitionally tied to the feature value (the table is
    // diagonal); balance is then judged on the feature-value marginal
    bool coupled = false;

    std::int64_t total() const;
    std::int64_t column_total(std::size_t b) const;
    std::int64_t row_total(std::size_t y) const;

    bool operator==(const ContingencyTable& o) const = default;
};

struct BiasReport {
    ContingencyTable table;
    double entropy_answer = 0.0;              // H(Y), bits
    double conditional_entropy = 0.0;         // H(Y|B), bits
    double information_gain = 0.0;            // IG(Y,B), bits
    std::int64_t max_imbalance = 0;
    int epsilon = 0;
    bool goal_met = false;
};

ContingencyTable tabulate(const Dataset& ds, const FeatureSpec& spec);

/// H(Y) in bits, from row marginals. Throws EmptyTable on total 0.
double entropy_answer(const ContingencyTable& t);

/// H(Y|B) in bits; empty columns contribute nothing.
double conditional_entropy(const ContingencyTable& t);

/// IG = H(Y) - H(Y|B), clamped to 0 within -1e-9. For coupled tables this
/// is the divergence of the value marginal from uniform (log2|B| - H(B)),
/// which is zero exactly at balance.
double information_gain(const ContingencyTable& t);

/// Largest per-column spread max_y N(y,b) - min_y N(y,b); for coupled
/// tables, the spread of the feature-value marginal.
std::int64_t max_imbalance(const ContingencyTable& t);

/// Relative default tolerance: max(1, ceil(0.02 * largest column total)).
int default_epsilon(const ContingencyTable& t);

BiasReport goal_check(const ContingencyTable& t, int epsilon);

}  // namespace igd
