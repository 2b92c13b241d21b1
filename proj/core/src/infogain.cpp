#include "igd/infogain.hpp"

#include <algorithm>
#include <cmath>

namespace igd {

std::int64_t ContingencyTable::total() const {
    std::int64_t t = 0;
    for (const auto& row : counts)
        for (std::int64_t c : row) t += c;
    return t;
}

std::int64_t ContingencyTable::column_total(std::size_t b) const {
    std::int64_t t = 0;
    for (const auto& row : counts) t += row[b];
    return t;
}

std::int64_t ContingencyTable::row_total(std::size_t y) const {
    std::int64_t t = 0;
    for (std::int64_t c : counts[y]) t += c;
    return t;
}

ContingencyTable tabulate(const Dataset& ds, const FeatureSpec& spec) {
    ContingencyTable t;
    t.feature = spec.name;
    t.answer_classes = spec.answer_classes;
    t.feature_values = spec.value_space;
    t.coupled = spec.coupling == Coupling::AnswerEqualsFeature;
    t.counts.assign(spec.answer_classes.size(),
                    std::vector<std::int64_t>(spec.value_space.size(), 0));
    for (const Sample& s : ds.samples()) {
        if (s.task != spec.task) continue;
        auto it = s.feature_values.find(spec.name);
        if (it == s.feature_values.end()) throw MissingFeatureValue(s.id);
        int b = spec.value_index(it->second);
        if (b < 0) throw MissingFeatureValue(s.id);
        int y = spec.class_index(answer_class_of(s, spec, it->second));
        t.counts[static_cast<std::size_t>(y)][static_cast<std::size_t>(b)] += 1;
    }
    return t;
}

namespace {

constexpr double kClamp = 1e-9;

double entropy_of(const std::vector<std::int64_t>& counts, std::int64_t total) {
    double h = 0.0;
    for (std::int64_t c : counts) {
        if (c <= 0) continue;  // 0 log 0 == 0
        double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

std::vector<std::int64_t> column_totals(const ContingencyTable& t) {
    std::vector<std::int64_t> totals(t.feature_values.size(), 0);
    for (std::size_t b = 0; b < totals.size(); ++b) totals[b] = t.column_total(b);
    return totals;
}

}  // namespace

double entropy_answer(const ContingencyTable& t) {
    std::int64_t total = t.total();
    if (total == 0) throw EmptyTable();
    std::vector<std::int64_t> marginals(t.answer_classes.size(), 0);
    for (std::size_t y = 0; y < marginals.size(); ++y) marginals[y] = t.row_total(y);
    return entropy_of(marginals, total);
}

double conditional_entropy(const ContingencyTable& t) {
    std::int64_t total = t.total();
    if (total == 0) throw EmptyTable();
    double h = 0.0;
    for (std::size_t b = 0; b < t.feature_values.size(); ++b) {
        std::int64_t col_total = t.column_total(b);
        if (col_total == 0) continue;
        std::vector<std::int64_t> col(t.answer_classes.size());
        for (std::size_t y = 0; y < col.size(); ++y) col[y] = t.counts[y][b];
        h += static_cast<double>(col_total) / static_cast<double>(total) *
             entropy_of(col, col_total);
    }
    return h;
}

double information_gain(const ContingencyTable& t) {
    std::int64_t total = t.total();
    if (total == 0) throw EmptyTable();
    double ig;
    if (t.coupled) {
        // Y is definitionally tied to B, so dependence is not the bias signal;
        // measure how far the value marginal sits from the uniform target.
        ig = std::log2(static_cast<double>(t.feature_values.size())) -
             entropy_of(column_totals(t), total);
    } else {
        ig = entropy_answer(t) - conditional_entropy(t);
    }
    if (ig < 0.0 && ig >= -kClamp) ig = 0.0;
    return ig;
}

std::int64_t max_imbalance(const ContingencyTable& t) {
    if (t.coupled) {
        auto totals = column_totals(t);
        auto [mn, mx] = std::minmax_element(totals.begin(), totals.end());
        return *mx - *mn;
    }
    std::int64_t worst = 0;
    for (std::size_t b = 0; b < t.feature_values.size(); ++b) {
        std::int64_t mn = t.counts[0][b], mx = t.counts[0][b];
        for (std::size_t y = 1; y < t.answer_classes.size(); ++y) {
            mn = std::min(mn, t.counts[y][b]);
            mx = std::max(mx, t.counts[y][b]);
        }
        worst = std::max(worst, mx - mn);
    }
    return worst;
}

int default_epsilon(const ContingencyTable& t) {
    auto totals = column_totals(t);
    std::int64_t largest = *std::max_element(totals.begin(), totals.end());
    return static_cast<int>(
        std::max<std::int64_t>(1, (largest * 2 + 99) / 100));  // ceil(0.02 * largest)
}

BiasReport goal_check(const ContingencyTable& t, int epsilon) {
    if (t.total() == 0) throw EmptyTable();
    BiasReport r;
    r.table = t;
    r.entropy_answer = entropy_answer(t);
    r.conditional_entropy = conditional_entropy(t);
    r.information_gain = information_gain(t);
    r.max_imbalance = max_imbalance(t);
    r.epsilon = epsilon;
    r.goal_met = r.max_imbalance <= epsilon;
    return r;
}

}  // namespace igd
