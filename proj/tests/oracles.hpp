// Independent reference implementations used only by tests. These must not
// share code paths with the library routines they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace igd::testing {

using Counts = std::vector<std::vector<std::int64_t>>;

// Information gain via the joint/marginal KL form:
// IG = sum_{y,b} P(y,b) log2( P(y,b) / (P(y) P(b)) ).
inline double ig_kl_form(const Counts& n) {
    std::size_t Y = n.size(), B = n[0].size();
    double total = 0;
    std::vector<double> py(Y, 0), pb(B, 0);
    for (std::size_t y = 0; y < Y; ++y)
        for (std::size_t b = 0; b < B; ++b) {
            total += static_cast<double>(n[y][b]);
            py[y] += static_cast<double>(n[y][b]);
            pb[b] += static_cast<double>(n[y][b]);
        }
    double ig = 0;
    for (std::size_t y = 0; y < Y; ++y)
        for (std::size_t b = 0; b < B; ++b) {
            if (n[y][b] == 0) continue;
            double pyb = static_cast<double>(n[y][b]) / total;
            ig += pyb * std::log2(pyb / ((py[y] / total) * (pb[b] / total)));
        }
    return ig;
}

// Brute-force minimum rewrite count for independent coupling: enumerate each
// row's projected composition (flows never change the answer class, so row
// sums are preserved), prune as soon as a column's spread exceeds eps.
class BruteForcePlanner {
public:
    BruteForcePlanner(const Counts& n, int eps) : n_(n), eps_(eps), Y_(n.size()), B_(n[0].size()) {
        row_totals_.resize(Y_);
        for (std::size_t y = 0; y < Y_; ++y)
            for (std::size_t b = 0; b < B_; ++b) row_totals_[y] += n[y][b];
    }

    // nullopt when no projected table satisfies the spread constraint; with
    // `bound` set, only solutions strictly cheaper than it are reported
    // (sufficient for minimality checks and much faster to refute)
    std::optional<std::int64_t> min_cost(std::optional<std::int64_t> bound = std::nullopt) {
        best_.reset();
        bound_ = bound;
        col_min_.assign(B_, 0);
        col_max_.assign(B_, 0);
        row_.assign(B_, 0);
        recurse_rows(0, 0);
        return best_;
    }

private:
    bool pruned(std::int64_t cost) const {
        if (best_ && cost >= *best_) return true;
        return bound_ && cost >= *bound_;
    }

    void recurse_rows(std::size_t y, std::int64_t cost) {
        if (pruned(cost)) return;
        if (y == Y_) {
            best_ = cost;
            return;
        }
        compose(y, 0, row_totals_[y], cost);
    }

    void compose(std::size_t y, std::size_t b, std::int64_t remaining, std::int64_t cost) {
        if (pruned(cost)) return;
        if (b + 1 == B_) {
            row_[b] = remaining;
            if (!column_ok(y, b)) return;
            std::int64_t c = cost + std::max<std::int64_t>(0, n_[y][b] - remaining);
            push_row(y, c);
            return;
        }
        for (std::int64_t v = 0; v <= remaining; ++v) {
            row_[b] = v;
            if (!column_ok(y, b)) continue;
            compose(y, b + 1, remaining - v,
                    cost + std::max<std::int64_t>(0, n_[y][b] - v));
        }
    }

    bool column_ok(std::size_t y, std::size_t b) const {
        if (y == 0) return true;
        std::int64_t mn = std::min(col_min_[b], row_[b]);
        std::int64_t mx = std::max(col_max_[b], row_[b]);
        return mx - mn <= eps_;
    }

    void push_row(std::size_t y, std::int64_t cost) {
        // row_ is shared with the deeper rows' compositions; restore it so the
        // unwound column loops of this row keep operating on their own values
        auto saved_min = col_min_, saved_max = col_max_, saved_row = row_;
        for (std::size_t b = 0; b < B_; ++b) {
            if (y == 0) {
                col_min_[b] = col_max_[b] = row_[b];
            } else {
                col_min_[b] = std::min(col_min_[b], row_[b]);
                col_max_[b] = std::max(col_max_[b], row_[b]);
            }
        }
        recurse_rows(y + 1, cost);
        col_min_ = saved_min;
        col_max_ = saved_max;
        row_ = saved_row;
    }

    Counts n_;
    std::int64_t eps_;
    std::size_t Y_, B_;
    std::vector<std::int64_t> row_totals_;
    std::vector<std::int64_t> col_min_, col_max_, row_;
    std::optional<std::int64_t> best_;
    std::optional<std::int64_t> bound_;
};

// Brute force for coupled features: enumerate target marginals directly.
inline std::optional<std::int64_t> brute_force_coupled(const std::vector<std::int64_t>& marginal,
                                                       int eps) {
    std::int64_t total = 0;
    for (auto m : marginal) total += m;
    std::optional<std::int64_t> best;
    std::vector<std::int64_t> t(marginal.size(), 0);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t b,
                                                             std::int64_t remaining) {
        if (b + 1 == t.size()) {
            t[b] = remaining;
            auto [mn, mx] = std::minmax_element(t.begin(), t.end());
            if (*mx - *mn > eps) return;
            std::int64_t cost = 0;
            for (std::size_t i = 0; i < t.size(); ++i)
                cost += std::max<std::int64_t>(0, marginal[i] - t[i]);
            if (!best || cost < *best) best = cost;
            return;
        }
        for (std::int64_t v = 0; v <= remaining; ++v) {
            t[b] = v;
            rec(b + 1, remaining - v);
        }
    };
    rec(0, total);
    return best;
}

}  // namespace igd::testing
