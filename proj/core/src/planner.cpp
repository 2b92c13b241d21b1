#include "igd/planner.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>

#include <json.hpp>

namespace igd {

using nlohmann::json;

namespace {

using Counts = std::vector<std::vector<std::int64_t>>;

// Candidate projected table with the solver's preference key: minimal cost,
// then nearest the per-column centered targets, then lexicographically
// smallest flattened counts.
struct Candidate {
    Counts counts;
    std::int64_t cost = 0;
    std::int64_t center_dist = 0;

    bool better_than(const Candidate& o) const {
        if (cost != o.cost) return cost < o.cost;
        if (center_dist != o.center_dist) return center_dist < o.center_dist;
        return counts < o.counts;
    }
};

// Minimizes sum |n_b - v_b| over v_b in [lo_b, hi_b] with sum v_b = target.
// Returns nullopt when the box is infeasible.
std::optional<std::vector<std::int64_t>> solve_row(const std::vector<std::int64_t>& n,
                                                   const std::vector<std::int64_t>& lo,
                                                   const std::vector<std::int64_t>& hi,
                                                   std::int64_t target) {
    const std::size_t B = n.size();
    std::int64_t lo_sum = 0, hi_sum = 0;
    for (std::size_t b = 0; b < B; ++b) {
        if (lo[b] > hi[b]) return std::nullopt;
        lo_sum += lo[b];
        hi_sum += hi[b];
    }
    if (target < lo_sum || target > hi_sum) return std::nullopt;
    std::vector<std::int64_t> v(B);
    std::int64_t sum = 0;
    for (std::size_t b = 0; b < B; ++b) {
        v[b] = std::clamp(n[b], lo[b], hi[b]);
        sum += v[b];
    }
    // every unit of correction costs exactly 1 beyond the clamp cost
    for (std::size_t b = 0; b < B && sum < target; ++b) {
        std::int64_t add = std::min(target - sum, hi[b] - v[b]);
        v[b] += add;
        sum += add;
    }
    for (std::size_t b = 0; b < B && sum > target; ++b) {
        std::int64_t cut = std::min(sum - target, v[b] - lo[b]);
        v[b] -= cut;
        sum -= cut;
    }
    return v;
}

std::int64_t l1(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    std::int64_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::llabs(a[i] - b[i]);
    return d;
}

// Exact solver for independent coupling: every feasible projected table has
// per-column floors m_b with entries in [m_b, m_b + eps], so enumerating the
// floor vectors over the band max_y R_y - B*eps <= sum(m) <= min_y R_y and
// solving each row's box-constrained transport exactly covers the optimum.
class IndependentSolver {
public:
    IndependentSolver(const Counts& n, const Counts& caps, int eps)
        : n_(n), caps_(caps), eps_(eps), Y_(n.size()), B_(n[0].size()) {
        row_totals_.resize(Y_);
        for (std::size_t y = 0; y < Y_; ++y)
            row_totals_[y] = std::accumulate(n[y].begin(), n[y].end(), std::int64_t{0});
        min_row_ = *std::min_element(row_totals_.begin(), row_totals_.end());
        max_row_ = *std::max_element(row_totals_.begin(), row_totals_.end());
        centers_.resize(B_);
        for (std::size_t b = 0; b < B_; ++b) {
            std::int64_t col = 0;
            for (std::size_t y = 0; y < Y_; ++y) col += n[y][b];
            centers_[b] = col / static_cast<std::int64_t>(Y_);
        }
    }

    std::optional<Candidate> solve() {
        descend(0, 0);
        return best_;
    }

private:
    void descend(std::size_t b, std::int64_t m_sum) {
        if (b + 1 == B_) {
            std::int64_t lo = std::max<std::int64_t>(
                0, max_row_ - static_cast<std::int64_t>(B_) * eps_ - m_sum);
            std::int64_t hi = min_row_ - m_sum;
            for (std::int64_t v = lo; v <= hi; ++v) {
                m_[b] = v;
                evaluate();
            }
            return;
        }
        for (std::int64_t v = 0; v + m_sum <= min_row_; ++v) {
            m_[b] = v;
            descend(b + 1, m_sum + v);
        }
    }

    void evaluate() {
        Candidate cand;
        cand.counts.resize(Y_);
        std::vector<std::int64_t> lo(B_), hi(B_);
        for (std::size_t y = 0; y < Y_; ++y) {
            for (std::size_t b = 0; b < B_; ++b) {
                lo[b] = std::max(m_[b], n_[y][b] - caps_[y][b]);
                hi[b] = m_[b] + eps_;
            }
            auto v = solve_row(n_[y], lo, hi, row_totals_[y]);
            if (!v) return;
            cand.cost += l1(n_[y], *v) / 2;
            cand.center_dist += l1(*v, centers_);
            if (best_ && cand.cost > best_->cost) return;
            cand.counts[y] = std::move(*v);
        }
        // cost counts outflow once per moved sample (row L1 is twice that)
        if (!best_ || cand.better_than(*best_)) best_ = std::move(cand);
    }

    const Counts& n_;
    const Counts& caps_;
    std::int64_t eps_;
    std::size_t Y_, B_;
    std::vector<std::int64_t> row_totals_;
    std::vector<std::int64_t> m_ = std::vector<std::int64_t>(B_, 0);
    std::int64_t min_row_ = 0, max_row_ = 0;
    std::vector<std::int64_t> centers_;
    std::optional<Candidate> best_;
};

// Coupled features live on the diagonal; balancing reduces to the value
// marginal with a single shared floor.
std::optional<Candidate> solve_coupled(const std::vector<std::int64_t>& marginal,
                                       const std::vector<std::int64_t>& caps, int eps) {
    const auto B = static_cast<std::int64_t>(marginal.size());
    const std::int64_t total = std::accumulate(marginal.begin(), marginal.end(), std::int64_t{0});
    const std::int64_t center = total / B;
    std::optional<Candidate> best;
    std::int64_t m_lo = std::max<std::int64_t>(0, (total - B * eps + B - 1) / B);
    for (std::int64_t m = m_lo; m * B <= total; ++m) {
        std::vector<std::int64_t> lo(marginal.size()), hi(marginal.size(), m + eps);
        for (std::size_t b = 0; b < marginal.size(); ++b)
            lo[b] = std::max(m, marginal[b] - caps[b]);
        auto v = solve_row(marginal, lo, hi, total);
        if (!v) continue;
        Candidate cand;
        cand.cost = l1(marginal, *v) / 2;
        for (std::int64_t x : *v) cand.center_dist += std::llabs(x - center);
        cand.counts = {std::move(*v)};
        if (!best || cand.better_than(*best)) best = std::move(cand);
    }
    return best;
}

int min_feasible_epsilon(const ContingencyTable& t) {
    const auto B = static_cast<std::int64_t>(t.feature_values.size());
    if (t.coupled) return t.total() % B == 0 ? 0 : 1;
    std::int64_t min_row = std::numeric_limits<std::int64_t>::max(), max_row = 0;
    for (std::size_t y = 0; y < t.answer_classes.size(); ++y) {
        min_row = std::min(min_row, t.row_total(y));
        max_row = std::max(max_row, t.row_total(y));
    }
    return static_cast<int>((max_row - min_row + B - 1) / B);
}

// Greedy source/sink matching per row; flow order is lexicographic in
// (value_from, value_to, answer_class_from) per the declared orders.
std::vector<Flow> flows_from_projection(const ContingencyTable& t, const Counts& projected) {
    struct RawFlow {
        std::size_t b_from, b_to, y_from, y_to;
        std::int64_t amount;
    };
    std::vector<RawFlow> raw;
    if (t.coupled) {
        std::vector<std::int64_t> src(t.feature_values.size()), dst(t.feature_values.size());
        for (std::size_t b = 0; b < t.feature_values.size(); ++b) {
            std::int64_t diff = t.column_total(b) - projected[0][b];
            src[b] = std::max<std::int64_t>(diff, 0);
            dst[b] = std::max<std::int64_t>(-diff, 0);
        }
        for (std::size_t bf = 0; bf < src.size(); ++bf)
            for (std::size_t bt = 0; bt < dst.size() && src[bf] > 0; ++bt) {
                std::int64_t amt = std::min(src[bf], dst[bt]);
                if (amt > 0) {
                    raw.push_back({bf, bt, bf, bt, amt});
                    src[bf] -= amt;
                    dst[bt] -= amt;
                }
            }
    } else {
        for (std::size_t y = 0; y < t.answer_classes.size(); ++y) {
            std::vector<std::int64_t> src(t.feature_values.size()), dst(t.feature_values.size());
            for (std::size_t b = 0; b < t.feature_values.size(); ++b) {
                std::int64_t diff = t.counts[y][b] - projected[y][b];
                src[b] = std::max<std::int64_t>(diff, 0);
                dst[b] = std::max<std::int64_t>(-diff, 0);
            }
            for (std::size_t bf = 0; bf < src.size(); ++bf)
                for (std::size_t bt = 0; bt < dst.size() && src[bf] > 0; ++bt) {
                    std::int64_t amt = std::min(src[bf], dst[bt]);
                    if (amt > 0) {
                        raw.push_back({bf, bt, y, y, amt});
                        src[bf] -= amt;
                        dst[bt] -= amt;
                    }
                }
        }
    }
    std::sort(raw.begin(), raw.end(), [](const RawFlow& a, const RawFlow& b) {
        return std::tie(a.b_from, a.b_to, a.y_from) < std::tie(b.b_from, b.b_to, b.y_from);
    });
    std::vector<Flow> flows;
    for (const RawFlow& r : raw) {
        Flow f;
        f.value_from = t.feature_values[r.b_from];
        f.value_to = t.feature_values[r.b_to];
        f.answer_class_from = t.coupled ? t.feature_values[r.b_from] : t.answer_classes[r.y_from];
        f.answer_class_to = t.coupled ? t.feature_values[r.b_to] : t.answer_classes[r.y_to];
        f.amount = r.amount;
        flows.push_back(std::move(f));
    }
    return flows;
}

// Deterministic Fisher-Yates; std::shuffle is implementation-defined.
template <typename T>
void shuffle_ids(std::vector<T>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(v[i - 1], v[j]);
    }
}

void select_samples(InterventionPlan& p, const ContingencyTable& t, const CellIds& ids,
                    const std::set<std::string>& frozen, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::vector<std::string>>> pool(
        t.answer_classes.size(), std::vector<std::vector<std::string>>(t.feature_values.size()));
    for (std::size_t y = 0; y < t.answer_classes.size(); ++y)
        for (std::size_t b = 0; b < t.feature_values.size(); ++b) {
            for (const auto& id : ids[y][b])
                if (!frozen.count(id)) pool[y][b].push_back(id);
            shuffle_ids(pool[y][b], rng);
        }
    for (Flow& f : p.flows) {
        auto y = std::find(t.answer_classes.begin(), t.answer_classes.end(), f.answer_class_from) -
                 t.answer_classes.begin();
        auto b = std::find(t.feature_values.begin(), t.feature_values.end(), f.value_from) -
                 t.feature_values.begin();
        auto& cell = pool[static_cast<std::size_t>(y)][static_cast<std::size_t>(b)];
        if (static_cast<std::int64_t>(cell.size()) < f.amount)
            throw Error("internal: cell has fewer eligible samples than the planned flow");
        f.selected.assign(cell.end() - f.amount, cell.end());
        cell.resize(cell.size() - static_cast<std::size_t>(f.amount));
        std::sort(f.selected.begin(), f.selected.end());
    }
}

Counts full_caps(const ContingencyTable& t) {
    return t.counts;
}

Counts caps_from_ids(const ContingencyTable& t, const CellIds& ids,
                     const std::set<std::string>& frozen) {
    Counts caps(t.answer_classes.size(),
                std::vector<std::int64_t>(t.feature_values.size(), 0));
    for (std::size_t y = 0; y < caps.size(); ++y)
        for (std::size_t b = 0; b < caps[y].size(); ++b) {
            std::int64_t n = 0;
            for (const auto& id : ids[y][b])
                if (!frozen.count(id)) ++n;
            caps[y][b] = n;
        }
    return caps;
}

std::optional<Candidate> solve(const ContingencyTable& t, const Counts& caps, int eps) {
    if (t.coupled) {
        std::vector<std::int64_t> marginal(t.feature_values.size()), cap(t.feature_values.size());
        for (std::size_t b = 0; b < marginal.size(); ++b) {
            marginal[b] = t.column_total(b);
            // movable mass of column b sits in its diagonal cell
            cap[b] = 0;
            for (std::size_t y = 0; y < t.answer_classes.size(); ++y)
                cap[b] += std::min(t.counts[y][b], caps[y][b]);
        }
        return solve_coupled(marginal, cap, eps);
    }
    IndependentSolver solver(t.counts, caps, eps);
    return solver.solve();
}

ContingencyTable projected_from(const ContingencyTable& t, const Candidate& cand) {
    ContingencyTable out = t;
    if (t.coupled) {
        // candidate holds the marginal; rebuild the diagonal layout
        for (std::size_t y = 0; y < t.answer_classes.size(); ++y)
            for (std::size_t b = 0; b < t.feature_values.size(); ++b)
                out.counts[y][b] =
                    (t.answer_classes[y] == t.feature_values[b]) ? cand.counts[0][b] : 0;
    } else {
        out.counts = cand.counts;
    }
    return out;
}

InterventionPlan assemble(const ContingencyTable& t, const FeatureSpec& spec,
                          const Candidate& cand, int eps, std::uint64_t seed, const CellIds* ids,
                          const std::set<std::string>& frozen, bool best_effort) {
    InterventionPlan p;
    p.feature = spec.name;
    p.task = spec.task;
    p.epsilon = eps;
    p.seed = seed;
    p.cost = cand.cost;
    p.best_effort = best_effort;
    p.projected_table = projected_from(t, cand);
    p.flows = flows_from_projection(t, cand.counts);
    if (ids) select_samples(p, t, *ids, frozen, seed);
    return p;
}

}  // namespace

CellIds cell_index(const Dataset& ds, const FeatureSpec& spec) {
    CellIds ids(spec.answer_classes.size(),
                std::vector<std::vector<std::string>>(spec.value_space.size()));
    for (const Sample& s : ds.samples()) {
        if (s.task != spec.task) continue;
        auto it = s.feature_values.find(spec.name);
        if (it == s.feature_values.end()) throw MissingFeatureValue(s.id);
        int b = spec.value_index(it->second);
        if (b < 0) throw MissingFeatureValue(s.id);
        int y = spec.class_index(answer_class_of(s, spec, it->second));
        ids[static_cast<std::size_t>(y)][static_cast<std::size_t>(b)].push_back(s.id);
    }
    return ids;
}

InterventionPlan plan(const ContingencyTable& t, const FeatureSpec& spec, int epsilon,
                      std::uint64_t seed, const CellIds* ids) {
    if (t.total() <= 0) throw EmptyTable();
    if (t.feature_values.size() < 2) throw Degenerate(spec.name);
    auto cand = solve(t, full_caps(t), epsilon);
    if (!cand) throw Infeasible(epsilon, min_feasible_epsilon(t));
    return assemble(t, spec, *cand, epsilon, seed, ids, {}, false);
}

bool verify_plan(const ContingencyTable& t, const InterventionPlan& p, int epsilon) {
    try {
        ContingencyTable proj = t;
        Counts outflow(t.answer_classes.size(),
                       std::vector<std::int64_t>(t.feature_values.size(), 0));
        std::int64_t cost = 0;
        std::set<std::string> seen_ids;
        for (const Flow& f : p.flows) {
            if (f.amount < 1) return false;
            auto yi = std::find(t.answer_classes.begin(), t.answer_classes.end(),
                                f.answer_class_from);
            auto yo = std::find(t.answer_classes.begin(), t.answer_classes.end(),
                                f.answer_class_to);
            auto bi = std::find(t.feature_values.begin(), t.feature_values.end(), f.value_from);
            auto bo = std::find(t.feature_values.begin(), t.feature_values.end(), f.value_to);
            if (yi == t.answer_classes.end() || yo == t.answer_classes.end() ||
                bi == t.feature_values.end() || bo == t.feature_values.end())
                return false;
            if (f.value_from == f.value_to && f.answer_class_from == f.answer_class_to)
                return false;
            if (t.coupled) {
                if (f.answer_class_from != f.value_from || f.answer_class_to != f.value_to)
                    return false;
            } else if (f.answer_class_from != f.answer_class_to) {
                return false;
            }
            std::size_t y_from = static_cast<std::size_t>(yi - t.answer_classes.begin());
            std::size_t y_to = static_cast<std::size_t>(yo - t.answer_classes.begin());
            std::size_t b_from = static_cast<std::size_t>(bi - t.feature_values.begin());
            std::size_t b_to = static_cast<std::size_t>(bo - t.feature_values.begin());
            outflow[y_from][b_from] += f.amount;
            if (outflow[y_from][b_from] > t.counts[y_from][b_from]) return false;
            proj.counts[y_from][b_from] -= f.amount;
            proj.counts[y_to][b_to] += f.amount;
            cost += f.amount;
            if (!f.selected.empty()) {
                if (static_cast<std::int64_t>(f.selected.size()) != f.amount) return false;
                for (const auto& id : f.selected)
                    if (!seen_ids.insert(id).second) return false;
            }
        }
        for (const auto& row : proj.counts)
            for (std::int64_t c : row)
                if (c < 0) return false;
        if (proj.counts != p.projected_table.counts) return false;
        if (cost != p.cost) return false;
        if (p.best_effort) return max_imbalance(proj) <= max_imbalance(t);
        return max_imbalance(proj) <= epsilon;
    } catch (const Error&) {
        return false;
    }
}

InterventionPlan replan_residual(const ContingencyTable& t_actual, const FeatureSpec& spec,
                                 int epsilon, const std::set<std::string>& frozen,
                                 std::uint64_t seed, const CellIds& ids) {
    if (t_actual.total() <= 0) throw EmptyTable();
    if (t_actual.feature_values.size() < 2) throw Degenerate(spec.name);
    Counts caps = caps_from_ids(t_actual, ids, frozen);
    auto cand = solve(t_actual, caps, epsilon);
    if (cand) return assemble(t_actual, spec, *cand, epsilon, seed, &ids, frozen, false);
    // the identity projection is always feasible at the current spread, so
    // raising the tolerance must terminate at the minimal achievable spread
    std::int64_t current = max_imbalance(t_actual);
    for (int eps = epsilon + 1; eps <= current; ++eps) {
        cand = solve(t_actual, caps, eps);
        if (cand) return assemble(t_actual, spec, *cand, eps, seed, &ids, frozen, true);
    }
    throw Error("internal: residual replan found no feasible projection");
}

namespace {

json table_to_json(const ContingencyTable& t) {
    return json{{"feature", t.feature},
                {"answer_classes", t.answer_classes},
                {"feature_values", t.feature_values},
                {"counts", t.counts},
                {"coupled", t.coupled}};
}

ContingencyTable table_from_json(const json& j) {
    ContingencyTable t;
    t.feature = j.at("feature").get<std::string>();
    t.answer_classes = j.at("answer_classes").get<std::vector<std::string>>();
    t.feature_values = j.at("feature_values").get<std::vector<std::string>>();
    t.counts = j.at("counts").get<Counts>();
    t.coupled = j.value("coupled", false);
    return t;
}

}  // namespace

std::string serialize_plans(const std::vector<InterventionPlan>& plans) {
    json out;
    out["plans"] = json::array();
    for (const auto& p : plans) {
        json jp;
        jp["feature"] = p.feature;
        jp["task"] = to_string(p.task);
        jp["epsilon"] = p.epsilon;
        jp["seed"] = p.seed;
        jp["cost"] = p.cost;
        jp["best_effort"] = p.best_effort;
        jp["projected_table"] = table_to_json(p.projected_table);
        jp["flows"] = json::array();
        for (const Flow& f : p.flows) {
            jp["flows"].push_back({{"answer_class_from", f.answer_class_from},
                                   {"answer_class_to", f.answer_class_to},
                                   {"value_from", f.value_from},
                                   {"value_to", f.value_to},
                                   {"amount", f.amount},
                                   {"selected", f.selected}});
        }
        out["plans"].push_back(std::move(jp));
    }
    return out.dump(2) + "\n";
}

std::vector<InterventionPlan> parse_plans(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("plans"))
        throw ConfigError("plan file must be a JSON object with a `plans` array");
    std::vector<InterventionPlan> plans;
    try {
        for (const auto& jp : j.at("plans")) {
            InterventionPlan p;
            p.feature = jp.at("feature").get<std::string>();
            p.task = task_from_string(jp.at("task").get<std::string>());
            p.epsilon = jp.at("epsilon").get<int>();
            p.seed = jp.at("seed").get<std::uint64_t>();
            p.cost = jp.at("cost").get<std::int64_t>();
            p.best_effort = jp.value("best_effort", false);
            p.projected_table = table_from_json(jp.at("projected_table"));
            for (const auto& jf : jp.at("flows")) {
                Flow f;
                f.answer_class_from = jf.at("answer_class_from").get<std::string>();
                f.answer_class_to = jf.at("answer_class_to").get<std::string>();
                f.value_from = jf.at("value_from").get<std::string>();
                f.value_to = jf.at("value_to").get<std::string>();
                f.amount = jf.at("amount").get<std::int64_t>();
                f.selected = jf.at("selected").get<std::vector<std::string>>();
                p.flows.push_back(std::move(f));
            }
            plans.push_back(std::move(p));
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad plan file: ") + e.what());
    }
    return plans;
}

void write_plans(const std::vector<InterventionPlan>& plans, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoFailure(path);
    f << serialize_plans(plans);
    if (!f.good()) throw IoFailure(path);
}

std::vector<InterventionPlan> load_plans(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoFailure(path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return parse_plans(buf.str());
}

}  // namespace igd
