#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "igd/infogain.hpp"

namespace igd {

/// One intervention direction: move `amount` samples from cell
/// (answer_class_from, value_from) to (answer_class_to, value_to).
/// Independent coupling keeps the answer class; coupled features move it
/// together with the value.
struct Flow {
    std::string answer_class_from;
    std::string answer_class_to;
    std::string value_from;
    std::string value_to;
    std::int64_t amount = 0;
    std::vector<std::string> selected;  // sample ids chosen for rewriting

    bool operator==(const Flow& o) const = default;
};

struct InterventionPlan {
    std::string feature;
    Task task = Task::OTHER;
    std::vector<Flow> flows;
    ContingencyTable projected_table;
    std::int64_t cost = 0;  // sum of flow amounts
    int epsilon = 0;
    std::uint64_t seed = 0;
    // set when frozen samples made the target tolerance unreachable and the
    // plan instead minimizes the residual spread
    bool best_effort = false;

    bool operator==(const InterventionPlan& o) const = default;
};

/// Sample ids per table cell, [y][b], in dataset order.
using CellIds = std::vector<std::vector<std::vector<std::string>>>;

CellIds cell_index(const Dataset& ds, const FeatureSpec& spec);

/// Minimal-cost integer flow assignment whose projected table passes
/// goal_check(epsilon). Sample selection within a cell is uniform-random
/// under `seed` (skipped when `ids` is null). Deterministic.
/// Throws Infeasible (with the minimum feasible epsilon) or Degenerate.
InterventionPlan plan(const ContingencyTable& t, const FeatureSpec& spec, int epsilon,
                      std::uint64_t seed, const CellIds* ids = nullptr);

/// Recomputes the projection from t and p.flows and checks every stored
/// field; false on any inconsistency or capacity violation.
bool verify_plan(const ContingencyTable& t, const InterventionPlan& p, int epsilon);

/// Plans over the residual imbalance after a rewrite pass, never selecting
/// ids in `frozen`. Falls back to the feasible plan of minimal residual
/// spread (flagged best_effort) instead of erroring.
InterventionPlan replan_residual(const ContingencyTable& t_actual, const FeatureSpec& spec,
                                 int epsilon, const std::set<std::string>& frozen,
                                 std::uint64_t seed, const CellIds& ids);

std::string serialize_plans(const std::vector<InterventionPlan>& plans);
std::vector<InterventionPlan> parse_plans(const std::string& text);
void write_plans(const std::vector<InterventionPlan>& plans, const std::string& path);
std::vector<InterventionPlan> load_plans(const std::string& path);

}  // namespace igd
