#include "simplex.hpp"

#include "digisim/error.hpp"
#include "digisim/milp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

namespace digisim::milp {

namespace {

constexpr double kIntTol = 1e-6;

using detail::BoundedSimplex;
using detail::LpStatus;

std::optional<std::string> row_range_conflict(const Model &model) {
    const auto &vars = model.variables();
    for (const auto &row : model.constraints()) {
        double lo = 0;
        double hi = 0;
        for (const auto &t : row.terms) {
            const auto &v = vars[t.var.index];
            lo += t.coef > 0 ? t.coef * v.lower : t.coef * v.upper;
            hi += t.coef > 0 ? t.coef * v.upper : t.coef * v.lower;
        }
        const double tol = 1e-9 * std::max(1.0, std::abs(row.rhs));
        const bool bad = (row.sense != Sense::GreaterEqual && lo > row.rhs + tol) ||
                         (row.sense != Sense::LessEqual && hi < row.rhs - tol);
        if (bad) {
            return "constraint " + row.name + " cannot be met within variable bounds";
        }
    }
    return std::nullopt;
}

bool integral_objective(const Model &model) {
    const auto &vars = model.variables();
    return std::all_of(model.objective().begin(), model.objective().end(), [&](const Term &t) {
        return vars[t.var.index].is_integral() && t.coef == std::floor(t.coef);
    }) && model.objective_constant() == std::floor(model.objective_constant());
}

double evaluate_objective(const Model &model, const std::vector<double> &values) {
    double v = model.objective_constant();
    for (const auto &t : model.objective()) {
        v += t.coef * values[t.var.index];
    }
    return v;
}

struct Node {
    BoundedSimplex lp;
    double parent_bound = -kInfinity;
};

} // namespace

Solution solve(const Model &model, const SolveOptions &options) {
    model.validate();
    if (!(options.gap >= 0)) {
        throw Error(ErrorKind::InvalidModel, "gap must be nonnegative");
    }
    Solution out;
    const auto &vars = model.variables();
    const std::size_t n = vars.size();

    if (auto conflict = row_range_conflict(model)) {
        out.status = SolveStatus::Infeasible;
        out.infeasibility_hint = *conflict;
        return out;
    }

    const auto start = std::chrono::steady_clock::now();
    const bool round_bound = integral_objective(model);
    const double constant = model.objective_constant();

    auto node_bound = [&](const BoundedSimplex &lp) {
        const double b = lp.objective() + constant;
        return round_bound ? std::ceil(b - kIntTol) : b;
    };
    auto prune_margin = [&](double incumbent) {
        return std::max(options.gap, 1e-9 * std::max(1.0, std::abs(incumbent)));
    };

    std::vector<double> incumbent;
    double incumbent_obj = kInfinity;
    double pruned_bound = kInfinity;
    bool stopped = false;

    BoundedSimplex root(model);
    const LpStatus root_status = root.solve();
    if (root_status == LpStatus::Infeasible || root_status == LpStatus::IterationLimit) {
        out.status = SolveStatus::Infeasible;
        auto row = root.most_violated_row();
        out.infeasibility_hint = "LP relaxation infeasible";
        if (row) {
            out.infeasibility_hint += " (most violated row: " + model.constraints()[*row].name + ")";
        }
        return out;
    }
    if (root_status == LpStatus::Unbounded) {
        throw Error(ErrorKind::InvalidModel, "LP relaxation is unbounded");
    }

    auto try_incumbent = [&](const BoundedSimplex &lp) {
        BoundedSimplex fixed = lp;
        std::vector<double> values(n);
        for (std::size_t j = 0; j < n; ++j) {
            if (vars[j].is_integral()) {
                const double r = std::round(lp.value(j));
                fixed.set_bounds(j, r, r);
            }
        }
        if (fixed.solve() != LpStatus::Optimal) {
            return;
        }
        for (std::size_t j = 0; j < n; ++j) {
            double v = fixed.value(j);
            if (vars[j].is_integral()) {
                v = std::round(v);
            } else {
                v = std::clamp(v, vars[j].lower, vars[j].upper);
                if (std::abs(v) < 1e-12) {
                    v = 0;
                }
            }
            values[j] = v;
        }
        if (!check_solution(model, values).empty()) {
            return;
        }
        const double obj = evaluate_objective(model, values);
        if (obj < incumbent_obj) {
            incumbent_obj = obj;
            incumbent = std::move(values);
        }
    };

    if (options.initial_solution.size() == n && check_solution(model, options.initial_solution).empty()) {
        incumbent = options.initial_solution;
        incumbent_obj = evaluate_objective(model, incumbent);
    }

    std::vector<Node> stack;
    stack.push_back({std::move(root), -kInfinity});
    bool first = true;
    while (!stack.empty()) {
        if (options.node_limit != 0 && out.nodes >= options.node_limit) {
            stopped = true;
            break;
        }
        if (std::chrono::steady_clock::now() - start > options.time_limit) {
            stopped = true;
            break;
        }
        Node node = std::move(stack.back());
        stack.pop_back();
        ++out.nodes;
        if (!first) {
            const LpStatus st = node.lp.solve();
            if (st != LpStatus::Optimal) {
                continue;
            }
        }
        first = false;
        const double bound = node_bound(node.lp);
        if (!incumbent.empty() && bound >= incumbent_obj - prune_margin(incumbent_obj)) {
            pruned_bound = std::min(pruned_bound, bound);
            continue;
        }
        std::optional<std::size_t> branch;
        for (std::size_t j = 0; j < n; ++j) {
            if (!vars[j].is_integral()) {
                continue;
            }
            const double v = node.lp.value(j);
            if (std::abs(v - std::round(v)) > kIntTol) {
                branch = j;
                break;
            }
        }
        if (!branch) {
            try_incumbent(node.lp);
            if (incumbent.empty() || bound < incumbent_obj - prune_margin(incumbent_obj)) {
                pruned_bound = std::min(pruned_bound, bound);
            }
            continue;
        }
        const std::size_t j = *branch;
        const double v = node.lp.value(j);
        const double lo = node.lp.lower(j);
        const double hi = node.lp.upper(j);
        Node up{node.lp, bound};
        up.lp.set_bounds(j, std::ceil(v), hi);
        node.lp.set_bounds(j, lo, std::floor(v));
        node.parent_bound = bound;
        stack.push_back(std::move(up));
        stack.push_back(std::move(node));
    }

    if (incumbent.empty()) {
        out.status = stopped ? SolveStatus::GapNotReached : SolveStatus::Infeasible;
        out.infeasibility_hint = stopped ? "limit reached before an integer point was found"
                                         : "no integer point satisfies all constraints";
        return out;
    }
    out.values = std::move(incumbent);
    out.objective = incumbent_obj;
    if (stopped) {
        out.status = SolveStatus::GapNotReached;
        double lower = pruned_bound;
        for (const auto &node : stack) {
            lower = std::min(lower, node.parent_bound);
        }
        out.proven_gap = std::max(0.0, incumbent_obj - std::min(lower, incumbent_obj));
        if (out.proven_gap <= options.gap) {
            out.status = SolveStatus::FeasibleWithinGap;
        }
        return out;
    }
    out.proven_gap = std::max(0.0, incumbent_obj - std::min(pruned_bound, incumbent_obj));
    const double exact_tol = 1e-9 * std::max(1.0, std::abs(incumbent_obj));
    out.status = out.proven_gap <= exact_tol ? SolveStatus::Optimal : SolveStatus::FeasibleWithinGap;
    if (out.status == SolveStatus::Optimal) {
        out.proven_gap = 0;
    }
    return out;
}

} // namespace digisim::milp
