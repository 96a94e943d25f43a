#include "digisim/error.hpp"
#include "digisim/milp.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace digisim::milp {

LinearExpr &LinearExpr::operator+=(const LinearExpr &other) {
    terms_.insert(terms_.end(), other.terms_.begin(), other.terms_.end());
    constant_ += other.constant_;
    return *this;
}

LinearExpr LinearExpr::operator-() const {
    LinearExpr out;
    for (const auto &t : terms_) {
        out.add(t.var, -t.coef);
    }
    out.add_constant(-constant_);
    return out;
}

namespace {

std::vector<Term> merge_terms(const std::vector<Term> &terms) {
    std::map<std::size_t, double> merged;
    for (const auto &t : terms) {
        merged[t.var.index] += t.coef;
    }
    std::vector<Term> out;
    for (const auto &[idx, coef] : merged) {
        if (coef != 0) {
            out.push_back({VarId{idx}, coef});
        }
    }
    return out;
}

} // namespace

VarId Model::add_variable(std::string name, double lower, double upper, VarType type) {
    if (type == VarType::Binary) {
        lower = std::max(lower, 0.0);
        upper = std::min(upper, 1.0);
    }
    vars_.push_back({std::move(name), lower, upper, type});
    return VarId{vars_.size() - 1};
}

void Model::add_constraint(std::string name, const LinearExpr &expr, Sense sense, double rhs) {
    rows_.push_back({std::move(name), merge_terms(expr.terms()), sense, rhs - expr.constant()});
}

void Model::set_objective(const LinearExpr &expr) {
    objective_ = merge_terms(expr.terms());
    objective_constant_ = expr.constant();
}

void Model::validate() const {
    for (const auto &v : vars_) {
        if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper) {
            throw Error(ErrorKind::InvalidModel, "variable " + v.name + " has empty bounds");
        }
        if (v.is_integral() && (!std::isfinite(v.lower) || !std::isfinite(v.upper))) {
            throw Error(ErrorKind::InvalidModel, "integer variable " + v.name + " needs finite bounds");
        }
    }
    auto check_terms = [&](const std::vector<Term> &terms, const std::string &where) {
        for (const auto &t : terms) {
            if (t.var.index >= vars_.size()) {
                throw Error(ErrorKind::InvalidModel, where + " references undeclared variable " +
                                                         std::to_string(t.var.index));
            }
            if (!std::isfinite(t.coef)) {
                throw Error(ErrorKind::InvalidModel, where + " has a non-finite coefficient");
            }
        }
    };
    for (const auto &r : rows_) {
        check_terms(r.terms, "constraint " + r.name);
        if (!std::isfinite(r.rhs)) {
            throw Error(ErrorKind::InvalidModel, "constraint " + r.name + " has non-finite rhs");
        }
    }
    check_terms(objective_, "objective");
}

std::string_view to_string(SolveStatus status) noexcept {
    switch (status) {
    case SolveStatus::Optimal:
        return "OPTIMAL";
    case SolveStatus::FeasibleWithinGap:
        return "FEASIBLE_WITHIN_GAP";
    case SolveStatus::Infeasible:
        return "INFEASIBLE";
    case SolveStatus::GapNotReached:
        return "GAP_NOT_REACHED";
    }
    return "UNKNOWN";
}

std::vector<std::string> check_solution(const Model &model, std::span<const double> values) {
    std::vector<std::string> violated;
    const auto &vars = model.variables();
    for (std::size_t j = 0; j < vars.size(); ++j) {
        const double v = values[j];
        if (v < vars[j].lower || v > vars[j].upper) {
            violated.push_back("bound:" + vars[j].name);
        } else if (vars[j].is_integral() && v != std::floor(v)) {
            violated.push_back("integrality:" + vars[j].name);
        }
    }
    for (const auto &row : model.constraints()) {
        const bool exact = std::all_of(row.terms.begin(), row.terms.end(), [&](const Term &t) {
                               return vars[t.var.index].is_integral() && t.coef == std::floor(t.coef);
                           }) &&
                           row.rhs == std::floor(row.rhs);
        bool ok = true;
        if (exact) {
            long long activity = 0;
            for (const auto &t : row.terms) {
                activity += static_cast<long long>(t.coef) * static_cast<long long>(values[t.var.index]);
            }
            const auto rhs = static_cast<long long>(row.rhs);
            ok = row.sense == Sense::LessEqual   ? activity <= rhs
                 : row.sense == Sense::Equal     ? activity == rhs
                                                 : activity >= rhs;
        } else {
            double activity = 0;
            double scale = std::abs(row.rhs);
            for (const auto &t : row.terms) {
                activity += t.coef * values[t.var.index];
                scale = std::max(scale, std::abs(t.coef * values[t.var.index]));
            }
            const double tol = 1e-9 * std::max(1.0, scale);
            ok = row.sense == Sense::LessEqual   ? activity <= row.rhs + tol
                 : row.sense == Sense::Equal     ? std::abs(activity - row.rhs) <= tol
                                                 : activity >= row.rhs - tol;
        }
        if (!ok) {
            violated.push_back(row.name);
        }
    }
    return violated;
}

} // namespace digisim::milp
