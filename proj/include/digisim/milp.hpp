#pragma once

#include <chrono>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace digisim::milp {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

enum class VarType { Continuous, Integer, Binary };
enum class Sense { LessEqual, Equal, GreaterEqual };

struct VarId {
    std::size_t index = 0;
    friend bool operator==(VarId, VarId) = default;
};

struct Term {
    VarId var;
    double coef = 0;
};

/// Sum of coef * var plus a constant.
class LinearExpr {
  public:
    LinearExpr() = default;
    LinearExpr(VarId v) { add(v, 1.0); }

    LinearExpr &add(VarId v, double coef) {
        terms_.push_back({v, coef});
        return *this;
    }
    LinearExpr &add_constant(double c) {
        constant_ += c;
        return *this;
    }
    LinearExpr &operator+=(const LinearExpr &other);
    LinearExpr operator-() const;

    const std::vector<Term> &terms() const noexcept { return terms_; }
    double constant() const noexcept { return constant_; }

  private:
    std::vector<Term> terms_;
    double constant_ = 0;
};

struct Variable {
    std::string name;
    double lower = 0;
    double upper = kInfinity;
    VarType type = VarType::Continuous;
    bool is_integral() const noexcept { return type != VarType::Continuous; }
};

/// Constraint in canonical form `sum(terms) sense rhs`; duplicate terms are merged.
struct Constraint {
    std::string name;
    std::vector<Term> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0;
};

/// A minimization MILP.
class Model {
  public:
    VarId add_variable(std::string name, double lower, double upper, VarType type);
    VarId add_binary(std::string name) { return add_variable(std::move(name), 0, 1, VarType::Binary); }

    /// The expression's constant is moved to the right-hand side.
    void add_constraint(std::string name, const LinearExpr &expr, Sense sense, double rhs);
    void set_objective(const LinearExpr &expr);

    const std::vector<Variable> &variables() const noexcept { return vars_; }
    const Variable &variable(VarId v) const { return vars_.at(v.index); }
    const std::vector<Constraint> &constraints() const noexcept { return rows_; }
    const std::vector<Term> &objective() const noexcept { return objective_; }
    double objective_constant() const noexcept { return objective_constant_; }
    std::size_t num_variables() const noexcept { return vars_.size(); }

    /// Throws InvalidModel on dangling references, infinite integer bounds or bad bounds.
    void validate() const;

  private:
    std::vector<Variable> vars_;
    std::vector<Constraint> rows_;
    std::vector<Term> objective_;
    double objective_constant_ = 0;
};

enum class SolveStatus { Optimal, FeasibleWithinGap, Infeasible, GapNotReached };
std::string_view to_string(SolveStatus status) noexcept;

struct SolveOptions {
    /// Absolute optimality gap accepted when pruning.
    double gap = 0;
    std::chrono::milliseconds time_limit{60'000};
    /// 0 = unlimited. Hitting it behaves like the time limit, deterministically.
    std::size_t node_limit = 0;
    /// Optional starting incumbent, indexed by VarId::index; ignored unless feasible.
    std::vector<double> initial_solution;
};

struct Solution {
    SolveStatus status = SolveStatus::Infeasible;
    /// Indexed by VarId::index; integral variables hold exact integers.
    std::vector<double> values;
    double objective = kInfinity;
    /// incumbent - proven lower bound.
    double proven_gap = kInfinity;
    std::string infeasibility_hint;
    std::size_t nodes = 0;

    bool has_incumbent() const noexcept { return !values.empty(); }
    bool feasible() const noexcept {
        return status == SolveStatus::Optimal || status == SolveStatus::FeasibleWithinGap;
    }
    double value(VarId v) const { return values.at(v.index); }
};

/// Depth-first branch and bound over an LP relaxation. Branches on the lowest-index
/// fractional integer variable, down branch first, so results are deterministic.
Solution solve(const Model &model, const SolveOptions &options = {});

/// Names of constraints violated by `values`: rows over integral variables with integral
/// coefficients are checked exactly, other rows within 1e-9 relative.
std::vector<std::string> check_solution(const Model &model, std::span<const double> values);

/// expr <= bound_var and -expr <= bound_var.
void add_abs_deviation(Model &model, const LinearExpr &expr, VarId bound_var,
                       const std::string &name = "absdev");

/// h >= w_min - (1 - x) M and h <= w_max + (1 - x) M. Throws BigMTooSmall when
/// big_m < max(|upper(h)|, w_max).
void add_indicator_window(Model &model, VarId h, VarId x, double w_min, double w_max, double big_m,
                          const std::string &name = "window");

/// CPLEX LP text format, for cross-checking with external solvers.
std::string to_lp_format(const Model &model);

} // namespace digisim::milp
