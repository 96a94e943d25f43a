#pragma once

#include "digisim/milp.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

namespace digisim::milp::detail {

/// Immutable problem data shared by every copy of a solver.
struct LpData {
    std::size_t n = 0;      // structural columns
    std::size_t m = 0;      // rows
    std::vector<double> a;  // m x n, row-major
    std::vector<double> cost;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterationLimit };

/// Dense-tableau bounded-variable simplex over  min c'x  s.t.  Ax - s = 0,  l <= (x, s) <= u.
/// Row activities s carry the constraint senses as bounds, so every constraint is a column
/// bound. Copies are cheap enough to serve as branch-and-bound node states, and a copy with
/// tightened bounds re-optimizes with the dual simplex from its parent's basis.
class BoundedSimplex {
  public:
    explicit BoundedSimplex(const Model &model);

    LpStatus solve();

    /// Changes the bounds of structural column j, keeping the basis.
    void set_bounds(std::size_t j, double lo, double hi);

    double lower(std::size_t j) const { return lb_[j]; }
    double upper(std::size_t j) const { return ub_[j]; }
    double value(std::size_t j) const { return x_[j]; }
    double objective() const;
    std::size_t num_structural() const noexcept { return data_->n; }
    /// Row with the largest bound violation among basic row activities, if any.
    std::optional<std::size_t> most_violated_row() const;
    std::size_t pivots() const noexcept { return total_pivots_; }

  private:
    enum class State : std::uint8_t { Basic, AtLower, AtUpper, Free };

    double &tab(std::size_t r, std::size_t j) { return tab_[r * cols_ + j]; }
    double tab(std::size_t r, std::size_t j) const { return tab_[r * cols_ + j]; }
    double column_entry(std::size_t r, std::size_t j) const;

    bool can_increase(std::size_t j) const;
    bool can_decrease(std::size_t j) const;
    double violation(std::size_t j) const;
    bool primal_feasible() const;
    bool dual_feasible() const;

    LpStatus primal(bool phase_one);
    LpStatus dual();
    void move_nonbasic(std::size_t q, double delta);
    void pivot(std::size_t r, std::size_t q);
    void refactor();
    void recompute_basics();
    void recompute_duals();

    std::shared_ptr<const LpData> data_;
    std::size_t cols_ = 0;
    std::vector<double> lb_;
    std::vector<double> ub_;
    std::vector<double> x_;
    std::vector<double> d_;
    std::vector<double> tab_;
    std::vector<std::size_t> head_;
    std::vector<State> state_;
    std::size_t pivots_since_refactor_ = 0;
    std::size_t total_pivots_ = 0;
};

} // namespace digisim::milp::detail
