#include "simplex.hpp"

#include "digisim/error.hpp"

#include <algorithm>
#include <cmath>

namespace digisim::milp::detail {

namespace {

constexpr double kFeasTol = 1e-9;
constexpr double kDualTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kDropTol = 1e-14;
constexpr std::size_t kRefactorInterval = 100;
constexpr std::size_t kBlandAfter = 50;

} // namespace

BoundedSimplex::BoundedSimplex(const Model &model) {
    auto data = std::make_shared<LpData>();
    const auto &vars = model.variables();
    const auto &rows = model.constraints();
    data->n = vars.size();
    data->m = rows.size();
    data->a.assign(data->m * data->n, 0.0);
    data->cost.assign(data->n, 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (const auto &t : rows[r].terms) {
            data->a[r * data->n + t.var.index] += t.coef;
        }
    }
    for (const auto &t : model.objective()) {
        data->cost[t.var.index] += t.coef;
    }
    data_ = data;

    const std::size_t n = data_->n;
    const std::size_t m = data_->m;
    cols_ = n + m;
    lb_.resize(cols_);
    ub_.resize(cols_);
    for (std::size_t j = 0; j < n; ++j) {
        lb_[j] = vars[j].lower;
        ub_[j] = vars[j].upper;
        if (vars[j].is_integral()) {
            lb_[j] = std::ceil(lb_[j] - 1e-9);
            ub_[j] = std::floor(ub_[j] + 1e-9);
        }
    }
    for (std::size_t r = 0; r < m; ++r) {
        const auto &row = rows[r];
        lb_[n + r] = row.sense == Sense::LessEqual ? -kInfinity : row.rhs;
        ub_[n + r] = row.sense == Sense::GreaterEqual ? kInfinity : row.rhs;
    }

    x_.assign(cols_, 0.0);
    state_.assign(cols_, State::AtLower);
    head_.resize(m);
    tab_.assign(m * cols_, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        if (std::isfinite(lb_[j])) {
            state_[j] = State::AtLower;
            x_[j] = lb_[j];
        } else if (std::isfinite(ub_[j])) {
            state_[j] = State::AtUpper;
            x_[j] = ub_[j];
        } else {
            state_[j] = State::Free;
            x_[j] = 0;
        }
    }
    // Slack basis: s_r - sum_j a_rj x_j = 0.
    for (std::size_t r = 0; r < m; ++r) {
        head_[r] = n + r;
        state_[n + r] = State::Basic;
        for (std::size_t j = 0; j < n; ++j) {
            tab(r, j) = -data_->a[r * n + j];
        }
        tab(r, n + r) = 1.0;
    }
    recompute_basics();
    recompute_duals();
}

double BoundedSimplex::column_entry(std::size_t r, std::size_t j) const {
    const std::size_t n = data_->n;
    if (j < n) {
        return data_->a[r * n + j];
    }
    return (j - n == r) ? -1.0 : 0.0;
}

bool BoundedSimplex::can_increase(std::size_t j) const {
    return (state_[j] == State::AtLower && ub_[j] > lb_[j]) || state_[j] == State::Free;
}

bool BoundedSimplex::can_decrease(std::size_t j) const {
    return (state_[j] == State::AtUpper && ub_[j] > lb_[j]) || state_[j] == State::Free;
}

double BoundedSimplex::violation(std::size_t j) const {
    if (x_[j] < lb_[j] - kFeasTol) {
        return lb_[j] - x_[j];
    }
    if (x_[j] > ub_[j] + kFeasTol) {
        return x_[j] - ub_[j];
    }
    return 0.0;
}

bool BoundedSimplex::primal_feasible() const {
    for (std::size_t r = 0; r < data_->m; ++r) {
        if (violation(head_[r]) > 0) {
            return false;
        }
    }
    return true;
}

bool BoundedSimplex::dual_feasible() const {
    for (std::size_t j = 0; j < cols_; ++j) {
        switch (state_[j]) {
        case State::Basic:
            break;
        case State::AtLower:
            if (ub_[j] > lb_[j] && d_[j] < -kDualTol) {
                return false;
            }
            break;
        case State::AtUpper:
            if (ub_[j] > lb_[j] && d_[j] > kDualTol) {
                return false;
            }
            break;
        case State::Free:
            if (std::abs(d_[j]) > kDualTol) {
                return false;
            }
            break;
        }
    }
    return true;
}

void BoundedSimplex::recompute_basics() {
    const std::size_t m = data_->m;
    for (std::size_t r = 0; r < m; ++r) {
        double v = 0;
        const double *row = &tab_[r * cols_];
        for (std::size_t j = 0; j < cols_; ++j) {
            if (state_[j] != State::Basic && row[j] != 0 && x_[j] != 0) {
                v -= row[j] * x_[j];
            }
        }
        x_[head_[r]] = v;
    }
}

void BoundedSimplex::recompute_duals() {
    const std::size_t n = data_->n;
    d_.assign(cols_, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
        d_[j] = data_->cost[j];
    }
    for (std::size_t r = 0; r < data_->m; ++r) {
        const std::size_t h = head_[r];
        const double cb = h < n ? data_->cost[h] : 0.0;
        if (cb == 0) {
            continue;
        }
        const double *row = &tab_[r * cols_];
        for (std::size_t j = 0; j < cols_; ++j) {
            d_[j] -= cb * row[j];
        }
    }
    for (std::size_t r = 0; r < data_->m; ++r) {
        d_[head_[r]] = 0;
    }
}

void BoundedSimplex::refactor() {
    const std::size_t m = data_->m;
    if (m == 0) {
        return;
    }
    const std::size_t width = m + cols_;
    std::vector<double> aug(m * width, 0.0);
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t c = 0; c < m; ++c) {
            aug[r * width + c] = column_entry(r, head_[c]);
        }
        for (std::size_t j = 0; j < cols_; ++j) {
            aug[r * width + m + j] = column_entry(r, j);
        }
    }
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t best = c;
        double best_abs = std::abs(aug[c * width + c]);
        for (std::size_t r = c + 1; r < m; ++r) {
            const double v = std::abs(aug[r * width + c]);
            if (v > best_abs) {
                best_abs = v;
                best = r;
            }
        }
        if (best_abs < 1e-12) {
            // Singular basis: keep the current tableau.
            return;
        }
        if (best != c) {
            for (std::size_t k = 0; k < width; ++k) {
                std::swap(aug[c * width + k], aug[best * width + k]);
            }
        }
        const double inv = 1.0 / aug[c * width + c];
        for (std::size_t k = c; k < width; ++k) {
            aug[c * width + k] *= inv;
        }
        for (std::size_t r = 0; r < m; ++r) {
            if (r == c) {
                continue;
            }
            const double f = aug[r * width + c];
            if (f == 0) {
                continue;
            }
            for (std::size_t k = c; k < width; ++k) {
                aug[r * width + k] -= f * aug[c * width + k];
            }
        }
    }
    for (std::size_t r = 0; r < m; ++r) {
        for (std::size_t j = 0; j < cols_; ++j) {
            double v = aug[r * width + m + j];
            tab(r, j) = std::abs(v) < kDropTol ? 0.0 : v;
        }
        for (std::size_t c = 0; c < m; ++c) {
            tab(r, head_[c]) = (r == c) ? 1.0 : 0.0;
        }
    }
    recompute_basics();
    recompute_duals();
    pivots_since_refactor_ = 0;
}

void BoundedSimplex::move_nonbasic(std::size_t q, double delta) {
    if (delta == 0) {
        return;
    }
    x_[q] += delta;
    for (std::size_t r = 0; r < data_->m; ++r) {
        const double a = tab(r, q);
        if (a != 0) {
            x_[head_[r]] -= a * delta;
        }
    }
}

void BoundedSimplex::pivot(std::size_t r, std::size_t q) {
    const std::size_t m = data_->m;
    double *prow = &tab_[r * cols_];
    const double inv = 1.0 / prow[q];
    std::vector<std::size_t> nz;
    nz.reserve(cols_);
    for (std::size_t j = 0; j < cols_; ++j) {
        if (prow[j] != 0) {
            prow[j] *= inv;
            if (std::abs(prow[j]) < kDropTol) {
                prow[j] = 0;
            } else {
                nz.push_back(j);
            }
        }
    }
    prow[q] = 1.0;
    for (std::size_t i = 0; i < m; ++i) {
        if (i == r) {
            continue;
        }
        double *row = &tab_[i * cols_];
        const double f = row[q];
        if (f == 0) {
            continue;
        }
        for (std::size_t j : nz) {
            double v = row[j] - f * prow[j];
            row[j] = std::abs(v) < kDropTol ? 0.0 : v;
        }
        row[q] = 0.0;
    }
    const double fd = d_[q];
    if (fd != 0) {
        for (std::size_t j : nz) {
            d_[j] -= fd * prow[j];
        }
    }
    d_[q] = 0.0;
    head_[r] = q;
    state_[q] = State::Basic;
    ++pivots_since_refactor_;
    ++total_pivots_;
}

LpStatus BoundedSimplex::primal(bool phase_one) {
    const std::size_t m = data_->m;
    const std::size_t max_iter = 50 * (m + cols_) + 10000;
    std::size_t degenerate_streak = 0;
    std::vector<double> c1(m, 0.0);
    std::vector<double> dphase;

    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        if (pivots_since_refactor_ >= kRefactorInterval) {
            refactor();
        }
        const double *dvec = d_.data();
        if (phase_one) {
            bool any = false;
            for (std::size_t r = 0; r < m; ++r) {
                const std::size_t h = head_[r];
                c1[r] = x_[h] < lb_[h] - kFeasTol ? -1.0 : (x_[h] > ub_[h] + kFeasTol ? 1.0 : 0.0);
                any = any || c1[r] != 0;
            }
            if (!any) {
                return LpStatus::Optimal;
            }
            dphase.assign(cols_, 0.0);
            for (std::size_t r = 0; r < m; ++r) {
                if (c1[r] == 0) {
                    continue;
                }
                const double *row = &tab_[r * cols_];
                for (std::size_t j = 0; j < cols_; ++j) {
                    dphase[j] -= c1[r] * row[j];
                }
            }
            dvec = dphase.data();
        }

        const bool bland = degenerate_streak >= kBlandAfter;
        std::size_t q = cols_;
        double best = 0;
        int dir = 0;
        for (std::size_t j = 0; j < cols_; ++j) {
            if (state_[j] == State::Basic) {
                continue;
            }
            const double dj = dvec[j];
            int cand = 0;
            if (dj < -kDualTol && can_increase(j)) {
                cand = 1;
            } else if (dj > kDualTol && can_decrease(j)) {
                cand = -1;
            }
            if (cand == 0) {
                continue;
            }
            if (bland) {
                q = j;
                dir = cand;
                break;
            }
            if (std::abs(dj) > best) {
                best = std::abs(dj);
                q = j;
                dir = cand;
            }
        }
        if (q == cols_) {
            return phase_one ? LpStatus::Infeasible : LpStatus::Optimal;
        }

        // Harris two-pass ratio test.
        double flip = (std::isfinite(lb_[q]) && std::isfinite(ub_[q])) ? ub_[q] - lb_[q] : kInfinity;
        double relaxed = flip;
        for (std::size_t r = 0; r < m; ++r) {
            const double alpha = tab(r, q) * dir;
            if (std::abs(alpha) <= kPivotTol) {
                continue;
            }
            const std::size_t h = head_[r];
            double t = kInfinity;
            if (phase_one && x_[h] < lb_[h] - kFeasTol) {
                if (alpha < 0) {
                    t = (lb_[h] - x_[h]) / -alpha;
                }
            } else if (phase_one && x_[h] > ub_[h] + kFeasTol) {
                if (alpha > 0) {
                    t = (x_[h] - ub_[h]) / alpha;
                }
            } else if (alpha > 0) {
                if (std::isfinite(lb_[h])) {
                    t = (x_[h] - lb_[h] + kFeasTol) / alpha;
                }
            } else if (std::isfinite(ub_[h])) {
                t = (ub_[h] - x_[h] + kFeasTol) / -alpha;
            }
            relaxed = std::min(relaxed, t);
        }
        if (!std::isfinite(relaxed)) {
            return phase_one ? LpStatus::Infeasible : LpStatus::Unbounded;
        }
        std::size_t leave_row = m;
        double step = flip;
        double best_alpha = 0;
        bool leave_to_lower = false;
        for (std::size_t r = 0; r < m; ++r) {
            const double alpha = tab(r, q) * dir;
            if (std::abs(alpha) <= kPivotTol) {
                continue;
            }
            const std::size_t h = head_[r];
            double t = kInfinity;
            bool to_lower = false;
            if (phase_one && x_[h] < lb_[h] - kFeasTol) {
                if (alpha < 0) {
                    t = (lb_[h] - x_[h]) / -alpha;
                    to_lower = true;
                }
            } else if (phase_one && x_[h] > ub_[h] + kFeasTol) {
                if (alpha > 0) {
                    t = (x_[h] - ub_[h]) / alpha;
                    to_lower = false;
                }
            } else if (alpha > 0) {
                if (std::isfinite(lb_[h])) {
                    t = (x_[h] - lb_[h]) / alpha;
                    to_lower = true;
                }
            } else if (std::isfinite(ub_[h])) {
                t = (ub_[h] - x_[h]) / -alpha;
                to_lower = false;
            }
            if (t > relaxed) {
                continue;
            }
            const bool better = bland ? (leave_row == m || h < head_[leave_row])
                                      : std::abs(alpha) > best_alpha;
            if (better) {
                best_alpha = std::abs(alpha);
                leave_row = r;
                step = std::max(t, 0.0);
                leave_to_lower = to_lower;
            }
        }
        if (leave_row == m || flip <= step) {
            // Bound flip of the entering column.
            move_nonbasic(q, dir * flip);
            state_[q] = dir > 0 ? State::AtUpper : State::AtLower;
            x_[q] = dir > 0 ? ub_[q] : lb_[q];
            degenerate_streak = 0;
            continue;
        }
        degenerate_streak = step <= 1e-12 ? degenerate_streak + 1 : 0;
        const std::size_t leaving = head_[leave_row];
        move_nonbasic(q, dir * step);
        x_[leaving] = leave_to_lower ? lb_[leaving] : ub_[leaving];
        pivot(leave_row, q);
        state_[leaving] = leave_to_lower ? State::AtLower : State::AtUpper;
    }
    return LpStatus::IterationLimit;
}

LpStatus BoundedSimplex::dual() {
    const std::size_t m = data_->m;
    const std::size_t max_iter = 50 * (m + cols_) + 10000;
    std::size_t degenerate_streak = 0;
    for (std::size_t iter = 0; iter < max_iter; ++iter) {
        if (pivots_since_refactor_ >= kRefactorInterval) {
            refactor();
        }
        const bool bland = degenerate_streak >= kBlandAfter;
        std::size_t r = m;
        double worst = 0;
        for (std::size_t i = 0; i < m; ++i) {
            const double v = violation(head_[i]);
            if (v <= 0) {
                continue;
            }
            if (bland) {
                if (r == m || head_[i] < head_[r]) {
                    r = i;
                }
            } else if (v > worst) {
                worst = v;
                r = i;
            }
        }
        if (r == m) {
            return LpStatus::Optimal;
        }
        const std::size_t leaving = head_[r];
        const bool to_lower = x_[leaving] < lb_[leaving];
        const double *row = &tab_[r * cols_];

        // The leaving value changes by -row[j] * dx_j.
        auto eligible = [&](std::size_t j, double a) {
            if (state_[j] == State::Basic || std::abs(a) <= kPivotTol) {
                return 0;
            }
            const bool inc_ok = can_increase(j);
            const bool dec_ok = can_decrease(j);
            if (to_lower) {
                if (a < 0 && inc_ok) {
                    return 1;
                }
                if (a > 0 && dec_ok) {
                    return -1;
                }
            } else {
                if (a > 0 && inc_ok) {
                    return 1;
                }
                if (a < 0 && dec_ok) {
                    return -1;
                }
            }
            return 0;
        };
        auto dual_slack = [&](std::size_t j, int dir) {
            return dir > 0 ? std::max(d_[j], 0.0) : std::max(-d_[j], 0.0);
        };

        double relaxed = kInfinity;
        for (std::size_t j = 0; j < cols_; ++j) {
            const double a = row[j];
            const int dir = eligible(j, a);
            if (dir == 0) {
                continue;
            }
            relaxed = std::min(relaxed, (dual_slack(j, dir) + kDualTol) / std::abs(a));
        }
        if (!std::isfinite(relaxed)) {
            return LpStatus::Infeasible;
        }
        std::size_t q = cols_;
        double best_alpha = 0;
        double best_ratio = kInfinity;
        for (std::size_t j = 0; j < cols_; ++j) {
            const double a = row[j];
            const int dir = eligible(j, a);
            if (dir == 0) {
                continue;
            }
            const double ratio = dual_slack(j, dir) / std::abs(a);
            if (ratio > relaxed) {
                continue;
            }
            const bool better = bland ? (q == cols_) : std::abs(a) > best_alpha;
            if (better) {
                q = j;
                best_alpha = std::abs(a);
                best_ratio = ratio;
            }
        }
        degenerate_streak = best_ratio <= 1e-12 ? degenerate_streak + 1 : 0;
        const double target = to_lower ? lb_[leaving] : ub_[leaving];
        const double delta = (x_[leaving] - target) / row[q];
        move_nonbasic(q, delta);
        x_[leaving] = target;
        pivot(r, q);
        state_[leaving] = to_lower ? State::AtLower : State::AtUpper;
    }
    return LpStatus::IterationLimit;
}

LpStatus BoundedSimplex::solve() {
    if (!primal_feasible()) {
        LpStatus st;
        if (dual_feasible()) {
            st = dual();
            if (st == LpStatus::Infeasible) {
                // Confirm with phase one; a dual ray found under tolerances can be spurious.
                st = primal(true);
            }
        } else {
            st = primal(true);
        }
        if (st != LpStatus::Optimal) {
            return st;
        }
    }
    const auto st = primal(false);
    if (st == LpStatus::Optimal && pivots_since_refactor_ > 0) {
        refactor();
        if (!primal_feasible()) {
            // Drift after refactorization: one more cleanup round.
            if (primal(true) != LpStatus::Optimal) {
                return LpStatus::Infeasible;
            }
            return primal(false);
        }
        if (!dual_feasible()) {
            return primal(false);
        }
    }
    return st;
}

void BoundedSimplex::set_bounds(std::size_t j, double lo, double hi) {
    lb_[j] = lo;
    ub_[j] = hi;
    if (state_[j] == State::Basic) {
        return;
    }
    double target = x_[j];
    if (state_[j] == State::AtLower) {
        if (std::isfinite(lo)) {
            target = lo;
        } else if (std::isfinite(hi)) {
            target = hi;
            state_[j] = State::AtUpper;
        } else {
            target = 0;
            state_[j] = State::Free;
        }
    } else if (state_[j] == State::AtUpper) {
        if (std::isfinite(hi)) {
            target = hi;
        } else if (std::isfinite(lo)) {
            target = lo;
            state_[j] = State::AtLower;
        } else {
            target = 0;
            state_[j] = State::Free;
        }
    } else if (std::isfinite(lo)) {
        target = lo;
        state_[j] = State::AtLower;
    } else if (std::isfinite(hi)) {
        target = hi;
        state_[j] = State::AtUpper;
    }
    move_nonbasic(j, target - x_[j]);
    x_[j] = target;
}

double BoundedSimplex::objective() const {
    double v = 0;
    for (std::size_t j = 0; j < data_->n; ++j) {
        v += data_->cost[j] * x_[j];
    }
    return v;
}

std::optional<std::size_t> BoundedSimplex::most_violated_row() const {
    std::optional<std::size_t> best;
    double worst = 0;
    for (std::size_t r = 0; r < data_->m; ++r) {
        const std::size_t h = head_[r];
        const double v = violation(h);
        if (v > worst && h >= data_->n) {
            worst = v;
            best = h - data_->n;
        }
    }
    return best;
}

} // namespace digisim::milp::detail
