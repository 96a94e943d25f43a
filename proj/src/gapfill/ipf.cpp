#include "digisim/error.hpp"
#include "digisim/gapfill.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace digisim::gapfill {

namespace {

struct Errors {
    double row = 0;
    double col = 0;
    double worst() const { return std::max(row, col); }
};

Errors marginal_errors(const IpfMatrix &mx, const std::vector<double> &v) {
    Errors e;
    for (std::size_t r = 0; r < mx.rows; ++r) {
        double s = 0;
        for (std::size_t c = 0; c < mx.cols; ++c) {
            s += v[r * mx.cols + c];
        }
        const double t = static_cast<double>(mx.row_totals[r]);
        e.row = std::max(e.row, std::abs(s - t) / std::max(1.0, t));
    }
    for (std::size_t c = 0; c < mx.cols; ++c) {
        double s = 0;
        for (std::size_t r = 0; r < mx.rows; ++r) {
            s += v[r * mx.cols + c];
        }
        const double t = static_cast<double>(mx.col_totals[c]);
        e.col = std::max(e.col, std::abs(s - t) / std::max(1.0, t));
    }
    return e;
}

} // namespace

IpfResult ipf_fill(const IpfMatrix &mx, const IpfOptions &options) {
    if (mx.values.size() != mx.rows * mx.cols || mx.flags.size() != mx.values.size() ||
        mx.row_totals.size() != mx.rows || mx.col_totals.size() != mx.cols) {
        throw Error(ErrorKind::SchemaError, "IPF matrix dimensions disagree");
    }
    const std::size_t R = mx.rows;
    const std::size_t C = mx.cols;
    auto seeded = [&](std::size_t r, std::size_t c) { return mx.flag(r, c) == IpfCell::Seeded; };

    std::vector<double> row_res(R);
    std::vector<double> col_res(C);
    for (std::size_t r = 0; r < R; ++r) {
        double known = 0;
        for (std::size_t c = 0; c < C; ++c) {
            if (!seeded(r, c)) {
                known += mx.at(r, c);
            }
        }
        row_res[r] = static_cast<double>(mx.row_totals[r]) - known;
        if (row_res[r] < 0) {
            throw Error(ErrorKind::NegativeResidual,
                        "row " + std::to_string(r) + " total below its known cells");
        }
    }
    for (std::size_t c = 0; c < C; ++c) {
        double known = 0;
        for (std::size_t r = 0; r < R; ++r) {
            if (!seeded(r, c)) {
                known += mx.at(r, c);
            }
        }
        col_res[c] = static_cast<double>(mx.col_totals[c]) - known;
        if (col_res[c] < 0) {
            throw Error(ErrorKind::NegativeResidual,
                        "column " + std::to_string(c) + " total below its known cells");
        }
    }

    IpfResult out;
    std::vector<double> v = mx.values;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (mx.flags[i] == IpfCell::Seeded) {
            v[i] = std::max(0.0, v[i]);
        }
    }
    Errors err = marginal_errors(mx, v);
    std::vector<double> best = v;
    Errors best_err = err;
    std::size_t iter = 0;
    std::size_t last_improvement = 0;
    while (err.worst() > options.tol && iter < options.max_iter) {
        ++iter;
        for (std::size_t r = 0; r < R; ++r) {
            double s = 0;
            for (std::size_t c = 0; c < C; ++c) {
                if (seeded(r, c)) {
                    s += v[r * C + c];
                }
            }
            if (s > 0) {
                const double f = row_res[r] / s;
                for (std::size_t c = 0; c < C; ++c) {
                    if (seeded(r, c)) {
                        v[r * C + c] *= f;
                    }
                }
            }
        }
        for (std::size_t c = 0; c < C; ++c) {
            double s = 0;
            for (std::size_t r = 0; r < R; ++r) {
                if (seeded(r, c)) {
                    s += v[r * C + c];
                }
            }
            if (s > 0) {
                const double f = col_res[c] / s;
                for (std::size_t r = 0; r < R; ++r) {
                    if (seeded(r, c)) {
                        v[r * C + c] *= f;
                    }
                }
            }
        }
        err = marginal_errors(mx, v);
        if (err.worst() < best_err.worst() * (1 - 1e-12)) {
            best = v;
            best_err = err;
            last_improvement = iter;
        } else if (iter - last_improvement > 500) {
            break;
        }
    }
    out.converged = best_err.worst() <= options.tol;
    out.iterations = iter;
    out.max_row_error = best_err.row;
    out.max_col_error = best_err.col;
    out.fitted = best;
    if (!out.converged) {
        out.diagnostics = "max relative marginal error " + std::to_string(best_err.worst()) +
                          " after " + std::to_string(iter) + " iterations";
    }

    // Integerize: apportion each row's integer residual by largest remainder.
    out.values.assign(R * C, 0);
    for (std::size_t r = 0; r < R; ++r) {
        Count target = mx.row_totals[r];
        double real_sum = 0;
        for (std::size_t c = 0; c < C; ++c) {
            if (!seeded(r, c)) {
                const Count k = std::llround(mx.at(r, c));
                out.values[r * C + c] = k;
                target -= k;
            } else {
                real_sum += best[r * C + c];
            }
        }
        if (real_sum <= 0) {
            continue;
        }
        std::vector<std::pair<double, std::size_t>> remainders;
        Count assigned = 0;
        for (std::size_t c = 0; c < C; ++c) {
            if (!seeded(r, c)) {
                continue;
            }
            const double share = best[r * C + c] * static_cast<double>(target) / real_sum;
            const Count base = static_cast<Count>(std::floor(share + 1e-9));
            out.values[r * C + c] = base;
            assigned += base;
            remainders.push_back({share - static_cast<double>(base), c});
        }
        std::stable_sort(remainders.begin(), remainders.end(),
                         [](const auto &a, const auto &b) { return a.first > b.first; });
        Count left = target - assigned;
        for (std::size_t i = 0; left > 0 && !remainders.empty(); i = (i + 1) % remainders.size()) {
            out.values[r * C + remainders[i].second] += 1;
            --left;
        }
    }

    // Column repair: move single heads between seeded cells of one row.
    std::vector<Count> col_diff(C, 0);
    for (std::size_t c = 0; c < C; ++c) {
        Count s = 0;
        for (std::size_t r = 0; r < R; ++r) {
            s += out.values[r * C + c];
        }
        col_diff[c] = s - mx.col_totals[c];
    }
    auto movable = [&](std::size_t r, std::size_t c) {
        return seeded(r, c) && mx.at(r, c) > 0;
    };
    for (std::size_t from = 0; from < C; ++from) {
        while (col_diff[from] > 0) {
            bool moved = false;
            for (std::size_t to = 0; to < C && !moved; ++to) {
                if (to == from || col_diff[to] >= 0) {
                    continue;
                }
                for (std::size_t r = 0; r < R; ++r) {
                    if (movable(r, from) && movable(r, to) && out.values[r * C + from] > 0) {
                        out.values[r * C + from] -= 1;
                        out.values[r * C + to] += 1;
                        col_diff[from] -= 1;
                        col_diff[to] += 1;
                        ++out.repair_moves;
                        moved = true;
                        break;
                    }
                }
            }
            if (!moved) {
                break;
            }
        }
    }
    out.unrepaired_columns = static_cast<std::size_t>(
        std::count_if(col_diff.begin(), col_diff.end(), [](Count d) { return d != 0; }));
    return out;
}

} // namespace digisim::gapfill
