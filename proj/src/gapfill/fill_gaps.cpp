#include "digisim/error.hpp"
#include "digisim/gapfill.hpp"

#include <algorithm>
#include <cmath>

namespace digisim::gapfill {

FillResult fill_gaps(const FillInstance &instance, const milp::SolveOptions &options) {
    const auto &b = instance.bounds;
    Count sum_lower = 0;
    Count sum_upper = 0;
    Count widest = 0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        if (b[i].lower > b[i].upper) {
            throw Error(ErrorKind::Infeasible, "unknown " + std::to_string(i) + ": L > U");
        }
        sum_lower += b[i].lower;
        sum_upper += b[i].upper;
        widest = std::max(widest, b[i].upper - b[i].lower);
    }
    if (sum_lower > instance.target || sum_upper < instance.target) {
        throw Error(ErrorKind::Infeasible, "target " + std::to_string(instance.target) +
                                               " outside [" + std::to_string(sum_lower) + ", " +
                                               std::to_string(sum_upper) + "]");
    }
    FillResult out;
    if (b.empty()) {
        return out;
    }

    milp::Model model;
    std::vector<milp::VarId> x;
    milp::LinearExpr sum;
    for (std::size_t i = 0; i < b.size(); ++i) {
        x.push_back(model.add_variable("x" + std::to_string(i), static_cast<double>(b[i].lower),
                                       static_cast<double>(b[i].upper), milp::VarType::Integer));
        sum.add(x.back(), 1.0);
    }
    const auto lambda0 = model.add_variable("lambda0", 0, static_cast<double>(widest),
                                            milp::VarType::Integer);
    model.add_constraint("sum", sum, milp::Sense::Equal, static_cast<double>(instance.target));
    for (std::size_t i = 0; i < b.size(); ++i) {
        milp::LinearExpr excess(x[i]);
        excess.add(lambda0, -1.0);
        model.add_constraint("excess" + std::to_string(i), excess, milp::Sense::LessEqual,
                             static_cast<double>(b[i].lower));
    }
    model.set_objective(milp::LinearExpr(lambda0));
    const auto sol = milp::solve(model, options);
    if (!sol.has_incumbent()) {
        throw Error(ErrorKind::Infeasible, "fill_gaps: " + sol.infeasibility_hint);
    }
    out.status = sol.status;
    out.lambda0 = static_cast<Count>(std::llround(sol.value(lambda0)));

    // Smallest value at each position that still lets the suffix absorb the remainder.
    std::vector<Count> cap(b.size());
    std::vector<Count> suffix_cap(b.size() + 1, 0);
    for (std::size_t i = b.size(); i-- > 0;) {
        cap[i] = std::min(b[i].upper, b[i].lower + out.lambda0);
        suffix_cap[i] = suffix_cap[i + 1] + cap[i];
    }
    Count remaining = instance.target;
    out.values.resize(b.size());
    for (std::size_t i = 0; i < b.size(); ++i) {
        const Count v = std::max(b[i].lower, remaining - suffix_cap[i + 1]);
        out.values[i] = v;
        remaining -= v;
    }
    return out;
}

} // namespace digisim::gapfill
