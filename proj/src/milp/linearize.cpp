#include "digisim/error.hpp"
#include "digisim/milp.hpp"

#include <algorithm>
#include <cmath>

namespace digisim::milp {

void add_abs_deviation(Model &model, const LinearExpr &expr, VarId bound_var, const std::string &name) {
    LinearExpr pos = expr;
    pos.add(bound_var, -1.0);
    model.add_constraint(name + ":pos", pos, Sense::LessEqual, 0.0);
    LinearExpr neg = -expr;
    neg.add(bound_var, -1.0);
    model.add_constraint(name + ":neg", neg, Sense::LessEqual, 0.0);
}

void add_indicator_window(Model &model, VarId h, VarId x, double w_min, double w_max, double big_m,
                          const std::string &name) {
    if (model.variable(x).type != VarType::Binary) {
        throw Error(ErrorKind::InvalidModel, name + ": indicator " + model.variable(x).name +
                                                 " is not binary");
    }
    const auto &hv = model.variable(h);
    const double need = std::max({std::abs(hv.upper), std::abs(hv.lower), w_max});
    if (!(big_m >= need)) {
        throw Error(ErrorKind::BigMTooSmall, name + ": M=" + std::to_string(big_m) + " < " +
                                                 std::to_string(need));
    }
    // h >= w_min - (1 - x) M  <=>  h - M x >= w_min - M
    model.add_constraint(name + ":lo", LinearExpr{h}.add(x, -big_m), Sense::GreaterEqual, w_min - big_m);
    // h <= w_max + (1 - x) M  <=>  h + M x <= w_max + M
    model.add_constraint(name + ":hi", LinearExpr{h}.add(x, big_m), Sense::LessEqual, w_max + big_m);
}

} // namespace digisim::milp
