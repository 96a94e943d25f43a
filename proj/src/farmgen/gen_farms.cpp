#include "digisim/error.hpp"
#include "digisim/farmgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace digisim::farmgen {

using milp::LinearExpr;
using milp::Sense;
using milp::VarId;
using milp::VarType;

Count GenFarmsInstance::total_heads() const {
    return std::accumulate(class_heads.begin(), class_heads.end(), Count{0});
}

Count GenFarmsInstance::total_farms() const {
    return std::accumulate(class_farms.begin(), class_farms.end(), Count{0});
}

ObjectiveWeights objective_weights(Count total_heads, std::size_t subtypes) {
    const double h1 = static_cast<double>(total_heads) + 1.0;
    const double g1 = static_cast<double>(subtypes) + 1.0;
    return {1.0, h1, g1 * h1, g1 * h1 * h1};
}

double weighted_objective(const ObjectiveWeights &w, const Lambdas &l) {
    const double l3 = std::accumulate(l.lambda3.begin(), l.lambda3.end(), 0.0);
    return w.lambda1 * static_cast<double>(l.lambda1) + w.lambda2 * static_cast<double>(l.lambda2) +
           w.lambda3 * l3 + w.lambda4 * static_cast<double>(l.lambda4);
}

namespace {

Count enclosing(const GenFarmsInstance &inst) { return inst.enclosing_total.value_or(inst.total_heads()); }

/// Head cap of a single farm in class k.
Count farm_upper(const GenFarmsInstance &inst, std::size_t k) {
    return class_upper_heads(inst.scheme.at(k), 1, enclosing(inst));
}

void check_shape(const GenFarmsInstance &inst) {
    const std::size_t l = inst.scheme.size();
    auto bad = [&](const std::string &what) {
        throw Error(ErrorKind::SchemaError, "county " + inst.county + " " + inst.livestock + ": " + what);
    };
    if (inst.class_farms.size() != l || inst.class_heads.size() != l) {
        bad("class counts do not match the size-class scheme");
    }
    for (const auto &s : inst.subtypes) {
        if (s.farms.size() != l || s.heads.size() != l) {
            bad("subtype " + s.subtype + " counts do not match the size-class scheme");
        }
        for (std::size_t k = 0; k < l; ++k) {
            if (s.farms[k] < 0 || s.heads[k] < 0) {
                bad("negative subtype count");
            }
        }
    }
    for (std::size_t k = 0; k < l; ++k) {
        if (inst.class_farms[k] < 0 || inst.class_heads[k] < 0) {
            bad("negative class count");
        }
    }
    if (inst.subtypes.empty() && inst.total_farms() > 0) {
        bad("no subtypes");
    }
}

struct FarmVars {
    std::size_t cls = 0;
    std::vector<std::vector<VarId>> x; // [gamma][k]
    std::vector<VarId> y;              // [gamma]
    std::vector<VarId> h;              // [gamma]
    std::vector<std::vector<VarId>> z; // [gamma][k]
};

struct Encoding {
    milp::Model model;
    VarId lambda4, lambda1, lambda2;
    std::vector<VarId> lambda3;
    std::vector<FarmVars> farms;
};

Encoding encode(const GenFarmsInstance &inst, bool softened) {
    const std::size_t L = inst.scheme.size();
    const std::size_t G = inst.subtypes.size();
    const Count H = inst.total_heads();
    const double M = static_cast<double>(default_big_m(inst));
    Encoding e;
    auto &m = e.model;

    double count_span = 0;
    for (std::size_t k = 0; k < L; ++k) {
        count_span += static_cast<double>(inst.class_farms[k]) * static_cast<double>(farm_upper(inst, k));
    }
    const double lambda_cap = static_cast<double>(H) + count_span + static_cast<double>(inst.total_farms()) + 1;
    e.lambda4 = m.add_variable("lambda4", 0, lambda_cap, VarType::Integer);
    e.lambda1 = m.add_variable("lambda1", 0, lambda_cap, VarType::Integer);
    e.lambda2 = m.add_variable("lambda2", 0, static_cast<double>(G), VarType::Integer);
    for (std::size_t i = 0; i < L; ++i) {
        const double a_i = inst.class_farms[i] > 0 ? static_cast<double>(inst.class_heads[i]) /
                                                         static_cast<double>(inst.class_farms[i])
                                                   : 0.0;
        e.lambda3.push_back(m.add_variable("lambda3_" + std::to_string(i), 0,
                                           static_cast<double>(farm_upper(inst, i)) + a_i,
                                           VarType::Continuous));
    }

    std::vector<std::vector<LinearExpr>> class_totals(L); // per class, per farm
    for (std::size_t i = 0; i < L; ++i) {
        const double upper_i = static_cast<double>(farm_upper(inst, i));
        for (Count f = 0; f < inst.class_farms[i]; ++f) {
            const std::string tag = std::to_string(i) + "_" + std::to_string(f);
            FarmVars fv;
            fv.cls = i;
            fv.x.resize(G);
            fv.z.resize(G);
            for (std::size_t g = 0; g < G; ++g) {
                for (std::size_t k = 0; k < L; ++k) {
                    fv.x[g].push_back(m.add_binary("x_" + tag + "_" + std::to_string(g) + "_" + std::to_string(k)));
                }
            }
            for (std::size_t g = 0; g < G; ++g) {
                fv.y.push_back(m.add_binary("y_" + tag + "_" + std::to_string(g)));
            }
            for (std::size_t g = 0; g < G; ++g) {
                fv.h.push_back(m.add_variable("h_" + tag + "_" + std::to_string(g), 0, upper_i, VarType::Integer));
            }
            for (std::size_t g = 0; g < G; ++g) {
                for (std::size_t k = 0; k < L; ++k) {
                    fv.z[g].push_back(m.add_variable("z_" + tag + "_" + std::to_string(g) + "_" + std::to_string(k),
                                                     0, upper_i, VarType::Continuous));
                }
            }

            LinearExpr total;
            LinearExpr indicators;
            for (std::size_t g = 0; g < G; ++g) {
                total.add(fv.h[g], 1.0);
                const std::string gt = tag + "_" + std::to_string(g);
                LinearExpr one;
                for (std::size_t k = 0; k < L; ++k) {
                    const std::string kt = gt + "_" + std::to_string(k);
                    const SizeClass &wk = inst.scheme.at(k);
                    milp::add_indicator_window(m, fv.h[g], fv.x[g][k], static_cast<double>(wk.w_min),
                                               static_cast<double>(farm_upper(inst, k)), M, "win_" + kt);
                    one.add(fv.x[g][k], 1.0);
                    indicators.add(fv.x[g][k], 1.0);
                    m.add_constraint("zh_" + kt, LinearExpr(fv.z[g][k]).add(fv.h[g], -1.0), Sense::LessEqual, 0);
                    m.add_constraint("zx_" + kt, LinearExpr(fv.z[g][k]).add(fv.x[g][k], -M), Sense::LessEqual, 0);
                    m.add_constraint("zlink_" + kt,
                                     LinearExpr(fv.z[g][k]).add(fv.h[g], -1.0).add(fv.x[g][k], -M),
                                     Sense::GreaterEqual, -M);
                }
                one.add(fv.y[g], 1.0);
                m.add_constraint("one_" + gt, one, Sense::Equal, 1);
                m.add_constraint("zero_lo_" + gt, LinearExpr(fv.h[g]).add(fv.y[g], 1.0), Sense::GreaterEqual, 1);
                m.add_constraint("zero_hi_" + gt, LinearExpr(fv.h[g]).add(fv.y[g], M), Sense::LessEqual, M);
            }
            const SizeClass &ci = inst.scheme.at(i);
            m.add_constraint("class_lo_" + tag, total, Sense::GreaterEqual, static_cast<double>(ci.w_min));
            m.add_constraint("class_hi_" + tag, total, Sense::LessEqual, upper_i);
            indicators.add(e.lambda2, -1.0);
            m.add_constraint("subtypes_" + tag, indicators, Sense::LessEqual, 0);

            const double a_i = static_cast<double>(inst.class_heads[i]) / static_cast<double>(inst.class_farms[i]);
            milp::add_abs_deviation(m, LinearExpr(total).add_constant(-a_i), e.lambda3[i], "equity_" + tag);
            if (!class_totals[i].empty()) {
                LinearExpr order = class_totals[i].back();
                order += -total;
                m.add_constraint("order_" + tag, order, Sense::GreaterEqual, 0);
            }
            class_totals[i].push_back(total);
            e.farms.push_back(std::move(fv));
        }
    }

    for (std::size_t g = 0; g < G; ++g) {
        for (std::size_t k = 0; k < L; ++k) {
            const std::string gk = std::to_string(g) + "_" + std::to_string(k);
            LinearExpr count;
            LinearExpr heads;
            for (const auto &fv : e.farms) {
                count.add(fv.x[g][k], 1.0);
                heads.add(fv.z[g][k], 1.0);
            }
            const double F = static_cast<double>(inst.subtypes[g].farms[k]);
            if (softened) {
                milp::add_abs_deviation(m, LinearExpr(count).add_constant(-F), e.lambda4, "count_" + gk);
            } else {
                m.add_constraint("count_" + gk, count, Sense::Equal, F);
            }
            milp::add_abs_deviation(m, heads.add_constant(-static_cast<double>(inst.subtypes[g].heads[k])),
                                    e.lambda4, "subheads_" + gk);
        }
    }
    for (std::size_t i = 0; i < L; ++i) {
        LinearExpr sum;
        for (const auto &t : class_totals[i]) {
            sum += t;
        }
        sum.add_constant(-static_cast<double>(inst.class_heads[i]));
        milp::add_abs_deviation(m, sum, e.lambda1, "classheads_" + std::to_string(i));
    }

    const auto w = objective_weights(H, G);
    LinearExpr obj;
    obj.add(e.lambda1, w.lambda1).add(e.lambda2, w.lambda2).add(e.lambda4, w.lambda4);
    for (auto v : e.lambda3) {
        obj.add(v, w.lambda3);
    }
    m.set_objective(obj);
    return e;
}

std::vector<Count> subtype_vector(const GenFarmsInstance &inst, const FarmRecord &f) {
    std::vector<Count> v;
    for (const auto &s : inst.subtypes) {
        auto it = f.heads_by_subtype.find(s.subtype);
        v.push_back(it == f.heads_by_subtype.end() ? 0 : it->second);
    }
    return v;
}

void canonicalize(const GenFarmsInstance &inst, std::vector<FarmRecord> &farms) {
    std::stable_sort(farms.begin(), farms.end(), [&](const FarmRecord &a, const FarmRecord &b) {
        if (a.size_class != b.size_class) {
            return a.size_class < b.size_class;
        }
        if (a.total_heads() != b.total_heads()) {
            return a.total_heads() > b.total_heads();
        }
        return subtype_vector(inst, a) > subtype_vector(inst, b);
    });
    for (std::size_t n = 0; n < farms.size(); ++n) {
        std::string num = std::to_string(n + 1);
        num.insert(num.begin(), num.size() < 4 ? 4 - num.size() : 0, '0');
        farms[n].id = inst.county + "-" + inst.livestock + "-" + num;
    }
}

} // namespace

Count default_big_m(const GenFarmsInstance &instance) {
    Count largest = 0;
    for (std::size_t k = 0; k < instance.scheme.size(); ++k) {
        largest = std::max(largest, farm_upper(instance, k));
    }
    return instance.total_heads() + largest + 1;
}

Lambdas recompute_lambdas(const GenFarmsInstance &inst, const std::vector<FarmRecord> &farms, bool softened) {
    const std::size_t L = inst.scheme.size();
    const std::size_t G = inst.subtypes.size();
    Lambdas out;
    out.lambda3.assign(L, 0.0);
    std::vector<Count> class_sum(L, 0);
    std::vector<std::vector<Count>> sub_heads(G, std::vector<Count>(L, 0));
    std::vector<std::vector<Count>> sub_farms(G, std::vector<Count>(L, 0));
    for (const auto &f : farms) {
        const auto i = static_cast<std::size_t>(f.size_class);
        const Count t = f.total_heads();
        class_sum[i] += t;
        const double a_i = static_cast<double>(inst.class_heads[i]) / static_cast<double>(inst.class_farms[i]);
        out.lambda3[i] = std::max(out.lambda3[i], std::abs(static_cast<double>(t) - a_i));
        Count nonzero = 0;
        const auto v = subtype_vector(inst, f);
        for (std::size_t g = 0; g < G; ++g) {
            if (v[g] == 0) {
                continue;
            }
            ++nonzero;
            for (std::size_t k = 0; k < L; ++k) {
                const SizeClass &wk = inst.scheme.at(k);
                if (v[g] >= wk.w_min && v[g] <= farm_upper(inst, k)) {
                    sub_heads[g][k] += v[g];
                    sub_farms[g][k] += 1;
                    break;
                }
            }
        }
        out.lambda2 = std::max(out.lambda2, nonzero);
    }
    for (std::size_t i = 0; i < L; ++i) {
        out.lambda1 = std::max(out.lambda1, std::abs(class_sum[i] - inst.class_heads[i]));
    }
    for (std::size_t g = 0; g < G; ++g) {
        for (std::size_t k = 0; k < L; ++k) {
            out.lambda4 = std::max(out.lambda4, std::abs(sub_heads[g][k] - inst.subtypes[g].heads[k]));
            if (softened) {
                out.lambda4 = std::max(out.lambda4, std::abs(sub_farms[g][k] - inst.subtypes[g].farms[k]));
            }
        }
    }
    return out;
}

GenFarmsSolution gen_farms(const GenFarmsInstance &instance, const GenFarmsOptions &options) {
    check_shape(instance);
    GenFarmsSolution out;
    const std::string who = "county " + instance.county + " " + instance.livestock;
    if (instance.total_farms() == 0) {
        out.lambdas = recompute_lambdas(instance, out.farms);
        out.objective = weighted_objective(objective_weights(instance.total_heads(), instance.subtypes.size()),
                                           out.lambdas);
        return out;
    }
    if (instance.total_heads() == 0) {
        throw Error(ErrorKind::Infeasible, who + ": farms present but total heads is 0");
    }

    milp::SolveOptions so;
    so.gap = instance.gap_fraction * static_cast<double>(instance.total_heads());
    so.time_limit = options.time_limit;
    so.node_limit = options.node_limit;

    out.solver_invoked = true;
    Encoding enc = encode(instance, false);
    milp::Solution sol = milp::solve(enc.model, so);
    if (sol.status == milp::SolveStatus::Infeasible && options.allow_softened_retry) {
        enc = encode(instance, true);
        sol = milp::solve(enc.model, so);
        out.softened = true;
    }
    if (!sol.has_incumbent()) {
        throw Error(ErrorKind::Infeasible, who + ": " + sol.infeasibility_hint);
    }
    out.status = sol.status;
    out.proven_gap = sol.proven_gap;
    out.nodes = sol.nodes;

    for (const auto &fv : enc.farms) {
        FarmRecord f;
        f.county = instance.county;
        f.livestock = instance.livestock;
        f.size_class = static_cast<int>(fv.cls);
        for (std::size_t g = 0; g < fv.h.size(); ++g) {
            const auto v = static_cast<Count>(std::llround(sol.value(fv.h[g])));
            if (v > 0) {
                f.heads_by_subtype[instance.subtypes[g].subtype] = v;
            }
        }
        out.farms.push_back(std::move(f));
    }
    canonicalize(instance, out.farms);

    out.lambdas = recompute_lambdas(instance, out.farms, out.softened);
    const auto &l = out.lambdas;
    const double tol = 1e-6 * std::max<double>(1.0, static_cast<double>(instance.total_heads()));
    bool bad = static_cast<double>(l.lambda1) > sol.value(enc.lambda1) + tol ||
               static_cast<double>(l.lambda2) > sol.value(enc.lambda2) + tol ||
               static_cast<double>(l.lambda4) > sol.value(enc.lambda4) + tol;
    for (std::size_t i = 0; i < l.lambda3.size(); ++i) {
        bad = bad || l.lambda3[i] > sol.value(enc.lambda3[i]) + tol;
    }
    if (bad) {
        throw Error(ErrorKind::ConsistencyError, who + ": farm statistics exceed solver bounds");
    }
    out.objective = weighted_objective(objective_weights(instance.total_heads(), instance.subtypes.size()), l);
    return out;
}

std::map<std::string, double> objective_report(const GenFarmsInstance &instance,
                                               const GenFarmsSolution &solution) {
    const Lambdas l = recompute_lambdas(instance, solution.farms, solution.softened);
    const auto &s = solution.lambdas;
    bool same = l.lambda1 == s.lambda1 && l.lambda2 == s.lambda2 && l.lambda4 == s.lambda4 &&
                l.lambda3.size() == s.lambda3.size();
    for (std::size_t i = 0; same && i < l.lambda3.size(); ++i) {
        same = std::abs(l.lambda3[i] - s.lambda3[i]) <= 1e-9 * std::max(1.0, std::abs(s.lambda3[i]));
    }
    if (!same) {
        throw Error(ErrorKind::ConsistencyError,
                    "county " + instance.county + " " + instance.livestock + ": objective report mismatch");
    }
    std::map<std::string, double> out;
    out["lambda1"] = static_cast<double>(l.lambda1);
    out["lambda2"] = static_cast<double>(l.lambda2);
    for (std::size_t i = 0; i < l.lambda3.size(); ++i) {
        out["lambda3_" + std::to_string(i)] = l.lambda3[i];
    }
    out["lambda4"] = static_cast<double>(l.lambda4);
    out["objective"] = weighted_objective(objective_weights(instance.total_heads(), instance.subtypes.size()), l);
    return out;
}

} // namespace digisim::farmgen
