#include "digisim/cell_assign.hpp"
#include "digisim/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace digisim::cell_assign {

using milp::LinearExpr;
using milp::Sense;
using milp::VarId;

std::vector<double> cell_loads(const std::vector<CellId> &cells, const std::vector<CellId> &cell_of_farm,
                               const std::vector<double> &heads) {
    std::vector<double> loads(cells.size(), 0.0);
    for (std::size_t i = 0; i < cell_of_farm.size(); ++i) {
        auto it = std::find(cells.begin(), cells.end(), cell_of_farm[i]);
        if (it != cells.end()) {
            loads[static_cast<std::size_t>(it - cells.begin())] += heads[i];
        }
    }
    return loads;
}

double max_deviation(const std::vector<double> &loads, const std::vector<double> &capacity) {
    double worst = 0;
    for (std::size_t j = 0; j < loads.size(); ++j) {
        worst = std::max(worst, std::abs(loads[j] - capacity[j]));
    }
    return worst;
}

std::optional<double> pearson(const std::vector<double> &a, const std::vector<double> &b) {
    const std::size_t n = a.size();
    if (n == 0 || b.size() != n) {
        return std::nullopt;
    }
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
    double sab = 0;
    double saa = 0;
    double sbb = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa == 0 || sbb == 0) {
        return std::nullopt;
    }
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

AlignmentStats alignment_stats(const std::vector<double> &loads, const std::vector<double> &capacity) {
    return {max_deviation(loads, capacity), pearson(loads, capacity)};
}

namespace {

void finish(const AssignInstance &inst, AssignResult &out) {
    const auto loads = cell_loads(inst.cells, out.cell_of_farm, inst.heads);
    out.lambda5 = max_deviation(loads, inst.capacity);
    const double sp = std::accumulate(inst.heads.begin(), inst.heads.end(), 0.0);
    const double sq = std::accumulate(inst.capacity.begin(), inst.capacity.end(), 0.0);
    if (sq > 0) {
        std::vector<double> scaled(inst.capacity);
        for (auto &q : scaled) {
            q *= sp / sq;
        }
        out.lambda5_rescaled = max_deviation(loads, scaled);
    }
}

} // namespace

AssignResult assign_farms_to_cells(const AssignInstance &inst, const AssignOptions &options) {
    if (inst.cells.empty()) {
        throw Error(ErrorKind::NoCells, "county " + inst.county + " " + inst.livestock + ": no layer cells");
    }
    if (inst.farm_ids.size() != inst.heads.size() || inst.cells.size() != inst.capacity.size()) {
        throw Error(ErrorKind::SchemaError, "assignment instance sizes disagree");
    }
    const std::size_t nf = inst.heads.size();
    const std::size_t nc = inst.cells.size();
    AssignResult out;
    out.cell_of_farm.assign(nf, inst.cells.front());
    if (nf == 0) {
        finish(inst, out);
        return out;
    }

    std::vector<std::size_t> farm_order(nf);
    std::iota(farm_order.begin(), farm_order.end(), 0);
    std::stable_sort(farm_order.begin(), farm_order.end(),
                     [&](std::size_t a, std::size_t b) { return inst.farm_ids[a] < inst.farm_ids[b]; });
    std::vector<std::size_t> cell_order(nc);
    std::iota(cell_order.begin(), cell_order.end(), 0);
    std::stable_sort(cell_order.begin(), cell_order.end(),
                     [&](std::size_t a, std::size_t b) { return inst.cells[a] < inst.cells[b]; });

    milp::Model m;
    std::vector<std::vector<VarId>> x(nf);
    for (std::size_t a = 0; a < nf; ++a) {
        for (std::size_t b = 0; b < nc; ++b) {
            x[a].push_back(m.add_binary("x_" + std::to_string(a) + "_" + std::to_string(b)));
        }
    }
    double total = 0;
    double qmax = 0;
    for (std::size_t i = 0; i < nf; ++i) {
        total += inst.heads[i];
    }
    for (double q : inst.capacity) {
        qmax = std::max(qmax, q);
    }
    const VarId lambda5 = m.add_variable("lambda5", 0, total + qmax, milp::VarType::Continuous);
    for (std::size_t a = 0; a < nf; ++a) {
        LinearExpr one;
        for (std::size_t b = 0; b < nc; ++b) {
            one.add(x[a][b], 1.0);
        }
        m.add_constraint("assign_" + std::to_string(a), one, Sense::Equal, 1);
    }
    for (std::size_t b = 0; b < nc; ++b) {
        LinearExpr load;
        for (std::size_t a = 0; a < nf; ++a) {
            load.add(x[a][b], inst.heads[farm_order[a]]);
        }
        load.add_constant(-inst.capacity[cell_order[b]]);
        milp::add_abs_deviation(m, load, lambda5, "cell_" + std::to_string(b));
    }
    m.set_objective(LinearExpr(lambda5));

    // Greedy start: largest farm first into the cell with the most room left.
    std::vector<double> start(m.num_variables(), 0.0);
    {
        std::vector<std::size_t> by_size(nf);
        std::iota(by_size.begin(), by_size.end(), 0);
        std::stable_sort(by_size.begin(), by_size.end(), [&](std::size_t a, std::size_t b) {
            return inst.heads[farm_order[a]] > inst.heads[farm_order[b]];
        });
        std::vector<double> room(nc);
        for (std::size_t b = 0; b < nc; ++b) {
            room[b] = inst.capacity[cell_order[b]];
        }
        for (std::size_t a : by_size) {
            const auto b = static_cast<std::size_t>(std::max_element(room.begin(), room.end()) - room.begin());
            room[b] -= inst.heads[farm_order[a]];
            start[x[a][b].index] = 1.0;
        }
        double worst = 0;
        for (double r : room) {
            worst = std::max(worst, std::abs(r));
        }
        start[lambda5.index] = worst;
    }

    milp::SolveOptions so;
    so.gap = inst.gap_fraction * total;
    so.time_limit = options.time_limit;
    so.node_limit = options.node_limit;
    so.initial_solution = std::move(start);
    const auto sol = milp::solve(m, so);
    if (!sol.has_incumbent()) {
        throw Error(ErrorKind::Infeasible,
                    "county " + inst.county + " " + inst.livestock + ": " + sol.infeasibility_hint);
    }
    out.status = sol.status;
    out.nodes = sol.nodes;
    for (std::size_t a = 0; a < nf; ++a) {
        for (std::size_t b = 0; b < nc; ++b) {
            if (sol.value(x[a][b]) > 0.5) {
                out.cell_of_farm[farm_order[a]] = inst.cells[cell_order[b]];
            }
        }
    }
    finish(inst, out);
    return out;
}

AssignResult assign_or_fallback(const AssignInstance &instance, const GridGeometry &geometry,
                                const AssignOptions &options) {
    if (!instance.cells.empty()) {
        return assign_farms_to_cells(instance, options);
    }
    const auto central = geometry.central_cell(instance.county);
    if (!central) {
        throw Error(ErrorKind::NoCells, "county " + instance.county + " has no grid cells");
    }
    AssignResult out;
    out.fallback = true;
    out.cell_of_farm.assign(instance.heads.size(), *central);
    out.lambda5 = std::accumulate(instance.heads.begin(), instance.heads.end(), 0.0);
    return out;
}

} // namespace digisim::cell_assign
