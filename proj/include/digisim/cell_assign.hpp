#pragma once

#include "digisim/core.hpp"
#include "digisim/milp.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <vector>

namespace digisim::cell_assign {

struct AssignInstance {
    Fips county;
    LivestockId livestock;
    std::vector<std::string> farm_ids;
    /// P_i, total heads per farm.
    std::vector<double> heads;
    std::vector<CellId> cells;
    /// Q_j, layer heads per cell.
    std::vector<double> capacity;
    /// Absolute gap as a fraction of total farm heads.
    double gap_fraction = 0.0001;
};

struct AssignOptions {
    std::chrono::milliseconds time_limit{60'000};
    std::size_t node_limit = 0;
};

struct AssignResult {
    /// Cell of each farm, in instance order.
    std::vector<CellId> cell_of_farm;
    /// max_j |sum of assigned heads - Q_j|, recomputed from the assignment.
    double lambda5 = 0;
    /// Same deviation against Q rescaled so that sum(Q) = sum(P).
    std::optional<double> lambda5_rescaled;
    milp::SolveStatus status = milp::SolveStatus::Optimal;
    /// Set when the county had no layer cells and every farm went to its central cell.
    bool fallback = false;
    std::size_t nodes = 0;
};

/// Assigns every farm to exactly one cell, minimizing the largest cell deviation.
/// Farms and cells are taken in (farm id, cell id) order. Throws NoCells when
/// `cells` is empty.
AssignResult assign_farms_to_cells(const AssignInstance &instance, const AssignOptions &options = {});

/// As above, but a county without layer cells sends all farms to its central cell.
AssignResult assign_or_fallback(const AssignInstance &instance, const GridGeometry &geometry,
                                const AssignOptions &options = {});

/// Per-cell assigned heads, aligned with `cells`.
std::vector<double> cell_loads(const std::vector<CellId> &cells, const std::vector<CellId> &cell_of_farm,
                               const std::vector<double> &heads);

double max_deviation(const std::vector<double> &loads, const std::vector<double> &capacity);

/// Pearson r of two equally long vectors; nullopt when either is constant.
std::optional<double> pearson(const std::vector<double> &a, const std::vector<double> &b);

struct AlignmentStats {
    double lambda5 = 0;
    std::optional<double> pearson_r;
};

AlignmentStats alignment_stats(const std::vector<double> &loads, const std::vector<double> &capacity);

} // namespace digisim::cell_assign
