#pragma once

#include "digisim/core.hpp"
#include "digisim/milp.hpp"

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace digisim::farmgen {

/// Per-class farm and head counts of one subtype.
struct SubtypeCounts {
    SubtypeId subtype;
    std::vector<Count> farms;
    std::vector<Count> heads;
};

struct GenFarmsInstance {
    Fips county;
    LivestockId livestock;
    SizeClassScheme scheme;
    /// F_i and H_i, indexed like the scheme.
    std::vector<Count> class_farms;
    std::vector<Count> class_heads;
    std::vector<SubtypeCounts> subtypes;
    /// Resolves OPEN class caps; defaults to the instance total.
    std::optional<Count> enclosing_total;
    /// Absolute gap as a fraction of total heads.
    double gap_fraction = 0.001;

    Count total_heads() const;
    Count total_farms() const;
};

struct Lambdas {
    Count lambda1 = 0;
    Count lambda2 = 0;
    std::vector<double> lambda3;
    Count lambda4 = 0;
};

struct ObjectiveWeights {
    double lambda1 = 1;
    double lambda2 = 0;
    double lambda3 = 0;
    double lambda4 = 0;
};

/// 1, H+1, (|G|+1)(H+1) and (|G|+1)(H+1)^2.
ObjectiveWeights objective_weights(Count total_heads, std::size_t subtypes);
double weighted_objective(const ObjectiveWeights &w, const Lambdas &l);

/// H + largest class upper bound + 1.
Count default_big_m(const GenFarmsInstance &instance);

struct GenFarmsOptions {
    std::chrono::milliseconds time_limit{60'000};
    std::size_t node_limit = 0;
    /// Retry with subtype farm counts folded into lambda4 when the hard model is infeasible.
    bool allow_softened_retry = true;
};

struct GenFarmsSolution {
    std::vector<FarmRecord> farms;
    Lambdas lambdas;
    double objective = 0;
    milp::SolveStatus status = milp::SolveStatus::Optimal;
    bool softened = false;
    bool solver_invoked = false;
    double proven_gap = 0;
    std::size_t nodes = 0;
};

/// Generates the farms of one county. Farms carry no cell and are sorted by
/// (class, descending total, descending subtype vector). Throws Infeasible naming the county.
GenFarmsSolution gen_farms(const GenFarmsInstance &instance, const GenFarmsOptions &options = {});

/// Statistics recomputed from the farm list alone.
Lambdas recompute_lambdas(const GenFarmsInstance &instance, const std::vector<FarmRecord> &farms,
                          bool softened = false);

/// lambda1, lambda2, lambda3_<i>, lambda4 and objective, recomputed from the farms. Throws
/// ConsistencyError when they differ from the values stored in the solution.
std::map<std::string, double> objective_report(const GenFarmsInstance &instance,
                                               const GenFarmsSolution &solution);

} // namespace digisim::farmgen
