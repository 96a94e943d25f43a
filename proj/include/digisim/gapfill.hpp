#pragma once

#include "digisim/core.hpp"
#include "digisim/ingest.hpp"
#include "digisim/milp.hpp"

#include <map>
#include <string>
#include <vector>

namespace digisim::gapfill {

struct FillBound {
    Count lower = 0;
    Count upper = 0;
};

struct FillInstance {
    Count target = 0;
    std::vector<FillBound> bounds;
};

struct FillResult {
    std::vector<Count> values;
    Count lambda0 = 0;
    milp::SolveStatus status = milp::SolveStatus::Optimal;
};

/// Distributes `target` over the unknowns within their bounds, minimizing the largest
/// excess over a lower bound. Among optimal fills the lexicographically smallest one is
/// returned. Throws Infeasible when sum(L) > T or sum(U) < T.
FillResult fill_gaps(const FillInstance &instance, const milp::SolveOptions &options = {});

enum class FillStage { StateTotal, StateBySize, CountyTotal };
std::string_view to_string(FillStage stage) noexcept;

enum class CellSource { Reported, FillGaps, Ipf };
std::string_view to_string(CellSource source) noexcept;

/// Source of every head count that was not reported, keyed by (table, class index).
using Provenance = std::map<std::pair<TableKey, int>, CellSource>;

struct ReportRow {
    std::string group;
    std::string stage;
    std::size_t unknowns = 0;
    Count target = 0;
    std::optional<Count> lambda0;
    std::string status;
};

struct StageOutcome {
    ingest::Census census;
    std::vector<ReportRow> report;
    Provenance imputed;
};

/// Replaces the MISSING head counts of one stage. Groups are (livestock, subtype) for
/// STATE_TOTAL and (state, livestock, subtype) otherwise. Throws MissingEnclosingTotal
/// when a group has unknowns but no enclosing total, and Infeasible (naming the group)
/// when its bounds cannot meet the target.
StageOutcome fill_stage(const ingest::Census &census, FillStage stage,
                        const milp::SolveOptions &options = {});

enum class IpfCell { Known, Seeded };

/// Counties as rows, size classes as columns.
struct IpfMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    /// Row-major; KNOWN cells hold their value, SEEDED cells their seed.
    std::vector<double> values;
    std::vector<IpfCell> flags;
    std::vector<Count> row_totals;
    std::vector<Count> col_totals;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    IpfCell flag(std::size_t r, std::size_t c) const { return flags[r * cols + c]; }
};

struct IpfOptions {
    double tol = 1e-6;
    std::size_t max_iter = 10000;
};

struct IpfResult {
    /// Fitted reals before integerization (best iterate when not converged).
    std::vector<double> fitted;
    std::vector<Count> values;
    bool converged = false;
    std::size_t iterations = 0;
    /// Largest relative marginal error of `fitted`.
    double max_row_error = 0;
    double max_col_error = 0;
    /// Unit moves made by the column-repair pass.
    std::size_t repair_moves = 0;
    /// Column totals still off after repair.
    std::size_t unrepaired_columns = 0;
    std::string diagnostics;
};

/// Fits SEEDED cells to the residual marginals with alternating row/column scaling, then
/// rounds by largest remainder per row and repairs column sums with +-1 moves between
/// seeded cells. Throws NegativeResidual when a total is below its KNOWN cells.
IpfResult ipf_fill(const IpfMatrix &matrix, const IpfOptions &options = {});

/// Imputes the county-by-size head counts of every (state, livestock, subtype) group.
/// Seeds are the state class average times the county farm count.
StageOutcome ipf_stage(const ingest::Census &census, const IpfOptions &options = {});

} // namespace digisim::gapfill
