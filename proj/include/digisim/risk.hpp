#pragma once

#include "digisim/core.hpp"
#include "digisim/ingest.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace digisim::risk {

enum class RiskCategory { VeryHigh, High, Medium, Low };

std::string_view to_string(RiskCategory category) noexcept;

/// Category of a percentile rank in [0, 100].
RiskCategory category_of(double percentile) noexcept;

/// Inclusive week window; `index` is 1-based.
struct Period {
    int index = 1;
    int first_week = 1;
    int last_week = 13;
};

/// Weeks 1-13, 14-26, 27-39, 40-52.
std::vector<Period> default_periods();

/// Throws ConfigError unless periods are ordered, disjoint and within 1..52.
void validate_periods(const std::vector<Period> &periods);

/// Period holding `week`, if any.
std::optional<int> period_of_week(const std::vector<Period> &periods, int week) noexcept;

/// Week of an ISO date (YYYY-MM-DD): (day_of_year - 1) / 7 + 1, capped at 52.
std::optional<int> week_of_date(std::string_view date) noexcept;

/// Per-week abundance summed over bird species; `species` restricts the sum when given.
std::map<int, GridLayer> weekly_abundance(const LayerSet &birds, const std::set<std::string> *species = nullptr);

struct RiskSurface {
    std::string subtype;
    int period = 1;
    std::map<CellId, double> cells;
    /// Every county of the geometry, including zero-risk ones.
    std::map<Fips, double> counties;
};

/// R(i) = P(i) * mean_w A(i,w) * mean_w B(i,w) over the period's weeks, with county sums.
/// Throws MissingLayer when no abundance week or prevalence week falls in the period.
RiskSurface compute_risk_surface(const std::map<CellId, double> &livestock, const std::map<int, GridLayer> &abundance,
                                 const ingest::Prevalence &prevalence, const std::string &subtype,
                                 const Period &period, const GridGeometry &geometry);

/// Per-cell heads of the farms of `livestock`, restricted to `subtype` unless it is "all".
std::map<CellId, double> livestock_surface(const std::vector<FarmRecord> &farms, const LivestockId &livestock,
                                           const SubtypeId &subtype);

/// Surface for all subtypes of `livestock` together.
RiskSurface scenario_surface(const std::vector<FarmRecord> &farms, const LivestockId &livestock,
                             const std::map<int, GridLayer> &abundance, const ingest::Prevalence &prevalence,
                             const Period &period, const GridGeometry &geometry);

struct CountyRisk {
    double score = 0;
    double percentile = 0;
    RiskCategory category = RiskCategory::Low;
};

/// Rank = 100 * (#counties strictly lower) / (N - 1); N = 1 gives 100.
std::map<Fips, CountyRisk> categorize_scores(const std::map<Fips, double> &scores);
std::map<Fips, CountyRisk> categorize(const RiskSurface &surface);

/// Counties ordered by descending VERY_HIGH, HIGH, MEDIUM, LOW counts, then FIPS.
std::vector<Fips> persistence_rank(const std::map<Fips, std::vector<RiskCategory>> &categories);

struct PeakPeriod {
    int period = 1;
    bool no_risk = false;
};

/// Argmax over the per-period scores (index 0 is period 1); ties go to the earliest.
std::map<Fips, PeakPeriod> peak_period(const std::map<Fips, std::vector<double>> &scores);

/// Case counts keyed by category name plus "UNKNOWN".
using Histogram = std::map<std::string, Count>;

/// Bins each case into the category of its (county, period). A case resolves its week from
/// the "week" attribute or else the "date" attribute; unresolved cases and counties without
/// a category count as UNKNOWN.
Histogram incidence_concordance(const std::map<std::pair<Fips, int>, RiskCategory> &categories,
                                const std::vector<ingest::PointRecord> &incidence,
                                const std::vector<Period> &periods);

} // namespace digisim::risk
