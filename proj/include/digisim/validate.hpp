#pragma once

#include "digisim/core.hpp"
#include "digisim/ingest.hpp"

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace digisim::validate {

inline constexpr double kEarthRadiusMiles = 3958.7613;
/// Distances below this are clamped before inverting into a matching weight.
inline constexpr double kMinMatchMiles = 0.1;

double haversine_miles(double lat1, double lon1, double lat2, double lon2) noexcept;

/// Maximum-weight matching that saturates the smaller side of a rows x cols weight matrix.
/// Returns, for each row, its column or -1.
std::vector<int> max_weight_matching(const std::vector<std::vector<double>> &weights);

struct MatchPair {
    std::string cafo_id;
    std::string farm_id;
    double distance_miles = 0;
};

struct MatchResult {
    std::vector<MatchPair> pairs;
    std::vector<std::string> unmatched_cafos;
    std::vector<std::string> unmatched_farms;
    /// Sum of 1/max(d, 0.1) over pairs, accumulated in smaller-side order.
    double total_weight = 0;
};

/// Matches CAFOs to farms placed at their cell centroids. Farms without a cell are
/// reported unmatched. Either side empty yields an empty matching.
MatchResult match_cafos(const std::vector<ingest::PointRecord> &cafos, const std::vector<FarmRecord> &farms,
                        const GridGeometry &geometry);

/// Minimum farm size per livestock type for CAFO comparison.
using CafoThresholds = std::map<LivestockId, Count>;
/// "default" (cattle 100, hogs 10000, poultry 200) or "large" (1000, 25000, 125000).
/// Throws ConfigError for other names.
CafoThresholds cafo_threshold_preset(const std::string &name);

/// Farms of `livestock` with at least the threshold's heads; no threshold keeps all.
std::vector<FarmRecord> farms_above_threshold(const std::vector<FarmRecord> &farms, const LivestockId &livestock,
                                              const CafoThresholds &thresholds);

/// Value at quantile q in [0,1] by linear interpolation over the sorted sample.
double quantile(std::vector<double> sample, double q);

/// 100 |a - b| / mean(a, b), and 0 when both are 0.
double mean_normalized_difference(double ds, double census) noexcept;

struct AlignmentRow {
    Fips state;
    LivestockId livestock;
    SubtypeId subtype;
    Count ds_heads = 0;
    Count census_heads = 0;
    double percent = 0;
};

/// Compares state totals of the generated farms against the census STATE tables.
/// Subtype "all" sums every subtype of the livestock type.
std::vector<AlignmentRow> census_alignment(const std::vector<FarmRecord> &farms, const ingest::Census &census);

/// Summed abundance per group; species without a group are ignored.
std::map<std::string, double> group_abundance(const std::map<std::string, double> &species_abundance,
                                              const ingest::SpeciesGroups &groups);

/// Fraction of case groups among the K most abundant groups (descending, ties by name).
/// 1 when there are no case groups.
double topk_recall(const std::map<std::string, double> &group_abundance, const std::set<std::string> &case_groups,
                   std::size_t k);

struct WorkerRow {
    Fips county;
    double ds_count = 0;
    double bls_mean = 0;
    double difference = 0;
    double cv = 0;
};

struct WorkerComparison {
    std::vector<WorkerRow> rows;
    std::vector<Fips> only_ds;
    std::vector<Fips> only_bls;
};

/// Coefficient of variation with the population standard deviation; 0 for a zero mean.
double coefficient_of_variation(const std::vector<double> &values);

/// Sums POPULATION layers whose employment key equals `employment` per county.
std::map<Fips, double> county_population(const LayerSet &layers, const GridGeometry &geometry,
                                         const std::string &employment);

WorkerComparison worker_comparison(const std::map<Fips, double> &ds_counts, const ingest::QuarterlyCounts &bls);

} // namespace digisim::validate
