#pragma once

#include "digisim/core.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace digisim::ingest {

using SchemeMap = std::map<LivestockId, SizeClassScheme>;

/// All census tables of a run, keyed for lookup.
struct Census {
    SchemeMap schemes;
    std::map<TableKey, CountTable> tables;

    const CountTable *find(const TableKey &key) const;
    CountTable *find(const TableKey &key);
};

struct CensusLoadOptions {
    /// Skip state-level by-class cells of tables whose class head counts are all absent
    /// (e.g. layer farm-size counts published without heads).
    bool drop_state_classes_without_heads = false;
    /// Scheme used to validate STATE rows when states publish finer classes than counties.
    const SchemeMap *state_schemes = nullptr;
};

/// One bound-violation found while loading, tagged with its CSV line.
struct RowViolation {
    std::size_t line = 0;
    std::string message;
};

SchemeMap parse_size_classes(std::string_view text, const std::string &source = "size_classes.csv");
SchemeMap load_size_classes(const std::filesystem::path &path);

std::vector<CountTable> parse_census(std::string_view text, const SchemeMap &schemes,
                                     const CensusLoadOptions &options = {},
                                     const std::string &source = "census.csv");
std::vector<CountTable> load_census(const std::filesystem::path &path, const SchemeMap &schemes,
                                    const CensusLoadOptions &options = {});

GridGeometry parse_geometry(std::string_view text, const std::string &source = "geometry.csv");
GridGeometry load_geometry(const std::filesystem::path &path);

/// GLW (x,y,livestock,heads), BIRDS (x,y,species,week,abundance) or
/// POPULATION (x,y,demographic,employment,count). Duplicate (key, cell) rows are summed.
LayerSet parse_gridded_layer(std::string_view text, LayerKind kind, const GridGeometry &geometry,
                             const std::string &source = "layer.csv");
LayerSet load_gridded_layer(const std::filesystem::path &path, LayerKind kind,
                            const GridGeometry &geometry);

enum class PointKind { Plant, Cafo, Incidence };
std::string_view to_string(PointKind kind) noexcept;
PointKind parse_point_kind(std::string_view text);

struct PointRecord {
    std::string id;
    PointKind kind = PointKind::Cafo;
    double lat = 0;
    double lon = 0;
    Fips county;
    std::map<std::string, std::string> attributes;

    const std::string *attribute(const std::string &key) const;
    friend bool operator==(const PointRecord &, const PointRecord &) = default;
};

/// Loads points.csv; with `kind` set, rows of other kinds are skipped.
std::vector<PointRecord> parse_point_records(std::string_view text,
                                             std::optional<PointKind> kind = std::nullopt,
                                             const std::string &source = "points.csv");
std::vector<PointRecord> load_point_records(const std::filesystem::path &path,
                                            std::optional<PointKind> kind = std::nullopt);

/// Wild-bird H5N1 prevalence by week, optionally per cell. Weekly scalars broadcast to
/// every cell that has no cell-level entry.
struct Prevalence {
    std::map<int, double> weekly;
    std::map<std::pair<CellId, int>, double> by_cell;

    double at(CellId cell, int week) const noexcept;
    bool covers(int week) const noexcept;
};

Prevalence parse_prevalence(std::string_view text, const GridGeometry &geometry,
                            const std::string &source = "prevalence.csv");
Prevalence load_prevalence(const std::filesystem::path &path, const GridGeometry &geometry);

/// Quarterly covered-employment counts per county: county_fips,quarter,count.
using QuarterlyCounts = std::map<Fips, std::map<int, double>>;
QuarterlyCounts parse_quarterly_counts(std::string_view text, const std::string &source = "bls.csv");
QuarterlyCounts load_quarterly_counts(const std::filesystem::path &path);

/// species,group
using SpeciesGroups = std::map<std::string, std::string>;
SpeciesGroups parse_species_groups(std::string_view text,
                                   const std::string &source = "species_groups.csv");
SpeciesGroups load_species_groups(const std::filesystem::path &path);

// Canonical serializers. Rows are sorted so that load -> write is byte-stable.
std::string write_size_classes(const SchemeMap &schemes);
std::string write_census(const std::vector<CountTable> &tables);
std::string write_census(const Census &census);
std::string write_geometry(const GridGeometry &geometry);
std::string write_gridded_layer(const LayerSet &layers, LayerKind kind);
std::string write_point_records(const std::vector<PointRecord> &points);
std::string write_prevalence(const Prevalence &prevalence);

enum class PlantRiskLevel { Unknown, Low, Medium, High };
std::string_view to_string(PlantRiskLevel level) noexcept;

/// Highest risk over the product codes; Unknown only if no code is classified.
PlantRiskLevel classify_plant_risk(const std::vector<std::string> &product_codes);

} // namespace digisim::ingest
