#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace digisim {

/// FIPS codes are opaque, zero-padded strings.
using Fips = std::string;
using LivestockId = std::string;
using SubtypeId = std::string;
using Count = std::int64_t;

/// Reserved subtype meaning "the whole livestock type".
inline constexpr std::string_view kAllSubtype = "all";
/// Region code of the national aggregate row (stored at STATE level).
inline constexpr std::string_view kNationalRegion = "US";
/// class_index value used for total rows in census files.
inline constexpr int kTotalClass = -1;
inline constexpr double kGridResolutionArcMinutes = 5.0;

/// State FIPS of a county FIPS (first two characters).
Fips state_of(const Fips &county);

struct SizeClass {
    Count w_min = 1;
    std::optional<Count> w_max; // nullopt: OPEN top class

    bool is_open() const noexcept { return !w_max.has_value(); }
    bool contains(Count heads) const noexcept {
        return heads >= w_min && (!w_max || heads <= *w_max);
    }
    friend bool operator==(const SizeClass &, const SizeClass &) = default;
};

/// Ordered, disjoint farm-size windows of one livestock type.
class SizeClassScheme {
  public:
    SizeClassScheme() = default;
    /// Throws SchemaError when classes overlap, are unsorted, or OPEN is not last.
    SizeClassScheme(LivestockId livestock, std::vector<SizeClass> classes);

    const LivestockId &livestock() const noexcept { return livestock_; }
    std::size_t size() const noexcept { return classes_.size(); }
    const SizeClass &at(std::size_t k) const { return classes_.at(k); }
    const std::vector<SizeClass> &classes() const noexcept { return classes_; }
    std::optional<std::size_t> class_of(Count heads) const noexcept;

  private:
    LivestockId livestock_;
    std::vector<SizeClass> classes_;
};

/// Finite stand-in for the upper head bound of an OPEN class holding `farms` farms.
Count resolve_open_cap(Count w_min, Count farms, std::optional<Count> enclosing_total) noexcept;

/// Upper head bound of `farms` farms in class `c` (resolving OPEN).
Count class_upper_heads(const SizeClass &c, Count farms, std::optional<Count> enclosing_total) noexcept;

struct CountCell {
    std::optional<Count> farms;
    std::optional<Count> heads;

    bool complete() const noexcept { return farms && heads; }
    friend bool operator==(const CountCell &, const CountCell &) = default;
};

enum class AdminLevel { State, County };

std::string_view to_string(AdminLevel level) noexcept;
AdminLevel parse_admin_level(std::string_view text);

struct TableKey {
    AdminLevel level = AdminLevel::State;
    Fips region;
    LivestockId livestock;
    SubtypeId subtype;

    auto operator<=>(const TableKey &) const = default;
    std::string describe() const;
};

struct CountTable {
    AdminLevel level = AdminLevel::State;
    Fips region;
    LivestockId livestock;
    SubtypeId subtype;
    std::map<int, CountCell> by_class;
    CountCell total;

    TableKey key() const { return {level, region, livestock, subtype}; }
    bool has_missing_heads() const noexcept;
    friend bool operator==(const CountTable &, const CountTable &) = default;
};

struct CellId {
    int x = 0;
    int y = 0;
    auto operator<=>(const CellId &) const = default;
};

struct CellInfo {
    double lat = 0;
    double lon = 0;
    Fips county;
};

class GridGeometry {
  public:
    /// Throws SchemaError on duplicate ids.
    void add_cell(CellId id, CellInfo info);

    bool contains(CellId id) const noexcept { return cells_.count(id) != 0; }
    const CellInfo &at(CellId id) const;
    const std::map<CellId, CellInfo> &cells() const noexcept { return cells_; }
    std::vector<CellId> cells_of(const Fips &county) const;
    std::vector<Fips> counties() const;
    /// County cell closest to the mean centroid of the county's cells.
    std::optional<CellId> central_cell(const Fips &county) const;
    double resolution_arcmin() const noexcept { return kGridResolutionArcMinutes; }

  private:
    std::map<CellId, CellInfo> cells_;
};

enum class LayerKind { Glw, Birds, Population };

struct LayerKey {
    LayerKind kind = LayerKind::Glw;
    std::string primary;   // livestock | species | demographic
    std::string secondary; // employment for POPULATION
    int week = 0;          // 1..52 for BIRDS

    auto operator<=>(const LayerKey &) const = default;
};

class GridLayer {
  public:
    GridLayer() = default;
    explicit GridLayer(LayerKey key) : key_{std::move(key)} {}

    const LayerKey &key() const noexcept { return key_; }
    /// Adds to the existing value; throws NegativeValue for v < 0.
    void add(CellId cell, double value);
    double value(CellId cell) const noexcept;
    const std::map<CellId, double> &values() const noexcept { return values_; }
    double sum() const noexcept;
    bool empty() const noexcept { return values_.empty(); }

  private:
    LayerKey key_;
    std::map<CellId, double> values_;
};

using LayerSet = std::map<LayerKey, GridLayer>;

struct FarmRecord {
    std::string id;
    Fips county;
    LivestockId livestock;
    int size_class = 0;
    std::map<SubtypeId, Count> heads_by_subtype;
    std::optional<CellId> cell;

    Count total_heads() const noexcept;
};

/// Re-expresses a state table in the county scheme. Nested state classes are summed;
/// a merged cell is present only when all constituents are present.
CountTable align_size_classes(const SizeClassScheme &state_scheme,
                              const SizeClassScheme &county_scheme,
                              const CountTable &state_table);

struct HeadBound {
    int class_index = kTotalClass;
    Count lower = 0;
    Count upper = 0;
    friend bool operator==(const HeadBound &, const HeadBound &) = default;
};

/// Bounds for every MISSING head count in `table`. `refining` holds finer-grained tables
/// (e.g. the counties of a state) whose known heads raise the lower bounds.
/// `enclosing_total` resolves the cap of an OPEN class.
std::vector<HeadBound> derive_bounds(const CountTable &table, const SizeClassScheme &scheme,
                                     std::span<const CountTable> refining,
                                     std::optional<Count> enclosing_total = std::nullopt);

} // namespace digisim
