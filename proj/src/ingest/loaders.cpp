#include "digisim/csv.hpp"
#include "digisim/error.hpp"
#include "digisim/ingest.hpp"

#include <algorithm>
#include <set>

namespace digisim::ingest {

namespace {

std::string where(const std::string &source, std::size_t line) {
    return source + ":" + std::to_string(line);
}

std::optional<Count> parse_optional_count(const std::string &field, const std::string &at) {
    if (field.empty()) {
        return std::nullopt;
    }
    const Count v = csv::parse_int(field, at);
    if (v < 0) {
        throw Error(ErrorKind::NegativeCount, at + ": negative count " + field);
    }
    return v;
}

CellId parse_cell(const csv::Table::Row &row, std::size_t xi, std::size_t yi, const std::string &at) {
    return {static_cast<int>(csv::parse_int(row.fields[xi], at)),
            static_cast<int>(csv::parse_int(row.fields[yi], at))};
}

void check_coordinates(double lat, double lon, const std::string &at) {
    if (lat < -90 || lat > 90 || lon < -180 || lon > 180) {
        throw Error(ErrorKind::CoordinateOutOfRange,
                    at + ": (" + csv::format_double(lat) + ", " + csv::format_double(lon) + ")");
    }
}

} // namespace

const CountTable *Census::find(const TableKey &key) const {
    auto it = tables.find(key);
    return it == tables.end() ? nullptr : &it->second;
}

CountTable *Census::find(const TableKey &key) {
    auto it = tables.find(key);
    return it == tables.end() ? nullptr : &it->second;
}

SchemeMap parse_size_classes(std::string_view text, const std::string &source) {
    const auto table = csv::parse(text, source);
    csv::require_header(table, {{"livestock", "class_index", "w_min", "w_max"}}, source);
    std::map<LivestockId, std::map<int, SizeClass>> raw;
    for (const auto &row : table.rows) {
        const auto at = where(source, row.line);
        const int idx = static_cast<int>(csv::parse_int(row.fields[1], at));
        SizeClass c;
        c.w_min = csv::parse_int(row.fields[2], at);
        if (!row.fields[3].empty()) {
            c.w_max = csv::parse_int(row.fields[3], at);
        }
        if (idx < 0 || !raw[row.fields[0]].emplace(idx, c).second) {
            throw Error(ErrorKind::SchemaError, at + ": bad or duplicate class_index");
        }
    }
    SchemeMap out;
    for (auto &[livestock, classes] : raw) {
        std::vector<SizeClass> ordered;
        int expect = 0;
        for (const auto &[idx, c] : classes) {
            if (idx != expect++) {
                throw Error(ErrorKind::SchemaError,
                            source + ": class indices of " + livestock + " are not contiguous");
            }
            ordered.push_back(c);
        }
        out.emplace(livestock, SizeClassScheme{livestock, std::move(ordered)});
    }
    return out;
}

SchemeMap load_size_classes(const std::filesystem::path &path) {
    return parse_size_classes(csv::read_text(path), path.filename().string());
}

std::vector<CountTable> parse_census(std::string_view text, const SchemeMap &schemes,
                                     const CensusLoadOptions &options, const std::string &source) {
    const auto table = csv::parse(text, source);
    csv::require_header(
        table, {{"level", "region_fips", "livestock", "subtype", "class_index", "farms", "heads"}},
        source);

    std::map<TableKey, CountTable> tables;
    std::vector<RowViolation> violations;

    for (const auto &row : table.rows) {
        const auto at = where(source, row.line);
        const auto &f = row.fields;
        const AdminLevel level = parse_admin_level(f[0]);
        if (f[1].empty() || f[2].empty() || f[3].empty()) {
            throw Error(ErrorKind::SchemaError, at + ": empty region, livestock or subtype");
        }
        const SchemeMap &scheme_source =
            (level == AdminLevel::State && options.state_schemes) ? *options.state_schemes : schemes;
        auto sit = scheme_source.find(f[2]);
        if (sit == scheme_source.end()) {
            throw Error(ErrorKind::UnknownSizeClass, at + ": no size classes for livestock " + f[2]);
        }
        const SizeClassScheme &scheme = sit->second;
        const int idx = static_cast<int>(csv::parse_int(f[4], at));
        if (idx != kTotalClass && (idx < 0 || static_cast<std::size_t>(idx) >= scheme.size())) {
            throw Error(ErrorKind::UnknownSizeClass, at + ": class_index " + f[4]);
        }
        CountCell cell{parse_optional_count(f[5], at), parse_optional_count(f[6], at)};

        if (cell.farms && cell.heads) {
            const Count farms = *cell.farms;
            const Count heads = *cell.heads;
            if (farms == 0 && heads != 0) {
                violations.push_back({row.line, "heads " + std::to_string(heads) + " with 0 farms"});
            } else if (idx != kTotalClass && farms > 0) {
                const SizeClass &c = scheme.at(static_cast<std::size_t>(idx));
                if (heads < c.w_min * farms) {
                    violations.push_back({row.line, "heads " + std::to_string(heads) + " < " +
                                                        std::to_string(farms) + "*" +
                                                        std::to_string(c.w_min)});
                } else if (c.w_max && heads > *c.w_max * farms) {
                    violations.push_back({row.line, "heads " + std::to_string(heads) + " > " +
                                                        std::to_string(farms) + "*" +
                                                        std::to_string(*c.w_max)});
                }
            }
        }

        TableKey key{level, f[1], f[2], f[3]};
        auto [it, inserted] = tables.try_emplace(key);
        if (inserted) {
            it->second.level = level;
            it->second.region = f[1];
            it->second.livestock = f[2];
            it->second.subtype = f[3];
        }
        CountTable &t = it->second;
        if (idx == kTotalClass) {
            if (t.total.farms || t.total.heads) {
                throw Error(ErrorKind::SchemaError, at + ": duplicate total row");
            }
            t.total = cell;
        } else if (!t.by_class.emplace(idx, cell).second) {
            throw Error(ErrorKind::SchemaError, at + ": duplicate class row");
        }
    }

    if (!violations.empty()) {
        std::string msg = source + ": count bound violations:";
        for (const auto &v : violations) {
            msg += " [line " + std::to_string(v.line) + ": " + v.message + "]";
        }
        throw Error(ErrorKind::NegativeCount, msg);
    }

    std::vector<CountTable> out;
    out.reserve(tables.size());
    for (auto &[key, t] : tables) {
        if (options.drop_state_classes_without_heads && t.level == AdminLevel::State &&
            !t.by_class.empty() &&
            std::none_of(t.by_class.begin(), t.by_class.end(),
                         [](const auto &e) { return e.second.heads.has_value(); })) {
            t.by_class.clear();
        }
        out.push_back(std::move(t));
    }
    return out;
}

std::vector<CountTable> load_census(const std::filesystem::path &path, const SchemeMap &schemes,
                                    const CensusLoadOptions &options) {
    return parse_census(csv::read_text(path), schemes, options, path.filename().string());
}

GridGeometry parse_geometry(std::string_view text, const std::string &source) {
    const auto table = csv::parse(text, source);
    csv::require_header(table, {{"x", "y", "lat", "lon", "county_fips"}}, source);
    GridGeometry geometry;
    for (const auto &row : table.rows) {
        const auto at = where(source, row.line);
        const CellId id = parse_cell(row, 0, 1, at);
        const double lat = csv::parse_double(row.fields[2], at);
        const double lon = csv::parse_double(row.fields[3], at);
        check_coordinates(lat, lon, at);
        if (row.fields[4].empty()) {
            throw Error(ErrorKind::SchemaError, at + ": empty county_fips");
        }
        geometry.add_cell(id, {lat, lon, row.fields[4]});
    }
    return geometry;
}

GridGeometry load_geometry(const std::filesystem::path &path) {
    return parse_geometry(csv::read_text(path), path.filename().string());
}

LayerSet parse_gridded_layer(std::string_view text, LayerKind kind, const GridGeometry &geometry,
                             const std::string &source) {
    const auto table = csv::parse(text, source);
    switch (kind) {
    case LayerKind::Glw:
        csv::require_header(table, {{"x", "y", "livestock", "heads"}}, source);
        break;
    case LayerKind::Birds:
        csv::require_header(table, {{"x", "y", "species", "week", "abundance"}}, source);
        break;
    case LayerKind::Population:
        csv::require_header(table, {{"x", "y", "demographic", "employment", "count"}}, source);
        break;
    }
    LayerSet layers;
    for (const auto &row : table.rows) {
        const auto at = where(source, row.line);
        const CellId cell = parse_cell(row, 0, 1, at);
        if (!geometry.contains(cell)) {
            throw Error(ErrorKind::UnknownCell, at + ": (" + row.fields[0] + "," + row.fields[1] + ")");
        }
        LayerKey key{kind, row.fields[2], {}, 0};
        std::size_t value_col = 3;
        if (kind == LayerKind::Birds) {
            const auto week = csv::parse_int(row.fields[3], at);
            if (week < 1 || week > 52) {
                throw Error(ErrorKind::BadWeek, at + ": week " + row.fields[3]);
            }
            key.week = static_cast<int>(week);
            value_col = 4;
        } else if (kind == LayerKind::Population) {
            key.secondary = row.fields[3];
            value_col = 4;
        }
        const double v = csv::parse_double(row.fields[value_col], at);
        if (v < 0) {
            throw Error(ErrorKind::NegativeValue, at + ": " + row.fields[value_col]);
        }
        auto [it, inserted] = layers.try_emplace(key, GridLayer{key});
        it->second.add(cell, v);
    }
    return layers;
}

LayerSet load_gridded_layer(const std::filesystem::path &path, LayerKind kind,
                            const GridGeometry &geometry) {
    return parse_gridded_layer(csv::read_text(path), kind, geometry, path.filename().string());
}

std::string_view to_string(PointKind kind) noexcept {
    switch (kind) {
    case PointKind::Plant:
        return "PLANT";
    case PointKind::Cafo:
        return "CAFO";
    case PointKind::Incidence:
        return "INCIDENCE";
    }
    return "UNKNOWN";
}

PointKind parse_point_kind(std::string_view text) {
    if (text == "PLANT") {
        return PointKind::Plant;
    }
    if (text == "CAFO") {
        return PointKind::Cafo;
    }
    if (text == "INCIDENCE") {
        return PointKind::Incidence;
    }
    throw Error(ErrorKind::SchemaError, "unknown point kind '" + std::string{text} + "'");
}

const std::string *PointRecord::attribute(const std::string &key) const {
    auto it = attributes.find(key);
    return it == attributes.end() ? nullptr : &it->second;
}

std::vector<PointRecord> parse_point_records(std::string_view text, std::optional<PointKind> kind,
                                             const std::string &source) {
    const auto table = csv::parse(text, source);
    csv::require_header(table, {{"id", "kind", "lat", "lon", "county_fips", "attributes"}}, source);
    std::vector<PointRecord> out;
    std::set<std::string> ids;
    for (const auto &row : table.rows) {
        const auto at = where(source, row.line);
        const auto &f = row.fields;
        PointRecord p;
        p.id = f[0];
        p.kind = parse_point_kind(f[1]);
        p.lat = csv::parse_double(f[2], at);
        p.lon = csv::parse_double(f[3], at);
        check_coordinates(p.lat, p.lon, at);
        p.county = f[4];
        if (p.id.empty() || p.county.empty()) {
            throw Error(ErrorKind::SchemaError, at + ": empty id or county_fips");
        }
        if (!ids.insert(p.id).second) {
            throw Error(ErrorKind::SchemaError, at + ": duplicate id " + p.id);
        }
        std::string_view bag = f[5];
        while (!bag.empty()) {
            const auto semi = bag.find(';');
            const auto item = bag.substr(0, semi);
            bag = semi == std::string_view::npos ? std::string_view{} : bag.substr(semi + 1);
            if (item.empty()) {
                continue;
            }
            const auto eq = item.find('=');
            if (eq == std::string_view::npos || eq == 0) {
                throw Error(ErrorKind::SchemaError, at + ": malformed attribute '" + std::string{item} + "'");
            }
            p.attributes[std::string{item.substr(0, eq)}] = std::string{item.substr(eq + 1)};
        }
        std::vector<std::string> required;
        switch (p.kind) {
        case PointKind::Plant:
            required = {"product_codes"};
            break;
        case PointKind::Cafo:
            required = {"livestock"};
            break;
        case PointKind::Incidence:
            required = {"date", "host_type"};
            break;
        }
        for (const auto &r : required) {
            if (!p.attribute(r)) {
                throw Error(ErrorKind::SchemaError, at + ": " + std::string{to_string(p.kind)} +
                                                        " record lacks attribute '" + r + "'");
            }
        }
        if (p.kind == PointKind::Incidence) {
            const auto &host = *p.attribute("host_type");
            const std::string need = host == "wild_bird" ? "species" : "subtype";
            if (!p.attribute(need)) {
                throw Error(ErrorKind::SchemaError,
                            at + ": incidence record lacks attribute '" + need + "'");
            }
        }
        if (!kind || *kind == p.kind) {
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::vector<PointRecord> load_point_records(const std::filesystem::path &path,
                                            std::optional<PointKind> kind) {
    return parse_point_records(csv::read_text(path), kind, path.filename().string());
}

double Prevalence::at(CellId cell, int week) const noexcept {
    auto it = by_cell.find({cell, week});
    if (it != by_cell.end()) {
        return it->second;
    }
    auto wit = weekly.find(week);
    return wit == weekly.end() ? 0.0 : wit->second;
}

bool Prevalence::covers(int week) const noexcept {
    if (weekly.count(week)) {
        return true;
    }
    return std::any_of(by_cell.begin(), by_cell.end(),
                       [week](const auto &e) { return e.first.second == week; });
}

Prevalence parse_prevalence(std::string_view text, const GridGeometry &geometry,
                            const std::string &source) {
    const auto table = csv::parse(text, source);
    const auto layout =
        csv::require_header(table, {{"week", "value"}, {"week", "x", "y", "value"}}, source);
    Prevalence out;
    for (const auto &row : table.rows) {
        const auto at = where(source, row.line);
        const auto week = csv::parse_int(row.fields[0], at);
        if (week < 1 || week > 52) {
            throw Error(ErrorKind::BadWeek, at + ": week " + row.fields[0]);
        }
        const double v = csv::parse_double(row.fields.back(), at);
        if (v < 0) {
            throw Error(ErrorKind::NegativeValue, at + ": " + row.fields.back());
        }
        if (layout == 0) {
            if (!out.weekly.emplace(static_cast<int>(week), v).second) {
                throw Error(ErrorKind::SchemaError, at + ": duplicate week");
            }
        } else {
            const CellId cell = parse_cell(row, 1, 2, at);
            if (!geometry.contains(cell)) {
                throw Error(ErrorKind::UnknownCell, at);
            }
            if (!out.by_cell.emplace(std::pair{cell, static_cast<int>(week)}, v).second) {
                throw Error(ErrorKind::SchemaError, at + ": duplicate (week, cell)");
            }
        }
    }
    return out;
}

Prevalence load_prevalence(const std::filesystem::path &path, const GridGeometry &geometry) {
    return parse_prevalence(csv::read_text(path), geometry, path.filename().string());
}

QuarterlyCounts parse_quarterly_counts(std::string_view text, const std::string &source) {
    const auto table = csv::parse(text, source);
    csv::require_header(table, {{"county_fips", "quarter", "count"}}, source);
    QuarterlyCounts out;
    for (const auto &row : table.rows) {
        const auto at = where(source, row.line);
        const auto quarter = csv::parse_int(row.fields[1], at);
        if (quarter < 1 || quarter > 4) {
            throw Error(ErrorKind::SchemaError, at + ": quarter must be 1..4");
        }
        const double v = csv::parse_double(row.fields[2], at);
        if (v < 0) {
            throw Error(ErrorKind::NegativeValue, at + ": " + row.fields[2]);
        }
        if (!out[row.fields[0]].emplace(static_cast<int>(quarter), v).second) {
            throw Error(ErrorKind::SchemaError, at + ": duplicate (county, quarter)");
        }
    }
    return out;
}

QuarterlyCounts load_quarterly_counts(const std::filesystem::path &path) {
    return parse_quarterly_counts(csv::read_text(path), path.filename().string());
}

SpeciesGroups parse_species_groups(std::string_view text, const std::string &source) {
    const auto table = csv::parse(text, source);
    csv::require_header(table, {{"species", "group"}}, source);
    SpeciesGroups out;
    for (const auto &row : table.rows) {
        if (!out.emplace(row.fields[0], row.fields[1]).second) {
            throw Error(ErrorKind::SchemaError, where(source, row.line) + ": duplicate species");
        }
    }
    return out;
}

SpeciesGroups load_species_groups(const std::filesystem::path &path) {
    return parse_species_groups(csv::read_text(path), path.filename().string());
}

} // namespace digisim::ingest
