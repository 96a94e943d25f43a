#include "digisim/core.hpp"
#include "digisim/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace digisim {

Fips state_of(const Fips &county) { return county.substr(0, std::min<std::size_t>(2, county.size())); }

SizeClassScheme::SizeClassScheme(LivestockId livestock, std::vector<SizeClass> classes)
    : livestock_{std::move(livestock)}, classes_{std::move(classes)} {
    for (std::size_t k = 0; k < classes_.size(); ++k) {
        const auto &c = classes_[k];
        if (c.w_min < 1) {
            throw Error(ErrorKind::SchemaError,
                        livestock_ + " class " + std::to_string(k) + ": w_min must be >= 1");
        }
        if (c.w_max && *c.w_max < c.w_min) {
            throw Error(ErrorKind::SchemaError,
                        livestock_ + " class " + std::to_string(k) + ": w_max < w_min");
        }
        if (c.is_open() && k + 1 != classes_.size()) {
            throw Error(ErrorKind::SchemaError,
                        livestock_ + ": only the last class may be OPEN");
        }
        if (k > 0) {
            const auto &prev = classes_[k - 1];
            if (!prev.w_max || *prev.w_max >= c.w_min) {
                throw Error(ErrorKind::SchemaError, livestock_ + " classes " +
                                                        std::to_string(k - 1) + " and " +
                                                        std::to_string(k) +
                                                        " overlap or are unsorted");
            }
        }
    }
}

std::optional<std::size_t> SizeClassScheme::class_of(Count heads) const noexcept {
    for (std::size_t k = 0; k < classes_.size(); ++k) {
        if (classes_[k].contains(heads)) {
            return k;
        }
    }
    return std::nullopt;
}

Count resolve_open_cap(Count w_min, Count farms, std::optional<Count> enclosing_total) noexcept {
    return std::max(enclosing_total.value_or(0), w_min * farms * 100);
}

Count class_upper_heads(const SizeClass &c, Count farms, std::optional<Count> enclosing_total) noexcept {
    if (farms <= 0) {
        return 0;
    }
    if (c.w_max) {
        return *c.w_max * farms;
    }
    return resolve_open_cap(c.w_min, farms, enclosing_total);
}

std::string_view to_string(AdminLevel level) noexcept {
    return level == AdminLevel::State ? "STATE" : "COUNTY";
}

AdminLevel parse_admin_level(std::string_view text) {
    if (text == "STATE") {
        return AdminLevel::State;
    }
    if (text == "COUNTY") {
        return AdminLevel::County;
    }
    throw Error(ErrorKind::SchemaError, "unknown admin level '" + std::string{text} + "'");
}

std::string TableKey::describe() const {
    return std::string{to_string(level)} + "/" + region + "/" + livestock + "/" + subtype;
}

bool CountTable::has_missing_heads() const noexcept {
    if (!total.heads) {
        return true;
    }
    return std::any_of(by_class.begin(), by_class.end(),
                       [](const auto &entry) { return !entry.second.heads; });
}

void GridGeometry::add_cell(CellId id, CellInfo info) {
    if (!cells_.emplace(id, std::move(info)).second) {
        throw Error(ErrorKind::SchemaError,
                    "duplicate cell (" + std::to_string(id.x) + "," + std::to_string(id.y) + ")");
    }
}

const CellInfo &GridGeometry::at(CellId id) const {
    auto it = cells_.find(id);
    if (it == cells_.end()) {
        throw Error(ErrorKind::UnknownCell,
                    "cell (" + std::to_string(id.x) + "," + std::to_string(id.y) + ")");
    }
    return it->second;
}

std::vector<CellId> GridGeometry::cells_of(const Fips &county) const {
    std::vector<CellId> out;
    for (const auto &[id, info] : cells_) {
        if (info.county == county) {
            out.push_back(id);
        }
    }
    return out;
}

std::vector<Fips> GridGeometry::counties() const {
    std::vector<Fips> out;
    for (const auto &[id, info] : cells_) {
        out.push_back(info.county);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::optional<CellId> GridGeometry::central_cell(const Fips &county) const {
    const auto ids = cells_of(county);
    if (ids.empty()) {
        return std::nullopt;
    }
    double lat = 0;
    double lon = 0;
    for (const auto &id : ids) {
        lat += cells_.at(id).lat;
        lon += cells_.at(id).lon;
    }
    lat /= static_cast<double>(ids.size());
    lon /= static_cast<double>(ids.size());
    CellId best = ids.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (const auto &id : ids) {
        const auto &c = cells_.at(id);
        const double d = (c.lat - lat) * (c.lat - lat) + (c.lon - lon) * (c.lon - lon);
        if (d < best_d) {
            best_d = d;
            best = id;
        }
    }
    return best;
}

void GridLayer::add(CellId cell, double value) {
    if (!(value >= 0) || !std::isfinite(value)) {
        throw Error(ErrorKind::NegativeValue, "layer value " + std::to_string(value));
    }
    values_[cell] += value;
}

double GridLayer::value(CellId cell) const noexcept {
    auto it = values_.find(cell);
    return it == values_.end() ? 0.0 : it->second;
}

double GridLayer::sum() const noexcept {
    double s = 0;
    for (const auto &[cell, v] : values_) {
        s += v;
    }
    return s;
}

Count FarmRecord::total_heads() const noexcept {
    Count s = 0;
    for (const auto &[subtype, h] : heads_by_subtype) {
        s += h;
    }
    return s;
}

} // namespace digisim
