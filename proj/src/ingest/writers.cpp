#include "digisim/csv.hpp"
#include "digisim/ingest.hpp"

#include <algorithm>

namespace digisim::ingest {

namespace {

std::string opt(const std::optional<Count> &v) { return v ? std::to_string(*v) : std::string{}; }

std::string lines(std::string header, std::vector<std::string> rows) {
    std::sort(rows.begin(), rows.end());
    std::string out = std::move(header);
    out.push_back('\n');
    for (const auto &r : rows) {
        out += r;
        out.push_back('\n');
    }
    return out;
}

} // namespace

std::string write_size_classes(const SchemeMap &schemes) {
    std::string out = "livestock,class_index,w_min,w_max\n";
    for (const auto &[livestock, scheme] : schemes) {
        for (std::size_t k = 0; k < scheme.size(); ++k) {
            const auto &c = scheme.at(k);
            out += csv::join_row({livestock, std::to_string(k), std::to_string(c.w_min), opt(c.w_max)});
            out.push_back('\n');
        }
    }
    return out;
}

std::string write_census(const std::vector<CountTable> &tables) {
    // Sorted by table key then class index, totals first.
    std::vector<const CountTable *> ordered;
    for (const auto &t : tables) {
        ordered.push_back(&t);
    }
    std::sort(ordered.begin(), ordered.end(),
              [](const CountTable *a, const CountTable *b) { return a->key() < b->key(); });
    std::string out = "level,region_fips,livestock,subtype,class_index,farms,heads\n";
    for (const auto *t : ordered) {
        auto row = [&](int idx, const CountCell &c) {
            out += csv::join_row({std::string{to_string(t->level)}, t->region, t->livestock, t->subtype,
                                  std::to_string(idx), opt(c.farms), opt(c.heads)});
            out.push_back('\n');
        };
        if (t->total.farms || t->total.heads) {
            row(kTotalClass, t->total);
        }
        for (const auto &[idx, c] : t->by_class) {
            row(idx, c);
        }
    }
    return out;
}

std::string write_census(const Census &census) {
    std::vector<CountTable> tables;
    for (const auto &[key, t] : census.tables) {
        tables.push_back(t);
    }
    return write_census(tables);
}

std::string write_geometry(const GridGeometry &geometry) {
    std::string out = "x,y,lat,lon,county_fips\n";
    for (const auto &[id, info] : geometry.cells()) {
        out += csv::join_row({std::to_string(id.x), std::to_string(id.y), csv::format_double(info.lat),
                              csv::format_double(info.lon), info.county});
        out.push_back('\n');
    }
    return out;
}

std::string write_gridded_layer(const LayerSet &layers, LayerKind kind) {
    std::string header;
    switch (kind) {
    case LayerKind::Glw:
        header = "x,y,livestock,heads";
        break;
    case LayerKind::Birds:
        header = "x,y,species,week,abundance";
        break;
    case LayerKind::Population:
        header = "x,y,demographic,employment,count";
        break;
    }
    // Canonical order: cell, then key.
    std::vector<std::pair<std::pair<CellId, LayerKey>, double>> entries;
    for (const auto &[key, layer] : layers) {
        if (key.kind != kind) {
            continue;
        }
        for (const auto &[cell, v] : layer.values()) {
            entries.push_back({{cell, key}, v});
        }
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    std::string out = header + "\n";
    for (const auto &[ck, v] : entries) {
        const auto &[cell, key] = ck;
        std::vector<std::string> f{std::to_string(cell.x), std::to_string(cell.y), key.primary};
        if (kind == LayerKind::Birds) {
            f.push_back(std::to_string(key.week));
        } else if (kind == LayerKind::Population) {
            f.push_back(key.secondary);
        }
        f.push_back(csv::format_double(v));
        out += csv::join_row(f);
        out.push_back('\n');
    }
    return out;
}

std::string write_point_records(const std::vector<PointRecord> &points) {
    std::vector<std::string> rows;
    for (const auto &p : points) {
        std::string bag;
        for (const auto &[k, v] : p.attributes) {
            bag += (bag.empty() ? "" : ";") + k + "=" + v;
        }
        rows.push_back(csv::join_row({p.id, std::string{to_string(p.kind)}, csv::format_double(p.lat),
                                      csv::format_double(p.lon), p.county, bag}));
    }
    return lines("id,kind,lat,lon,county_fips,attributes", std::move(rows));
}

std::string write_prevalence(const Prevalence &prevalence) {
    std::string out;
    if (prevalence.by_cell.empty()) {
        out = "week,value\n";
        for (const auto &[week, v] : prevalence.weekly) {
            out += std::to_string(week) + "," + csv::format_double(v) + "\n";
        }
        return out;
    }
    // Cell-level files cannot hold bare weekly rows; those broadcast values are expanded
    // only by the reader, so a mixed input is written cell rows only.
    out = "week,x,y,value\n";
    std::vector<std::pair<std::pair<int, CellId>, double>> entries;
    for (const auto &[key, v] : prevalence.by_cell) {
        entries.push_back({{key.second, key.first}, v});
    }
    std::sort(entries.begin(), entries.end(),
              [](const auto &a, const auto &b) { return a.first < b.first; });
    for (const auto &[k, v] : entries) {
        out += std::to_string(k.first) + "," + std::to_string(k.second.x) + "," +
               std::to_string(k.second.y) + "," + csv::format_double(v) + "\n";
    }
    return out;
}

} // namespace digisim::ingest
