#include "digisim/validate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace digisim::validate {

double quantile(std::vector<double> sample, double q) {
    if (sample.empty()) {
        return 0;
    }
    std::sort(sample.begin(), sample.end());
    const double pos = std::clamp(q, 0.0, 1.0) * static_cast<double>(sample.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    return sample[lo] + (pos - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

double mean_normalized_difference(double ds, double census) noexcept {
    if (ds == 0 && census == 0) {
        return 0;
    }
    return 100.0 * std::abs(ds - census) / ((ds + census) / 2.0);
}

std::vector<AlignmentRow> census_alignment(const std::vector<FarmRecord> &farms, const ingest::Census &census) {
    std::map<TableKey, Count> ds;
    for (const auto &f : farms) {
        const Fips state = state_of(f.county);
        for (const auto &[subtype, heads] : f.heads_by_subtype) {
            ds[{AdminLevel::State, state, f.livestock, subtype}] += heads;
            if (subtype != kAllSubtype) {
                ds[{AdminLevel::State, state, f.livestock, SubtypeId(kAllSubtype)}] += heads;
            }
        }
    }
    std::vector<AlignmentRow> out;
    for (const auto &[key, table] : census.tables) {
        if (key.level != AdminLevel::State || key.region == kNationalRegion || !table.total.heads) {
            continue;
        }
        AlignmentRow row;
        row.state = key.region;
        row.livestock = key.livestock;
        row.subtype = key.subtype;
        row.census_heads = *table.total.heads;
        auto it = ds.find(key);
        row.ds_heads = it == ds.end() ? 0 : it->second;
        row.percent = mean_normalized_difference(static_cast<double>(row.ds_heads),
                                                 static_cast<double>(row.census_heads));
        out.push_back(row);
    }
    return out;
}

std::map<std::string, double> group_abundance(const std::map<std::string, double> &species_abundance,
                                              const ingest::SpeciesGroups &groups) {
    std::map<std::string, double> out;
    for (const auto &[species, value] : species_abundance) {
        auto it = groups.find(species);
        if (it != groups.end()) {
            out[it->second] += value;
        }
    }
    return out;
}

double topk_recall(const std::map<std::string, double> &group_abundance, const std::set<std::string> &case_groups,
                   std::size_t k) {
    if (case_groups.empty()) {
        return 1.0;
    }
    std::vector<std::pair<std::string, double>> ranked(group_abundance.begin(), group_abundance.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto &a, const auto &b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });
    std::size_t hits = 0;
    for (std::size_t i = 0; i < std::min(k, ranked.size()); ++i) {
        hits += case_groups.count(ranked[i].first);
    }
    return static_cast<double>(hits) / static_cast<double>(case_groups.size());
}

double coefficient_of_variation(const std::vector<double> &values) {
    if (values.empty()) {
        return 0;
    }
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (mean == 0) {
        return 0;
    }
    double ss = 0;
    for (double v : values) {
        ss += (v - mean) * (v - mean);
    }
    return std::sqrt(ss / n) / mean;
}

std::map<Fips, double> county_population(const LayerSet &layers, const GridGeometry &geometry,
                                         const std::string &employment) {
    std::map<Fips, double> out;
    for (const auto &[key, layer] : layers) {
        if (key.kind != LayerKind::Population || key.secondary != employment) {
            continue;
        }
        for (const auto &[cell, value] : layer.values()) {
            if (geometry.contains(cell)) {
                out[geometry.at(cell).county] += value;
            }
        }
    }
    return out;
}

WorkerComparison worker_comparison(const std::map<Fips, double> &ds_counts, const ingest::QuarterlyCounts &bls) {
    WorkerComparison out;
    for (const auto &[county, ds] : ds_counts) {
        auto it = bls.find(county);
        if (it == bls.end() || it->second.empty()) {
            out.only_ds.push_back(county);
            continue;
        }
        std::vector<double> q;
        for (const auto &[quarter, v] : it->second) {
            q.push_back(v);
        }
        WorkerRow row;
        row.county = county;
        row.ds_count = ds;
        row.bls_mean = std::accumulate(q.begin(), q.end(), 0.0) / static_cast<double>(q.size());
        row.difference = ds - row.bls_mean;
        row.cv = coefficient_of_variation(q);
        out.rows.push_back(row);
    }
    for (const auto &[county, quarters] : bls) {
        if (!ds_counts.count(county)) {
            out.only_bls.push_back(county);
        }
    }
    return out;
}

} // namespace digisim::validate
