#include "digisim/error.hpp"
#include "digisim/validate.hpp"

#include <algorithm>
#include <limits>

namespace digisim::validate {

namespace {

/// Hungarian algorithm with potentials for n <= m; minimizes total cost.
/// Returns the column of each row.
std::vector<int> hungarian_min(const std::vector<std::vector<double>> &cost) {
    const std::size_t n = cost.size();
    const std::size_t m = cost[0].size();
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) {
                    continue;
                }
                const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) {
            row_to_col[p[j] - 1] = static_cast<int>(j - 1);
        }
    }
    return row_to_col;
}

} // namespace

std::vector<int> max_weight_matching(const std::vector<std::vector<double>> &weights) {
    const std::size_t n = weights.size();
    if (n == 0 || weights[0].empty()) {
        return std::vector<int>(n, -1);
    }
    const std::size_t m = weights[0].size();
    if (n <= m) {
        std::vector<std::vector<double>> cost(n, std::vector<double>(m));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < m; ++j) {
                cost[i][j] = -weights[i][j];
            }
        }
        return hungarian_min(cost);
    }
    std::vector<std::vector<double>> cost(m, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            cost[j][i] = -weights[i][j];
        }
    }
    const auto col_to_row = hungarian_min(cost);
    std::vector<int> out(n, -1);
    for (std::size_t j = 0; j < m; ++j) {
        out[static_cast<std::size_t>(col_to_row[j])] = static_cast<int>(j);
    }
    return out;
}

MatchResult match_cafos(const std::vector<ingest::PointRecord> &cafos, const std::vector<FarmRecord> &farms,
                        const GridGeometry &geometry) {
    MatchResult out;
    std::vector<const FarmRecord *> placed;
    for (const auto &f : farms) {
        if (f.cell && geometry.contains(*f.cell)) {
            placed.push_back(&f);
        } else {
            out.unmatched_farms.push_back(f.id);
        }
    }
    if (cafos.empty() || placed.empty()) {
        for (const auto &c : cafos) {
            out.unmatched_cafos.push_back(c.id);
        }
        for (const auto *f : placed) {
            out.unmatched_farms.push_back(f->id);
        }
        std::sort(out.unmatched_farms.begin(), out.unmatched_farms.end());
        return out;
    }
    std::vector<std::vector<double>> dist(cafos.size(), std::vector<double>(placed.size()));
    std::vector<std::vector<double>> w(cafos.size(), std::vector<double>(placed.size()));
    for (std::size_t i = 0; i < cafos.size(); ++i) {
        for (std::size_t j = 0; j < placed.size(); ++j) {
            const auto &c = geometry.at(*placed[j]->cell);
            dist[i][j] = haversine_miles(cafos[i].lat, cafos[i].lon, c.lat, c.lon);
            w[i][j] = 1.0 / std::max(dist[i][j], kMinMatchMiles);
        }
    }
    const auto match = max_weight_matching(w);
    std::vector<bool> farm_used(placed.size(), false);
    const bool cafos_small = cafos.size() <= placed.size();
    if (cafos_small) {
        for (std::size_t i = 0; i < cafos.size(); ++i) {
            const auto j = static_cast<std::size_t>(match[i]);
            out.total_weight += w[i][j];
        }
    } else {
        std::vector<int> farm_to_cafo(placed.size(), -1);
        for (std::size_t i = 0; i < cafos.size(); ++i) {
            if (match[i] >= 0) {
                farm_to_cafo[static_cast<std::size_t>(match[i])] = static_cast<int>(i);
            }
        }
        for (std::size_t j = 0; j < placed.size(); ++j) {
            out.total_weight += w[static_cast<std::size_t>(farm_to_cafo[j])][j];
        }
    }
    for (std::size_t i = 0; i < cafos.size(); ++i) {
        if (match[i] < 0) {
            out.unmatched_cafos.push_back(cafos[i].id);
            continue;
        }
        const auto j = static_cast<std::size_t>(match[i]);
        farm_used[j] = true;
        out.pairs.push_back({cafos[i].id, placed[j]->id, dist[i][j]});
    }
    for (std::size_t j = 0; j < placed.size(); ++j) {
        if (!farm_used[j]) {
            out.unmatched_farms.push_back(placed[j]->id);
        }
    }
    std::sort(out.unmatched_farms.begin(), out.unmatched_farms.end());
    return out;
}

CafoThresholds cafo_threshold_preset(const std::string &name) {
    if (name == "default") {
        return {{"cattle", 100}, {"hogs", 10000}, {"poultry", 200}};
    }
    if (name == "large") {
        return {{"cattle", 1000}, {"hogs", 25000}, {"poultry", 125000}};
    }
    throw Error(ErrorKind::ConfigError, "unknown CAFO threshold preset " + name);
}

std::vector<FarmRecord> farms_above_threshold(const std::vector<FarmRecord> &farms, const LivestockId &livestock,
                                              const CafoThresholds &thresholds) {
    auto it = thresholds.find(livestock);
    const Count min_heads = it == thresholds.end() ? 0 : it->second;
    std::vector<FarmRecord> out;
    for (const auto &f : farms) {
        if (f.livestock == livestock && f.total_heads() >= min_heads) {
            out.push_back(f);
        }
    }
    return out;
}

} // namespace digisim::validate
