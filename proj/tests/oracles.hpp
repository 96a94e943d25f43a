#pragma once

// Exhaustive reference implementations used by the unit and acceptance tests.
// They share no code with the library beyond its plain data types.

#include "digisim/core.hpp"
#include "digisim/farmgen.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace oracle {

using digisim::Count;

/// Minimum over all integer fills of max_i (x_i - L_i); nullopt when infeasible.
inline std::optional<Count> fill_gaps_min(Count target, const std::vector<std::pair<Count, Count>> &bounds) {
    std::optional<Count> best;
    std::vector<Count> x(bounds.size());
    std::function<void(std::size_t, Count, Count)> rec = [&](std::size_t i, Count left, Count worst) {
        if (i == bounds.size()) {
            if (left == 0 && (!best || worst < *best)) {
                best = worst;
            }
            return;
        }
        for (Count v = bounds[i].first; v <= bounds[i].second && v <= left; ++v) {
            rec(i + 1, left - v, std::max(worst, v - bounds[i].first));
        }
    };
    if (bounds.empty()) {
        return target == 0 ? std::optional<Count>(0) : std::nullopt;
    }
    rec(0, target, 0);
    return best;
}

/// min_assignment max_j |sum_{i -> j} P_i - Q_j| over all N_c^N_f assignments.
inline double farms_to_cells_min(const std::vector<double> &P, const std::vector<double> &Q) {
    const std::size_t nf = P.size();
    const std::size_t nc = Q.size();
    std::vector<std::size_t> a(nf, 0);
    double best = std::numeric_limits<double>::infinity();
    while (true) {
        std::vector<double> load(nc, 0.0);
        for (std::size_t i = 0; i < nf; ++i) {
            load[a[i]] += P[i];
        }
        double worst = 0;
        for (std::size_t j = 0; j < nc; ++j) {
            worst = std::max(worst, std::abs(load[j] - Q[j]));
        }
        best = std::min(best, worst);
        std::size_t i = 0;
        while (i < nf && a[i] == nc - 1) {
            a[i] = 0;
            ++i;
        }
        if (i == nf) {
            break;
        }
        ++a[i];
    }
    return best;
}

/// Maximum total weight of a matching saturating the smaller side of `w` (rows x cols).
inline double max_weight_matching(const std::vector<std::vector<double>> &w) {
    const std::size_t n = w.size();
    const std::size_t m = n ? w[0].size() : 0;
    if (n == 0 || m == 0) {
        return 0;
    }
    const bool rows_small = n <= m;
    const std::size_t small = rows_small ? n : m;
    const std::size_t large = rows_small ? m : n;
    std::vector<std::size_t> perm(large);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -std::numeric_limits<double>::infinity();
    // Every injection small -> large is the prefix of some permutation of the large side.
    do {
        double s = 0;
        for (std::size_t i = 0; i < small; ++i) {
            s += rows_small ? w[i][perm[i]] : w[perm[i]][i];
        }
        best = std::max(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Best GenFarms objective over every farm configuration, with all statistics tight.
/// nullopt when no configuration meets the hard subtype farm counts.
inline std::optional<double> gen_farms_min(const digisim::farmgen::GenFarmsInstance &inst) {
    const std::size_t L = inst.scheme.size();
    const std::size_t G = inst.subtypes.size();
    const Count H = std::accumulate(inst.class_heads.begin(), inst.class_heads.end(), Count{0});
    const Count enclosing = inst.enclosing_total.value_or(H);
    auto upper = [&](std::size_t k) {
        const auto &c = inst.scheme.at(k);
        return c.w_max ? *c.w_max : std::max(enclosing, c.w_min * 100);
    };
    auto window_of = [&](Count v) -> int {
        for (std::size_t k = 0; k < L; ++k) {
            if (v >= inst.scheme.at(k).w_min && v <= upper(k)) {
                return static_cast<int>(k);
            }
        }
        return -1;
    };

    struct Group {
        Count total = 0;
        Count max_subtypes = 0;
        double equity = 0;
        std::vector<Count> counts; // [g * L + k]
        std::vector<Count> heads;
    };

    // All farm compositions of class i.
    auto compositions = [&](std::size_t i) {
        std::vector<std::vector<Count>> out;
        std::vector<Count> v(G, 0);
        std::function<void(std::size_t, Count)> rec = [&](std::size_t g, Count sum) {
            if (g == G) {
                if (sum >= inst.scheme.at(i).w_min && sum <= upper(i)) {
                    out.push_back(v);
                }
                return;
            }
            for (Count h = 0; sum + h <= upper(i); ++h) {
                if (h > 0 && window_of(h) < 0) {
                    continue;
                }
                v[g] = h;
                rec(g + 1, sum + h);
            }
            v[g] = 0;
        };
        rec(0, 0);
        return out;
    };

    std::vector<Count> need(G * L);
    for (std::size_t g = 0; g < G; ++g) {
        for (std::size_t k = 0; k < L; ++k) {
            need[g * L + k] = inst.subtypes[g].farms[k];
        }
    }

    // Multisets of F_i compositions per class.
    std::vector<std::vector<Group>> groups(L);
    for (std::size_t i = 0; i < L; ++i) {
        const auto comps = compositions(i);
        const Count F = inst.class_farms[i];
        const double a = F > 0 ? static_cast<double>(inst.class_heads[i]) / static_cast<double>(F) : 0.0;
        std::vector<std::size_t> pick;
        std::function<void(std::size_t)> rec = [&](std::size_t from) {
            if (static_cast<Count>(pick.size()) == F) {
                Group gr;
                gr.counts.assign(G * L, 0);
                gr.heads.assign(G * L, 0);
                for (auto p : pick) {
                    const auto &c = comps[p];
                    Count t = 0;
                    Count nz = 0;
                    for (std::size_t g = 0; g < G; ++g) {
                        t += c[g];
                        if (c[g] > 0) {
                            ++nz;
                            const auto k = static_cast<std::size_t>(window_of(c[g]));
                            gr.counts[g * L + k] += 1;
                            gr.heads[g * L + k] += c[g];
                        }
                    }
                    gr.total += t;
                    gr.max_subtypes = std::max(gr.max_subtypes, nz);
                    gr.equity = std::max(gr.equity, std::abs(static_cast<double>(t) - a));
                }
                for (std::size_t q = 0; q < G * L; ++q) {
                    if (gr.counts[q] > need[q]) {
                        return;
                    }
                }
                groups[i].push_back(std::move(gr));
                return;
            }
            for (std::size_t p = from; p < comps.size(); ++p) {
                pick.push_back(p);
                rec(p);
                pick.pop_back();
            }
        };
        rec(0);
    }

    const double h1 = static_cast<double>(H) + 1;
    const double g1 = static_cast<double>(G) + 1;
    std::optional<double> best;
    // Last class bucketed by its count signature.
    std::map<std::vector<Count>, std::vector<const Group *>> last;
    for (const auto &gr : groups[L - 1]) {
        last[gr.counts].push_back(&gr);
    }
    std::vector<const Group *> chosen(L, nullptr);
    std::function<void(std::size_t, std::vector<Count> &)> rec = [&](std::size_t i, std::vector<Count> &used) {
        if (i == L - 1) {
            std::vector<Count> rest(G * L);
            for (std::size_t q = 0; q < G * L; ++q) {
                rest[q] = need[q] - used[q];
            }
            auto it = last.find(rest);
            if (it == last.end()) {
                return;
            }
            for (const Group *gr : it->second) {
                chosen[i] = gr;
                Count l1 = 0;
                Count l2 = 0;
                double l3 = 0;
                Count l4 = 0;
                std::vector<Count> heads(G * L, 0);
                for (std::size_t c = 0; c < L; ++c) {
                    l1 = std::max(l1, std::abs(chosen[c]->total - inst.class_heads[c]));
                    l2 = std::max(l2, chosen[c]->max_subtypes);
                    l3 += chosen[c]->equity;
                    for (std::size_t q = 0; q < G * L; ++q) {
                        heads[q] += chosen[c]->heads[q];
                    }
                }
                for (std::size_t g = 0; g < G; ++g) {
                    for (std::size_t k = 0; k < L; ++k) {
                        l4 = std::max(l4, std::abs(heads[g * L + k] - inst.subtypes[g].heads[k]));
                    }
                }
                const double obj = static_cast<double>(l1) + h1 * static_cast<double>(l2) + g1 * h1 * l3 +
                                   g1 * h1 * h1 * static_cast<double>(l4);
                if (!best || obj < *best) {
                    best = obj;
                }
            }
            return;
        }
        for (const auto &gr : groups[i]) {
            bool ok = true;
            for (std::size_t q = 0; q < G * L && ok; ++q) {
                ok = used[q] + gr.counts[q] <= need[q];
            }
            if (!ok) {
                continue;
            }
            for (std::size_t q = 0; q < G * L; ++q) {
                used[q] += gr.counts[q];
            }
            chosen[i] = &gr;
            rec(i + 1, used);
            for (std::size_t q = 0; q < G * L; ++q) {
                used[q] -= gr.counts[q];
            }
        }
    };
    std::vector<Count> used(G * L, 0);
    rec(0, used);
    return best;
}

/// Random GenFarms instance planted from a random farm list (so the hard counts are
/// satisfiable), with class and subtype head totals optionally perturbed.
inline digisim::farmgen::GenFarmsInstance random_gen_farms_instance(std::mt19937 &rng) {
    using namespace digisim;
    auto uni = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    while (true) {
        farmgen::GenFarmsInstance inst;
        inst.county = "99001";
        inst.livestock = "test";
        const int L = uni(1, 2);
        std::vector<SizeClass> classes;
        if (L == 1) {
            classes.push_back({1, uni(2, 8)});
        } else {
            const int a = uni(1, 4);
            const int b = uni(a + 1, 9);
            classes.push_back({1, a});
            classes.push_back({a + 1, b});
        }
        inst.scheme = SizeClassScheme("test", classes);
        const int G = uni(1, 2);
        for (int g = 0; g < G; ++g) {
            inst.subtypes.push_back({"s" + std::to_string(g), std::vector<Count>(L, 0), std::vector<Count>(L, 0)});
        }
        inst.class_farms.assign(L, 0);
        inst.class_heads.assign(L, 0);
        auto window_of = [&](Count v) -> int {
            for (int k = 0; k < L; ++k) {
                if (inst.scheme.at(k).contains(v)) {
                    return k;
                }
            }
            return -1;
        };
        for (int i = 0; i < L; ++i) {
            inst.class_farms[i] = uni(0, 3);
            for (Count f = 0; f < inst.class_farms[i]; ++f) {
                const auto &c = inst.scheme.at(i);
                while (true) {
                    const Count t = uni(static_cast<int>(c.w_min), static_cast<int>(*c.w_max));
                    std::vector<Count> parts(G, 0);
                    if (G == 1) {
                        parts[0] = t;
                    } else {
                        parts[0] = uni(0, static_cast<int>(t));
                        parts[1] = t - parts[0];
                    }
                    bool ok = true;
                    for (int g = 0; g < G; ++g) {
                        ok = ok && (parts[g] == 0 || window_of(parts[g]) >= 0);
                    }
                    if (!ok) {
                        continue;
                    }
                    inst.class_heads[i] += t;
                    for (int g = 0; g < G; ++g) {
                        if (parts[g] > 0) {
                            const int k = window_of(parts[g]);
                            inst.subtypes[g].farms[k] += 1;
                            inst.subtypes[g].heads[k] += parts[g];
                        }
                    }
                    break;
                }
            }
        }
        if (inst.total_farms() == 0) {
            continue;
        }
        if (uni(0, 2) == 0) {
            const int i = uni(0, L - 1);
            inst.class_heads[i] = std::max<Count>(0, inst.class_heads[i] + uni(-3, 3));
        }
        if (uni(0, 2) == 0) {
            auto &s = inst.subtypes[uni(0, G - 1)];
            const int k = uni(0, L - 1);
            s.heads[k] = std::max<Count>(0, s.heads[k] + uni(-3, 3));
        }
        if (inst.total_heads() == 0 || inst.total_heads() > 40) {
            continue;
        }
        return inst;
    }
}

} // namespace oracle
