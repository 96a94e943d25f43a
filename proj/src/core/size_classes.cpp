#include "digisim/core.hpp"
#include "digisim/error.hpp"

#include <algorithm>
#include <limits>

namespace digisim {

namespace {

constexpr Count kUnbounded = std::numeric_limits<Count>::max();

Count upper_or_inf(const SizeClass &c) { return c.w_max.value_or(kUnbounded); }

bool overlaps(const SizeClass &a, const SizeClass &b) {
    return a.w_min <= upper_or_inf(b) && b.w_min <= upper_or_inf(a);
}

bool nests_in(const SizeClass &inner, const SizeClass &outer) {
    return inner.w_min >= outer.w_min && upper_or_inf(inner) <= upper_or_inf(outer);
}

std::optional<Count> add_present(std::optional<Count> a, std::optional<Count> b) {
    if (!a || !b) {
        return std::nullopt;
    }
    return *a + *b;
}

} // namespace

CountTable align_size_classes(const SizeClassScheme &state_scheme,
                              const SizeClassScheme &county_scheme,
                              const CountTable &state_table) {
    CountTable out = state_table;
    out.by_class.clear();
    for (const auto &[state_idx, cell] : state_table.by_class) {
        if (state_idx < 0 || static_cast<std::size_t>(state_idx) >= state_scheme.size()) {
            throw Error(ErrorKind::UnknownSizeClass,
                        state_table.key().describe() + " class " + std::to_string(state_idx));
        }
        const SizeClass &sc = state_scheme.at(static_cast<std::size_t>(state_idx));
        std::optional<std::size_t> target;
        std::size_t overlap_count = 0;
        for (std::size_t k = 0; k < county_scheme.size(); ++k) {
            if (overlaps(sc, county_scheme.at(k))) {
                ++overlap_count;
                if (nests_in(sc, county_scheme.at(k))) {
                    target = k;
                }
            }
        }
        if (overlap_count == 0) {
            throw Error(ErrorKind::UnknownSizeClass,
                        state_table.key().describe() + ": state class " +
                            std::to_string(state_idx) + " matches no county class");
        }
        if (overlap_count > 1 || !target) {
            throw Error(ErrorKind::StateClassStraddlesCountyClass,
                        state_table.key().describe() + ": state class " +
                            std::to_string(state_idx) + " straddles county classes");
        }
        const int key = static_cast<int>(*target);
        auto it = out.by_class.find(key);
        if (it == out.by_class.end()) {
            out.by_class.emplace(key, cell);
        } else {
            it->second.farms = add_present(it->second.farms, cell.farms);
            it->second.heads = add_present(it->second.heads, cell.heads);
        }
    }
    return out;
}

std::vector<HeadBound> derive_bounds(const CountTable &table, const SizeClassScheme &scheme,
                                     std::span<const CountTable> refining,
                                     std::optional<Count> enclosing_total) {
    std::vector<HeadBound> bounds;

    auto refined_class_lower = [&](int idx) {
        Count s = 0;
        for (const auto &r : refining) {
            auto it = r.by_class.find(idx);
            if (it != r.by_class.end() && it->second.heads) {
                s += *it->second.heads;
            }
        }
        return s;
    };

    // Per-class (lower, upper) whether known or not; used for the total row.
    bool all_class_farms = !table.by_class.empty();
    Count class_lower_sum = 0;
    Count class_upper_sum = 0;

    for (const auto &[idx, cell] : table.by_class) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= scheme.size()) {
            throw Error(ErrorKind::UnknownSizeClass,
                        table.key().describe() + " class " + std::to_string(idx));
        }
        const SizeClass &c = scheme.at(static_cast<std::size_t>(idx));
        Count lower = 0;
        Count upper = 0;
        if (cell.heads) {
            lower = upper = *cell.heads;
        } else if (cell.farms) {
            lower = c.w_min * *cell.farms;
            upper = class_upper_heads(c, *cell.farms, enclosing_total);
            lower = std::max(lower, refined_class_lower(idx));
            if (lower > upper) {
                throw Error(ErrorKind::InconsistentBounds,
                            table.key().describe() + " class " + std::to_string(idx) +
                                ": lower " + std::to_string(lower) + " > upper " +
                                std::to_string(upper));
            }
            bounds.push_back({idx, lower, upper});
        } else {
            if (!enclosing_total) {
                throw Error(ErrorKind::InconsistentBounds,
                            table.key().describe() + " class " + std::to_string(idx) +
                                ": no farm count and no enclosing total to bound heads");
            }
            lower = refined_class_lower(idx);
            upper = *enclosing_total;
            if (lower > upper) {
                throw Error(ErrorKind::InconsistentBounds,
                            table.key().describe() + " class " + std::to_string(idx) +
                                ": lower " + std::to_string(lower) + " > upper " +
                                std::to_string(upper));
            }
            bounds.push_back({idx, lower, upper});
            all_class_farms = false;
        }
        class_lower_sum += lower;
        class_upper_sum += upper;
    }

    if (!table.total.heads) {
        Count lower = 0;
        Count upper = 0;
        if (all_class_farms) {
            lower = class_lower_sum;
            upper = class_upper_sum;
        } else if (table.total.farms && *table.total.farms == 0) {
            lower = upper = 0;
        } else {
            if (!enclosing_total) {
                throw Error(ErrorKind::InconsistentBounds,
                            table.key().describe() +
                                ": total heads unbounded (no class farms, no enclosing total)");
            }
            lower = table.total.farms.value_or(0) * (scheme.size() ? scheme.at(0).w_min : 1);
            upper = *enclosing_total;
        }
        Count refined_total = 0;
        for (const auto &r : refining) {
            if (r.total.heads) {
                refined_total += *r.total.heads;
            }
        }
        lower = std::max(lower, refined_total);
        if (lower > upper) {
            throw Error(ErrorKind::InconsistentBounds,
                        table.key().describe() + " total: lower " + std::to_string(lower) +
                            " > upper " + std::to_string(upper));
        }
        bounds.insert(bounds.begin(), HeadBound{kTotalClass, lower, upper});
    }
    return bounds;
}

} // namespace digisim
