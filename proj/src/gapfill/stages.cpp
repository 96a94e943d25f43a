#include "digisim/error.hpp"
#include "digisim/gapfill.hpp"

#include <algorithm>
#include <tuple>

namespace digisim::gapfill {

std::string_view to_string(FillStage stage) noexcept {
    switch (stage) {
    case FillStage::StateTotal:
        return "STATE_TOTAL";
    case FillStage::StateBySize:
        return "STATE_BY_SIZE";
    case FillStage::CountyTotal:
        return "COUNTY_TOTAL";
    }
    return "UNKNOWN";
}

std::string_view to_string(CellSource source) noexcept {
    switch (source) {
    case CellSource::Reported:
        return "REPORTED";
    case CellSource::FillGaps:
        return "IMPUTED";
    case CellSource::Ipf:
        return "IPF";
    }
    return "UNKNOWN";
}

namespace {

using GroupKey = std::tuple<Fips, LivestockId, SubtypeId>;

std::string group_name(const Fips &region, const LivestockId &livestock, const SubtypeId &subtype) {
    return region + "/" + livestock + "/" + subtype;
}

/// County tables grouped by (state, livestock, subtype), in key order.
std::map<GroupKey, std::vector<TableKey>> counties_by_state(const ingest::Census &census) {
    std::map<GroupKey, std::vector<TableKey>> out;
    for (const auto &[key, table] : census.tables) {
        if (key.level == AdminLevel::County) {
            out[{state_of(key.region), key.livestock, key.subtype}].push_back(key);
        }
    }
    return out;
}

std::vector<CountTable> collect(const ingest::Census &census, const std::vector<TableKey> &keys) {
    std::vector<CountTable> out;
    out.reserve(keys.size());
    for (const auto &k : keys) {
        out.push_back(census.tables.at(k));
    }
    return out;
}

const SizeClassScheme &scheme_for(const ingest::Census &census, const LivestockId &livestock) {
    auto it = census.schemes.find(livestock);
    if (it == census.schemes.end()) {
        throw Error(ErrorKind::UnknownSizeClass, "no size classes for livestock " + livestock);
    }
    return it->second;
}

FillResult fill_group(const std::string &group, const FillInstance &instance,
                      const milp::SolveOptions &options) {
    try {
        return fill_gaps(instance, options);
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::Infeasible) {
            throw Error(ErrorKind::Infeasible, "group " + group + ": " + e.what());
        }
        throw;
    }
}

HeadBound total_bound(const CountTable &table, const SizeClassScheme &scheme,
                      const std::vector<CountTable> &refining, Count enclosing) {
    const auto bounds = derive_bounds(table, scheme, refining, enclosing);
    for (const auto &b : bounds) {
        if (b.class_index == kTotalClass) {
            return b;
        }
    }
    throw Error(ErrorKind::ConsistencyError, table.key().describe() + ": total already known");
}

/// Fills the MISSING totals of `members` from `enclosing`.
void fill_totals(StageOutcome &out, const std::string &group, const std::string &stage,
                 const CountTable *enclosing, const std::vector<TableKey> &members,
                 const std::map<TableKey, std::vector<CountTable>> &refining,
                 const milp::SolveOptions &options) {
    std::vector<TableKey> unknown;
    Count known = 0;
    for (const auto &k : members) {
        const auto &t = out.census.tables.at(k);
        if (t.total.heads) {
            known += *t.total.heads;
        } else {
            unknown.push_back(k);
        }
    }
    if (unknown.empty()) {
        return;
    }
    if (!enclosing || !enclosing->total.heads) {
        throw Error(ErrorKind::MissingEnclosingTotal,
                    "group " + group + ": enclosing total heads missing for " + stage);
    }
    const Count enclosing_heads = *enclosing->total.heads;
    FillInstance inst;
    inst.target = enclosing_heads - known;
    for (const auto &k : unknown) {
        const auto &t = out.census.tables.at(k);
        auto it = refining.find(k);
        static const std::vector<CountTable> none;
        const auto b = total_bound(t, scheme_for(out.census, t.livestock),
                                   it == refining.end() ? none : it->second, enclosing_heads);
        inst.bounds.push_back({b.lower, b.upper});
    }
    const auto res = fill_group(group, inst, options);
    for (std::size_t i = 0; i < unknown.size(); ++i) {
        out.census.tables.at(unknown[i]).total.heads = res.values[i];
        out.imputed[{unknown[i], kTotalClass}] = CellSource::FillGaps;
    }
    out.report.push_back({group, std::string(stage), unknown.size(), inst.target, res.lambda0,
                          std::string(milp::to_string(res.status))});
}

} // namespace

StageOutcome fill_stage(const ingest::Census &census, FillStage stage,
                        const milp::SolveOptions &options) {
    StageOutcome out;
    out.census = census;
    const auto counties = counties_by_state(census);
    const std::string stage_name(to_string(stage));

    switch (stage) {
    case FillStage::StateTotal: {
        std::map<std::pair<LivestockId, SubtypeId>, std::vector<TableKey>> states;
        for (const auto &[key, table] : census.tables) {
            if (key.level == AdminLevel::State && key.region != kNationalRegion) {
                states[{key.livestock, key.subtype}].push_back(key);
            }
        }
        for (const auto &[group, members] : states) {
            std::map<TableKey, std::vector<CountTable>> refining;
            for (const auto &k : members) {
                auto it = counties.find({k.region, k.livestock, k.subtype});
                if (it != counties.end()) {
                    refining[k] = collect(census, it->second);
                }
            }
            const TableKey nkey{AdminLevel::State, Fips(kNationalRegion), group.first, group.second};
            fill_totals(out, group_name(Fips(kNationalRegion), group.first, group.second), stage_name,
                        census.find(nkey), members, refining, options);
        }
        break;
    }
    case FillStage::StateBySize: {
        for (const auto &[key, table] : census.tables) {
            if (key.level != AdminLevel::State) {
                continue;
            }
            std::vector<int> unknown;
            Count known = 0;
            for (const auto &[idx, cell] : table.by_class) {
                if (cell.heads) {
                    known += *cell.heads;
                } else {
                    unknown.push_back(idx);
                }
            }
            if (unknown.empty()) {
                continue;
            }
            const std::string group = group_name(key.region, key.livestock, key.subtype);
            if (!table.total.heads) {
                throw Error(ErrorKind::MissingEnclosingTotal,
                            "group " + group + ": state total heads missing for " + stage_name);
            }
            std::vector<CountTable> refining;
            if (key.region == kNationalRegion) {
                for (const auto &[k, t] : census.tables) {
                    if (k.level == AdminLevel::State && k.region != kNationalRegion &&
                        k.livestock == key.livestock && k.subtype == key.subtype) {
                        refining.push_back(t);
                    }
                }
            } else if (auto it = counties.find({key.region, key.livestock, key.subtype});
                       it != counties.end()) {
                refining = collect(census, it->second);
            }
            const auto bounds =
                derive_bounds(table, scheme_for(census, key.livestock), refining, *table.total.heads);
            FillInstance inst;
            inst.target = *table.total.heads - known;
            for (int idx : unknown) {
                auto b = std::find_if(bounds.begin(), bounds.end(),
                                      [&](const HeadBound &hb) { return hb.class_index == idx; });
                inst.bounds.push_back({b->lower, b->upper});
            }
            const auto res = fill_group(group, inst, options);
            auto &dst = out.census.tables.at(key);
            for (std::size_t i = 0; i < unknown.size(); ++i) {
                dst.by_class.at(unknown[i]).heads = res.values[i];
                out.imputed[{key, unknown[i]}] = CellSource::FillGaps;
            }
            out.report.push_back({group, stage_name, unknown.size(), inst.target, res.lambda0,
                                  std::string(milp::to_string(res.status))});
        }
        break;
    }
    case FillStage::CountyTotal: {
        for (const auto &[group, members] : counties) {
            const auto &[state, livestock, subtype] = group;
            const TableKey skey{AdminLevel::State, state, livestock, subtype};
            fill_totals(out, group_name(state, livestock, subtype), stage_name, census.find(skey),
                        members, {}, options);
        }
        break;
    }
    }
    return out;
}

StageOutcome ipf_stage(const ingest::Census &census, const IpfOptions &options) {
    StageOutcome out;
    out.census = census;
    const auto counties = counties_by_state(census);
    for (const auto &[group, members] : counties) {
        const auto &[state, livestock, subtype] = group;
        const std::string name = group_name(state, livestock, subtype);
        bool any_missing = false;
        for (const auto &k : members) {
            for (const auto &[idx, cell] : census.tables.at(k).by_class) {
                any_missing = any_missing || !cell.heads;
            }
        }
        if (!any_missing) {
            continue;
        }
        const CountTable *st = census.find({AdminLevel::State, state, livestock, subtype});
        if (!st) {
            throw Error(ErrorKind::MissingEnclosingTotal, "group " + name + ": no state table for IPF");
        }
        const auto &scheme = scheme_for(census, livestock);
        IpfMatrix mx;
        mx.rows = members.size();
        mx.cols = scheme.size();
        mx.values.assign(mx.rows * mx.cols, 0.0);
        mx.flags.assign(mx.rows * mx.cols, IpfCell::Known);
        mx.col_totals.assign(mx.cols, 0);
        std::vector<bool> col_needed(mx.cols, false);
        std::size_t unknowns = 0;
        for (std::size_t r = 0; r < members.size(); ++r) {
            const auto &t = census.tables.at(members[r]);
            if (!t.total.heads) {
                throw Error(ErrorKind::MissingEnclosingTotal,
                            "group " + name + ": county " + t.region + " total missing for IPF");
            }
            mx.row_totals.push_back(*t.total.heads);
            for (const auto &[idx, cell] : t.by_class) {
                const std::size_t c = static_cast<std::size_t>(idx);
                if (cell.heads) {
                    mx.values[r * mx.cols + c] = static_cast<double>(*cell.heads);
                    continue;
                }
                ++unknowns;
                col_needed[c] = true;
                mx.flags[r * mx.cols + c] = IpfCell::Seeded;
                const SizeClass &sc = scheme.at(c);
                double average = sc.w_max ? 0.5 * static_cast<double>(sc.w_min + *sc.w_max)
                                          : static_cast<double>(sc.w_min);
                if (auto it = st->by_class.find(idx); it != st->by_class.end() && it->second.farms &&
                                                      it->second.heads && *it->second.farms > 0) {
                    average = static_cast<double>(*it->second.heads) /
                              static_cast<double>(*it->second.farms);
                }
                const double farms = cell.farms ? static_cast<double>(*cell.farms) : 1.0;
                mx.values[r * mx.cols + c] = average * farms;
            }
        }
        for (std::size_t c = 0; c < mx.cols; ++c) {
            auto it = st->by_class.find(static_cast<int>(c));
            if (it != st->by_class.end() && it->second.heads) {
                mx.col_totals[c] = *it->second.heads;
            } else if (col_needed[c]) {
                throw Error(ErrorKind::MissingEnclosingTotal,
                            "group " + name + ": state class " + std::to_string(c) +
                                " heads missing for IPF");
            } else {
                Count s = 0;
                for (std::size_t r = 0; r < mx.rows; ++r) {
                    s += static_cast<Count>(mx.at(r, c));
                }
                mx.col_totals[c] = s;
            }
        }
        IpfResult res;
        try {
            res = ipf_fill(mx, options);
        } catch (const Error &e) {
            throw Error(e.kind(), "group " + name + ": " + e.what());
        }
        for (std::size_t r = 0; r < mx.rows; ++r) {
            auto &t = out.census.tables.at(members[r]);
            for (auto &[idx, cell] : t.by_class) {
                const std::size_t c = static_cast<std::size_t>(idx);
                if (mx.flag(r, c) == IpfCell::Seeded) {
                    cell.heads = res.values[r * mx.cols + c];
                    out.imputed[{members[r], idx}] = CellSource::Ipf;
                }
            }
        }
        std::string status = res.converged ? "CONVERGED" : "NO_CONVERGENCE";
        if (res.repair_moves > 0) {
            status += ";column_repair=" + std::to_string(res.repair_moves);
        }
        if (res.unrepaired_columns > 0) {
            status += ";unrepaired_columns=" + std::to_string(res.unrepaired_columns);
        }
        out.report.push_back({name, "IPF", unknowns, st->total.heads.value_or(0), std::nullopt, status});
    }
    return out;
}

} // namespace digisim::gapfill
