#include "digisim/csv.hpp"
#include "digisim/ingest.hpp"
#include "digisim/pipeline.hpp"
#include "json.hpp"

#include <algorithm>
#include <cmath>

namespace digisim::pipeline {

namespace {

struct PlantedFarm {
    Fips county;
    LivestockId livestock;
    std::map<SubtypeId, Count> heads;
    CellId cell;

    Count total() const {
        Count t = 0;
        for (const auto &[s, h] : heads) {
            t += h;
        }
        return t;
    }
};

constexpr const char *kState = "19";
const std::vector<Fips> kCounties = {"19001", "19003"};

ingest::SchemeMap fixture_schemes() {
    ingest::SchemeMap s;
    s["cattle"] = SizeClassScheme("cattle", {{1, 49}, {50, 199}, {200, std::nullopt}});
    s["hogs"] = SizeClassScheme("hogs", {{1, 99}, {100, 999}, {1000, std::nullopt}});
    return s;
}

/// Cells (x, y): 19001 covers x 0..1, 19003 covers x 2..3, both y 0..1.
CellId cell_of(std::size_t county, int slot) { return {static_cast<int>(county) * 2 + slot % 2, slot / 2}; }

std::vector<PlantedFarm> planted_farms() {
    std::vector<PlantedFarm> f;
    auto add = [&](std::size_t c, const LivestockId &l, std::map<SubtypeId, Count> heads, int slot) {
        f.push_back({kCounties[c], l, std::move(heads), cell_of(c, slot)});
    };
    add(0, "cattle", {{"beef", 30}}, 0);
    add(0, "cattle", {{"beef", 20}, {"milk", 15}}, 1);
    add(0, "cattle", {{"milk", 120}}, 2);
    add(0, "cattle", {{"beef", 60}, {"milk", 90}}, 3);
    add(0, "cattle", {{"milk", 400}}, 0);
    add(1, "cattle", {{"beef", 40}}, 0);
    add(1, "cattle", {{"beef", 25}}, 1);
    add(1, "cattle", {{"beef", 150}}, 2);
    add(1, "cattle", {{"beef", 45}, {"milk", 80}}, 3);
    add(1, "cattle", {{"beef", 300}}, 1);
    add(1, "cattle", {{"milk", 250}}, 2);
    add(0, "hogs", {{"all", 50}}, 0);
    add(0, "hogs", {{"all", 300}}, 1);
    add(0, "hogs", {{"all", 1500}}, 3);
    add(1, "hogs", {{"all", 80}}, 0);
    add(1, "hogs", {{"all", 60}}, 1);
    add(1, "hogs", {{"all", 600}}, 2);
    add(1, "hogs", {{"all", 2500}}, 3);
    return f;
}

/// Census tables of the planted farms: county, state and national levels, every subtype
/// plus "all", classified by the heads of the subtype in each farm.
std::map<TableKey, CountTable> census_of(const std::vector<PlantedFarm> &farms, const ingest::SchemeMap &schemes) {
    std::map<TableKey, CountTable> out;
    auto bump = [&](AdminLevel level, const Fips &region, const LivestockId &l, const SubtypeId &s, Count heads) {
        const TableKey key{level, region, l, s};
        auto &t = out[key];
        t.level = level;
        t.region = region;
        t.livestock = l;
        t.subtype = s;
        const auto k = schemes.at(l).class_of(heads);
        auto &c = t.by_class[static_cast<int>(*k)];
        c.farms = c.farms.value_or(0) + 1;
        c.heads = c.heads.value_or(0) + heads;
        t.total.farms = t.total.farms.value_or(0) + 1;
        t.total.heads = t.total.heads.value_or(0) + heads;
    };
    for (const auto &f : farms) {
        for (const auto &region : {std::pair{AdminLevel::County, f.county}, std::pair{AdminLevel::State, Fips(kState)},
                                   std::pair{AdminLevel::State, Fips(kNationalRegion)}}) {
            bump(region.first, region.second, f.livestock, SubtypeId(kAllSubtype), f.total());
            for (const auto &[s, h] : f.heads) {
                if (s != kAllSubtype) {
                    bump(region.first, region.second, f.livestock, s, h);
                }
            }
        }
    }
    return out;
}

void redact(std::map<TableKey, CountTable> &tables, AdminLevel level, const Fips &region, const LivestockId &l,
            const SubtypeId &s, int class_index) {
    auto &t = tables.at({level, region, l, s});
    if (class_index == kTotalClass) {
        t.total.heads.reset();
    } else {
        t.by_class.at(class_index).heads.reset();
    }
}

struct CellSpec {
    CellId id;
    double lat;
    double lon;
    Fips county;
};

std::vector<CellSpec> cells() {
    std::vector<CellSpec> out;
    for (std::size_t c = 0; c < kCounties.size(); ++c) {
        for (int slot = 0; slot < 4; ++slot) {
            const CellId id = cell_of(c, slot);
            out.push_back({id, 42.0 + id.y * 5.0 / 60.0, -93.0 + id.x * 5.0 / 60.0, kCounties[c]});
        }
    }
    return out;
}

std::string row(const std::vector<std::string> &fields) { return csv::join_row(fields) + "\n"; }

std::string num(double v) { return csv::format_double(v); }

/// Rounds to six decimals so the text form is short and stable.
double r6(double v) { return std::round(v * 1e6) / 1e6; }

} // namespace

void write_fixture(const fs::path &dir) {
    const auto schemes = fixture_schemes();
    const auto farms = planted_farms();
    auto tables = census_of(farms, schemes);
    redact(tables, AdminLevel::State, kState, "cattle", "beef", kTotalClass);
    redact(tables, AdminLevel::State, kState, "cattle", "all", 2);
    redact(tables, AdminLevel::County, "19001", "cattle", "all", 1);
    redact(tables, AdminLevel::County, "19003", "cattle", "all", 2);
    redact(tables, AdminLevel::County, "19001", "cattle", "milk", 2);
    redact(tables, AdminLevel::County, "19003", "hogs", "all", kTotalClass);
    std::vector<CountTable> list;
    for (auto &[k, t] : tables) {
        list.push_back(t);
    }
    write_atomic(dir / "census.csv", ingest::write_census(list));
    write_atomic(dir / "size_classes.csv", ingest::write_size_classes(schemes));

    const auto cs = cells();
    std::string geometry = "x,y,lat,lon,county_fips\n";
    for (const auto &c : cs) {
        geometry += row({std::to_string(c.id.x), std::to_string(c.id.y), num(c.lat), num(c.lon), c.county});
    }
    write_atomic(dir / "geometry.csv", geometry);

    std::map<std::pair<LivestockId, CellId>, double> planted_load;
    for (const auto &f : farms) {
        planted_load[{f.livestock, f.cell}] += static_cast<double>(f.total());
    }
    std::string glw = "x,y,livestock,heads\n";
    for (const LivestockId l : {"cattle", "hogs"}) {
        for (const auto &c : cs) {
            const double wobble = 1.0 + 0.02 * static_cast<double>((c.id.x + 2 * c.id.y) % 3 - 1);
            auto it = planted_load.find({l, c.id});
            const double v = it == planted_load.end() ? 2.0 : it->second * wobble;
            glw += row({std::to_string(c.id.x), std::to_string(c.id.y), l, num(r6(v))});
        }
    }
    write_atomic(dir / "glw.csv", glw);

    const std::vector<std::pair<std::string, double>> species = {
        {"mallard", 12.0},     {"northern_pintail", 5.0}, {"canada_goose", 9.0},  {"snow_goose", 2.5},
        {"bald_eagle", 0.4},   {"red_tailed_hawk", 0.8},  {"american_crow", 3.5}};
    std::string birds = "x,y,species,week,abundance\n";
    for (std::size_t s = 0; s < species.size(); ++s) {
        for (int week = 1; week <= 52; ++week) {
            const double season = 1.0 + 0.6 * std::cos(2.0 * 3.141592653589793 * (week - 12.0 - 4.0 * s) / 52.0);
            for (const auto &c : cs) {
                const double cell_factor = 0.5 + 0.25 * static_cast<double>((c.id.x * 3 + c.id.y + s) % 5);
                birds += row({std::to_string(c.id.x), std::to_string(c.id.y), species[s].first, std::to_string(week),
                              num(r6(species[s].second * season * cell_factor))});
            }
        }
    }
    write_atomic(dir / "birds.csv", birds);

    write_atomic(dir / "species_groups.csv", "species,group\n"
                                             "american_crow,Corvid\n"
                                             "bald_eagle,Eagle\n"
                                             "canada_goose,Goose\n"
                                             "mallard,Duck\n"
                                             "northern_pintail,Duck\n"
                                             "red_tailed_hawk,Hawk\n"
                                             "snow_goose,Goose\n");

    std::string prevalence = "week,value\n";
    for (int week = 1; week <= 52; ++week) {
        const double spring = std::exp(-std::pow((week - 11.0) / 4.0, 2));
        const double autumn = std::exp(-std::pow((week - 44.0) / 5.0, 2));
        prevalence += row({std::to_string(week), num(r6(0.001 + 0.02 * spring + 0.012 * autumn))});
    }
    write_atomic(dir / "prevalence.csv", prevalence);

    std::map<Fips, double> workers;
    std::string population = "x,y,demographic,employment,count\n";
    for (const auto &c : cs) {
        double heads = 0;
        for (const LivestockId l : {"cattle", "hogs"}) {
            auto it = planted_load.find({l, c.id});
            heads += it == planted_load.end() ? 0 : it->second;
        }
        const double w = std::round(heads / 40.0) + 1;
        workers[c.county] += w;
        population += row({std::to_string(c.id.x), std::to_string(c.id.y), "adult", "livestock", num(w)});
        population += row({std::to_string(c.id.x), std::to_string(c.id.y), "adult", "other", num(40)});
    }
    write_atomic(dir / "population.csv", population);

    std::string bls = "county_fips,quarter,count\n";
    for (const auto &[county, w] : workers) {
        const std::vector<double> shift = {-2, 1, 3, 0};
        for (int q = 1; q <= 4; ++q) {
            bls += row({county, std::to_string(q), num(w + shift[static_cast<std::size_t>(q - 1)])});
        }
    }
    write_atomic(dir / "bls.csv", bls);

    std::string points = "id,kind,lat,lon,county_fips,attributes\n";
    int n = 0;
    for (const auto &f : farms) {
        if (f.livestock != "cattle" || f.total() < 100) {
            continue;
        }
        const auto &c = cs[static_cast<std::size_t>(std::find_if(cs.begin(), cs.end(), [&](const CellSpec &s) {
                                                        return s.id == f.cell;
                                                    }) - cs.begin())];
        ++n;
        const double jitter = 0.004 * static_cast<double>(n % 3);
        points += row({"cafo-" + std::to_string(n), "CAFO", num(r6(c.lat + jitter)), num(r6(c.lon - jitter)), f.county,
                       "livestock=cattle"});
    }
    points += row({"plant-1", "PLANT", "42.03", "-92.98", "19001", "product_codes=M1|D3"});
    points += row({"plant-2", "PLANT", "42.05", "-92.82", "19003", "product_codes=D2|W4"});
    points += row({"plant-3", "PLANT", "42.07", "-92.80", "19003", "product_codes=M11"});
    points += row({"plant-4", "PLANT", "42.01", "-92.95", "19001", "product_codes=Z9"});
    points += row({"case-1", "INCIDENCE", "42.02", "-92.99", "19001",
                   "date=2024-03-14;host_type=cattle;subtype=milk"});
    points += row({"case-2", "INCIDENCE", "42.08", "-92.81", "19003",
                   "date=2024-11-02;host_type=cattle;subtype=beef"});
    points += row({"case-3", "INCIDENCE", "42.04", "-92.97", "19001",
                   "date=2024-07-20;host_type=cattle;subtype=milk"});
    points += row({"case-4", "INCIDENCE", "42.06", "-92.90", "19999",
                   "date=2024-02-01;host_type=cattle;subtype=milk"});
    points += row({"bird-1", "INCIDENCE", "42.03", "-92.96", "19001",
                   "date=2022-03-10;host_type=wild_bird;species=mallard"});
    points += row({"bird-2", "INCIDENCE", "42.07", "-92.83", "19003",
                   "date=2022-11-02;host_type=wild_bird;species=canada_goose"});
    points += row({"bird-3", "INCIDENCE", "42.01", "-92.92", "19001",
                   "date=2022-04-21;host_type=wild_bird;species=bald_eagle"});
    write_atomic(dir / "points.csv", points);

    nlohmann::json config = {
        {"inputs",
         {{"census", "census.csv"},
          {"size_classes", "size_classes.csv"},
          {"geometry", "geometry.csv"},
          {"glw", "glw.csv"},
          {"birds", "birds.csv"},
          {"population", "population.csv"},
          {"points", "points.csv"},
          {"prevalence", "prevalence.csv"},
          {"species_groups", "species_groups.csv"},
          {"bls", "bls.csv"}}},
        {"genfarms_gap", 0.001},
        {"assign_gap", 0.0001},
        {"ipf", {{"tol", 1e-6}, {"max_iter", 10000}}},
        {"cafo_thresholds", "default"},
        {"risk", {{"livestock", "cattle"}, {"periods", {{1, 13}, {14, 26}, {27, 39}, {40, 52}}}}},
        {"worker_employment", "livestock"},
        {"output_dir", "out"},
        {"threads", 1}};
    write_atomic(dir / "config.json", config.dump(2) + "\n");
}

} // namespace digisim::pipeline
