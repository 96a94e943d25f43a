#include "digisim/cell_assign.hpp"
#include "digisim/csv.hpp"
#include "digisim/error.hpp"
#include "digisim/farmgen.hpp"
#include "digisim/gapfill.hpp"
#include "digisim/ingest.hpp"
#include "digisim/pipeline.hpp"
#include "digisim/risk.hpp"
#include "digisim/validate.hpp"
#include "json.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <numeric>
#include <set>

namespace digisim::pipeline {

namespace {

using json = nlohmann::json;

constexpr const char *kStageVersion = "1";

/// A per-county failure; the stage continues with the remaining counties.
struct CountyFailure {
    std::string stage;
    Fips county;
    LivestockId livestock;
    std::string kind;
    std::string message;
};

struct Context {
    const PipelineConfig &cfg;
    fs::path out;
    std::vector<Fips> counties;
    std::vector<LivestockId> livestock;
    std::size_t threads = 1;
    Logger log;
    json stages = json::object();
    std::vector<CountyFailure> failures;

    Context(const PipelineConfig &c, const RunOptions &o) : cfg{c}, log{o.quiet} {}

    fs::path file(const std::string &name) const { return out / name; }

    bool county_selected(const Fips &c) const {
        return counties.empty() || std::find(counties.begin(), counties.end(), c) != counties.end();
    }
    bool livestock_selected(const LivestockId &l) const {
        return livestock.empty() || std::find(livestock.begin(), livestock.end(), l) != livestock.end();
    }

    std::string read(Stage stage, const std::string &name) const {
        const auto p = file(name);
        if (!fs::exists(p)) {
            throw Error(ErrorKind::MissingPrerequisite, std::string(to_string(stage)) + " needs " + name +
                                                            "; run the earlier stages first");
        }
        return csv::read_text(p);
    }

    void write(const std::string &name, std::string_view content) const { write_atomic(file(name), content); }

    void complete(Stage stage, json info, const std::vector<std::string> &outputs) {
        info["version"] = kStageVersion;
        info["status"] = "complete";
        info["outputs"] = outputs;
        stages[std::string(to_string(stage))] = std::move(info);
    }
};

std::string dump(const json &j) { return j.dump(2) + "\n"; }

std::string num(double v) { return csv::format_double(v); }

const fs::path &need(const std::optional<fs::path> &p, Stage stage, const std::string &key) {
    if (!p) {
        throw Error(ErrorKind::ConfigError, std::string(to_string(stage)) + " needs inputs." + key);
    }
    return *p;
}

ingest::Census load_census(const std::string &text, const ingest::SchemeMap &schemes, const std::string &source) {
    ingest::Census c;
    c.schemes = schemes;
    for (auto &t : ingest::parse_census(text, schemes, {}, source)) {
        c.tables[t.key()] = std::move(t);
    }
    return c;
}

// ---------------------------------------------------------------- ingest

void stage_ingest(Context &ctx) {
    const auto &in = ctx.cfg.inputs;
    const auto schemes = ingest::load_size_classes(in.size_classes);
    std::vector<CountTable> tables;
    if (in.state_size_classes) {
        const auto state_schemes = ingest::load_size_classes(*in.state_size_classes);
        ingest::CensusLoadOptions opt;
        opt.state_schemes = &state_schemes;
        for (auto &t : ingest::load_census(in.census, schemes, opt)) {
            auto sit = state_schemes.find(t.livestock);
            if (t.level == AdminLevel::State && sit != state_schemes.end() && schemes.count(t.livestock)) {
                tables.push_back(align_size_classes(sit->second, schemes.at(t.livestock), t));
            } else {
                tables.push_back(std::move(t));
            }
        }
    } else {
        tables = ingest::load_census(in.census, schemes);
    }
    std::vector<CountTable> kept;
    std::set<Fips> states;
    std::set<Fips> counties;
    std::set<LivestockId> livestock;
    for (auto &t : tables) {
        if (!ctx.livestock_selected(t.livestock)) {
            continue;
        }
        livestock.insert(t.livestock);
        (t.level == AdminLevel::State ? states : counties).insert(t.region);
        kept.push_back(std::move(t));
    }
    const auto geometry = ingest::load_geometry(in.geometry);
    json summary;
    summary["tables"] = kept.size();
    summary["states"] = states;
    summary["counties"] = counties;
    summary["livestock"] = livestock;
    summary["cells"] = geometry.cells().size();
    auto layer_count = [&](const std::optional<fs::path> &p, LayerKind kind, const char *key) {
        if (p) {
            summary["layers"][key] = ingest::load_gridded_layer(*p, kind, geometry).size();
        }
    };
    layer_count(in.glw, LayerKind::Glw, "glw");
    layer_count(in.birds, LayerKind::Birds, "birds");
    layer_count(in.population, LayerKind::Population, "population");
    if (in.points) {
        summary["points"] = ingest::load_point_records(*in.points).size();
    }
    if (in.prevalence) {
        summary["prevalence_weeks"] = ingest::load_prevalence(*in.prevalence, geometry).weekly.size();
    }
    if (in.species_groups) {
        summary["species_groups"] = ingest::load_species_groups(*in.species_groups).size();
    }
    if (in.bls) {
        summary["bls_counties"] = ingest::load_quarterly_counts(*in.bls).size();
    }
    ctx.write("census_ingested.csv", ingest::write_census(kept));
    ctx.write("ingest_summary.json", dump(summary));
    ctx.complete(Stage::Ingest, {{"tables", kept.size()}}, {"census_ingested.csv", "ingest_summary.json"});
}

// ---------------------------------------------------------------- gapfill

std::string report_rows(const std::vector<gapfill::ReportRow> &rows) {
    std::string out;
    for (const auto &r : rows) {
        out += csv::join_row({r.group, r.stage, std::to_string(r.unknowns), std::to_string(r.target),
                              r.lambda0 ? std::to_string(*r.lambda0) : "", r.status});
        out.push_back('\n');
    }
    return out;
}

constexpr const char *kReportHeader = "group,stage,unknowns,T,lambda0,status\n";
constexpr const char *kProvenanceHeader = "level,region_fips,livestock,subtype,class_index,source\n";

std::string provenance_rows(const gapfill::Provenance &p) {
    std::string out = kProvenanceHeader;
    for (const auto &[key, src] : p) {
        const auto &[t, idx] = key;
        out += csv::join_row({std::string(to_string(t.level)), t.region, t.livestock, t.subtype, std::to_string(idx),
                              std::string(gapfill::to_string(src))});
        out.push_back('\n');
    }
    return out;
}

gapfill::Provenance parse_provenance(std::string_view text, const std::string &source) {
    const auto table = csv::parse(text, source);
    csv::require_header(table, {{"level", "region_fips", "livestock", "subtype", "class_index", "source"}}, source);
    gapfill::Provenance out;
    for (const auto &row : table.rows) {
        const auto &f = row.fields;
        const std::string at = source + ":" + std::to_string(row.line);
        gapfill::CellSource src = gapfill::CellSource::Reported;
        if (f[5] == "IMPUTED") {
            src = gapfill::CellSource::FillGaps;
        } else if (f[5] == "IPF") {
            src = gapfill::CellSource::Ipf;
        } else if (f[5] != "REPORTED") {
            throw Error(ErrorKind::SchemaError, at + ": unknown source " + f[5]);
        }
        TableKey key{parse_admin_level(f[0]), f[1], f[2], f[3]};
        out[{key, static_cast<int>(csv::parse_int(f[4], at))}] = src;
    }
    return out;
}

void stage_gapfill(Context &ctx) {
    const auto schemes = ingest::load_size_classes(ctx.cfg.inputs.size_classes);
    auto census = load_census(ctx.read(Stage::Gapfill, "census_ingested.csv"), schemes, "census_ingested.csv");
    milp::SolveOptions so;
    so.time_limit = std::chrono::milliseconds(static_cast<long long>(ctx.cfg.time_limit_seconds * 1000));
    std::vector<gapfill::ReportRow> report;
    gapfill::Provenance imputed;
    for (auto st : {gapfill::FillStage::StateTotal, gapfill::FillStage::StateBySize, gapfill::FillStage::CountyTotal}) {
        auto outcome = gapfill::fill_stage(census, st, so);
        census = std::move(outcome.census);
        report.insert(report.end(), outcome.report.begin(), outcome.report.end());
        imputed.insert(outcome.imputed.begin(), outcome.imputed.end());
        ctx.log.log("info", "gapfill", "fill stage done",
                    {{"fill_stage", std::string(gapfill::to_string(st))},
                     {"groups", std::to_string(outcome.report.size())}});
    }
    ctx.write("census_fillgaps.csv", ingest::write_census(census));
    ctx.write("fillgaps_report.csv", std::string(kReportHeader) + report_rows(report));
    ctx.write("fillgaps_provenance.csv", provenance_rows(imputed));
    ctx.complete(Stage::Gapfill, {{"groups", report.size()}, {"imputed_cells", imputed.size()}},
                 {"census_fillgaps.csv", "fillgaps_report.csv", "fillgaps_provenance.csv"});
}

void stage_ipf(Context &ctx) {
    const auto schemes = ingest::load_size_classes(ctx.cfg.inputs.size_classes);
    auto census = load_census(ctx.read(Stage::Ipf, "census_fillgaps.csv"), schemes, "census_fillgaps.csv");
    const std::string fill_report = ctx.read(Stage::Ipf, "fillgaps_report.csv");
    auto provenance = parse_provenance(ctx.read(Stage::Ipf, "fillgaps_provenance.csv"), "fillgaps_provenance.csv");
    gapfill::IpfOptions opt;
    opt.tol = ctx.cfg.ipf_tol;
    opt.max_iter = ctx.cfg.ipf_max_iter;
    auto outcome = gapfill::ipf_stage(census, opt);
    provenance.insert(outcome.imputed.begin(), outcome.imputed.end());

    gapfill::Provenance full;
    for (const auto &[key, t] : outcome.census.tables) {
        if (t.total.heads) {
            full[{key, kTotalClass}] = gapfill::CellSource::Reported;
        }
        for (const auto &[idx, c] : t.by_class) {
            if (c.heads) {
                full[{key, idx}] = gapfill::CellSource::Reported;
            }
        }
    }
    for (const auto &[k, src] : provenance) {
        full[k] = src;
    }
    std::size_t not_converged = 0;
    for (const auto &r : outcome.report) {
        not_converged += r.status.rfind("NO_CONVERGENCE", 0) == 0;
    }
    ctx.write("census_filled.csv", ingest::write_census(outcome.census));
    ctx.write("provenance.csv", provenance_rows(full));
    ctx.write("gapfill_report.csv", fill_report + report_rows(outcome.report));
    ctx.complete(Stage::Ipf, {{"groups", outcome.report.size()}, {"not_converged", not_converged}},
                 {"census_filled.csv", "provenance.csv", "gapfill_report.csv"});
}

// ---------------------------------------------------------------- genfarms

std::vector<farmgen::GenFarmsInstance> build_instances(const Context &ctx, const ingest::Census &census) {
    std::vector<farmgen::GenFarmsInstance> out;
    for (const auto &[key, table] : census.tables) {
        if (key.level != AdminLevel::County || key.subtype != kAllSubtype || !ctx.county_selected(key.region) ||
            !ctx.livestock_selected(key.livestock)) {
            continue;
        }
        auto sit = census.schemes.find(key.livestock);
        if (sit == census.schemes.end()) {
            throw Error(ErrorKind::SchemaError, "no size classes for livestock " + key.livestock);
        }
        farmgen::GenFarmsInstance inst;
        inst.county = key.region;
        inst.livestock = key.livestock;
        inst.scheme = sit->second;
        inst.gap_fraction = ctx.cfg.genfarms_gap;
        auto counts = [&](const CountTable &t, std::vector<Count> &farms, std::vector<Count> &heads) {
            for (std::size_t k = 0; k < inst.scheme.size(); ++k) {
                auto it = t.by_class.find(static_cast<int>(k));
                if (it == t.by_class.end()) {
                    farms.push_back(0);
                    heads.push_back(0);
                    continue;
                }
                if (!it->second.complete()) {
                    throw Error(ErrorKind::SchemaError,
                                t.key().describe() + " class " + std::to_string(k) + " is incomplete after gap filling");
                }
                farms.push_back(*it->second.farms);
                heads.push_back(*it->second.heads);
            }
        };
        counts(table, inst.class_farms, inst.class_heads);
        for (auto it = census.tables.lower_bound({AdminLevel::County, key.region, key.livestock, ""});
             it != census.tables.end() && it->first.level == AdminLevel::County && it->first.region == key.region &&
             it->first.livestock == key.livestock;
             ++it) {
            if (it->first.subtype == kAllSubtype) {
                continue;
            }
            farmgen::SubtypeCounts s;
            s.subtype = it->first.subtype;
            counts(it->second, s.farms, s.heads);
            inst.subtypes.push_back(std::move(s));
        }
        if (inst.subtypes.empty()) {
            inst.subtypes.push_back({SubtypeId(kAllSubtype), inst.class_farms, inst.class_heads});
        }
        if (const auto *st = census.find({AdminLevel::State, state_of(key.region), key.livestock,
                                          SubtypeId(kAllSubtype)});
            st && st->total.heads) {
            inst.enclosing_total = *st->total.heads;
        }
        out.push_back(std::move(inst));
    }
    return out;
}

std::string join(const std::vector<double> &v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out += (i ? ";" : "") + num(v[i]);
    }
    return out;
}

void stage_genfarms(Context &ctx) {
    const auto schemes = ingest::load_size_classes(ctx.cfg.inputs.size_classes);
    const auto census = load_census(ctx.read(Stage::GenFarms, "census_filled.csv"), schemes, "census_filled.csv");
    const auto instances = build_instances(ctx, census);
    std::vector<std::optional<farmgen::GenFarmsSolution>> results(instances.size());
    std::vector<std::optional<CountyFailure>> failed(instances.size());
    farmgen::GenFarmsOptions opt;
    opt.time_limit = std::chrono::milliseconds(static_cast<long long>(ctx.cfg.time_limit_seconds * 1000));
    parallel_for(instances.size(), ctx.threads, [&](std::size_t i) {
        const auto &inst = instances[i];
        try {
            results[i] = farmgen::gen_farms(inst, opt);
            farmgen::objective_report(inst, *results[i]);
            ctx.log.log("info", "genfarms", "county done",
                        {{"county", inst.county},
                         {"livestock", inst.livestock},
                         {"status", std::string(milp::to_string(results[i]->status))}});
        } catch (const Error &e) {
            results[i].reset();
            failed[i] = CountyFailure{"genfarms", inst.county, inst.livestock, std::string(to_string(e.kind())),
                                      e.what()};
            ctx.log.log("error", "genfarms", e.what(), {{"county", inst.county}, {"livestock", inst.livestock}});
        }
    });
    std::vector<FarmRecord> farms;
    std::string report =
        "county,livestock,farms,total_heads,status,softened,nodes,lambda1,lambda2,lambda3,lambda4,objective\n";
    json statuses = json::object();
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto &inst = instances[i];
        const std::string tag = inst.county + "/" + inst.livestock;
        if (failed[i]) {
            ctx.failures.push_back(*failed[i]);
            statuses[tag] = "FAILED:" + failed[i]->kind;
            report += csv::join_row({inst.county, inst.livestock, std::to_string(inst.total_farms()),
                                     std::to_string(inst.total_heads()), "FAILED:" + failed[i]->kind, "", "", "",
                                     "", "", "", ""});
            report.push_back('\n');
            continue;
        }
        const auto &r = *results[i];
        const std::string status = r.solver_invoked ? std::string(milp::to_string(r.status)) : "EMPTY";
        statuses[tag] = status;
        report += csv::join_row({inst.county, inst.livestock, std::to_string(r.farms.size()),
                                 std::to_string(inst.total_heads()), status, r.softened ? "1" : "0",
                                 std::to_string(r.nodes), std::to_string(r.lambdas.lambda1),
                                 std::to_string(r.lambdas.lambda2), join(r.lambdas.lambda3),
                                 std::to_string(r.lambdas.lambda4), num(r.objective)});
        report.push_back('\n');
        farms.insert(farms.end(), r.farms.begin(), r.farms.end());
    }
    ctx.write("farms.csv", write_farms(farms));
    ctx.write("genfarms_report.csv", report);
    ctx.complete(Stage::GenFarms, {{"farms", farms.size()}, {"counties", statuses}},
                 {"farms.csv", "genfarms_report.csv"});
}

// ---------------------------------------------------------------- assign

std::vector<FarmRecord> read_farms(const Context &ctx, Stage stage, bool with_cells) {
    auto farms = parse_farms(ctx.read(stage, "farms.csv"), "farms.csv");
    if (with_cells) {
        apply_assignments(ctx.read(stage, "assignments.csv"), farms, "assignments.csv");
    }
    return farms;
}

void stage_assign(Context &ctx) {
    auto farms = read_farms(ctx, Stage::Assign, false);
    const auto geometry = ingest::load_geometry(ctx.cfg.inputs.geometry);
    const auto glw = ingest::load_gridded_layer(need(ctx.cfg.inputs.glw, Stage::Assign, "glw"), LayerKind::Glw,
                                                geometry);
    std::map<std::pair<Fips, LivestockId>, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < farms.size(); ++i) {
        if (ctx.county_selected(farms[i].county) && ctx.livestock_selected(farms[i].livestock)) {
            groups[{farms[i].county, farms[i].livestock}].push_back(i);
        }
    }
    std::vector<std::pair<Fips, LivestockId>> keys;
    std::vector<cell_assign::AssignInstance> instances;
    for (const auto &[key, idx] : groups) {
        cell_assign::AssignInstance inst;
        inst.county = key.first;
        inst.livestock = key.second;
        inst.gap_fraction = ctx.cfg.assign_gap;
        for (auto i : idx) {
            inst.farm_ids.push_back(farms[i].id);
            inst.heads.push_back(static_cast<double>(farms[i].total_heads()));
        }
        auto lit = glw.find(LayerKey{LayerKind::Glw, key.second, "", 0});
        if (lit != glw.end()) {
            for (const auto &[cell, v] : lit->second.values()) {
                if (geometry.at(cell).county == key.first) {
                    inst.cells.push_back(cell);
                    inst.capacity.push_back(v);
                }
            }
        }
        keys.push_back(key);
        instances.push_back(std::move(inst));
    }
    cell_assign::AssignOptions opt;
    opt.time_limit = std::chrono::milliseconds(static_cast<long long>(ctx.cfg.time_limit_seconds * 1000));
    std::vector<std::optional<cell_assign::AssignResult>> results(instances.size());
    std::vector<std::optional<CountyFailure>> failed(instances.size());
    parallel_for(instances.size(), ctx.threads, [&](std::size_t i) {
        const auto &inst = instances[i];
        try {
            results[i] = cell_assign::assign_or_fallback(inst, geometry, opt);
        } catch (const Error &e) {
            failed[i] = CountyFailure{"assign", inst.county, inst.livestock, std::string(to_string(e.kind())),
                                      e.what()};
            ctx.log.log("error", "assign", e.what(), {{"county", inst.county}, {"livestock", inst.livestock}});
        }
    });
    std::string report = "county,livestock,lambda5,lambda5_rescaled,pearson_r,status\n";
    json statuses = json::object();
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto &inst = instances[i];
        const std::string tag = inst.county + "/" + inst.livestock;
        if (failed[i]) {
            ctx.failures.push_back(*failed[i]);
            statuses[tag] = "FAILED:" + failed[i]->kind;
            report += csv::join_row({inst.county, inst.livestock, "", "", "NULL", "FAILED:" + failed[i]->kind});
            report.push_back('\n');
            continue;
        }
        const auto &r = *results[i];
        const auto &idx = groups.at(keys[i]);
        for (std::size_t a = 0; a < idx.size(); ++a) {
            farms[idx[a]].cell = r.cell_of_farm[a];
        }
        std::optional<double> pr;
        if (!r.fallback) {
            pr = cell_assign::pearson(cell_assign::cell_loads(inst.cells, r.cell_of_farm, inst.heads), inst.capacity);
        }
        const std::string status = r.fallback ? "FALLBACK_CENTRAL_CELL" : std::string(milp::to_string(r.status));
        statuses[tag] = status;
        report += csv::join_row({inst.county, inst.livestock, num(r.lambda5),
                                 r.lambda5_rescaled ? num(*r.lambda5_rescaled) : "", pr ? num(*pr) : "NULL", status});
        report.push_back('\n');
    }
    ctx.write("assignments.csv", write_assignments(farms));
    ctx.write("alignment_report.csv", report);
    ctx.complete(Stage::Assign, {{"counties", statuses}}, {"assignments.csv", "alignment_report.csv"});
}

// ---------------------------------------------------------------- validate

std::vector<std::string> split(const std::string &s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto end = s.find(sep, start);
        const auto part = s.substr(start, end == std::string::npos ? std::string::npos : end - start);
        if (!part.empty()) {
            out.push_back(part);
        }
        if (end == std::string::npos) {
            break;
        }
        start = end + 1;
    }
    return out;
}

void stage_validate(Context &ctx) {
    const auto &in = ctx.cfg.inputs;
    const auto farms = read_farms(ctx, Stage::Validate, true);
    const auto schemes = ingest::load_size_classes(in.size_classes);
    const auto census = load_census(ctx.read(Stage::Validate, "census_filled.csv"), schemes, "census_filled.csv");
    const auto geometry = ingest::load_geometry(in.geometry);
    json report;

    {
        json rows = json::array();
        double worst = 0;
        for (const auto &r : validate::census_alignment(farms, census)) {
            if (!ctx.livestock_selected(r.livestock)) {
                continue;
            }
            rows.push_back({{"state", r.state},
                            {"livestock", r.livestock},
                            {"subtype", r.subtype},
                            {"ds_heads", r.ds_heads},
                            {"census_heads", r.census_heads},
                            {"percent", r.percent}});
            worst = std::max(worst, r.percent);
        }
        report["census_alignment"] = {
            {"metric", "100*|ds-census|/mean(ds,census) per state total"}, {"rows", rows}, {"max_percent", worst}};
    }

    std::vector<ingest::PointRecord> points;
    if (in.points) {
        points = ingest::load_point_records(*in.points);
    }
    std::string distances = "livestock,cafo_id,farm_id,distance_miles,cdf\n";
    if (in.points) {
        const auto thresholds = validate::cafo_threshold_preset(ctx.cfg.cafo_thresholds);
        std::set<LivestockId> kinds;
        for (const auto &p : points) {
            if (p.kind == ingest::PointKind::Cafo) {
                kinds.insert(*p.attribute("livestock"));
            }
        }
        json by = json::object();
        for (const auto &l : kinds) {
            if (!ctx.livestock_selected(l)) {
                continue;
            }
            std::vector<ingest::PointRecord> cafos;
            for (const auto &p : points) {
                if (p.kind == ingest::PointKind::Cafo && *p.attribute("livestock") == l &&
                    ctx.county_selected(p.county)) {
                    cafos.push_back(p);
                }
            }
            const auto eligible = validate::farms_above_threshold(farms, l, thresholds);
            const auto m = validate::match_cafos(cafos, eligible, geometry);
            std::vector<double> d;
            auto pairs = m.pairs;
            std::stable_sort(pairs.begin(), pairs.end(), [](const auto &a, const auto &b) {
                if (a.distance_miles != b.distance_miles) {
                    return a.distance_miles < b.distance_miles;
                }
                return a.cafo_id < b.cafo_id;
            });
            for (std::size_t i = 0; i < pairs.size(); ++i) {
                d.push_back(pairs[i].distance_miles);
                distances += csv::join_row({l, pairs[i].cafo_id, pairs[i].farm_id, num(pairs[i].distance_miles),
                                            num(static_cast<double>(i + 1) / static_cast<double>(pairs.size()))});
                distances.push_back('\n');
            }
            auto maybe = [&](double q) { return d.empty() ? json(nullptr) : json(validate::quantile(d, q)); };
            by[l] = {{"cafos", cafos.size()},
                     {"eligible_farms", eligible.size()},
                     {"threshold", thresholds.count(l) ? thresholds.at(l) : 0},
                     {"pairs", m.pairs.size()},
                     {"unmatched_cafos", m.unmatched_cafos.size()},
                     {"unmatched_farms", m.unmatched_farms.size()},
                     {"total_weight", m.total_weight},
                     {"median_miles", maybe(0.5)},
                     {"p90_miles", maybe(0.9)}};
        }
        report["cafo_matching"] = {{"preset", ctx.cfg.cafo_thresholds}, {"by_livestock", by}};

        std::map<std::string, Count> plant_levels;
        json plants = json::object();
        for (const auto &p : points) {
            if (p.kind != ingest::PointKind::Plant) {
                continue;
            }
            const auto level = ingest::classify_plant_risk(split(*p.attribute("product_codes"), '|'));
            plants[p.id] = std::string(ingest::to_string(level));
            ++plant_levels[std::string(ingest::to_string(level))];
        }
        report["plants"] = {{"levels", plant_levels}, {"by_plant", plants}};
    } else {
        report["cafo_matching"] = {{"skipped", "no points input"}};
    }

    if (in.birds && in.species_groups && in.points) {
        const auto birds = ingest::load_gridded_layer(*in.birds, LayerKind::Birds, geometry);
        const auto groups = ingest::load_species_groups(*in.species_groups);
        std::map<std::string, std::set<int>> weeks;
        std::map<std::string, double> totals;
        for (const auto &[key, layer] : birds) {
            weeks[key.primary].insert(key.week);
            totals[key.primary] += layer.sum();
        }
        std::map<std::string, double> mean;
        for (const auto &[species, t] : totals) {
            mean[species] = t / static_cast<double>(weeks[species].size());
        }
        const auto ga = validate::group_abundance(mean, groups);
        std::set<std::string> cases;
        for (const auto &p : points) {
            if (p.kind == ingest::PointKind::Incidence && *p.attribute("host_type") == "wild_bird") {
                auto it = groups.find(*p.attribute("species"));
                if (it != groups.end()) {
                    cases.insert(it->second);
                }
            }
        }
        json curve = json::array();
        for (std::size_t k = 1; k <= ga.size(); ++k) {
            curve.push_back({{"k", k}, {"recall", validate::topk_recall(ga, cases, k)}});
        }
        report["bird_recall"] = {{"groups", ga.size()}, {"case_groups", cases}, {"recall_at_k", curve}};
    } else {
        report["bird_recall"] = {{"skipped", "needs birds, species_groups and points inputs"}};
    }

    if (in.population && in.bls) {
        const auto pop = ingest::load_gridded_layer(*in.population, LayerKind::Population, geometry);
        const auto bls = ingest::load_quarterly_counts(*in.bls);
        const auto cmp =
            validate::worker_comparison(validate::county_population(pop, geometry, ctx.cfg.worker_employment), bls);
        json rows = json::array();
        for (const auto &r : cmp.rows) {
            rows.push_back({{"county", r.county},
                            {"ds_count", r.ds_count},
                            {"bls_mean", r.bls_mean},
                            {"difference", r.difference},
                            {"cv", r.cv}});
        }
        report["workers"] = {
            {"employment", ctx.cfg.worker_employment}, {"rows", rows}, {"only_ds", cmp.only_ds}, {"only_bls", cmp.only_bls}};
    } else {
        report["workers"] = {{"skipped", "needs population and bls inputs"}};
    }

    ctx.write("validation_report.json", dump(report));
    ctx.write("match_distances.csv", distances);
    ctx.complete(Stage::Validate, {{"max_alignment_percent", report["census_alignment"]["max_percent"]}},
                 {"validation_report.json", "match_distances.csv"});
}

// ---------------------------------------------------------------- risk

json county_point(const GridGeometry &geometry, const Fips &county) {
    double lat = 0;
    double lon = 0;
    const auto cells = geometry.cells_of(county);
    for (const auto &c : cells) {
        lat += geometry.at(c).lat;
        lon += geometry.at(c).lon;
    }
    const double n = static_cast<double>(std::max<std::size_t>(1, cells.size()));
    return {{"type", "Point"}, {"coordinates", {lon / n, lat / n}}};
}

void stage_risk(Context &ctx) {
    const auto &in = ctx.cfg.inputs;
    const auto farms = read_farms(ctx, Stage::Risk, true);
    const auto geometry = ingest::load_geometry(in.geometry);
    if (!in.birds) {
        throw Error(ErrorKind::MissingLayer, "risk needs a bird abundance layer (inputs.birds)");
    }
    if (!in.prevalence) {
        throw Error(ErrorKind::MissingLayer, "risk needs prevalence (inputs.prevalence)");
    }
    const auto birds = ingest::load_gridded_layer(*in.birds, LayerKind::Birds, geometry);
    const auto prevalence = ingest::load_prevalence(*in.prevalence, geometry);
    const std::set<std::string> species(ctx.cfg.risk_species.begin(), ctx.cfg.risk_species.end());
    const auto abundance = risk::weekly_abundance(birds, species.empty() ? nullptr : &species);
    const LivestockId &livestock = ctx.cfg.risk_livestock;

    std::set<SubtypeId> subtypes{SubtypeId(kAllSubtype)};
    for (const auto &f : farms) {
        if (f.livestock == livestock) {
            for (const auto &[s, h] : f.heads_by_subtype) {
                subtypes.insert(s);
            }
        }
    }
    std::vector<ingest::PointRecord> incidence;
    if (in.points) {
        for (auto &p : ingest::load_point_records(*in.points, ingest::PointKind::Incidence)) {
            if (*p.attribute("host_type") == livestock) {
                incidence.push_back(std::move(p));
            }
        }
    }

    std::string surface_csv = "x,y,subtype,period,score\n";
    std::string county_csv = "fips,subtype,period,score,percentile,category\n";
    json summary;
    summary["livestock"] = livestock;
    json periods = json::array();
    for (const auto &p : ctx.cfg.periods) {
        periods.push_back({{"period", p.index}, {"first_week", p.first_week}, {"last_week", p.last_week}});
    }
    summary["periods"] = periods;
    std::map<Fips, json> map_props;
    for (const auto &s : subtypes) {
        const auto p_layer = risk::livestock_surface(farms, livestock, s);
        std::map<Fips, std::vector<risk::RiskCategory>> cats;
        std::map<Fips, std::vector<double>> scores;
        std::map<std::pair<Fips, int>, risk::RiskCategory> keyed;
        for (const auto &period : ctx.cfg.periods) {
            const auto surface = s == kAllSubtype
                                     ? risk::scenario_surface(farms, livestock, abundance, prevalence, period, geometry)
                                     : risk::compute_risk_surface(p_layer, abundance, prevalence, s, period, geometry);
            for (const auto &[cell, r] : surface.cells) {
                surface_csv += csv::join_row(
                    {std::to_string(cell.x), std::to_string(cell.y), s, std::to_string(period.index), num(r)});
                surface_csv.push_back('\n');
            }
            for (const auto &[county, cr] : risk::categorize(surface)) {
                county_csv += csv::join_row({county, s, std::to_string(period.index), num(cr.score),
                                             num(cr.percentile), std::string(risk::to_string(cr.category))});
                county_csv.push_back('\n');
                cats[county].push_back(cr.category);
                scores[county].push_back(cr.score);
                keyed[{county, period.index}] = cr.category;
            }
        }
        json persistence = json::array();
        for (const auto &county : risk::persistence_rank(cats)) {
            std::array<int, 4> n{};
            for (auto c : cats[county]) {
                ++n[static_cast<std::size_t>(c)];
            }
            persistence.push_back(
                {{"fips", county}, {"very_high", n[0]}, {"high", n[1]}, {"medium", n[2]}, {"low", n[3]}});
        }
        json peaks = json::object();
        for (const auto &[county, pk] : risk::peak_period(scores)) {
            peaks[county] = {{"period", pk.period}, {"no_risk", pk.no_risk}};
            map_props[county]["peak_period"][s] = pk.period;
            map_props[county]["no_risk"][s] = pk.no_risk;
        }
        for (const auto &[county, c] : cats) {
            json names = json::array();
            for (auto x : c) {
                names.push_back(std::string(risk::to_string(x)));
            }
            map_props[county]["categories"][s] = names;
        }
        std::vector<ingest::PointRecord> cases;
        for (const auto &p : incidence) {
            if (s == kAllSubtype || *p.attribute("subtype") == s) {
                cases.push_back(p);
            }
        }
        summary["subtypes"][s] = {{"persistence", persistence},
                                  {"peak_period", peaks},
                                  {"incidence", risk::incidence_concordance(keyed, cases, ctx.cfg.periods)},
                                  {"cases", cases.size()}};
    }

    json boundaries;
    if (in.boundaries) {
        try {
            boundaries = json::parse(csv::read_text(*in.boundaries));
        } catch (const json::exception &e) {
            throw Error(ErrorKind::SchemaError, std::string("boundaries file is not valid GeoJSON: ") + e.what());
        }
    }
    std::map<Fips, json> shapes;
    if (boundaries.is_object() && boundaries.contains("features")) {
        for (const auto &f : boundaries["features"]) {
            const auto &props = f.value("properties", json::object());
            for (const char *k : {"fips", "GEOID"}) {
                if (props.contains(k) && props[k].is_string()) {
                    shapes[props[k].get<std::string>()] = f.value("geometry", json(nullptr));
                    break;
                }
            }
        }
    }
    json features = json::array();
    for (auto &[county, props] : map_props) {
        props["fips"] = county;
        auto it = shapes.find(county);
        features.push_back({{"type", "Feature"},
                            {"properties", props},
                            {"geometry", it != shapes.end() ? it->second : county_point(geometry, county)}});
    }
    ctx.write("risk_surface.csv", surface_csv);
    ctx.write("county_risk.csv", county_csv);
    ctx.write("risk_summary.json", dump(summary));
    ctx.write("risk_map.geojson", dump({{"type", "FeatureCollection"}, {"features", features}}));
    ctx.complete(Stage::Risk, {{"subtypes", subtypes}},
                 {"risk_surface.csv", "county_risk.csv", "risk_summary.json", "risk_map.geojson"});
}

void run_stage(Context &ctx, Stage s) {
    switch (s) {
    case Stage::Ingest:
        return stage_ingest(ctx);
    case Stage::Gapfill:
        return stage_gapfill(ctx);
    case Stage::Ipf:
        return stage_ipf(ctx);
    case Stage::GenFarms:
        return stage_genfarms(ctx);
    case Stage::Assign:
        return stage_assign(ctx);
    case Stage::Validate:
        return stage_validate(ctx);
    case Stage::Risk:
        return stage_risk(ctx);
    }
}

} // namespace

int run(std::string_view subcommand, const PipelineConfig &config, const RunOptions &options) {
    Context ctx(config, options);
    ctx.out = options.output_dir.value_or(config.output_dir);
    ctx.counties = options.counties.empty() ? config.counties : options.counties;
    ctx.livestock = options.livestock.empty() ? config.livestock : options.livestock;
    ctx.threads = resolve_threads(config.threads);

    json canon = json::parse(config.canonical);
    canon["counties"] = ctx.counties;
    canon["livestock"] = ctx.livestock;
    const std::string hash = fnv1a_hex(canon.dump());

    std::error_code ec;
    fs::create_directories(ctx.out, ec);
    fs::remove(ctx.out / "errors.json", ec);

    json manifest;
    const std::vector<Stage> stages = stages_for(subcommand);
    if (subcommand != "all" && fs::exists(ctx.out / "manifest.json")) {
        try {
            manifest = json::parse(csv::read_text(ctx.out / "manifest.json"));
        } catch (const std::exception &) {
            manifest = json();
        }
        if (!manifest.is_object() || manifest.value("config_hash", "") != hash) {
            manifest = json();
        }
    }
    if (manifest.is_object() && manifest.contains("stages")) {
        ctx.stages = manifest["stages"];
    }

    json errors = json::array();
    std::vector<std::string> completed;
    for (auto s : stages) {
        const std::string name(to_string(s));
        ctx.log.log("info", name, "stage start");
        const std::size_t before = ctx.failures.size();
        try {
            run_stage(ctx, s);
        } catch (const Error &e) {
            errors.push_back({{"stage", name}, {"kind", std::string(to_string(e.kind()))}, {"message", e.what()}});
            ctx.stages[name] = {{"version", kStageVersion}, {"status", "failed"}};
            ctx.log.log("error", name, e.what(), {{"kind", std::string(to_string(e.kind()))}});
            break;
        } catch (const std::exception &e) {
            errors.push_back({{"stage", name}, {"kind", "IoError"}, {"message", e.what()}});
            ctx.stages[name] = {{"version", kStageVersion}, {"status", "failed"}};
            ctx.log.log("error", name, e.what());
            break;
        }
        completed.push_back(name);
        if (ctx.failures.size() > before) {
            ctx.stages[name]["status"] = "partial";
        }
        ctx.log.log("info", name, "stage done", {{"status", ctx.stages[name]["status"].get<std::string>()}});
    }
    for (const auto &f : ctx.failures) {
        errors.push_back(
            {{"stage", f.stage}, {"county", f.county}, {"livestock", f.livestock}, {"kind", f.kind}, {"message", f.message}});
    }

    json out_manifest;
    out_manifest["config_hash"] = hash;
    out_manifest["stages"] = ctx.stages;
    std::vector<std::string> done;
    for (auto s : all_stages()) {
        const std::string name(to_string(s));
        if (ctx.stages.contains(name) && ctx.stages[name].value("status", "") == "complete") {
            done.push_back(name);
        }
    }
    out_manifest["stages_complete"] = done;
    try {
        write_atomic(ctx.out / "manifest.json", dump(out_manifest));
        if (!errors.empty()) {
            write_atomic(ctx.out / "errors.json", dump({{"errors", errors}, {"completed", completed}}));
        }
    } catch (const std::exception &e) {
        ctx.log.log("error", "run", e.what());
        return 1;
    }
    return errors.empty() ? 0 : 1;
}

} // namespace digisim::pipeline
