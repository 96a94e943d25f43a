#include "digisim/cell_assign.hpp"
#include "digisim/error.hpp"
#include "digisim/farmgen.hpp"
#include "digisim/gapfill.hpp"
#include "digisim/ingest.hpp"
#include "digisim/pipeline.hpp"
#include "digisim/risk.hpp"
#include "digisim/validate.hpp"
#include "json.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

using namespace digisim;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kGenFarmsGap = 0.001;
constexpr double kAssignGap = 0.0001;
constexpr double kIpfTol = 1e-6;
constexpr double kAlignmentPercent = 1.0;
constexpr double kMatchRelTol = 1e-9;
constexpr double kScale = 7.3;

struct Outcome {
    bool pass = true;
    std::string detail;
};

int failures = 0;

void criterion(int id, const std::string &name, double limit_seconds, const std::function<Outcome()> &body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception &e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_seconds > 0 && secs >= limit_seconds) {
        o.pass = false;
        o.detail += " over time limit";
    }
    if (!o.pass) {
        ++failures;
    }
    std::printf("%s %d %s (%.2fs) %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs, o.detail.c_str());
    std::fflush(stdout);
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double miles(double lat1, double lon1, double lat2, double lon2) {
    const double r = std::numbers::pi / 180;
    const double dlat = (lat2 - lat1) * r;
    const double dlon = (lon2 - lon1) * r;
    const double a = std::pow(std::sin(dlat / 2), 2) + std::cos(lat1 * r) * std::cos(lat2 * r) * std::pow(std::sin(dlon / 2), 2);
    return 2 * 3958.7613 * std::asin(std::min(1.0, std::sqrt(a)));
}

fs::path fresh_dir(const std::string &name) {
    const fs::path p = fs::temp_directory_path() / ("digisim_acceptance_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

struct FixtureRun {
    fs::path dir;
    pipeline::PipelineConfig cfg;
    int exit_code = 1;
};

FixtureRun run_fixture(const std::string &name) {
    FixtureRun r;
    r.dir = fresh_dir(name);
    pipeline::write_fixture(r.dir);
    r.cfg = pipeline::load_config(r.dir / "config.json");
    pipeline::RunOptions opt;
    opt.quiet = true;
    opt.output_dir = r.dir / "out";
    r.exit_code = pipeline::run("all", r.cfg, opt);
    return r;
}

Outcome fill_gaps_oracle() {
    std::mt19937 rng(1001);
    int bad = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        const int m = std::uniform_int_distribution<int>(1, 3)(rng);
        std::vector<std::pair<Count, Count>> b;
        gapfill::FillInstance inst;
        Count lo = 0;
        Count hi = 0;
        for (int i = 0; i < m; ++i) {
            Count l = std::uniform_int_distribution<Count>(0, 30)(rng);
            Count u = std::uniform_int_distribution<Count>(0, 30)(rng);
            if (l > u) {
                std::swap(l, u);
            }
            b.emplace_back(l, u);
            inst.bounds.push_back({l, u});
            lo += l;
            hi += u;
        }
        if (lo > 50) {
            --iter;
            continue;
        }
        inst.target = std::uniform_int_distribution<Count>(lo, std::min<Count>(hi, 50))(rng);
        const auto expect = oracle::fill_gaps_min(inst.target, b);
        const auto got = gapfill::fill_gaps(inst);
        bool ok = expect && got.lambda0 == *expect && got.values.size() == b.size();
        Count sum = 0;
        for (std::size_t i = 0; ok && i < b.size(); ++i) {
            ok = got.values[i] >= b[i].first && got.values[i] <= b[i].second;
            sum += got.values[i];
        }
        ok = ok && sum == inst.target;
        bad += ok ? 0 : 1;
    }
    return {bad == 0, std::to_string(1000 - bad) + "/1000 exact"};
}

Outcome gen_farms_oracle() {
    std::mt19937 rng(2002);
    int bad = 0;
    double worst_excess = 0;
    for (int iter = 0; iter < 200; ++iter) {
        auto inst = oracle::random_gen_farms_instance(rng);
        inst.gap_fraction = kGenFarmsGap;
        const auto best = oracle::gen_farms_min(inst);
        const auto sol = farmgen::gen_farms(inst);
        const double H = static_cast<double>(inst.total_heads());
        bool ok = best && sol.objective <= *best + kGenFarmsGap * H + 1e-9;
        std::vector<Count> per_class(inst.scheme.size(), 0);
        for (const auto &f : sol.farms) {
            const auto &c = inst.scheme.at(static_cast<std::size_t>(f.size_class));
            const Count t = f.total_heads();
            ok = ok && t >= c.w_min && (!c.w_max || t <= *c.w_max);
            ++per_class[static_cast<std::size_t>(f.size_class)];
        }
        ok = ok && per_class == inst.class_farms;
        if (best) {
            worst_excess = std::max(worst_excess, sol.objective - *best);
        }
        bad += ok ? 0 : 1;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d/200 within gap, worst excess %.4g", 200 - bad, worst_excess);
    return {bad == 0, buf};
}

Outcome farms_to_cells_oracle() {
    std::mt19937 rng(3003);
    int bad = 0;
    for (int iter = 0; iter < 200; ++iter) {
        const std::size_t nf = std::uniform_int_distribution<std::size_t>(1, 6)(rng);
        const std::size_t nc = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        cell_assign::AssignInstance inst;
        inst.county = "99001";
        inst.livestock = "test";
        inst.gap_fraction = kAssignGap;
        for (std::size_t i = 0; i < nf; ++i) {
            inst.farm_ids.push_back("f" + std::to_string(i));
            inst.heads.push_back(std::uniform_int_distribution<int>(1, 100)(rng));
        }
        for (std::size_t j = 0; j < nc; ++j) {
            inst.cells.push_back({static_cast<int>(j), 0});
            inst.capacity.push_back(std::uniform_real_distribution<double>(0, 150)(rng));
        }
        const double total = std::accumulate(inst.heads.begin(), inst.heads.end(), 0.0);
        const double best = oracle::farms_to_cells_min(inst.heads, inst.capacity);
        const auto r = cell_assign::assign_farms_to_cells(inst);
        bool ok = r.cell_of_farm.size() == nf && std::abs(r.lambda5 - best) <= kAssignGap * total + 1e-9;
        bad += ok ? 0 : 1;
    }
    return {bad == 0, std::to_string(200 - bad) + "/200 within 1e-4 of total heads"};
}

Outcome ipf_correctness() {
    std::mt19937 rng(4004);
    int bad = 0;
    double worst = 0;
    for (int iter = 0; iter < 100; ++iter) {
        gapfill::IpfMatrix m;
        m.rows = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
        m.cols = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
        const std::size_t n = m.rows * m.cols;
        std::vector<Count> truth(n);
        for (auto &v : truth) {
            v = std::uniform_int_distribution<Count>(0, 40)(rng);
        }
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const std::size_t known = std::uniform_int_distribution<std::size_t>(0, n * 3 / 10)(rng);
        m.flags.assign(n, gapfill::IpfCell::Seeded);
        m.values.assign(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (i < known) {
                m.flags[order[i]] = gapfill::IpfCell::Known;
            }
        }
        m.row_totals.assign(m.rows, 0);
        m.col_totals.assign(m.cols, 0);
        for (std::size_t r = 0; r < m.rows; ++r) {
            for (std::size_t c = 0; c < m.cols; ++c) {
                const auto i = r * m.cols + c;
                m.row_totals[r] += truth[i];
                m.col_totals[c] += truth[i];
                m.values[i] = m.flags[i] == gapfill::IpfCell::Known
                                  ? static_cast<double>(truth[i])
                                  : std::uniform_real_distribution<double>(0.1, 10.0)(rng);
            }
        }
        gapfill::IpfOptions opt;
        opt.tol = kIpfTol;
        const auto res = gapfill::ipf_fill(m, opt);
        bool ok = res.fitted.size() == n && res.values.size() == n;
        double err = 0;
        for (std::size_t r = 0; ok && r < m.rows; ++r) {
            double s = 0;
            Count si = 0;
            for (std::size_t c = 0; c < m.cols; ++c) {
                s += res.fitted[r * m.cols + c];
                si += res.values[r * m.cols + c];
            }
            const double t = static_cast<double>(m.row_totals[r]);
            err = std::max(err, std::abs(s - t) / std::max(1.0, t));
            ok = si == m.row_totals[r];
        }
        for (std::size_t c = 0; ok && c < m.cols; ++c) {
            double s = 0;
            for (std::size_t r = 0; r < m.rows; ++r) {
                s += res.fitted[r * m.cols + c];
            }
            const double t = static_cast<double>(m.col_totals[c]);
            err = std::max(err, std::abs(s - t) / std::max(1.0, t));
        }
        for (std::size_t i = 0; ok && i < n; ++i) {
            ok = m.flags[i] != gapfill::IpfCell::Known || res.values[i] == truth[i];
            ok = ok && res.values[i] >= 0;
        }
        ok = ok && err <= kIpfTol;
        worst = std::max(worst, err);
        bad += ok ? 0 : 1;
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%d/100 ok, worst pre-rounding error %.3g", 100 - bad, worst);
    return {bad == 0, buf};
}

Outcome fixture_alignment() {
    const auto run = run_fixture("alignment");
    if (run.exit_code != 0) {
        return {false, "pipeline exit " + std::to_string(run.exit_code)};
    }
    const auto report = nlohmann::json::parse(slurp(run.dir / "out" / "validation_report.json"));
    const auto &rows = report.at("census_alignment").at("rows");
    double worst = 0;
    for (const auto &r : rows) {
        worst = std::max(worst, r.at("percent").get<double>());
    }
    char buf[96];
    std::snprintf(buf, sizeof buf, "%zu state totals, max difference %.4f%%", rows.size(), worst);
    return {!rows.empty() && worst <= kAlignmentPercent, buf};
}

Outcome matching_oracle() {
    std::mt19937 rng(6006);
    int bad = 0;
    int total = 0;
    for (std::size_t nc = 0; nc <= 7; ++nc) {
        for (std::size_t nf = 0; nf <= 7; ++nf) {
            for (int rep = 0; rep < 4; ++rep) {
                ++total;
                GridGeometry g;
                std::vector<ingest::PointRecord> cafos;
                std::vector<FarmRecord> farms;
                std::uniform_real_distribution<double> lat(40.0, 40.3);
                std::uniform_real_distribution<double> lon(-95.3, -95.0);
                for (std::size_t j = 0; j < nf; ++j) {
                    const CellId cell{static_cast<int>(j), 0};
                    g.add_cell(cell, {lat(rng), lon(rng), "99001"});
                    FarmRecord f;
                    f.id = "f" + std::to_string(j);
                    f.county = "99001";
                    f.livestock = "cattle";
                    f.heads_by_subtype = {{"all", 500}};
                    f.cell = cell;
                    farms.push_back(f);
                }
                for (std::size_t i = 0; i < nc; ++i) {
                    ingest::PointRecord p;
                    p.id = "c" + std::to_string(i);
                    p.lat = lat(rng);
                    p.lon = lon(rng);
                    p.county = "99001";
                    p.attributes = {{"livestock", "cattle"}};
                    cafos.push_back(p);
                }
                std::vector<std::vector<double>> w(nc, std::vector<double>(nf));
                for (std::size_t i = 0; i < nc; ++i) {
                    for (std::size_t j = 0; j < nf; ++j) {
                        const auto &c = g.at(*farms[j].cell);
                        w[i][j] = 1.0 / std::max(0.1, miles(cafos[i].lat, cafos[i].lon, c.lat, c.lon));
                    }
                }
                const double best = oracle::max_weight_matching(w);
                const auto r = validate::match_cafos(cafos, farms, g);
                const bool ok = r.pairs.size() == std::min(nc, nf) &&
                                std::abs(r.total_weight - best) <= kMatchRelTol * std::max(1.0, best);
                bad += ok ? 0 : 1;
            }
        }
    }
    return {bad == 0, std::to_string(total - bad) + "/" + std::to_string(total) + " equal to permutation search"};
}

Outcome categorization_counts() {
    std::mt19937 rng(7007);
    std::vector<double> v(100);
    std::iota(v.begin(), v.end(), 1.0);
    std::shuffle(v.begin(), v.end(), rng);
    std::map<Fips, double> scores;
    for (std::size_t i = 0; i < v.size(); ++i) {
        char buf[24];
        std::snprintf(buf, sizeof buf, "%05zu", i);
        scores[buf] = v[i] * 0.37;
    }
    std::map<risk::RiskCategory, int> n;
    for (const auto &[f, r] : risk::categorize_scores(scores)) {
        ++n[r.category];
    }
    const int a = n[risk::RiskCategory::VeryHigh], b = n[risk::RiskCategory::High], c = n[risk::RiskCategory::Medium],
              d = n[risk::RiskCategory::Low];
    return {a == 5 && b == 5 && c == 15 && d == 75,
            std::to_string(a) + "/" + std::to_string(b) + "/" + std::to_string(c) + "/" + std::to_string(d)};
}

Outcome recall_properties() {
    const std::map<std::string, double> ranked{{"A", 3}, {"C", 2}, {"B", 1}};
    bool ok = validate::topk_recall(ranked, {"A", "B"}, 1) == 0.5 && validate::topk_recall(ranked, {"A", "B"}, 2) == 0.5 &&
              validate::topk_recall(ranked, {"A", "B"}, 3) == 1.0;
    const auto species = validate::group_abundance({{"s1", 2}, {"s2", 1}, {"s3", 2}, {"s4", 1}},
                                                   {{"s1", "A"}, {"s2", "A"}, {"s3", "C"}, {"s4", "B"}});
    ok = ok && validate::topk_recall(species, {"A", "B"}, 1) == 0.5 &&
         validate::topk_recall(species, {"A", "B"}, 3) == 1.0;
    std::mt19937 rng(8008);
    int trials = 0;
    for (int iter = 0; iter < 500; ++iter) {
        std::map<std::string, double> g;
        std::set<std::string> cases;
        const int n = std::uniform_int_distribution<int>(1, 15)(rng);
        for (int i = 0; i < n; ++i) {
            const std::string name = "g" + std::to_string(i);
            g[name] = std::uniform_int_distribution<int>(0, 6)(rng);
            if (rng() % 3 == 0) {
                cases.insert(name);
            }
        }
        double prev = 0;
        for (std::size_t k = 1; k <= g.size(); ++k) {
            const double r = validate::topk_recall(g, cases, k);
            ok = ok && r >= prev;
            prev = r;
        }
        ok = ok && prev == 1.0;
        ++trials;
    }
    return {ok, "hand values and " + std::to_string(trials) + " random rankings"};
}

ingest::Prevalence scaled(const ingest::Prevalence &p, double s) {
    ingest::Prevalence out = p;
    for (auto &[w, v] : out.weekly) {
        v *= s;
    }
    for (auto &[k, v] : out.by_cell) {
        v *= s;
    }
    return out;
}

int category_changes(const std::map<CellId, double> &livestock, const std::map<int, GridLayer> &abundance,
                     const ingest::Prevalence &prevalence, const std::vector<risk::Period> &periods,
                     const GridGeometry &geometry, int &compared) {
    int changes = 0;
    const auto big = scaled(prevalence, kScale);
    for (const auto &p : periods) {
        const auto a = risk::categorize(risk::compute_risk_surface(livestock, abundance, prevalence, "x", p, geometry));
        const auto b = risk::categorize(risk::compute_risk_surface(livestock, abundance, big, "x", p, geometry));
        for (const auto &[f, r] : a) {
            ++compared;
            changes += b.at(f).category == r.category ? 0 : 1;
        }
    }
    return changes;
}

Outcome scale_invariance() {
    int compared = 0;
    int changes = 0;

    const auto run = run_fixture("scale");
    if (run.exit_code != 0) {
        return {false, "pipeline exit " + std::to_string(run.exit_code)};
    }
    const auto &in = run.cfg.inputs;
    const auto geometry = ingest::load_geometry(in.geometry);
    const auto birds = ingest::load_gridded_layer(*in.birds, LayerKind::Birds, geometry);
    const auto abundance = risk::weekly_abundance(birds);
    const auto prevalence = ingest::load_prevalence(*in.prevalence, geometry);
    auto farms = pipeline::parse_farms(slurp(run.dir / "out" / "farms.csv"));
    pipeline::apply_assignments(slurp(run.dir / "out" / "assignments.csv"), farms);
    for (const auto &livestock : {"cattle", "hogs"}) {
        std::set<SubtypeId> subtypes{"all"};
        for (const auto &f : farms) {
            if (f.livestock == livestock) {
                for (const auto &[s, h] : f.heads_by_subtype) {
                    subtypes.insert(s);
                }
            }
        }
        for (const auto &s : subtypes) {
            changes += category_changes(risk::livestock_surface(farms, livestock, s), abundance, prevalence,
                                        run.cfg.periods, geometry, compared);
        }
    }

    std::mt19937 rng(9009);
    GridGeometry g;
    std::map<CellId, double> P;
    std::map<int, GridLayer> A;
    ingest::Prevalence B;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int w = 1; w <= 52; ++w) {
        A.emplace(w, GridLayer(LayerKey{LayerKind::Birds, "all", "", w}));
        B.weekly[w] = u(rng) * 0.05;
    }
    for (int county = 0; county < 100; ++county) {
        char fips[24];
        std::snprintf(fips, sizeof fips, "99%03d", county);
        const int ncells = std::uniform_int_distribution<int>(1, 4)(rng);
        for (int k = 0; k < ncells; ++k) {
            const CellId cell{county, k};
            g.add_cell(cell, {40 + k * 0.08, -100 + county * 0.08, fips});
            if (rng() % 5 != 0) {
                P[cell] = std::uniform_int_distribution<int>(1, 5000)(rng);
            }
            for (int w = 1; w <= 52; ++w) {
                A.at(w).add(cell, u(rng) * 3);
                if (rng() % 7 == 0) {
                    B.by_cell[{cell, w}] = u(rng) * 0.1;
                }
            }
        }
    }
    changes += category_changes(P, A, B, risk::default_periods(), g, compared);
    return {changes == 0, std::to_string(compared) + " county categories, " + std::to_string(changes) + " changed"};
}

Outcome determinism() {
    const auto a = run_fixture("det_a");
    const auto b = run_fixture("det_b");
    if (a.exit_code != 0 || b.exit_code != 0) {
        return {false, "pipeline failed"};
    }
    std::map<std::string, std::string> ha;
    std::map<std::string, std::string> hb;
    for (const auto &e : fs::directory_iterator(a.dir / "out")) {
        ha[e.path().filename().string()] = pipeline::fnv1a_hex(slurp(e.path()));
    }
    for (const auto &e : fs::directory_iterator(b.dir / "out")) {
        hb[e.path().filename().string()] = pipeline::fnv1a_hex(slurp(e.path()));
    }
    std::size_t differing = 0;
    for (const auto &[name, h] : ha) {
        auto it = hb.find(name);
        differing += it != hb.end() && it->second == h ? 0 : 1;
    }
    return {differing == 0 && ha.size() == hb.size() && !ha.empty(),
            std::to_string(ha.size()) + " files, " + std::to_string(differing) + " differ"};
}

} // namespace

int main() {
    criterion(1, "fillgaps-oracle", 10, fill_gaps_oracle);
    criterion(2, "genfarms-oracle", 60, gen_farms_oracle);
    criterion(3, "farms-to-cells-oracle", 30, farms_to_cells_oracle);
    criterion(4, "ipf-correctness", 5, ipf_correctness);
    criterion(5, "fixture-alignment", 120, fixture_alignment);
    criterion(6, "matching-oracle", 5, matching_oracle);
    criterion(7, "risk-category-counts", 0, categorization_counts);
    criterion(8, "topk-recall-properties", 0, recall_properties);
    criterion(9, "prevalence-scale-invariance", 0, scale_invariance);
    criterion(10, "determinism", 0, determinism);
    return failures == 0 ? 0 : 1;
}
