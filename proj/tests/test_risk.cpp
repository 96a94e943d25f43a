#include "digisim/error.hpp"
#include "digisim/risk.hpp"

#include "doctest.h"

#include <random>

using namespace digisim;
using namespace digisim::risk;

namespace {

GridGeometry two_counties() {
    GridGeometry g;
    g.add_cell({0, 0}, {42, -93.0, "19001"});
    g.add_cell({1, 0}, {42, -92.9, "19001"});
    g.add_cell({2, 0}, {42, -92.8, "19003"});
    return g;
}

std::map<int, GridLayer> flat_abundance(double a, int first, int last) {
    std::map<int, GridLayer> out;
    for (int w = first; w <= last; ++w) {
        GridLayer l(LayerKey{LayerKind::Birds, "all", "", w});
        for (int x = 0; x < 3; ++x) {
            l.add({x, 0}, a);
        }
        out.emplace(w, l);
    }
    return out;
}

ingest::Prevalence flat_prevalence(double b, int first, int last) {
    ingest::Prevalence p;
    for (int w = first; w <= last; ++w) {
        p.weekly[w] = b;
    }
    return p;
}

// Reference ranking by explicit pairwise comparison.
std::map<Fips, double> slow_percentiles(const std::map<Fips, double> &scores) {
    std::map<Fips, double> out;
    const double n = static_cast<double>(scores.size());
    for (const auto &[f, s] : scores) {
        double lower = 0;
        for (const auto &[g, t] : scores) {
            lower += t < s ? 1 : 0;
        }
        out[f] = n <= 1 ? 100.0 : 100.0 * lower / (n - 1);
    }
    return out;
}

ingest::PointRecord incidence(const std::string &county, const std::string &key, const std::string &value) {
    ingest::PointRecord p;
    p.id = county + key + value;
    p.kind = ingest::PointKind::Incidence;
    p.county = county;
    p.attributes = {{key, value}, {"host_type", "livestock"}};
    return p;
}

} // namespace

TEST_CASE("category thresholds") {
    CHECK(category_of(100) == RiskCategory::VeryHigh);
    CHECK(category_of(95) == RiskCategory::VeryHigh);
    CHECK(category_of(94.9) == RiskCategory::High);
    CHECK(category_of(90) == RiskCategory::High);
    CHECK(category_of(75) == RiskCategory::Medium);
    CHECK(category_of(74.99) == RiskCategory::Low);
    CHECK(to_string(RiskCategory::VeryHigh) == "VERY_HIGH");
}

TEST_CASE("periods and weeks") {
    const auto p = default_periods();
    REQUIRE(p.size() == 4);
    CHECK(period_of_week(p, 1) == 1);
    CHECK(period_of_week(p, 13) == 1);
    CHECK(period_of_week(p, 14) == 2);
    CHECK(period_of_week(p, 52) == 4);
    CHECK(!period_of_week({{1, 1, 4}}, 5).has_value());
    CHECK_NOTHROW(validate_periods(p));
    CHECK_THROWS_AS(validate_periods({{1, 1, 10}, {2, 5, 20}}), Error);
    CHECK_THROWS_AS(validate_periods({{1, 0, 10}}), Error);
    CHECK_THROWS_AS(validate_periods({{1, 10, 5}}), Error);
    CHECK(week_of_date("2023-01-01") == 1);
    CHECK(week_of_date("2023-01-08") == 2);
    CHECK(week_of_date("2023-12-31") == 52);
    CHECK(week_of_date("2024-03-01") == 9);
    CHECK(!week_of_date("2023-13-01").has_value());
    CHECK(!week_of_date("yesterday").has_value());
}

TEST_CASE("risk surface of a single cell") {
    const auto g = two_counties();
    const auto s = compute_risk_surface({{{0, 0}, 100}}, flat_abundance(0.5, 1, 13), flat_prevalence(0.01, 1, 13), "all",
                                        {1, 1, 13}, g);
    CHECK(s.cells.at({0, 0}) == doctest::Approx(0.5));
    CHECK(s.counties.at("19001") == doctest::Approx(0.5));
    CHECK(s.counties.at("19003") == 0.0);

    const auto zero = compute_risk_surface({{{0, 0}, 100}, {{2, 0}, 30}}, flat_abundance(0.5, 1, 13),
                                           flat_prevalence(0.0, 1, 13), "all", {1, 1, 13}, g);
    for (const auto &[c, v] : zero.cells) {
        CHECK(v == 0.0);
    }

    CHECK_THROWS_AS(compute_risk_surface({}, flat_abundance(0.5, 14, 26), flat_prevalence(0.1, 1, 13), "all",
                                         {1, 1, 13}, g),
                    Error);
    CHECK_THROWS_AS(compute_risk_surface({}, flat_abundance(0.5, 1, 13), flat_prevalence(0.1, 14, 26), "all",
                                         {1, 1, 13}, g),
                    Error);
}

TEST_CASE("county scores sum their cells") {
    const auto g = two_counties();
    const auto s = compute_risk_surface({{{0, 0}, 50}, {{1, 0}, 150}}, flat_abundance(1.0, 1, 2),
                                        flat_prevalence(0.01, 1, 2), "all", {1, 1, 2}, g);
    CHECK(s.counties.at("19001") == doctest::Approx(2.0));
}

TEST_CASE("percentile categories over 100 distinct scores") {
    std::map<Fips, double> scores;
    for (int i = 0; i < 100; ++i) {
        scores["c" + std::to_string(1000 + i)] = i * 1.5;
    }
    std::map<RiskCategory, int> n;
    for (const auto &[f, r] : categorize_scores(scores)) {
        ++n[r.category];
    }
    CHECK(n[RiskCategory::VeryHigh] == 5);
    CHECK(n[RiskCategory::High] == 5);
    CHECK(n[RiskCategory::Medium] == 15);
    CHECK(n[RiskCategory::Low] == 75);
}

TEST_CASE("percentile edge cases") {
    for (const auto &[f, r] : categorize_scores({{"a", 3}, {"b", 3}, {"c", 3}})) {
        CHECK(r.category == RiskCategory::Low);
        CHECK(r.percentile == 0.0);
    }
    const auto one = categorize_scores({{"a", 0}});
    CHECK(one.at("a").percentile == 100.0);
    CHECK(one.at("a").category == RiskCategory::VeryHigh);
    CHECK(categorize_scores({}).empty());
}

TEST_CASE("percentiles agree with pairwise counting") {
    std::mt19937 rng(12);
    for (int n = 1; n <= 200; ++n) {
        std::map<Fips, double> scores;
        for (int i = 0; i < n; ++i) {
            scores["f" + std::to_string(i)] = std::uniform_int_distribution<int>(0, n / 3 + 1)(rng);
        }
        const auto got = categorize_scores(scores);
        const auto want = slow_percentiles(scores);
        for (const auto &[f, p] : want) {
            CHECK(got.at(f).percentile == doctest::Approx(p));
            CHECK(got.at(f).category == category_of(p));
        }
    }
}

TEST_CASE("scaling every score leaves categories unchanged") {
    std::mt19937 rng(3);
    std::map<Fips, double> scores;
    std::map<Fips, double> scaled;
    for (int i = 0; i < 150; ++i) {
        const double s = std::uniform_real_distribution<double>(0, 10)(rng);
        scores["f" + std::to_string(i)] = s;
        scaled["f" + std::to_string(i)] = s * 7.3;
    }
    const auto a = categorize_scores(scores);
    const auto b = categorize_scores(scaled);
    for (const auto &[f, r] : a) {
        CHECK(b.at(f).category == r.category);
    }
}

TEST_CASE("persistence ranking") {
    using RC = RiskCategory;
    const std::map<Fips, std::vector<RC>> cats{
        {"19001", {RC::VeryHigh, RC::Low, RC::Low, RC::Low}},
        {"19003", {RC::High, RC::High, RC::High, RC::High}},
        {"19005", {RC::VeryHigh, RC::VeryHigh, RC::Low, RC::Low}},
        {"19007", {RC::VeryHigh, RC::Low, RC::Low, RC::Low}},
    };
    CHECK(persistence_rank(cats) == std::vector<Fips>{"19005", "19001", "19007", "19003"});
}

TEST_CASE("peak period") {
    const auto p = peak_period({{"a", {1, 5, 2, 0}}, {"b", {3, 3, 1, 1}}, {"c", {0, 0, 0, 0}}});
    CHECK(p.at("a").period == 2);
    CHECK(!p.at("a").no_risk);
    CHECK(p.at("b").period == 1);
    CHECK(p.at("c").period == 1);
    CHECK(p.at("c").no_risk);
}

TEST_CASE("incidence concordance conserves cases") {
    using RC = RiskCategory;
    const std::map<std::pair<Fips, int>, RC> cats{
        {{"19001", 1}, RC::VeryHigh}, {{"19001", 2}, RC::Low}, {{"19003", 1}, RC::Medium}};
    const std::vector<ingest::PointRecord> cases{
        incidence("19001", "week", "3"),       incidence("19001", "date", "2023-04-10"),
        incidence("19003", "date", "2023-01-20"), incidence("19999", "week", "3"),
        incidence("19001", "note", "none"),    incidence("19001", "week", "60"),
    };
    const auto h = incidence_concordance(cats, cases, default_periods());
    CHECK(h.at("VERY_HIGH") == 1);
    CHECK(h.at("LOW") == 1);
    CHECK(h.at("MEDIUM") == 1);
    CHECK(h.at("HIGH") == 0);
    CHECK(h.at("UNKNOWN") == 3);
    Count total = 0;
    for (const auto &[k, v] : h) {
        total += v;
    }
    CHECK(total == static_cast<Count>(cases.size()));
}

TEST_CASE("livestock surfaces and the scenario") {
    const auto g = two_counties();
    std::vector<FarmRecord> farms(2);
    farms[0].livestock = "cattle";
    farms[0].heads_by_subtype = {{"beef", 10}, {"milk", 30}};
    farms[0].cell = CellId{0, 0};
    farms[1].livestock = "cattle";
    farms[1].heads_by_subtype = {{"milk", 5}};
    farms[1].cell = CellId{2, 0};
    const auto milk = livestock_surface(farms, "cattle", "milk");
    CHECK(milk.at({0, 0}) == 30);
    CHECK(milk.at({2, 0}) == 5);
    const auto all = livestock_surface(farms, "cattle", "all");
    CHECK(all.at({0, 0}) == 40);
    CHECK(livestock_surface(farms, "hogs", "all").empty());

    const auto ab = flat_abundance(0.2, 1, 13);
    const auto pr = flat_prevalence(0.3, 1, 13);
    const auto s = scenario_surface(farms, "cattle", ab, pr, {1, 1, 13}, g);
    const auto beef = compute_risk_surface(livestock_surface(farms, "cattle", "beef"), ab, pr, "beef", {1, 1, 13}, g);
    const auto m = compute_risk_surface(milk, ab, pr, "milk", {1, 1, 13}, g);
    for (const auto &fips : {"19001", "19003"}) {
        CHECK(s.counties.at(fips) == doctest::Approx(beef.counties.at(fips) + m.counties.at(fips)));
    }
}
