#include "digisim/cell_assign.hpp"
#include "digisim/error.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

using namespace digisim;
using namespace digisim::cell_assign;

namespace {

AssignInstance make_instance(const std::vector<double> &P, const std::vector<double> &Q) {
    AssignInstance inst;
    inst.county = "19001";
    inst.livestock = "cattle";
    for (std::size_t i = 0; i < P.size(); ++i) {
        inst.farm_ids.push_back("f" + std::to_string(i));
    }
    inst.heads = P;
    for (std::size_t j = 0; j < Q.size(); ++j) {
        inst.cells.push_back({static_cast<int>(j), 0});
    }
    inst.capacity = Q;
    return inst;
}

} // namespace

TEST_CASE("pearson correlation") {
    CHECK(*pearson({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0));
    CHECK(*pearson({10, 0}, {0, 10}) == doctest::Approx(-1.0));
    const double ma = 10.0 / 3;
    const double cov = (6 - ma) * (5 - ma) + (4 - ma) * (5 - ma) + (0 - ma) * (0 - ma);
    const double va = (6 - ma) * (6 - ma) + (4 - ma) * (4 - ma) + ma * ma;
    const double vb = 2 * (5 - ma) * (5 - ma) + ma * ma;
    CHECK(*pearson({6, 4, 0}, {5, 5, 0}) == doctest::Approx(cov / std::sqrt(va * vb)));
    CHECK(!pearson({1, 1, 1}, {1, 2, 3}).has_value());
}

TEST_CASE("loads and deviations") {
    const std::vector<CellId> cells{{0, 0}, {1, 0}};
    const auto loads = cell_loads(cells, {{1, 0}, {1, 0}, {0, 0}}, {3, 4, 5});
    CHECK(loads == std::vector<double>{5, 7});
    CHECK(max_deviation(loads, {6, 4}) == doctest::Approx(3));
    const auto s = alignment_stats(loads, {6, 4});
    CHECK(s.lambda5 == doctest::Approx(3));
    CHECK(*s.pearson_r == doctest::Approx(-1));
}

TEST_CASE("a perfect packing reaches zero deviation") {
    const auto r = assign_farms_to_cells(make_instance({5, 3, 2}, {5, 5}));
    CHECK(r.lambda5 == doctest::Approx(0).epsilon(1e-9));
    CHECK(r.status == milp::SolveStatus::Optimal);
    REQUIRE(r.lambda5_rescaled.has_value());
    CHECK(*r.lambda5_rescaled == doctest::Approx(0).epsilon(1e-9));
}

TEST_CASE("assignments match exhaustive search and conserve heads") {
    std::mt19937 rng(17);
    for (int iter = 0; iter < 60; ++iter) {
        const std::size_t nf = std::uniform_int_distribution<std::size_t>(1, 5)(rng);
        const std::size_t nc = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
        std::vector<double> P(nf);
        std::vector<double> Q(nc);
        for (auto &p : P) {
            p = std::uniform_int_distribution<int>(1, 60)(rng);
        }
        for (auto &q : Q) {
            q = std::uniform_real_distribution<double>(0, 80)(rng);
        }
        const auto inst = make_instance(P, Q);
        const auto r = assign_farms_to_cells(inst);
        const double total = std::accumulate(P.begin(), P.end(), 0.0);
        const double best = oracle::farms_to_cells_min(P, Q);
        CHECK(r.lambda5 <= best + 1e-4 * total + 1e-9);
        CHECK(r.lambda5 >= best - 1e-9);
        REQUIRE(r.cell_of_farm.size() == nf);
        const auto loads = cell_loads(inst.cells, r.cell_of_farm, P);
        CHECK(std::accumulate(loads.begin(), loads.end(), 0.0) == doctest::Approx(total));
        CHECK(max_deviation(loads, Q) == doctest::Approx(r.lambda5));
    }
}

TEST_CASE("counties without layer cells fall back to the central cell") {
    GridGeometry g;
    g.add_cell({0, 0}, {42.0, -93.0, "19001"});
    g.add_cell({1, 0}, {42.0, -92.9, "19001"});
    g.add_cell({2, 0}, {42.0, -92.8, "19001"});
    auto inst = make_instance({4, 6}, {});
    CHECK_THROWS_AS(assign_farms_to_cells(inst), Error);
    try {
        assign_farms_to_cells(inst);
    } catch (const Error &e) {
        CHECK(e.kind() == ErrorKind::NoCells);
    }
    const auto r = assign_or_fallback(inst, g);
    CHECK(r.fallback);
    for (const auto &c : r.cell_of_farm) {
        CHECK(c == CellId{1, 0});
    }
}
