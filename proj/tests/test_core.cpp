#include "digisim/core.hpp"
#include "digisim/error.hpp"

#include "doctest.h"

#include <random>

using namespace digisim;

namespace {

template <class F> ErrorKind kind_of(F &&f) {
    try {
        f();
    } catch (const Error &e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::IoError;
}

CountTable state_table(std::map<int, CountCell> cells, CountCell total = {}) {
    CountTable t;
    t.level = AdminLevel::State;
    t.region = "19";
    t.livestock = "cattle";
    t.subtype = "all";
    t.by_class = std::move(cells);
    t.total = total;
    return t;
}

} // namespace

TEST_CASE("size class schemes reject overlap and misplaced OPEN classes") {
    CHECK_NOTHROW(SizeClassScheme("c", {{1, 24}, {25, 49}, {50, std::nullopt}}));
    CHECK(kind_of([] { SizeClassScheme("c", {{1, 24}, {20, 49}}); }) == ErrorKind::SchemaError);
    CHECK(kind_of([] { SizeClassScheme("c", {{1, std::nullopt}, {25, 49}}); }) == ErrorKind::SchemaError);
    CHECK(kind_of([] { SizeClassScheme("c", {{25, 49}, {1, 24}}); }) == ErrorKind::SchemaError);
    CHECK(kind_of([] { SizeClassScheme("c", {{30, 20}}); }) == ErrorKind::SchemaError);
    const SizeClassScheme s("c", {{1, 24}, {30, 49}, {50, std::nullopt}});
    CHECK(s.class_of(24) == 0u);
    CHECK(!s.class_of(27).has_value());
    CHECK(s.class_of(5000) == 2u);
}

TEST_CASE("state_of takes the first two characters") {
    CHECK(state_of("19001") == "19");
    CHECK(state_of("01003") == "01");
}

TEST_CASE("align_size_classes merges nested classes") {
    const SizeClassScheme state("cattle", {{1, 999}, {1000, 2499}, {2500, std::nullopt}});
    const SizeClassScheme county("cattle", {{1, 999}, {1000, std::nullopt}});
    const auto t = state_table({{0, {10, 900}}, {1, {3, 4000}}, {2, {1, 3000}}});
    const auto out = align_size_classes(state, county, t);
    CHECK(out.by_class.size() == 2);
    CHECK(out.by_class.at(0) == CountCell{10, 900});
    CHECK(out.by_class.at(1) == CountCell{4, 7000});

    const auto missing = align_size_classes(state, county, state_table({{1, {2, std::nullopt}}, {2, {1, 500}}}));
    CHECK(missing.by_class.at(1) == CountCell{3, std::nullopt});
}

TEST_CASE("align_size_classes refuses straddling classes") {
    const SizeClassScheme state("cattle", {{1, 49}, {50, 150}});
    const SizeClassScheme county("cattle", {{1, 99}, {100, std::nullopt}});
    CHECK(kind_of([&] { align_size_classes(state, county, state_table({{1, {1, 60}}})); }) ==
          ErrorKind::StateClassStraddlesCountyClass);
}

TEST_CASE("align_size_classes propagates MISSING against an enumeration of presence patterns") {
    const SizeClassScheme state("cattle", {{1, 9}, {10, 19}, {20, 29}});
    const SizeClassScheme county("cattle", {{1, 29}});
    for (int mask = 0; mask < 64; ++mask) {
        std::map<int, CountCell> cells;
        Count farms = 0;
        Count heads = 0;
        bool farms_present = true;
        bool heads_present = true;
        for (int k = 0; k < 3; ++k) {
            CountCell c;
            if (mask & (1 << (2 * k))) {
                c.farms = k + 1;
                farms += k + 1;
            } else {
                farms_present = false;
            }
            if (mask & (1 << (2 * k + 1))) {
                c.heads = 10 * (k + 1);
                heads += 10 * (k + 1);
            } else {
                heads_present = false;
            }
            cells[k] = c;
        }
        const auto out = align_size_classes(state, county, state_table(cells));
        const auto &m = out.by_class.at(0);
        CHECK(m.farms.has_value() == farms_present);
        CHECK(m.heads.has_value() == heads_present);
        if (farms_present) {
            CHECK(*m.farms == farms);
        }
        if (heads_present) {
            CHECK(*m.heads == heads);
        }
    }
}

TEST_CASE("derive_bounds from class windows") {
    const SizeClassScheme scheme("cattle", {{1, 9}, {10, 19}, {20, std::nullopt}});
    auto t = state_table({{1, {3, std::nullopt}}}, {3, 40});
    auto b = derive_bounds(t, scheme, {});
    REQUIRE(b.size() == 1);
    CHECK(b[0] == HeadBound{1, 30, 57});

    b = derive_bounds(state_table({{0, {0, std::nullopt}}}, {0, 0}), scheme, {});
    REQUIRE(b.size() == 1);
    CHECK(b[0] == HeadBound{0, 0, 0});
}

TEST_CASE("derive_bounds raises lower bounds from refining tables") {
    const SizeClassScheme scheme("cattle", {{1, 9}, {10, 19}, {20, std::nullopt}});
    auto county = [](Count heads) {
        CountTable c = state_table({{1, {2, heads}}});
        c.level = AdminLevel::County;
        return c;
    };
    std::vector<CountTable> ok{county(20), county(25)};
    auto b = derive_bounds(state_table({{1, {3, std::nullopt}}}, {3, 50}), scheme, ok);
    REQUIRE(b.size() == 1);
    CHECK(b[0] == HeadBound{1, 45, 57});

    std::vector<CountTable> bad{county(40), county(25)};
    CHECK(kind_of([&] { derive_bounds(state_table({{1, {3, std::nullopt}}}, {3, 50}), scheme, bad); }) ==
          ErrorKind::InconsistentBounds);
}

TEST_CASE("derive_bounds returns nothing for a complete table") {
    const SizeClassScheme scheme("cattle", {{1, 9}, {10, std::nullopt}});
    CHECK(derive_bounds(state_table({{0, {2, 10}}, {1, {1, 40}}}, {3, 50}), scheme, {}).empty());
}

TEST_CASE("derive_bounds brackets the true value of random redacted tables") {
    std::mt19937 rng(7);
    const SizeClassScheme scheme("cattle", {{1, 9}, {10, 19}, {20, 49}, {50, std::nullopt}});
    for (int iter = 0; iter < 300; ++iter) {
        std::map<int, CountCell> truth;
        Count total = 0;
        Count total_farms = 0;
        for (int k = 0; k < 4; ++k) {
            const Count farms = std::uniform_int_distribution<Count>(0, 4)(rng);
            const auto &c = scheme.at(static_cast<std::size_t>(k));
            const Count hi = c.w_max.value_or(200);
            Count heads = 0;
            for (Count f = 0; f < farms; ++f) {
                heads += std::uniform_int_distribution<Count>(c.w_min, hi)(rng);
            }
            truth[k] = {farms, heads};
            total += heads;
            total_farms += farms;
        }
        auto redacted = truth;
        for (auto &[k, c] : redacted) {
            if (rng() % 2) {
                c.heads.reset();
            }
        }
        const auto t = state_table(redacted, {total_farms, std::nullopt});
        for (const auto &b : derive_bounds(t, scheme, {}, total)) {
            const Count v = b.class_index == kTotalClass ? total : *truth.at(b.class_index).heads;
            CHECK(b.lower <= v);
            CHECK(v <= b.upper);
        }
    }
}

TEST_CASE("OPEN class cap dominates the enclosing total") {
    CHECK(resolve_open_cap(1000, 2, std::nullopt) == 200000);
    CHECK(resolve_open_cap(1000, 2, 5'000'000) == 5'000'000);
    CHECK(class_upper_heads({10, 19}, 3, std::nullopt) == 57);
}

TEST_CASE("grid geometry and layers") {
    GridGeometry g;
    g.add_cell({0, 0}, {42.0, -93.0, "19001"});
    g.add_cell({1, 0}, {42.0, -92.9, "19001"});
    g.add_cell({2, 0}, {42.0, -92.8, "19001"});
    CHECK(kind_of([&] { g.add_cell({0, 0}, {1, 1, "19003"}); }) == ErrorKind::SchemaError);
    CHECK(g.central_cell("19001") == CellId{1, 0});
    CHECK(!g.central_cell("19003").has_value());
    CHECK(g.resolution_arcmin() == 5.0);

    GridLayer l(LayerKey{LayerKind::Glw, "cattle", "", 0});
    l.add({5, 9}, 120.5);
    l.add({5, 9}, 9.5);
    CHECK(l.value({5, 9}) == 130.0);
    CHECK(l.value({0, 0}) == 0.0);
    CHECK(kind_of([&] { l.add({1, 1}, -1); }) == ErrorKind::NegativeValue);
}

TEST_CASE("farm totals sum subtypes") {
    FarmRecord f;
    f.heads_by_subtype = {{"beef", 10}, {"milk", 5}};
    CHECK(f.total_heads() == 15);
}
