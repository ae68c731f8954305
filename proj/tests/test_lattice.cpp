#include <doctest.h>
#include <stdexcept>

#include <cmath>
#include <set>

#include "zrp/lattice.hpp"

using namespace zrp;

TEST_SUITE("lattice") {
    TEST_CASE("site count and neighbour multiplicity") {
        for (int d = 1; d <= 3; ++d)
            for (int N : {2, 3, 5}) {
                TorusLattice L(d, N);
                CHECK(L.site_count() == static_cast<Site>(std::pow(N, d)));
                for (Site x = 0; x < L.site_count(); ++x) {
                    int total = 0;
                    for (Site y = 0; y < L.site_count(); ++y) total += L.edge_multiplicity(x, y);
                    CHECK(total == 2 * d);
                }
            }
        TorusLattice two(1, 2);
        CHECK(two.edge_multiplicity(0, 1) == 2);
        CHECK(two.neighbor(0, 0) == two.neighbor(0, 1));
    }

    TEST_CASE("coordinates round trip") {
        TorusLattice L(3, 4);
        for (Site x = 0; x < L.site_count(); ++x) CHECK(L.index(L.coords(x)) == x);
        CHECK(L.index({0, 0, 1}) == 1);  // last axis fastest
        CHECK_THROWS(TorusLattice(1, 1));
        CHECK_THROWS(TorusLattice(4, 2));
    }

    TEST_CASE("lattice distance") {
        TorusLattice L1(1, 5);
        CHECK(lattice_distance(L1, 2, 2) == 0);
        CHECK(lattice_distance(L1, 0, 3) == 2);
        TorusLattice L2(2, 4);
        CHECK(lattice_distance(L2, L2.index({0, 0}), L2.index({2, 1})) == 3);
        for (Site x = 0; x < L2.site_count(); ++x)
            for (Site y = 0; y < L2.site_count(); ++y) {
                CHECK(lattice_distance(L2, x, y) == lattice_distance(L2, y, x));
                CHECK(lattice_distance(L2, x, y) <= 2 * 4);
            }
    }

    TEST_CASE("nearly dyadic partition") {
        auto p5 = nearly_dyadic_1d(5);
        REQUIRE(p5.size() == 4);
        CHECK(p5[0] == Interval{0, 2});
        CHECK(p5[1] == Interval{2, 1});
        CHECK(p5[3] == Interval{4, 1});
        auto p8 = nearly_dyadic_1d(8);
        CHECK(p8.size() == 8);
        for (const auto& iv : p8) CHECK(iv.length == 1);
        auto p2 = nearly_dyadic_1d(2);
        REQUIRE(p2.size() == 2);
        CHECK(p2[0].length == 1);
        CHECK_THROWS(nearly_dyadic_1d(1));
    }

    TEST_CASE("q formula and clamp") {
        TorusLattice L(1, 64);
        auto deep = build_partition_family(L, std::ldexp(1.0, -40), 1.0);
        CHECK(deep.q == 5);
        CHECK_FALSE(deep.q_clamped);
        for (int k = 0; k + 1 < deep.K; ++k) CHECK(deep.scales[k] == (std::int64_t{1} << (5 * k)));
        auto shallow = build_partition_family(L, 0.5, 1.0);
        CHECK(shallow.q_raw == 0);
        CHECK(shallow.q == 1);
        CHECK(shallow.q_clamped);
        for (int k = 0; k < shallow.K; ++k) CHECK(shallow.scales[k] == (std::int64_t{1} << k));
        CHECK_THROWS(build_partition_family(L, NAN, 1.0));
        CHECK_THROWS(build_partition_family(L, 0.5, INFINITY));
    }

    TEST_CASE("family invariants across sizes and parameters") {
        for (int N : {2, 3, 5, 7, 8, 12, 31, 64, 100}) {
            for (int d = 1; d <= 2; ++d) {
                if (d == 2 && N > 31) continue;
                for (double chi : {0.5, 1.0 / 16, std::ldexp(1.0, -40)})
                    for (double delta : {0.25, 1.0, 2.0}) {
                        auto fam = build_partition_family(TorusLattice(d, N), chi, delta);
                        auto audit = audit_partition_family(fam);
                        INFO("N=" << N << " d=" << d << " chi=" << chi << " delta=" << delta);
                        CHECK(audit.ok);
                        CHECK(fam.scales.front() == 1);
                        CHECK(fam.levels.back().block_count() == 1);
                        CHECK(fam.weight.ratio() <= std::pow(2.0, d) + 1e-12);
                    }
            }
        }
    }

    TEST_CASE("dyadic lattice has unit weight") {
        auto fam = build_partition_family(TorusLattice(2, 16), 0.1, 1.0);
        for (Site x = 0; x < fam.lattice.site_count(); ++x) CHECK(fam.weight.at(x) == 1.0);
    }

    TEST_CASE("refinement map") {
        TorusLattice L(1, 8);
        auto fam = build_partition_family(L, 0.5, 1.0);
        auto id = refinement_map(fam.levels[0], fam.levels[0]);
        for (std::size_t b = 0; b < id.size(); ++b) CHECK(id[b] == static_cast<std::int64_t>(b));
        auto map = refinement_map(fam.levels[0], fam.levels[1]);
        for (Site x = 0; x < 8; ++x) CHECK(map[x] == x / 2);
        Partition odd(L, 2, {AxisPartition{{0, 3}, {3, 2}, {5, 3}}});
        CHECK_THROWS_AS(refinement_map(fam.levels[1], odd), std::invalid_argument);
    }

    TEST_CASE("adjacency is symmetric and irreflexive") {
        auto fam = build_partition_family(TorusLattice(2, 8), 0.5, 1.0);
        const auto& P = fam.levels[1];
        std::set<std::pair<std::int64_t, std::int64_t>> seen;
        for (auto [a, b] : P.adjacent_pairs()) {
            CHECK(a < b);
            CHECK(P.adjacent(a, b));
            CHECK(P.adjacent(b, a));
            CHECK(seen.insert({a, b}).second);
        }
        for (std::int64_t b = 0; b < P.block_count(); ++b) CHECK_FALSE(P.adjacent(b, b));
        CHECK(P.adjacent_pairs().size() == 32);  // 4x4 block torus: 2 * 16 bonds
    }

    TEST_CASE("family serialization round trip") {
        auto fam = build_partition_family(TorusLattice(2, 12), 1.0 / 32, 1.0);
        auto back = deserialize_partition_family(serialize_partition_family(fam));
        CHECK(back.K == fam.K);
        CHECK(back.scales == fam.scales);
        for (int k = 0; k < fam.K; ++k) CHECK(back.levels[k].axes() == fam.levels[k].axes());
        CHECK(serialize_partition_family(back) == serialize_partition_family(fam));
    }
}
