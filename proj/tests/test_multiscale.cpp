#include <doctest.h>
#include <stdexcept>

#include <cmath>

#include "zrp/equilibrium.hpp"
#include "zrp/multiscale.hpp"
#include "zrp/orlicz.hpp"

using namespace zrp;

namespace {

LatticeBox interval_box(int start, int length) { return LatticeBox{{Interval{start, length}}}; }

}  // namespace

TEST_SUITE("multiscale") {
    TEST_CASE("alpha average") {
        TorusLattice L(1, 4);
        auto w = Weighting::uniform(L);
        Configuration eta(L, 1.0, {0, 2, 3, 3});
        CHECK(alpha_average(eta, interval_box(0, 2), w, 2.0) == doctest::Approx(std::sqrt(2.0)));
        CHECK(alpha_average(eta, interval_box(2, 2), w, 1.5) == doctest::Approx(3.0));
        CHECK(alpha_average(eta, interval_box(1, 1), w, 2.0) == doctest::Approx(2.0));
        // weighted mean with non-uniform weights
        Weighting w2(L, {{1.0, 3.0, 1.0, 1.0}});
        CHECK(alpha_average(eta, interval_box(0, 2), w2, 1.0) == doctest::Approx(1.5));
    }

    TEST_CASE("alpha average is monotone, homogeneous and nests") {
        CounterRng rng(1, 0);
        TorusLattice L(1, 16);
        Weighting w(L, {std::vector<double>{1, 2, 1, 3, 1, 1, 2, 2, 1, 1, 1, 4, 1, 1, 2, 1}});
        auto eta = ProductMeasure::constant(L, 2.0, 0.25, 1.0).sample(rng);
        auto box = interval_box(0, 8);
        auto bigger = eta;
        bigger.counts[3] += 2;
        CHECK(alpha_average(bigger, box, w, 2.0) >= alpha_average(eta, box, w, 2.0));
        Configuration scaled(L, 0.75, eta.counts);
        CHECK(alpha_average(scaled, box, w, 2.0) == doctest::Approx(3.0 * alpha_average(eta, box, w, 2.0)));
        Partition P(L, 2, {AxisPartition{{0, 2}, {2, 2}, {4, 2}, {6, 2}, {8, 2}, {10, 2}, {12, 2}, {14, 2}}});
        auto lam = block_alpha_averages(eta, P, w, 2.0);
        double num = 0, den = 0;
        for (auto b : blocks_inside(P, box)) {
            double wb = w.box_weight(P.block(b));
            num += wb * lam[static_cast<std::size_t>(b)] * lam[static_cast<std::size_t>(b)];
            den += wb;
        }
        CHECK(std::sqrt(num / den) == doctest::Approx(alpha_average(eta, box, w, 2.0)).epsilon(1e-13));
    }

    TEST_CASE("coarse gradient") {
        TorusLattice L(1, 8);
        auto w = Weighting::uniform(L);
        Partition P(L, 2, {AxisPartition{{0, 2}, {2, 2}, {4, 2}, {6, 2}}});
        Configuration flat(L, 0.5, std::vector<std::uint32_t>(8, 3));
        CHECK(coarse_gradient_sq(flat, interval_box(0, 4), P, w, 2.0) == 0.0);
        // Lambda = (1, 2) on two fine blocks of side 2 inside a coarse block of side 4:
        // (2/4)^{-1} (1 - 2)^2 = 2
        Configuration eta(L, 1.0, {1, 1, 2, 2, 0, 0, 0, 0});
        CHECK(coarse_gradient_sq(eta, interval_box(0, 4), P, w, 2.0) == doctest::Approx(2.0));
        // direct values route: alpha = 2 so Lambda^{alpha/2} = Lambda
        CHECK(coarse_gradient_sq_from_values({1.0, 4.0}, {0, 1}, Partition(L, 2, {AxisPartition{{0, 2}, {2, 6}}}), 4.0, 2.0) ==
              doctest::Approx(2.0 * 9.0));
        // quadratic response to a single-block perturbation
        std::vector<double> base(4, 1.0);
        double g1 = coarse_gradient_sq_from_values({1.0, 1.0 + 1e-3, 1.0, 1.0}, {0, 1, 2, 3}, P, 8.0, 2.0);
        double g2 = coarse_gradient_sq_from_values({1.0, 1.0 + 2e-3, 1.0, 1.0}, {0, 1, 2, 3}, P, 8.0, 2.0);
        CHECK(g2 / g1 == doctest::Approx(4.0).epsilon(1e-9));
        CHECK_THROWS(coarse_gradient_sq(eta, interval_box(1, 4), P, w, 2.0));
    }

    TEST_CASE("discrete Sobolev examples") {
        BoxField c{{6}, std::vector<double>(6, 1.3)};
        auto r = discrete_sobolev_check(c, 0.5, 1.25, 1.0);
        CHECK(r.lhs == doctest::Approx(1.69));
        CHECK(r.pass);
        BoxField one{{1}, {2.0}};
        auto t = sobolev_terms(one, 1.25);
        CHECK(t.gradient == 0.0);
        CHECK(t.lhs == doctest::Approx(t.l2_sq));
        CHECK(discrete_sobolev_check(one, 0.1, 1.25, 0.0).pass);
        BoxField two{{2, 2}, {1.0, 0.0, 0.0, 0.0}};
        auto t2 = sobolev_terms(two, 1.0);
        CHECK(t2.gradient == doctest::Approx(2.0));  // l^0 times two bonds
        CHECK(t2.l2_sq == doctest::Approx(0.25));
    }

    TEST_CASE("Sobolev calibration then audit") {
        double C = 0;
        for (std::uint64_t i = 0; i < 2000; ++i) {
            CounterRng rng(2, i);
            int d = 1 + static_cast<int>(rng.below(2));
            auto f = random_box_field(rng, random_box_sides(rng, d, 4, 32, 2.0));
            for (double lam : {0.1, 1.0}) C = std::max(C, sobolev_constant_needed(f, lam, default_sobolev_exponent(d)));
        }
        CHECK(std::isfinite(C));
        int failures = 0;
        for (std::uint64_t i = 0; i < 1000; ++i) {
            CounterRng rng(3, i);
            int d = 1 + static_cast<int>(rng.below(2));
            auto f = random_box_field(rng, random_box_sides(rng, d, 4, 32, 2.0));
            for (double lam : {0.1, 1.0}) failures += !discrete_sobolev_check(f, lam, default_sobolev_exponent(d), 2.0 * C).pass;
        }
        CHECK(failures == 0);
    }

    TEST_CASE("one-step quantity") {
        TorusLattice L(1, 4);
        auto w = Weighting::uniform(L);
        Partition P(L, 2, {AxisPartition{{0, 2}, {2, 2}}});
        Configuration flat(L, 1.0, {2, 2, 2, 2});
        CHECK(delta_btilde(flat, interval_box(0, 4), P, w, 2.0, 2.0, 0.5) == 0.0);
        // Lambda^2 = (0, 2) on two blocks: l^2 norm sqrt(2), torus average 1
        Configuration eta(L, 1.0, {0, 0, 1, 1});
        Configuration e2(L, std::sqrt(2.0), {0, 0, 1, 1});
        CHECK(delta_btilde(e2, interval_box(0, 4), P, w, 2.0, 2.0, 0.0) == doctest::Approx(std::sqrt(2.0) - 1.0));
        Partition whole(L, 4, {AxisPartition{{0, 4}}});
        CHECK(delta_btilde(eta, interval_box(0, 4), whole, w, 2.0, 2.0, 0.3) == 0.0);
    }

    TEST_CASE("lambda schedule") {
        for (int N : {8, 64, 256}) {
            auto fam = build_partition_family(TorusLattice(1, N), 1.0 / N, 1.0);
            auto s = lambda_schedule(fam);
            CHECK(s.lambda.size() == static_cast<std::size_t>(fam.K - 1));
            CHECK(s.all_in_unit_interval);
            for (double l : s.lambda) CHECK((l > 0.0 && l <= 1.0));
            if (!s.lambda.empty()) CHECK(s.lambda[0] == doctest::Approx(1.0));
            double prod = 1;
            for (double l : s.lambda) prod *= 1 + l;
            CHECK(s.max_partial_product <= prod + 1e-12);
        }
    }

    TEST_CASE("telescope identity") {
        auto c = construct_phi({{64, 1.0 / 64}}, 1.0, default_sobolev_exponent(1), 1);
        TorusLattice L(1, 64);
        auto fam = build_partition_family(L, 1.0 / 64, 1.0);
        auto sched = lambda_schedule(fam);
        Configuration flat(L, 0.5, std::vector<std::uint32_t>(64, 4));
        auto rf = telescope(flat, fam, c.corrected, sched, 2.0);
        CHECK(rf.residual < 1e-10);
        for (std::size_t k = 1; k < rf.Z.size(); ++k) CHECK(rf.Z[k] == doctest::Approx(rf.Z[0]).epsilon(1e-9));
        for (std::uint64_t t = 0; t < 20; ++t) {
            CounterRng rng(4, t);
            auto eta = ProductMeasure::constant(L, 2.0, 1.0 / 64, 1.0).sample(rng);
            auto r = telescope(eta, fam, c.corrected, sched, 2.0);
            CHECK(r.residual < 1e-10);
            CHECK(r.top_level_identity_error < 1e-8);
            CHECK(r.first_level_factor >= std::pow(4.0, -1.0));
            CHECK(r.first_level_factor <= 2.0);
            CHECK(r.top_level_factor >= 0.5);
            CHECK(r.top_level_factor <= 2.0);
        }
    }

    TEST_CASE("nonlinear averaging error") {
        TorusLattice L(1, 32);
        Configuration flat(L, 0.25, std::vector<std::uint32_t>(32, 5));
        for (double eps : {0.01, 0.1, 0.3}) CHECK(vna_snapshot(flat, eps, 2.0) == doctest::Approx(0.0).scale(1.0));
        CounterRng rng(5, 0);
        auto eta = ProductMeasure::constant(L, 2.0, 0.25, 1.0).sample(rng);
        CHECK(vna_snapshot(eta, 0.5 / 32, 2.0) == doctest::Approx(0.0).scale(1.0));
        CHECK(vna_snapshot(eta, 0.2, 2.0) > 0.0);
        for (double M : {0.5, 1.0, 2.0}) {
            double full = vna_snapshot(eta, 0.2, 2.0), trunc = vna_snapshot(eta, 0.2, 2.0, M);
            CHECK(std::abs(full - trunc) <= truncation_tail(eta, 0.2, 2.0, M) + 1e-12);
        }
        std::vector<double> times{0.0, 0.5, 1.0};
        std::vector<Configuration> snaps{eta, eta, eta};
        CHECK(vna_statistic(times, snaps, 0.2, 2.0) == doctest::Approx(vna_snapshot(eta, 0.2, 2.0)));
        CHECK_THROWS(vna_statistic({}, {}, 0.2, 2.0));
    }

    TEST_CASE("entropy dissipation") {
        TorusLattice L(1, 2);
        CHECK(entropy_dissipation_statistic(Configuration(L, 1.0, {0, 2}), 2.0) == doctest::Approx(16.0));
        CHECK(entropy_dissipation_statistic(Configuration(L, 1.0, {2, 2}), 2.0) == 0.0);
        CounterRng rng(6, 0);
        TorusLattice L2(2, 5);
        auto eta = ProductMeasure::constant(L2, 2.0, 0.5, 1.0).sample(rng);
        double base = entropy_dissipation_statistic(eta, 2.0);
        for (const auto& g : symmetry_group(L2)) CHECK(entropy_dissipation_statistic(apply_symmetry(eta, g), 2.0) == doctest::Approx(base).epsilon(1e-12));
    }
}
