#include <doctest.h>
#include <stdexcept>

#include <cmath>

#include "zrp/orlicz.hpp"
#include "zrp/rng.hpp"

using namespace zrp;

namespace {

// Random contiguous partition of 0..N-1 into intervals of length at most `max_len`.
AxisPartition random_axis(CounterRng& rng, int N, int max_len) {
    AxisPartition out;
    int s = 0;
    while (s < N) {
        int len = std::min(N - s, 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_len))));
        out.push_back({s, len});
        s += len;
    }
    return out;
}

// Coarsening of `fine` by merging consecutive runs of intervals.
AxisPartition merge_axis(CounterRng& rng, const AxisPartition& fine) {
    AxisPartition out;
    std::size_t i = 0;
    while (i < fine.size()) {
        std::size_t take = 1 + rng.below(3);
        Interval iv{fine[i].start, 0};
        for (std::size_t k = 0; k < take && i < fine.size(); ++k, ++i) iv.length += fine[i].length;
        out.push_back(iv);
    }
    return out;
}

}  // namespace

TEST_SUITE("orlicz") {
    TEST_CASE("power Young functions") {
        auto sq = YoungFunction::power(2.0);
        CHECK(sq(3.0) == doctest::Approx(9.0));
        CHECK(sq.inverse(16.0) == doctest::Approx(4.0));
        CHECK(sq(-2.0) == doctest::Approx(4.0));
        CHECK(sq.strict());
        CHECK_FALSE(YoungFunction::power(1.0).strict());
        auto dual = sq.dual();
        CHECK(dual(2.0) == doctest::Approx(1.0));  // (x/2)^2
        CHECK(sq.bidual_error() < 1e-6);
        CHECK(sq.convexity_defect() >= -1e-10);
    }

    TEST_CASE("tabulated Young function matches its source") {
        // (1 + u) log(1 + u) - u has dual e^y - 1 - y
        auto phi = YoungFunction::from_function([](double u) { return (1 + u) * std::log1p(u) - u; },
                                                [](double u) { return std::log1p(u); }, "entropy");
        CHECK(phi.strict());
        CHECK(phi.bidual_error() < 1e-6);
        CHECK(phi(1.0) == doctest::Approx(2 * std::log(2.0) - 1).epsilon(1e-12));
        CHECK(phi.inverse(phi(2.5)) == doctest::Approx(2.5).epsilon(1e-9));
        auto psi = phi.dual();
        for (double y : {0.1, 1.0, 5.0, 20.0}) CHECK(psi(y) == doctest::Approx(std::expm1(y) - y).epsilon(1e-6));
        auto cosh = YoungFunction::from_function([](double u) { return std::cosh(u) - 1.0; }, [](double u) { return std::sinh(u); },
                                                 "cosh");
        CHECK_FALSE(cosh.strict());  // overflows on the grid
    }

    TEST_CASE("Orlicz norm examples") {
        std::vector<double> w{1.0, 1.0};
        CHECK(orlicz_norm({3.0, 4.0}, w, YoungFunction::power(2.0)) == doctest::Approx(std::sqrt(12.5)).epsilon(1e-10));
        CHECK(orlicz_norm({3.0, -5.0, 1.0}, {1.0, 1.0, 1.0}, YoungFunction::power(1.0)) == doctest::Approx(3.0).epsilon(1e-10));
        CHECK(orlicz_norm({2.5, 2.5, 2.5}, {1.0, 2.0, 3.0}, YoungFunction::power(2.0)) == doctest::Approx(2.5).epsilon(1e-10));
        CHECK(orlicz_norm({0.0, 0.0}, w, YoungFunction::power(2.0)) == 0.0);
        CHECK(orlicz_norm({3.0, 4.0}, w, YoungFunction::power(2.0)) == doctest::Approx(lp_norm({3.0, 4.0}, w, 2.0)).epsilon(1e-10));
    }

    TEST_CASE("homogeneity and monotonicity in the Young function") {
        CounterRng rng(5, 0);
        auto small = YoungFunction::power(1.5);
        auto big = YoungFunction::from_function([](double u) { return std::pow(u, 1.5) + u * u; },
                                                [](double u) { return 1.5 * std::sqrt(u) + 2 * u; }, "sum");
        for (int t = 0; t < 100; ++t) {
            std::vector<double> h(8), w(8);
            for (auto& v : h) v = 10 * rng.uniform() - 5;
            for (auto& v : w) v = 0.1 + rng.uniform();
            double c = 20 * rng.uniform() - 10;
            std::vector<double> ch(h);
            for (auto& v : ch) v *= c;
            double n = orlicz_norm(h, w, big);
            CHECK(std::abs(orlicz_norm(ch, w, big) - std::abs(c) * n) <= 1e-9 * std::abs(c) * n + 1e-12);
            CHECK(orlicz_norm(h, w, small) <= n * (1 + 1e-10));
        }
    }

    TEST_CASE("Lipschitz truncation") {
        CHECK(lipschitz_truncation(3.0, 2.0, 2.0) == doctest::Approx(8.0));
        CHECK(lipschitz_truncation(1.5, 2.0, 2.0) == 2.25);
        const double h = 1e-7, M = 2.0, a = 2.5;
        double left = (lipschitz_truncation(M, M, a) - lipschitz_truncation(M - h, M, a)) / h;
        double right = (lipschitz_truncation(M + h, M, a) - lipschitz_truncation(M, M, a)) / h;
        CHECK(left == doctest::Approx(a * std::pow(M, a - 1)).epsilon(1e-5));
        CHECK(right == doctest::Approx(a * std::pow(M, a - 1)).epsilon(1e-5));
    }

    TEST_CASE("construction on a single entry") {
        auto c = construct_phi({{2, 0.5}}, 1.0, default_sobolev_exponent(1), 1);
        CHECK(c.growth_ok);
        CHECK(c.scale_ok);
        CHECK(c.convexity_ok);
        CHECK(c.theta_convex);
        CHECK(c.ordering);
        CHECK(c.strict);
        CHECK(c.bidual_error < 1e-6);
        CHECK(c.corrected.theta_convex(c.p));
    }

    TEST_CASE("construction on a sequence chi = 1/N") {
        std::vector<YoungEntry> entries;
        for (int N = 2; N <= 64; ++N) entries.push_back({N, 1.0 / N});
        auto c = construct_phi(entries, 1.0, default_sobolev_exponent(1), 1);
        REQUIRE(c.scale_value.size() == entries.size());
        for (std::size_t i = 0; i < entries.size(); ++i) {
            INFO("N=" << entries[i].N);
            CHECK(c.scale_value[i] <= c.scale_bound[i] * (1 + 1e-9));
        }
        CHECK(c.all_pass());
        CHECK_THROWS(construct_phi({{2, 1.5}}, 1.0, 1.5, 1));
    }

    TEST_CASE("consistency inequality") {
        auto c = construct_phi({{2, 0.5}, {4, 0.25}}, 1.0, default_sobolev_exponent(1), 1);
        const double p = c.p;
        TorusLattice L(1, 24);
        auto w = Weighting::uniform(L);
        CounterRng r1(1, 0);
        Partition P(L, 1, {random_axis(r1, 24, 4)});
        std::vector<double> h(static_cast<std::size_t>(P.block_count()));
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = static_cast<double>(i % 5) - 2.0;
        auto same = consistency_check(h, P, P, w, c.corrected, p);
        CHECK(same.lhs == doctest::Approx(same.rhs).epsilon(1e-9));
        std::vector<double> cst(h.size(), 1.7);
        CounterRng r0(2, 0);
        Partition Q(L, 2, {merge_axis(r0, P.axes()[0])});
        auto eq = consistency_check(cst, P, Q, w, c.corrected, p);
        CHECK(eq.lhs == doctest::Approx(eq.rhs).epsilon(1e-9));
        // uncertified Young functions are rejected
        auto cosh = YoungFunction::from_function([](double u) { return std::cosh(u) - 1.0; }, [](double u) { return std::sinh(u); }, "cosh");
        CHECK_THROWS(consistency_check(h, P, Q, w, cosh, p));

        int failures = 0;
        for (std::uint64_t t = 0; t < 1000; ++t) {
            CounterRng rng(3, t);
            int d = 1 + static_cast<int>(rng.below(2));
            int N = d == 1 ? 8 + static_cast<int>(rng.below(25)) : 4 + static_cast<int>(rng.below(5));
            TorusLattice Lt(d, N);
            std::vector<AxisPartition> fine, coarse;
            std::vector<std::vector<double>> factors;
            for (int a = 0; a < d; ++a) {
                fine.push_back(random_axis(rng, N, 3));
                coarse.push_back(merge_axis(rng, fine.back()));
                std::vector<double> f(N);
                for (auto& v : f) v = 0.5 + rng.uniform();
                factors.push_back(f);
            }
            Partition Pf(Lt, 1, fine), Pc(Lt, 2, coarse);
            Weighting wt(Lt, factors);
            std::vector<double> ht(static_cast<std::size_t>(Pf.block_count()));
            double scale = std::exp(6 * rng.uniform() - 3);
            for (auto& v : ht) v = scale * (rng.uniform() < 0.2 ? 10 * rng.uniform() : rng.uniform());
            failures += !consistency_check(ht, Pf, Pc, wt, c.corrected, p).pass;
        }
        CHECK(failures == 0);
    }

    TEST_CASE("interpolation inequality") {
        auto c = construct_phi({{2, 0.5}, {4, 0.25}}, 1.0, default_sobolev_exponent(1), 1);
        for (double alpha : {1.5, 2.0}) {
            const double b = 1.0, delta = 0.5;
            auto bound = interpolation_bound(c.corrected, b, delta, alpha);
            CHECK(bound.check(std::vector<double>(16, 0.0)).pass);
            auto flat = bound.check(std::vector<double>(16, b));
            CHECK(flat.pass);
            CHECK(std::pow(b, alpha) <= bound.z);
            int failures = 0;
            for (std::uint64_t t = 0; t < 1000; ++t) {
                CounterRng rng(4, t);
                std::size_t n = 4 + rng.below(60);
                std::vector<double> u(n);
                double s = 0;
                for (auto& v : u) s += (v = rng.uniform() < 0.1 ? std::exp(8 * rng.uniform()) : rng.uniform());
                for (auto& v : u) v *= b * static_cast<double>(n) / s;  // mean exactly b
                failures += !bound.check(u).pass;
            }
            CHECK(failures == 0);
        }
        CHECK_THROWS(interpolation_bound(YoungFunction::power(1.0), 1.0, 0.5, 2.0));
    }
}
