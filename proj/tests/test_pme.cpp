#include <doctest.h>
#include <stdexcept>

#include <cmath>
#include <numbers>

#include "zrp/equilibrium.hpp"
#include "zrp/pme.hpp"

using namespace zrp;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Heat semigroup for u_t = u_xx / 2 via a naive DFT of the cell values.
GridField spectral_heat(const GridField& u0, double t) {
    const int M = u0.M;
    GridField out(1, M);
    std::vector<double> re(M), im(M);
    for (int k = 0; k < M; ++k) {
        for (int j = 0; j < M; ++j) {
            re[k] += u0.values[j] * std::cos(kTwoPi * k * j / M);
            im[k] -= u0.values[j] * std::sin(kTwoPi * k * j / M);
        }
        int freq = k <= M / 2 ? k : k - M;
        double decay = std::exp(-0.5 * kTwoPi * kTwoPi * freq * freq * t);
        re[k] *= decay;
        im[k] *= decay;
    }
    for (int j = 0; j < M; ++j) {
        double v = 0;
        for (int k = 0; k < M; ++k) v += re[k] * std::cos(kTwoPi * k * j / M) - im[k] * std::sin(kTwoPi * k * j / M);
        out.values[j] = v / M;
    }
    return out;
}

}  // namespace

TEST_SUITE("pme") {
    TEST_CASE("constants are fixed points") {
        GridField u(2, 16, 1.7);
        auto v = step_pme(u, 0.5 * pme_cfl_bound(u, 2.0), 2.0);
        for (double x : v.values) CHECK(x == 1.7);
        auto sol = solve_pme(GridField(1, 32, 0.4), 0.05, 3.0, {0.01, 0.05});
        for (const auto& f : sol.frames)
            for (double x : f.values) CHECK(x == doctest::Approx(0.4).epsilon(1e-14));
    }

    TEST_CASE("CFL violations are rejected") {
        GridField u(1, 32, 1.0);
        CHECK_THROWS_AS(step_pme(u, 2.0 * pme_cfl_bound(u, 2.0), 2.0), std::domain_error);
        CHECK_THROWS(pme_cfl_bound(u, 0.5));
    }

    TEST_CASE("heat equation Fourier oracle") {
        auto u0 = GridField::sample(1, 256, [](const std::vector<double>& x) { return 1.0 + 0.1 * std::cos(kTwoPi * x[0]); });
        auto sol = solve_pme(u0, 0.05, 1.0);
        // amplitude of the first cosine mode
        double amp = 0, amp0 = 0;
        for (int j = 0; j < 256; ++j) {
            amp += 2.0 / 256 * sol.final.values[j] * std::cos(kTwoPi * (j + 0.5) / 256);
            amp0 += 2.0 / 256 * u0.values[j] * std::cos(kTwoPi * (j + 0.5) / 256);
        }
        CHECK(amp / amp0 == doctest::Approx(std::exp(-0.5 * kTwoPi * kTwoPi * 0.05)).epsilon(1e-3));

        auto bumpy = GridField::sample(1, 256, [](const std::vector<double>& x) {
            return 1.0 + 0.5 * std::sin(kTwoPi * x[0]) + 0.2 * std::cos(3 * kTwoPi * x[0]);
        });
        auto s2 = solve_pme(bumpy, 0.1, 1.0);
        CHECK(l1_distance(s2.final, spectral_heat(bumpy, 0.1)) < 1e-3);
    }

    TEST_CASE("mass conservation") {
        CounterRng rng(1, 0);
        GridField u(1, 64);
        for (auto& v : u.values) v = rng.uniform() * 3;
        const double m0 = u.mass();
        const double dt = 0.9 * pme_cfl_bound(u, 2.0);
        for (int i = 0; i < 100000; ++i) u = step_pme(u, dt, 2.0);
        CHECK(std::abs(u.mass() - m0) / m0 < 1e-10);
        for (double v : u.values) CHECK(v >= 0.0);
        GridField u2(2, 32);
        for (auto& v : u2.values) v = rng.uniform();
        auto s = solve_pme(u2, 0.01, 2.0, {0.005, 0.01});
        for (double m : s.masses) CHECK(std::abs(m - u2.mass()) / u2.mass() < 1e-12);
    }

    TEST_CASE("comparison principle") {
        for (std::uint64_t t = 0; t < 20; ++t) {
            CounterRng rng(2, t);
            GridField u(1, 48), v(1, 48);
            for (std::size_t i = 0; i < u.size(); ++i) {
                u.values[i] = 2 * rng.uniform();
                v.values[i] = u.values[i] + rng.uniform();
            }
            double dt = 0.9 * std::min(pme_cfl_bound(u, 2.0), pme_cfl_bound(v, 2.0));
            for (int s = 0; s < 200; ++s) {
                u = step_pme(u, dt, 2.0);
                v = step_pme(v, dt, 2.0);
            }
            for (std::size_t i = 0; i < u.size(); ++i) CHECK(u.values[i] <= v.values[i] + 1e-14);
        }
    }

    TEST_CASE("support grows for a compact bump") {
        auto bump = [](const std::vector<double>& x) { return std::max(0.0, 1.0 - 100.0 * (x[0] - 0.5) * (x[0] - 0.5)); };
        std::vector<double> times{0.0005, 0.001, 0.002, 0.004};
        auto coarse = solve_pme(GridField::sample(1, 256, bump), 0.004, 2.0, times);
        auto fine = solve_pme(GridField::sample(1, 1024, bump), 0.004, 2.0, times);
        auto width = [](const GridField& g) {
            int n = 0;
            for (double v : g.values) n += v > 1e-12;
            return static_cast<double>(n) / g.M;
        };
        double prev_c = width(GridField::sample(1, 256, bump)), prev_f = width(GridField::sample(1, 1024, bump));
        for (std::size_t k = 0; k < times.size(); ++k) {
            CHECK(width(coarse.frames[k]) >= prev_c);
            CHECK(width(fine.frames[k]) >= prev_f);
            prev_c = width(coarse.frames[k]);
            prev_f = width(fine.frames[k]);
            CHECK(l1_distance_restricted(coarse.frames[k], fine.frames[k]) < 2e-2);
        }
        CHECK(prev_f > width(GridField::sample(1, 1024, bump)));
    }

    TEST_CASE("self-convergence") {
        auto u0 = [](const std::vector<double>& x) { return 1.0 + 0.5 * std::sin(kTwoPi * x[0]); };
        auto ref = solve_pme(GridField::sample(1, 512, u0), 0.02, 2.0).final;
        double e64 = l1_distance_restricted(solve_pme(GridField::sample(1, 64, u0), 0.02, 2.0).final, ref);
        double e128 = l1_distance_restricted(solve_pme(GridField::sample(1, 128, u0), 0.02, 2.0).final, ref);
        CHECK(e128 <= 0.5 * e64 * 1.05);
    }

    TEST_CASE("interpolation") {
        auto g = GridField::sample(1, 8, [](const std::vector<double>& x) { return x[0]; });
        CHECK(g.interpolate({0.5 / 8}) == doctest::Approx(0.5 / 8));
        CHECK(g.interpolate({1.0 / 8}) == doctest::Approx(1.0 / 8));
        // periodic wrap between the last and first cells
        CHECK(g.interpolate({0.0}) == doctest::Approx(0.5 * (7.5 / 8 + 0.5 / 8)));
    }

    TEST_CASE("hydrodynamic comparison") {
        TorusLattice L(1, 64);
        auto measure = ProductMeasure::constant(L, 1.0, 0.125, 1.0);
        std::vector<std::vector<Configuration>> snaps;
        for (std::uint64_t t = 0; t < 5; ++t) {
            CounterRng rng(3, t);
            auto c = measure.sample(rng);
            snaps.push_back({c, c});
        }
        std::vector<GridField> frames{GridField(1, 64, 1.0), GridField(1, 64, 1.0)};
        auto h = compare_hydrodynamic(snaps, {0.0, 0.1}, frames, 0.1);
        CHECK(h.mean.size() == 2);
        CHECK(h.mean[0] == doctest::Approx(h.mean[1]));
        CHECK(h.mean[0] > 0.0);
        CHECK(h.standard_error[0] >= 0.0);
        CHECK_THROWS(compare_hydrodynamic(snaps, {0.0}, frames, 0.1));
    }
}
