#include <doctest.h>
#include <stdexcept>

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>

#include "zrp/equilibrium.hpp"
#include "zrp/kmc.hpp"

using namespace zrp;

TEST_SUITE("kmc") {
    TEST_CASE("jump rate") {
        TorusLattice L(1, 2);
        Configuration eta(L, 1.0, {2, 0});
        CHECK(jump_rate(eta, 0, 1, {2.0, 1.0}) == doctest::Approx(8.0));
        CHECK(jump_rate(eta, 1, 0, {2.0, 1.0}) == 0.0);
        CHECK(jump_rate(eta, 0, 1, {2.0, 2.0}) == doctest::Approx(16.0));
        TorusLattice L5(1, 5);
        Configuration e5(L5, 0.5, {3, 0, 0, 0, 0});
        CHECK_THROWS(jump_rate(e5, 0, 2, {1.0, 1.0}));
        // alpha = 1: out-rate N^2 d eta / chi
        double out = jump_rate(e5, 0, 1, {1.0, 1.0}) + jump_rate(e5, 0, 4, {1.0, 1.0});
        CHECK(out == doctest::Approx(25.0 * 1.5 / 0.5));
    }

    TEST_CASE("rate index") {
        RateIndex idx({1.0, 0.0, 2.0, 3.0, 0.5});
        CHECK(idx.total() == doctest::Approx(6.5));
        CHECK(idx.find(0.5) == 0);
        CHECK(idx.find(1.0) == 2);
        CHECK(idx.find(2.999) == 2);
        CHECK(idx.find(3.0) == 3);
        CHECK(idx.find(6.4) == 4);
        idx.set(1, 4.0);
        CHECK(idx.total() == doctest::Approx(10.5));
        CHECK(idx.find(1.5) == 1);
        CHECK(std::abs(idx.rebuild()) < 1e-15);
    }

    TEST_CASE("single particle moves to a neighbour") {
        TorusLattice L(1, 5);
        long left = 0, right = 0;
        for (int i = 0; i < 4000; ++i) {
            CounterRng rng(1, i);
            Configuration eta(L, 1.0, {0, 0, 1, 0, 0});
            Simulator sim(eta, {2.0, 1.0});
            auto jump = sim.step(rng);
            CHECK(jump.from == 2);
            CHECK((jump.to == 1 || jump.to == 3));
            (jump.to == 1 ? left : right)++;
            CHECK(sim.state().particle_count() == 1);
        }
        CHECK(std::abs(left - right) < 4 * std::sqrt(4000.0));
    }

    TEST_CASE("empty configuration is absorbing") {
        CounterRng rng(2, 0);
        Simulator sim(Configuration(TorusLattice(1, 4), 1.0), {2.0, 1.0});
        CHECK(sim.step(rng).absorbed);
    }

    TEST_CASE("mass conservation and crude rate bound") {
        CounterRng rng(3, 0);
        TorusLattice L(2, 6);
        auto init = ProductMeasure::constant(L, 2.0, 0.25, 1.0).sample(rng);
        double mass = total_mass(init);
        std::vector<Observable> obs{{"mass", [](const Configuration& e) { return total_mass(e); }}};
        std::vector<double> grid{0.0, 0.01, 0.02};
        auto rec = simulate(init, {2.0, 1.0}, 0.02, obs, grid, rng);
        for (double v : rec.values[0]) CHECK(v == mass);
        CHECK(rec.events > 0);
        CHECK(rec.max_total_rate <= crude_rate_bound(L, 0.25, 2.0, mass));
        CHECK(rec.max_rebuild_drift < 1e-9);
    }

    TEST_CASE("zero-length run records the initial state") {
        CounterRng rng(4, 0);
        Configuration init(TorusLattice(1, 4), 0.5, {1, 0, 2, 0});
        std::vector<Observable> obs{{"first", [](const Configuration& e) { return e.eta(0); }}};
        auto rec = simulate(init, {2.0, 1.0}, 1e-300, obs, {0.0, 1e-300}, rng);
        CHECK(rec.events == 0);
        CHECK(rec.values[0][0] == 0.5);
        CHECK(rec.values[0][1] == 0.5);
        CHECK_THROWS(simulate(init, {2.0, 1.0}, 0.0, obs, {0.0}, rng));
    }

    TEST_CASE("determinism per stream") {
        TorusLattice L(1, 16);
        auto measure = ProductMeasure::constant(L, 2.0, 0.25, 1.0);
        auto run = [&](std::uint64_t stream) {
            CounterRng rng(9, stream);
            auto init = measure.sample(rng);
            auto rec = simulate(init, {2.0, 1.0}, 0.01, {}, {0.0, 0.01}, rng, {.event_cap = 2'000'000'000ULL, .keep_snapshots = true});
            return rec.snapshots.back().counts;
        };
        CHECK(run(1) == run(1));
        CHECK(run(1) != run(2));
    }

    TEST_CASE("event cap truncates") {
        CounterRng rng(5, 0);
        Configuration init(TorusLattice(1, 8), 1.0, {3, 3, 3, 3, 3, 3, 3, 3});
        auto rec = simulate(init, {1.0, 1.0}, 10.0, {}, {0.0, 10.0}, rng, {.event_cap = 100, .keep_snapshots = false});
        CHECK(rec.truncated);
        CHECK(rec.events == 100);
    }

    TEST_CASE("stationarity of the site marginal") {
        TorusLattice L(1, 4);
        const double chi = 1.0, a = 1.0, alpha = 2.0;
        auto measure = ProductMeasure::constant(L, alpha, chi, a);
        const auto& m = measure.marginal(0);
        std::vector<double> counts(static_cast<std::size_t>(m.cap()) + 1, 0.0);
        const int runs = 10000;
        for (int i = 0; i < runs; ++i) {
            CounterRng rng(6, i);
            auto init = measure.sample(rng);
            auto rec = simulate(init, {alpha, 1.0}, 1.0, {}, {0.0, 1.0}, rng, {.event_cap = 2'000'000'000ULL, .keep_snapshots = true});
            auto k = rec.snapshots.back().counts[0];
            if (k < counts.size()) counts[k] += 1;
        }
        double stat = 0, pooled_o = 0, pooled_e = 0;
        int cells = 0;
        for (std::size_t k = 0; k < counts.size(); ++k) {
            double e = runs * m.prob(static_cast<int>(k));
            if (e < 5) {
                pooled_o += counts[k];
                pooled_e += e;
                continue;
            }
            stat += (counts[k] - e) * (counts[k] - e) / e;
            ++cells;
        }
        if (pooled_e > 0) {
            stat += (pooled_o - pooled_e) * (pooled_o - pooled_e) / pooled_e;
            ++cells;
        }
        boost::math::chi_squared dist(cells - 1);
        CHECK(stat < boost::math::quantile(boost::math::complement(dist, 1e-3)));
    }

    TEST_CASE("alpha = 1 profile relaxes toward uniform") {
        TorusLattice L(1, 32);
        auto measure = ProductMeasure::profile(L, 1.0, 0.25, [](const std::vector<double>& p) { return 1.0 + 0.8 * std::sin(6.283185307179586 * p[0]); });
        std::vector<double> grid{0.0, 0.005, 0.01, 0.02, 0.04};
        std::vector<std::vector<double>> mean(grid.size(), std::vector<double>(32, 0.0));
        const int runs = 20;
        for (int i = 0; i < runs; ++i) {
            CounterRng rng(7, i);
            auto rec = simulate(measure.sample(rng), {1.0, 1.0}, grid.back(), {}, grid, rng, {.event_cap = 2'000'000'000ULL, .keep_snapshots = true});
            for (std::size_t t = 0; t < grid.size(); ++t)
                for (Site x = 0; x < 32; ++x) mean[t][x] += rec.snapshots[t].eta(x) / runs;
        }
        std::vector<double> dist;
        for (const auto& row : mean) {
            double m = 0;
            for (double v : row) m += v / 32;
            double s = 0;
            for (double v : row) s += std::abs(v - m) / 32;
            dist.push_back(s);
        }
        CHECK(dist.back() < dist.front());
        CHECK(dist[2] < dist[0]);
    }
}
