#include <doctest.h>
#include <stdexcept>

#include <cmath>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/special_functions/bessel.hpp>

#include "zrp/equilibrium.hpp"

using namespace zrp;

TEST_SUITE("equilibrium") {
    TEST_CASE("normalizer closed forms") {
        CHECK(log_normalizer(1.0, 2.0) == doctest::Approx(2.0).epsilon(1e-14));
        // sum 1/(k!)^2 = I_0(2)
        CHECK(std::exp(log_normalizer(2.0, 1.0)) == doctest::Approx(boost::math::cyl_bessel_i(0, 2.0)).epsilon(1e-14));
        CHECK(log_normalizer(2.0, 1e-300) == doctest::Approx(0.0));
        CHECK_THROWS(log_normalizer(0.5, 1.0));
        // huge fugacity stays finite
        CHECK(std::isfinite(log_normalizer_from_log_fugacity(2.0, 20.0)));
    }

    TEST_CASE("marginal sums to one and tail is certified") {
        for (double alpha : {1.0, 1.5, 2.0, 3.0})
            for (double chi : {1.0, 0.1, 0.01})
                for (double a : {0.25, 1.0, 4.0}) {
                    SiteMarginal m(alpha, chi, a);
                    double s = 0;
                    for (double p : m.probabilities()) s += p;
                    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
                    CHECK(m.tail_bound() < 1e-15);
                }
    }

    TEST_CASE("single-site integration by parts, exact sum") {
        for (double alpha : {1.0, 1.5, 2.0, 3.0})
            for (double chi : {1.0, 0.1, 0.01})
                for (double a : {0.25, 1.0, 4.0}) {
                    SiteMarginal m(alpha, chi, a);
                    double lhs = exact_moment(m, [](double) { return 1.0; });
                    INFO("alpha=" << alpha << " chi=" << chi << " a=" << a);
                    CHECK(std::abs(lhs - std::pow(a, alpha)) <= 1e-10 * std::pow(a, alpha));
                }
    }

    TEST_CASE("sampler goodness of fit") {
        SiteMarginal m(2.0, 0.25, 1.0);
        CounterRng rng(11, 0);
        const int draws = 1'000'000;
        std::vector<double> counts(static_cast<std::size_t>(m.cap()) + 1, 0.0);
        for (int i = 0; i < draws; ++i) counts[m.sample(rng)] += 1;
        double stat = 0;
        int cells = 0;
        double pooled_obs = 0, pooled_exp = 0;
        for (int k = 0; k <= m.cap(); ++k) {
            double e = draws * m.prob(k);
            if (e < 5) {
                pooled_obs += counts[k];
                pooled_exp += e;
                continue;
            }
            stat += (counts[k] - e) * (counts[k] - e) / e;
            ++cells;
        }
        if (pooled_exp > 0) {
            stat += (pooled_obs - pooled_exp) * (pooled_obs - pooled_exp) / pooled_exp;
            ++cells;
        }
        boost::math::chi_squared dist(cells - 1);
        CHECK(stat < boost::math::quantile(boost::math::complement(dist, 1e-3)));
    }

    TEST_CASE("alias path for large supports") {
        SiteMarginal m(1.0, 0.01, 1.0);  // Poisson(100) needs a cap above 64
        REQUIRE(m.cap() > 64);
        CounterRng rng(12, 0);
        double mean = 0;
        const int n = 200000;
        for (int i = 0; i < n; ++i) mean += 0.01 * m.sample(rng);
        mean /= n;
        CHECK(std::abs(mean - 1.0) < 4 * std::sqrt(0.01 / n));
    }

    TEST_CASE("sampler examples") {
        CounterRng rng(13, 0);
        auto measure = ProductMeasure::constant(TorusLattice(1, 10), 1.0, 0.5, 2.0);
        double mean = 0;
        const int n = 100000;
        for (int i = 0; i < n; ++i) mean += total_mass(measure.sample(rng));
        mean /= n;
        CHECK(std::abs(mean - 2.0) < 4 * std::sqrt(0.5 * 2.0 / 10 / n));

        auto frozen = ProductMeasure::constant(TorusLattice(1, 8), 2.0, 1.0, 1e-12);
        CHECK(frozen.sample(rng).particle_count() == 0);

        SiteMarginal one(2.0, 1.0, 1.0);
        CHECK(one.prob(0) == doctest::Approx(one.prob(1)).epsilon(1e-14));
        long zeros = 0, ones = 0;
        for (int i = 0; i < 200000; ++i) {
            auto k = one.sample(rng);
            zeros += k == 0;
            ones += k == 1;
        }
        double ratio = static_cast<double>(zeros) / ones;
        CHECK(std::abs(ratio - 1.0) < 4 * std::sqrt(2.0 / (200000 * one.prob(0))));
    }

    TEST_CASE("profile measure follows the profile") {
        auto measure = ProductMeasure::profile(TorusLattice(1, 8), 1.0, 0.5,
                                               [](const std::vector<double>& p) { return 1.0 + p[0]; });
        CHECK(measure.level(0) == doctest::Approx(1.0));
        CHECK(measure.level(4) == doctest::Approx(1.5));
        CHECK_FALSE(measure.is_constant());
        CHECK_THROWS(ProductMeasure::profile(TorusLattice(1, 4), 1.0, 0.5, [](const std::vector<double>&) { return -1.0; }));
    }

    TEST_CASE("Monte Carlo integration by parts") {
        auto measure = ProductMeasure::constant(TorusLattice(1, 6), 2.0, 0.5, 1.0);
        const double a = 1.0;
        std::vector<Functional> functionals{
            [](const Configuration&) { return 1.0; },
            [a](const Configuration& e) { return e.eta(0) <= a ? 1.0 : 0.0; },
            [](const Configuration& e) { return std::sin(e.eta(0) + e.eta(1)); },
            [](const Configuration& e) { return 1.0 / (1.0 + total_mass(e)); },
            [](const Configuration& e) { return std::exp(-e.eta(0)) * e.eta(2); }};
        for (std::size_t i = 0; i < functionals.size(); ++i) {
            CounterRng rng(20, i);
            auto r = ibp_residual(measure, functionals[i], 0, 100000, rng);
            INFO("functional " << i << " t=" << r.t_statistic);
            CHECK(std::abs(r.t_statistic) <= 4.0);
        }
        CounterRng rng(21, 0);
        CHECK_THROWS_AS(ibp_residual(measure, [](const Configuration&) { return 0.0; }, 0, 20000, rng), std::domain_error);
    }
}
