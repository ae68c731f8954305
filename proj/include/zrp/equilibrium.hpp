/// @file equilibrium.hpp
/// @brief Product equilibrium measures with weights (a/chi)^{alpha k} / (k!)^alpha.
#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/expression.hpp"
#include "zrp/rng.hpp"

namespace zrp {

inline constexpr double kTailTolerance = 5e-16;

/// log sum_k phi^k / (k!)^alpha, from log phi so that huge fugacities do not overflow.
double log_normalizer_from_log_fugacity(double alpha, double log_phi);
double log_normalizer(double alpha, double phi);

class SiteMarginal {
public:
    SiteMarginal(double alpha, double chi, double level);

    double alpha() const { return alpha_; }
    double chi() const { return chi_; }
    double level() const { return level_; }
    double log_fugacity() const { return log_phi_; }
    double log_z() const { return log_z_; }
    int cap() const { return static_cast<int>(prob_.size()) - 1; }
    double prob(int k) const { return k < 0 || k > cap() ? 0.0 : prob_[k]; }
    const std::vector<double>& probabilities() const { return prob_; }

    /// Bound on the mass beyond the cap (p(cap) by the geometric-ratio argument).
    double tail_bound() const { return prob_.back(); }

    std::uint32_t sample(CounterRng& rng) const;

private:
    double alpha_, chi_, level_, log_phi_, log_z_;
    std::vector<double> prob_;
    std::vector<double> cdf_;
    std::vector<double> alias_prob_;
    std::vector<std::uint32_t> alias_;
};

class ProductMeasure {
public:
    static ProductMeasure constant(TorusLattice lattice, double alpha, double chi, double level);
    /// Level rho(x / N) at macroscopic coordinates in [0,1)^d.
    static ProductMeasure profile(TorusLattice lattice, double alpha, double chi, const std::function<double(const std::vector<double>&)>& rho);

    const TorusLattice& lattice() const { return lattice_; }
    double chi() const { return chi_; }
    double alpha() const { return alpha_; }
    const SiteMarginal& marginal(Site x) const { return *marginals_[site_marginal_[static_cast<std::size_t>(x)]]; }
    bool is_constant() const { return marginals_.size() == 1; }
    double level(Site x) const { return marginal(x).level(); }

    Configuration sample(CounterRng& rng) const;

private:
    TorusLattice lattice_;
    double alpha_ = 1.0, chi_ = 1.0;
    std::vector<std::shared_ptr<SiteMarginal>> marginals_;
    std::vector<std::size_t> site_marginal_;
};

/// sum_k p(k) (chi k)^alpha * g(chi k); with g == 1 this should equal a^alpha.
double exact_moment(const SiteMarginal& m, const std::function<double(double)>& g);

struct IbpResult {
    double mean_difference = 0.0;
    double standard_error = 0.0;
    double t_statistic = 0.0;
    long samples = 0;
};

using Functional = std::function<double(const Configuration&)>;

/// Monte Carlo estimate of E[F(eta) eta(x)^alpha] - a^alpha E[F(eta + chi 1_x)], studentized.
IbpResult ibp_residual(const ProductMeasure& measure, const Functional& F, Site x, long samples, CounterRng& rng);

}  // namespace zrp
