#include "zrp/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zrp {

namespace {

/// Log-weights l_k = k log phi - alpha log k! over [0, cap], cap certified by the ratio test.
std::vector<double> log_weights(double alpha, double log_phi) {
    if (!(alpha >= 1.0)) throw std::invalid_argument("alpha must be >= 1");
    std::vector<double> lw{0.0};
    double best = 0.0;
    for (int k = 1;; ++k) {
        double l = lw.back() + log_phi - alpha * std::log(static_cast<double>(k));
        lw.push_back(l);
        best = std::max(best, l);
        double next_ratio = log_phi - alpha * std::log(static_cast<double>(k + 1));
        if (next_ratio < std::log(0.5) && l - best < std::log(kTailTolerance * 1e-2)) break;
        if (k > 50'000'000) throw std::overflow_error("equilibrium marginal support too large");
    }
    return lw;
}

double log_sum_exp(const std::vector<double>& v) {
    double mx = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

}  // namespace

double log_normalizer_from_log_fugacity(double alpha, double log_phi) { return log_sum_exp(log_weights(alpha, log_phi)); }

double log_normalizer(double alpha, double phi) {
    if (!(phi > 0.0)) throw std::invalid_argument("fugacity must be positive");
    return log_normalizer_from_log_fugacity(alpha, std::log(phi));
}

SiteMarginal::SiteMarginal(double alpha, double chi, double level) : alpha_(alpha), chi_(chi), level_(level) {
    if (!(chi > 0.0) || !(level > 0.0)) throw std::invalid_argument("chi and level must be positive");
    log_phi_ = alpha * std::log(level / chi);
    auto lw = log_weights(alpha, log_phi_);
    log_z_ = log_sum_exp(lw);
    prob_.resize(lw.size());
    for (std::size_t k = 0; k < lw.size(); ++k) prob_[k] = std::exp(lw[k] - log_z_);
    cdf_.resize(prob_.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < prob_.size(); ++k) cdf_[k] = (acc += prob_[k]);
    for (auto& c : cdf_) c /= acc;
    if (prob_.size() > 64) {
        // Vose alias construction
        std::size_t n = prob_.size();
        alias_prob_.assign(n, 0.0);
        alias_.assign(n, 0);
        std::vector<double> scaled(n);
        std::vector<std::uint32_t> small, large;
        for (std::size_t k = 0; k < n; ++k) {
            scaled[k] = prob_[k] / acc * static_cast<double>(n);
            (scaled[k] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(k));
        }
        while (!small.empty() && !large.empty()) {
            auto s = small.back(), l = large.back();
            small.pop_back();
            large.pop_back();
            alias_prob_[s] = scaled[s];
            alias_[s] = l;
            scaled[l] = scaled[l] + scaled[s] - 1.0;
            (scaled[l] < 1.0 ? small : large).push_back(l);
        }
        for (auto k : large) alias_prob_[k] = 1.0;
        for (auto k : small) alias_prob_[k] = 1.0;
    }
}

std::uint32_t SiteMarginal::sample(CounterRng& rng) const {
    if (!alias_.empty()) {
        auto k = static_cast<std::uint32_t>(rng.below(alias_.size()));
        return rng.uniform() < alias_prob_[k] ? k : alias_[k];
    }
    double u = rng.uniform();
    auto it = std::lower_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    return static_cast<std::uint32_t>(it - cdf_.begin());
}

ProductMeasure ProductMeasure::constant(TorusLattice lattice, double alpha, double chi, double level) {
    ProductMeasure m;
    m.lattice_ = lattice;
    m.alpha_ = alpha;
    m.chi_ = chi;
    m.marginals_.push_back(std::make_shared<SiteMarginal>(alpha, chi, level));
    m.site_marginal_.assign(static_cast<std::size_t>(lattice.site_count()), 0);
    return m;
}

ProductMeasure ProductMeasure::profile(TorusLattice lattice, double alpha, double chi,
                                       const std::function<double(const std::vector<double>&)>& rho) {
    ProductMeasure m;
    m.lattice_ = lattice;
    m.alpha_ = alpha;
    m.chi_ = chi;
    std::map<double, std::size_t> seen;
    m.site_marginal_.resize(static_cast<std::size_t>(lattice.site_count()));
    for (Site x = 0; x < lattice.site_count(); ++x) {
        auto c = lattice.coords(x);
        std::vector<double> u(c.size());
        for (std::size_t i = 0; i < c.size(); ++i) u[i] = static_cast<double>(c[i]) / lattice.side();
        double level = rho(u);
        if (!(level > 0.0) || !std::isfinite(level)) throw std::invalid_argument("profile must be finite and strictly positive");
        auto it = seen.find(level);
        if (it == seen.end()) {
            it = seen.emplace(level, m.marginals_.size()).first;
            m.marginals_.push_back(std::make_shared<SiteMarginal>(alpha, chi, level));
        }
        m.site_marginal_[static_cast<std::size_t>(x)] = it->second;
    }
    return m;
}

Configuration ProductMeasure::sample(CounterRng& rng) const {
    Configuration eta(lattice_, chi_);
    for (std::size_t x = 0; x < eta.counts.size(); ++x) eta.counts[x] = marginals_[site_marginal_[x]]->sample(rng);
    return eta;
}

double exact_moment(const SiteMarginal& m, const std::function<double(double)>& g) {
    double s = 0.0;
    for (int k = 0; k <= m.cap(); ++k) {
        double eta = m.chi() * k;
        s += m.prob(k) * std::pow(eta, m.alpha()) * g(eta);
    }
    return s;
}

IbpResult ibp_residual(const ProductMeasure& measure, const Functional& F, Site x, long samples, CounterRng& rng) {
    if (!measure.is_constant()) throw std::invalid_argument("ibp_residual needs a constant-level measure");
    if (samples < 2) throw std::invalid_argument("ibp_residual needs samples");
    const double a = measure.level(0);
    const double alpha = measure.alpha();
    const double a_pow = std::pow(a, alpha);
    double mean = 0.0, m2 = 0.0;
    for (long i = 0; i < samples; ++i) {
        Configuration eta = measure.sample(rng);
        double lhs = F(eta) * std::pow(eta.eta(x), alpha);
        eta.counts[static_cast<std::size_t>(x)] += 1;
        double rhs = a_pow * F(eta);
        double diff = lhs - rhs;
        double delta = diff - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (diff - mean);
    }
    double var = m2 / static_cast<double>(samples - 1);
    if (!(var > 0.0)) throw std::domain_error("ibp_residual: degenerate variance, both sides deterministic");
    IbpResult r;
    r.samples = samples;
    r.mean_difference = mean;
    r.standard_error = std::sqrt(var / static_cast<double>(samples));
    r.t_statistic = mean / r.standard_error;
    return r;
}

}  // namespace zrp
