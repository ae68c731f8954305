#include "zrp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Dense>

#include "zrp/equilibrium.hpp"

namespace zrp {

namespace {

double log_factorial(std::uint32_t k) { return std::lgamma(static_cast<double>(k) + 1.0); }

std::uint32_t bits_for(std::uint32_t base) {
    std::uint32_t b = 1;
    while ((std::uint64_t{1} << b) < base) ++b;
    return b;
}

}  // namespace

std::uint64_t StateSpaceSector::key(const std::vector<std::uint32_t>& k) const {
    std::uint64_t v = 0;
    for (auto c : k) v = v * base_ + c;
    return v;
}

long StateSpaceSector::find(const std::vector<std::uint32_t>& k) const {
    for (auto c : k)
        if (c >= base_) return -1;
    auto it = index_.find(key(k));
    return it == index_.end() ? -1 : static_cast<long>(it->second);
}

void StateSpaceSector::finish(const std::vector<double>& lw) {
    double mx = *std::max_element(lw.begin(), lw.end());
    pi_.resize(lw.size());
    double s = 0.0;
    for (std::size_t i = 0; i < lw.size(); ++i) s += (pi_[i] = std::exp(lw[i] - mx));
    for (auto& p : pi_) p /= s;
    for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(key(states_[i]), i);
}

StateSpaceSector StateSpaceSector::fixed(TorusLattice lattice, double chi, double alpha, int n) {
    if (n < 0) throw std::invalid_argument("sector particle number must be >= 0");
    StateSpaceSector s;
    s.lattice_ = lattice;
    s.chi_ = chi;
    s.alpha_ = alpha;
    s.n_ = n;
    s.base_ = static_cast<std::uint32_t>(n) + 1;
    const int S = static_cast<int>(lattice.site_count());
    if (bits_for(s.base_) * static_cast<std::uint32_t>(S) > 64) throw std::invalid_argument("sector too large to index");
    std::vector<std::uint32_t> cur(S, 0);
    std::vector<double> lw;
    std::function<void(int, int)> rec = [&](int site, int left) {
        if (site == S - 1) {
            cur[site] = static_cast<std::uint32_t>(left);
            s.states_.push_back(cur);
            double l = 0.0;
            for (auto c : cur) l -= alpha * log_factorial(c);
            lw.push_back(l);
            if (s.states_.size() > kMaxSectorStates) throw std::length_error("sector exceeds the state budget");
            return;
        }
        for (int k = left; k >= 0; --k) {
            cur[site] = static_cast<std::uint32_t>(k);
            rec(site + 1, left - k);
        }
    };
    rec(0, n);
    s.finish(lw);
    return s;
}

StateSpaceSector StateSpaceSector::capped(TorusLattice lattice, double chi, double alpha, double level, int cap) {
    if (cap < 0) throw std::invalid_argument("cap must be >= 0");
    SiteMarginal m(alpha, chi, level);
    StateSpaceSector s;
    s.lattice_ = lattice;
    s.chi_ = chi;
    s.alpha_ = alpha;
    s.n_ = -1;
    s.base_ = static_cast<std::uint32_t>(cap) + 1;
    const int S = static_cast<int>(lattice.site_count());
    if (bits_for(s.base_) * static_cast<std::uint32_t>(S) > 64) throw std::invalid_argument("sector too large to index");
    double kept = 0.0;
    for (int k = 0; k <= cap; ++k) kept += m.prob(k);
    s.truncated_mass_ = 1.0 - std::pow(kept, S);
    std::vector<std::uint32_t> cur(S, 0);
    std::vector<double> lw;
    while (true) {
        s.states_.push_back(cur);
        if (s.states_.size() > kMaxSectorStates) throw std::length_error("sector exceeds the state budget");
        double l = 0.0;
        for (auto c : cur) l += std::log(std::max(m.prob(static_cast<int>(c)), 1e-300));
        lw.push_back(l);
        int i = S - 1;
        while (i >= 0 && ++cur[i] > static_cast<std::uint32_t>(cap)) cur[i--] = 0;
        if (i < 0) break;
    }
    s.finish(lw);
    return s;
}

double GeneratorMatrix::entry(std::size_t i, std::size_t j) const {
    if (i == j) return diag[i];
    for (const auto& [c, v] : off[i])
        if (c == j) return v;
    return 0.0;
}

std::vector<double> GeneratorMatrix::apply(const std::vector<double>& v) const {
    std::vector<double> out(size);
    for (std::size_t i = 0; i < size; ++i) {
        double s = diag[i] * v[i];
        for (const auto& [c, r] : off[i]) s += r * v[c];
        out[i] = s;
    }
    return out;
}

double GeneratorMatrix::max_row_sum() const {
    double m = 0.0;
    for (std::size_t i = 0; i < size; ++i) {
        double s = diag[i];
        for (const auto& e : off[i]) s += e.second;
        m = std::max(m, std::abs(s));
    }
    return m;
}

namespace {

/// Calls visit(i, x, target index) for every directed edge move out of every state.
template <class Visit>
void for_each_move(const StateSpaceSector& sector, Visit&& visit, bool require_closed) {
    const auto& L = sector.lattice();
    std::vector<std::uint32_t> k;
    for (std::size_t i = 0; i < sector.size(); ++i) {
        k = sector.state(i);
        for (Site x = 0; x < L.site_count(); ++x) {
            if (k[static_cast<std::size_t>(x)] == 0) continue;
            for (int dir = 0; dir < L.direction_count(); ++dir) {
                Site y = L.neighbor(x, dir);
                k[static_cast<std::size_t>(x)] -= 1;
                k[static_cast<std::size_t>(y)] += 1;
                long j = sector.find(k);
                k[static_cast<std::size_t>(x)] += 1;
                k[static_cast<std::size_t>(y)] -= 1;
                if (j < 0) {
                    if (require_closed) throw std::invalid_argument("sector is not closed under jumps");
                    continue;
                }
                visit(i, x, static_cast<std::size_t>(j));
            }
        }
    }
}

double eta_pow(const StateSpaceSector& s, std::uint32_t k, double p) {
    return std::pow(s.chi() * static_cast<double>(k), p);
}

}  // namespace

GeneratorMatrix build_generator(const StateSpaceSector& sector, const RateModel& model) {
    if (sector.size() > kMaxSectorStates) throw std::length_error("sector too large");
    GeneratorMatrix Q;
    Q.size = sector.size();
    Q.off.assign(Q.size, {});
    Q.diag.assign(Q.size, 0.0);
    const double N = sector.lattice().side();
    for_each_move(
        sector,
        [&](std::size_t i, Site x, std::size_t j) {
            double r = model.rate_scale * N * N * eta_pow(sector, sector.state(i)[static_cast<std::size_t>(x)], sector.alpha()) /
                       (2.0 * sector.chi());
            auto& row = Q.off[i];
            auto it = std::find_if(row.begin(), row.end(), [&](const auto& e) { return e.first == j; });
            if (it == row.end()) row.emplace_back(j, r);
            else it->second += r;
            Q.diag[i] -= r;
        },
        true);
    for (auto& row : Q.off) std::sort(row.begin(), row.end());
    return Q;
}

double reversibility_residual(const StateSpaceSector& sector, const GeneratorMatrix& Q) {
    double worst = 0.0;
    for (std::size_t i = 0; i < Q.size; ++i)
        for (const auto& [j, r] : Q.off[i])
            worst = std::max(worst, std::abs(sector.pi(i) * r - sector.pi(j) * Q.entry(j, i)));
    return worst;
}

std::vector<double> normalize_density(const StateSpaceSector& sector, std::vector<double> f) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        if (f[i] < 0.0) throw std::invalid_argument("density must be nonnegative");
        s += f[i] * sector.pi(i);
    }
    if (!(s > 0.0)) throw std::invalid_argument("density has zero mass");
    for (auto& v : f) v /= s;
    return f;
}

double dirichlet_form_sqrt(const StateSpaceSector& sector, const std::vector<double>& g) {
    double total = 0.0;
    for_each_move(
        sector,
        [&](std::size_t i, Site x, std::size_t j) {
            double diff = g[j] - g[i];
            total += sector.pi(i) * 0.5 * eta_pow(sector, sector.state(i)[static_cast<std::size_t>(x)], sector.alpha()) /
                     sector.chi() * diff * diff;
        },
        false);
    return total;
}

double dirichlet_form(const StateSpaceSector& sector, const std::vector<double>& f) {
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = std::sqrt(f[i]);
    return dirichlet_form_sqrt(sector, g);
}

double dirichlet_form_from_matrix(const StateSpaceSector& sector, const GeneratorMatrix& Q, const std::vector<double>& f) {
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) g[i] = std::sqrt(f[i]);
    auto Qg = Q.apply(g);
    double s = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) s -= sector.pi(i) * g[i] * Qg[i];
    double N = sector.lattice().side();
    return 2.0 / (N * N) * s;
}

std::vector<std::vector<std::size_t>> sector_symmetry_action(const StateSpaceSector& sector) {
    const auto& L = sector.lattice();
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::uint32_t> img(static_cast<std::size_t>(L.site_count()));
    for (const auto& g : symmetry_group(L)) {
        std::vector<Site> map(static_cast<std::size_t>(L.site_count()));
        for (Site x = 0; x < L.site_count(); ++x) map[static_cast<std::size_t>(x)] = g.apply(L, x);
        std::vector<std::size_t> perm(sector.size());
        for (std::size_t i = 0; i < sector.size(); ++i) {
            const auto& k = sector.state(i);
            for (std::size_t x = 0; x < k.size(); ++x) img[static_cast<std::size_t>(map[x])] = k[x];
            long j = sector.find(img);
            if (j < 0) throw std::logic_error("sector not closed under lattice symmetries");
            perm[i] = static_cast<std::size_t>(j);
        }
        out.push_back(std::move(perm));
    }
    return out;
}

std::vector<double> symmetrize_density(const StateSpaceSector& sector, const std::vector<double>& f) {
    auto action = sector_symmetry_action(sector);
    std::vector<double> out(f.size(), 0.0);
    for (const auto& perm : action)
        for (std::size_t i = 0; i < f.size(); ++i) out[i] += f[perm[i]];
    for (auto& v : out) v /= static_cast<double>(action.size());
    return out;
}

bool is_invariant(const StateSpaceSector& sector, const std::vector<double>& f, double rel_tol) {
    double scale = 0.0;
    for (double v : f) scale = std::max(scale, std::abs(v));
    for (const auto& perm : sector_symmetry_action(sector))
        for (std::size_t i = 0; i < f.size(); ++i)
            if (std::abs(f[perm[i]] - f[i]) > rel_tol * std::max(scale, 1e-300)) return false;
    return true;
}

double expectation(const StateSpaceSector& sector, const std::vector<double>& f, const std::vector<double>& F) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += sector.pi(i) * f[i] * F[i];
    return s;
}

InequalityReport canonical_path_check(const StateSpaceSector& sector, const std::vector<double>& f, Site x, Site y) {
    if (!is_invariant(sector, f, 1e-10)) throw std::invalid_argument("canonical_path_check needs a symmetric density");
    const auto& L = sector.lattice();
    int dist = lattice_distance(L, x, y);
    InequalityReport r;
    std::vector<std::uint32_t> k;
    for (std::size_t i = 0; i < sector.size(); ++i) {
        k = sector.state(i);
        auto kx = k[static_cast<std::size_t>(x)];
        if (kx == 0 || x == y) continue;
        k[static_cast<std::size_t>(x)] -= 1;
        k[static_cast<std::size_t>(y)] += 1;
        long j = sector.find(k);
        if (j < 0) continue;
        double diff = std::sqrt(f[static_cast<std::size_t>(j)]) - std::sqrt(f[i]);
        r.lhs += sector.pi(i) * eta_pow(sector, kx, sector.alpha()) / sector.chi() * diff * diff;
    }
    r.rhs = static_cast<double>(dist) * dist / static_cast<double>(L.site_count()) * dirichlet_form(sector, f);
    r.pass = r.lhs <= r.rhs + 1e-12;
    return r;
}

namespace {

std::vector<double> error_weights(const StateSpaceSector& sector, double prefactor) {
    const double delta = std::min(1.0, sector.alpha() / 2.0);
    const double S = static_cast<double>(sector.lattice().site_count());
    std::vector<double> out(sector.size());
    for (std::size_t i = 0; i < sector.size(); ++i) {
        double l1 = 0.0;
        for (auto c : sector.state(i)) l1 += eta_pow(sector, c, sector.alpha());
        out[i] = prefactor * std::pow(sector.chi(), delta) * (1.0 + l1 / S);
    }
    return out;
}

}  // namespace

RegularityTerms site_regularity_terms(const StateSpaceSector& sector, Site x, Site y) {
    RegularityTerms t;
    const double half = sector.alpha() / 2.0;
    t.discrepancy.resize(sector.size());
    for (std::size_t i = 0; i < sector.size(); ++i) {
        const auto& k = sector.state(i);
        double d = eta_pow(sector, k[static_cast<std::size_t>(x)], half) - eta_pow(sector, k[static_cast<std::size_t>(y)], half);
        t.discrepancy[i] = d * d;
    }
    t.error_weight = error_weights(sector, 1.0);
    double dist = lattice_distance(sector.lattice(), x, y);
    t.dirichlet_coefficient = sector.chi() * dist * dist / static_cast<double>(sector.lattice().site_count());
    return t;
}

RegularityTerms block_regularity_terms(const StateSpaceSector& sector, const LatticeBox& B, const LatticeBox& B2,
                                       const Weighting& w, double l, double ltilde) {
    const auto& L = sector.lattice();
    const double a = sector.alpha();
    auto sites1 = B.sites(L), sites2 = B2.sites(L);
    double w1 = w.box_weight(B), w2 = w.box_weight(B2);
    RegularityTerms t;
    t.discrepancy.resize(sector.size());
    for (std::size_t i = 0; i < sector.size(); ++i) {
        const auto& k = sector.state(i);
        double s1 = 0.0, s2 = 0.0;
        for (Site x : sites1) s1 += w.at(x) * eta_pow(sector, k[static_cast<std::size_t>(x)], a);
        for (Site x : sites2) s2 += w.at(x) * eta_pow(sector, k[static_cast<std::size_t>(x)], a);
        // Lambda^{alpha/2} = (weighted mean of eta^alpha)^{1/2}
        double d = std::sqrt(s1 / w1) - std::sqrt(s2 / w2);
        t.discrepancy[i] = d * d;
    }
    double prefactor = std::sqrt(w.ratio()) * std::pow(l, -static_cast<double>(L.dim()) / 2.0);
    t.error_weight = error_weights(sector, prefactor);
    t.dirichlet_coefficient = sector.chi() * ltilde * ltilde / static_cast<double>(L.site_count());
    return t;
}

RegularityReport pathwise_regularity_check(const StateSpaceSector& sector, const std::vector<double>& f,
                                           const RegularityTerms& terms, double C) {
    if (!is_invariant(sector, f, 1e-10)) throw std::invalid_argument("pathwise_regularity_check needs a symmetric density");
    RegularityReport r;
    r.lhs = expectation(sector, f, terms.discrepancy);
    r.dirichlet_term = terms.dirichlet_coefficient * dirichlet_form(sector, f);
    r.error_term = C * expectation(sector, f, terms.error_weight);
    r.rhs = r.dirichlet_term + r.error_term;
    r.pass = r.lhs <= r.rhs * (1.0 + 1e-12) + 1e-15;
    return r;
}

namespace {

/// Pi-symmetrized generator D^{1/2} Q D^{-1/2} as a dense matrix.
Eigen::MatrixXd symmetrized(const StateSpaceSector& sector, const GeneratorMatrix& Q) {
    const auto n = static_cast<Eigen::Index>(Q.size);
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < Q.size; ++i) {
        S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = Q.diag[i];
        for (const auto& [j, r] : Q.off[i])
            S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = std::sqrt(sector.pi(i) / sector.pi(j)) * r;
    }
    return 0.5 * (S + S.transpose());
}

double top_eigenvalue(const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

}  // namespace

double calibrate_regularity_constant(const StateSpaceSector& sector, const GeneratorMatrix& Q, const RegularityTerms& terms) {
    // Group-average the discrepancy so the supremum over symmetric densities is an eigenvalue.
    auto action = sector_symmetry_action(sector);
    std::vector<double> gbar(sector.size(), 0.0);
    for (const auto& perm : action)
        for (std::size_t i = 0; i < sector.size(); ++i) gbar[i] += terms.discrepancy[perm[i]];
    for (auto& v : gbar) v /= static_cast<double>(action.size());
    const double N = sector.lattice().side();
    Eigen::MatrixXd base = terms.dirichlet_coefficient * 2.0 / (N * N) * symmetrized(sector, Q);
    auto value = [&](double C) {
        Eigen::MatrixXd A = base;
        for (std::size_t i = 0; i < sector.size(); ++i)
            A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += gbar[i] - C * terms.error_weight[i];
        return top_eigenvalue(A);
    };
    if (value(0.0) <= 0.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (value(hi) > 0.0) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e300) throw std::runtime_error("regularity calibration diverged");
    }
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (value(mid) > 0.0 ? lo : hi) = mid;
    }
    return hi;
}

namespace {

double power_iteration(const Eigen::MatrixXd& S, long budget, double tol, long& iterations) {
    const auto n = S.rows();
    double shift = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) shift = std::max(shift, S.row(i).cwiseAbs().sum());
    Eigen::MatrixXd B = S + shift * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0);
    for (Eigen::Index i = 0; i < n; ++i) v(i) += 1e-3 * static_cast<double>(i % 7);
    v.normalize();
    double mu = 0.0;
    for (iterations = 0; iterations < budget; ++iterations) {
        Eigen::VectorXd w = B * v;
        mu = v.dot(w);
        double res = (w - mu * v).norm();
        v = w / w.norm();
        if (res <= tol * std::max(1.0, shift)) return mu - shift;
    }
    throw std::runtime_error("power iteration did not converge within budget");
}

}  // namespace

FeynmanKacResult feynman_kac_eigen(const StateSpaceSector& sector, const GeneratorMatrix& Q, const std::vector<double>& F,
                                   const FeynmanKacOptions& opt) {
    const auto& L = sector.lattice();
    const double N = L.side();
    const double S_d = static_cast<double>(L.site_count());
    const double chi = sector.chi();
    FeynmanKacResult res;

    // Spectral route on the assembled generator.
    Eigen::MatrixXd S = 2.0 * chi / S_d * symmetrized(sector, Q);
    for (std::size_t i = 0; i < sector.size(); ++i) S(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += F[i];
    res.principal = power_iteration(S, opt.power_budget, 1e-11, res.power_iterations);

    // Variational route: q(g) = <g, F g>_pi - lambda dform(g), maximized on the pi-unit sphere.
    const double lambda = chi * N * N / S_d;
    const std::size_t n = sector.size();
    auto q = [&](const std::vector<double>& g) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += sector.pi(i) * F[i] * g[i] * g[i];
        return s - lambda * dirichlet_form_sqrt(sector, g);
    };
    auto dot = [&](const std::vector<double>& u, const std::vector<double>& v) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += sector.pi(i) * u[i] * v[i];
        return s;
    };
    auto bilinear = [&](const std::vector<double>& u, const std::vector<double>& v) {
        std::vector<double> p(n), m(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = u[i] + v[i];
            m[i] = u[i] - v[i];
        }
        return 0.25 * (q(p) - q(m));
    };
    // pi-metric gradient of q, edge by edge.
    auto gradient = [&](const std::vector<double>& g) {
        std::vector<double> grad(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) grad[i] = 2.0 * F[i] * g[i];
        for_each_move(
            sector,
            [&](std::size_t i, Site x, std::size_t j) {
                double c = sector.pi(i) * eta_pow(sector, sector.state(i)[static_cast<std::size_t>(x)], sector.alpha()) /
                           sector.chi() * (g[j] - g[i]);
                grad[j] -= lambda * c / sector.pi(j);
                grad[i] += lambda * c / sector.pi(i);
            },
            false);
        return grad;
    };
    std::vector<double> g(n, 1.0), prev_dir;
    double value = q(g);
    for (res.ascent_iterations = 0; res.ascent_iterations < opt.ascent_budget; ++res.ascent_iterations) {
        auto grad = gradient(g);
        double qg = value;
        for (std::size_t i = 0; i < n; ++i) grad[i] -= 2.0 * qg * g[i];
        double gnorm = std::sqrt(dot(grad, grad));
        if (gnorm < 1e-13) break;
        // Rayleigh-Ritz on span{g, grad, previous direction}, orthonormalized in the pi metric.
        std::vector<std::vector<double>> basis{g};
        for (auto cand : {grad, prev_dir}) {
            if (cand.empty()) continue;
            for (const auto& b : basis) {
                double c = dot(cand, b);
                for (std::size_t i = 0; i < n; ++i) cand[i] -= c * b[i];
            }
            double nn = std::sqrt(dot(cand, cand));
            if (nn < 1e-10 * gnorm || nn < 1e-300) continue;
            for (auto& v : cand) v /= nn;
            basis.push_back(cand);
        }
        const auto m = static_cast<Eigen::Index>(basis.size());
        Eigen::MatrixXd A(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = a; b < m; ++b) A(a, b) = A(b, a) = bilinear(basis[a], basis[b]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
        Eigen::Index top;
        es.eigenvalues().maxCoeff(&top);
        Eigen::VectorXd c = es.eigenvectors().col(top);
        if (c(0) < 0) c = -c;
        std::vector<double> next(n, 0.0), dir(n, 0.0);
        for (Eigen::Index a = 0; a < m; ++a)
            for (std::size_t i = 0; i < n; ++i) {
                next[i] += c(a) * basis[a][i];
                if (a > 0) dir[i] += c(a) * basis[a][i];
            }
        double nn = std::sqrt(dot(next, next));
        for (auto& v : next) v /= nn;
        double nv = q(next);
        prev_dir = dir;
        g = next;
        bool stalled = std::abs(nv - value) <= opt.tolerance * std::max(1.0, std::abs(nv));
        value = nv;
        if (stalled && gnorm < 1e-9) break;
    }
    for (auto& v : g) v = std::abs(v);
    std::vector<double> f(n);
    for (std::size_t i = 0; i < n; ++i) f[i] = g[i] * g[i];
    f = normalize_density(sector, f);
    res.variational = expectation(sector, f, F) - lambda * dirichlet_form(sector, f);
    res.optimal_density = f;
    return res;
}

FiniteTimeFK finite_time_feynman_kac(const StateSpaceSector& sector, const GeneratorMatrix& Q, const std::vector<double>& F,
                                     double t) {
    const double S_d = static_cast<double>(sector.lattice().site_count());
    const double chi = sector.chi();
    const auto n = static_cast<Eigen::Index>(sector.size());
    Eigen::MatrixXd Qs = symmetrized(sector, Q);
    Eigen::MatrixXd Fd = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) Fd(i, i) = F[static_cast<std::size_t>(i)];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Qs + S_d / chi * Fd);
    Eigen::VectorXd root(n);
    for (Eigen::Index i = 0; i < n; ++i) root(i) = std::sqrt(sector.pi(static_cast<std::size_t>(i)));
    Eigen::VectorXd proj = es.eigenvectors().transpose() * root;
    double mx = -INFINITY;
    for (Eigen::Index k = 0; k < n; ++k)
        if (proj(k) * proj(k) > 0) mx = std::max(mx, t * es.eigenvalues()(k));
    double s = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) s += proj(k) * proj(k) * std::exp(t * es.eigenvalues()(k) - mx);
    FiniteTimeFK r;
    r.lhs = chi / S_d * (mx + std::log(s));
    r.rigorous_bound = t * top_eigenvalue(Fd + chi / S_d * Qs);
    r.displayed_bound = t * top_eigenvalue(Fd + 2.0 * chi / S_d * Qs);
    return r;
}

}  // namespace zrp
