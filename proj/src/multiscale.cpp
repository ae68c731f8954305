#include "zrp/multiscale.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

namespace zrp {

double alpha_average(const Configuration& eta, const LatticeBox& B, const Weighting& w, double alpha) {
    if (B.volume() <= 0) throw std::invalid_argument("alpha_average: empty block");
    double num = 0.0, den = 0.0;
    for (Site x : B.sites(eta.lattice)) {
        double wx = w.at(x);
        num += wx * std::pow(eta.eta(x), alpha);
        den += wx;
    }
    return std::pow(num / den, 1.0 / alpha);
}

std::vector<double> block_alpha_averages(const Configuration& eta, const Partition& P, const Weighting& w, double alpha) {
    std::vector<double> num(static_cast<std::size_t>(P.block_count()), 0.0), den(num.size(), 0.0);
    for (Site x = 0; x < eta.lattice.site_count(); ++x) {
        auto b = static_cast<std::size_t>(P.block_of(x));
        double wx = w.at(x);
        num[b] += wx * std::pow(eta.eta(x), alpha);
        den[b] += wx;
    }
    for (std::size_t b = 0; b < num.size(); ++b) num[b] = std::pow(num[b] / den[b], 1.0 / alpha);
    return num;
}

std::vector<std::int64_t> blocks_inside(const Partition& P, const LatticeBox& box) {
    std::vector<std::int64_t> out;
    for (std::int64_t b = 0; b < P.block_count(); ++b) {
        auto sites = P.block_sites(b);
        bool all = std::all_of(sites.begin(), sites.end(), [&](Site x) { return box.contains(P.lattice(), x); });
        bool any = std::any_of(sites.begin(), sites.end(), [&](Site x) { return box.contains(P.lattice(), x); });
        if (any && !all) throw std::invalid_argument("fine partition does not tile the coarse block");
        if (all) out.push_back(b);
    }
    if (out.empty()) throw std::invalid_argument("no fine block inside the coarse block");
    return out;
}

double coarse_gradient_sq_from_values(const std::vector<double>& lambda, const std::vector<std::int64_t>& inside,
                                      const Partition& fine, double coarse_side, double alpha) {
    std::unordered_set<std::int64_t> in(inside.begin(), inside.end());
    double s = 0.0;
    for (auto [b1, b2] : fine.adjacent_pairs()) {
        if (!in.count(b1) || !in.count(b2)) continue;
        double diff = std::pow(lambda[b1], alpha / 2.0) - std::pow(lambda[b2], alpha / 2.0);
        s += diff * diff;
    }
    double ratio = static_cast<double>(fine.scale()) / coarse_side;
    return std::pow(ratio, fine.lattice().dim() - 2) * s;
}

double coarse_gradient_sq(const Configuration& eta, const LatticeBox& coarse_block, const Partition& fine,
                          const Weighting& w, double alpha) {
    auto inside = blocks_inside(fine, coarse_block);
    auto lambda = block_alpha_averages(eta, fine, w, alpha);
    int side = coarse_block.axes.front().length;
    for (const auto& iv : coarse_block.axes) side = std::min(side, iv.length);
    return coarse_gradient_sq_from_values(lambda, inside, fine, side, alpha);
}

SobolevTerms sobolev_terms(const BoxField& f, double p) {
    const int d = static_cast<int>(f.sides.size());
    if (d == 0) throw std::invalid_argument("degenerate box");
    std::size_t n = 1;
    int l = f.sides.front();
    for (int s : f.sides) {
        if (s < 1) throw std::invalid_argument("degenerate box");
        n *= static_cast<std::size_t>(s);
        l = std::min(l, s);
    }
    if (f.values.size() != n) throw std::invalid_argument("box field size does not match its sides");
    SobolevTerms t;
    double sp = 0.0, s2 = 0.0;
    for (double v : f.values) {
        sp += std::pow(v * v, p);
        s2 += v * v;
    }
    t.lhs = std::pow(sp / static_cast<double>(n), 1.0 / p);
    t.l2_sq = s2 / static_cast<double>(n);
    std::vector<std::size_t> stride(d, 1);
    for (int i = d - 2; i >= 0; --i) stride[i] = stride[i + 1] * static_cast<std::size_t>(f.sides[i + 1]);
    double g = 0.0;
    for (std::size_t x = 0; x < n; ++x)
        for (int i = 0; i < d; ++i) {
            auto c = (x / stride[i]) % static_cast<std::size_t>(f.sides[i]);
            if (c + 1 < static_cast<std::size_t>(f.sides[i])) {
                double diff = f.values[x] - f.values[x + stride[i]];
                g += diff * diff;
            }
        }
    t.gradient = std::pow(static_cast<double>(l), 2 - d) * g;
    return t;
}

SobolevReport discrete_sobolev_check(const BoxField& f, double lambda, double p, double C) {
    if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    auto t = sobolev_terms(f, p);
    SobolevReport r;
    r.lhs = t.lhs;
    r.rhs = (1.0 + lambda) * t.l2_sq + C * (1.0 + 1.0 / lambda) * t.gradient;
    r.pass = r.lhs <= r.rhs * (1.0 + 1e-12);
    return r;
}

double sobolev_constant_needed(const BoxField& f, double lambda, double p) {
    auto t = sobolev_terms(f, p);
    double excess = t.lhs - (1.0 + lambda) * t.l2_sq;
    if (excess <= 0.0) return 0.0;
    if (t.gradient <= 0.0) return INFINITY;
    return excess / ((1.0 + 1.0 / lambda) * t.gradient);
}

std::vector<int> random_box_sides(CounterRng& rng, int d, int lo, int hi, double aspect) {
    std::vector<int> sides(d);
    int l = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(hi - lo + 1)));
    sides[0] = l;
    int cap = std::min(hi, static_cast<int>(std::floor(aspect * l)));
    for (int i = 1; i < d; ++i) sides[i] = l + static_cast<int>(rng.below(static_cast<std::uint64_t>(cap - l + 1)));
    return sides;
}

BoxField random_box_field(CounterRng& rng, const std::vector<int>& sides) {
    BoxField f;
    f.sides = sides;
    std::size_t n = 1;
    for (int s : sides) n *= static_cast<std::size_t>(s);
    f.values.assign(n, 0.0);
    const int d = static_cast<int>(sides.size());
    auto coords = [&](std::size_t x) {
        std::vector<double> c(d);
        for (int i = d - 1; i >= 0; --i) {
            c[i] = (static_cast<double>(x % static_cast<std::size_t>(sides[i])) + 0.5) / sides[i];
            x /= static_cast<std::size_t>(sides[i]);
        }
        return c;
    };
    const auto kind = rng.below(6);
    const double scale = std::exp(2.0 * rng.normal());
    switch (kind) {
        case 0:  // i.i.d. noise
            for (auto& v : f.values) v = scale * rng.normal();
            break;
        case 1: {  // a few spikes on a background
            double bg = rng.uniform() < 0.5 ? 0.0 : scale * rng.uniform();
            for (auto& v : f.values) v = bg;
            int spikes = 1 + static_cast<int>(rng.below(3));
            for (int s = 0; s < spikes; ++s) f.values[rng.below(n)] += scale * (1.0 + 4.0 * rng.uniform());
            break;
        }
        case 2: {  // plateau on a sub-box
            std::vector<double> lo(d), hi(d);
            for (int i = 0; i < d; ++i) {
                lo[i] = rng.uniform();
                hi[i] = lo[i] + (1.0 - lo[i]) * rng.uniform();
            }
            for (std::size_t x = 0; x < n; ++x) {
                auto c = coords(x);
                bool in = true;
                for (int i = 0; i < d; ++i) in = in && c[i] >= lo[i] && c[i] <= hi[i];
                f.values[x] = in ? scale : 0.0;
            }
            break;
        }
        case 3: {  // ramp raised to a random power
            double power = 0.5 + 3.0 * rng.uniform();
            std::vector<double> dir(d);
            for (auto& v : dir) v = rng.uniform();
            for (std::size_t x = 0; x < n; ++x) {
                auto c = coords(x);
                double s = 0.0, norm = 0.0;
                for (int i = 0; i < d; ++i) {
                    s += dir[i] * c[i];
                    norm += dir[i];
                }
                f.values[x] = scale * std::pow(s / norm, power);
            }
            break;
        }
        case 4: {  // smooth Gaussian bump
            double width = 0.03 + 0.5 * rng.uniform();
            std::vector<double> centre(d);
            for (auto& v : centre) v = rng.uniform();
            for (std::size_t x = 0; x < n; ++x) {
                auto c = coords(x);
                double r2 = 0.0;
                for (int i = 0; i < d; ++i) r2 += (c[i] - centre[i]) * (c[i] - centre[i]);
                f.values[x] = scale * std::exp(-r2 / (2.0 * width * width));
            }
            break;
        }
        default: {  // low Fourier modes plus offset
            double offset = scale * rng.normal();
            std::vector<double> amp(4), phase(4);
            std::vector<std::vector<int>> freq(4, std::vector<int>(d));
            for (int m = 0; m < 4; ++m) {
                amp[m] = scale * rng.normal();
                phase[m] = 2.0 * std::numbers::pi * rng.uniform();
                for (int i = 0; i < d; ++i) freq[m][i] = static_cast<int>(rng.below(4));
            }
            for (std::size_t x = 0; x < n; ++x) {
                auto c = coords(x);
                double v = offset;
                for (int m = 0; m < 4; ++m) {
                    double arg = phase[m];
                    for (int i = 0; i < d; ++i) arg += std::numbers::pi * freq[m][i] * c[i];
                    v += amp[m] * std::cos(arg);
                }
                f.values[x] = v;
            }
            break;
        }
    }
    return f;
}

double delta_btilde(const Configuration& eta, const LatticeBox& coarse_block, const Partition& fine, const Weighting& w,
                    double alpha, double p, double lambda) {
    auto inside = blocks_inside(fine, coarse_block);
    auto lam = block_alpha_averages(eta, fine, w, alpha);
    double total = 0.0, acc = 0.0;
    for (auto b : inside) {
        double wb = w.box_weight(fine.block(b));
        total += wb;
        acc += wb * std::pow(lam[b], alpha * p);
    }
    double lp = std::pow(acc / total, 1.0 / p);
    double coarse = std::pow(alpha_average(eta, coarse_block, w, alpha), alpha);
    return std::max(0.0, lp - (1.0 + lambda) * coarse);
}

LambdaSchedule lambda_schedule(const PartitionFamily& family) {
    LambdaSchedule s;
    const double N = family.lattice.side();
    const int d = family.lattice.dim();
    double product = 1.0;
    for (int k = 0; k + 1 < family.K; ++k) {
        s.max_partial_product = std::max(s.max_partial_product, product);
        double lk = static_cast<double>(family.scales[k]), lk1 = static_cast<double>(family.scales[k + 1]);
        double v = std::max(std::pow(lk, -d / 4.0), std::sqrt(lk1 / N));
        if (!(v > 0.0 && v <= 1.0)) s.all_in_unit_interval = false;
        s.lambda.push_back(v);
        s.sum += v;
        product *= 1.0 + v;
    }
    s.max_partial_product = std::max(s.max_partial_product, product);
    return s;
}

TelescopeReport telescope(const Configuration& eta, const PartitionFamily& family, const YoungFunction& phi,
                          const LambdaSchedule& schedule, double alpha) {
    if (static_cast<int>(schedule.lambda.size()) + 1 != family.K) throw std::invalid_argument("schedule length != K-1");
    TelescopeReport r;
    r.lambda = schedule.lambda;
    for (const auto& P : family.levels) {
        auto lam = block_alpha_averages(eta, P, family.weight, alpha);
        for (auto& v : lam) v = std::pow(v, alpha);
        r.Z.push_back(orlicz_norm(lam, block_weights(P, family.weight), phi));
    }
    const int K = family.K;
    double product = 1.0;
    r.reconstruction = 0.0;
    for (int k = 0; k + 1 < K; ++k) {
        r.products.push_back(product);
        double diff = r.Z[k] - (1.0 + r.lambda[k]) * r.Z[k + 1];
        r.differences.push_back(diff);
        r.reconstruction += product * diff;
        product *= 1.0 + r.lambda[k];
    }
    r.products.push_back(product);
    r.reconstruction += product * r.Z[K - 1];
    r.residual = std::abs(r.reconstruction - r.Z[0]) / std::max(1.0, r.Z[0]);

    const auto n = static_cast<std::size_t>(eta.lattice.site_count());
    std::vector<double> site(n), uw(n, 1.0 / static_cast<double>(n));
    double l1 = 0.0;
    for (std::size_t x = 0; x < n; ++x) {
        site[x] = std::pow(eta.eta(static_cast<Site>(x)), alpha);
        l1 += site[x];
    }
    r.l1_norm = l1 / static_cast<double>(n);
    r.site_norm = orlicz_norm(site, uw, phi);
    r.first_level_factor = r.site_norm > 0.0 ? r.Z[0] / r.site_norm : 1.0;
    LatticeBox torus;
    for (int i = 0; i < eta.lattice.dim(); ++i) torus.axes.push_back({0, eta.lattice.side()});
    r.top_alpha_average = std::pow(alpha_average(eta, torus, family.weight, alpha), alpha);
    r.top_level_factor = r.l1_norm > 0.0 ? r.top_alpha_average / r.l1_norm : 1.0;
    r.top_level_identity_error =
        r.top_alpha_average > 0.0 ? std::abs(r.Z[K - 1] * phi.inverse(1.0) - r.top_alpha_average) / r.top_alpha_average : 0.0;
    return r;
}

namespace {
double nonlinearity(double u, double alpha, std::optional<double> M) {
    return M ? lipschitz_truncation(u, *M, alpha) : std::pow(u, alpha);
}
}  // namespace

double vna_snapshot(const Configuration& eta, double eps, double alpha, std::optional<double> M) {
    auto avg = local_average_field(eta, eps);
    double s = 0.0;
    for (Site x = 0; x < eta.lattice.site_count(); ++x)
        s += std::abs(nonlinearity(eta.eta(x), alpha, M) - nonlinearity(avg[static_cast<std::size_t>(x)], alpha, M));
    return s / static_cast<double>(eta.lattice.site_count());
}

double vna_statistic(const std::vector<double>& times, const std::vector<Configuration>& snapshots, double eps,
                     double alpha, std::optional<double> M) {
    if (times.empty()) throw std::invalid_argument("vna_statistic: empty grid");
    if (times.size() != snapshots.size()) throw std::invalid_argument("vna_statistic: one snapshot per grid time");
    if (times.size() > 2) {
        double h = times[1] - times[0];
        for (std::size_t i = 2; i < times.size(); ++i)
            if (std::abs((times[i] - times[i - 1]) - h) > 1e-9 * std::max(1.0, std::abs(times[i])))
                throw std::invalid_argument("vna_statistic: grid is not uniform");
    }
    double s = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) s += (times[i] - times[i - 1]) * vna_snapshot(snapshots[i], eps, alpha, M);
    return s;
}

double truncation_tail(const Configuration& eta, double eps, double alpha, double M) {
    auto avg = local_average_field(eta, eps);
    double s = 0.0;
    for (Site x = 0; x < eta.lattice.site_count(); ++x) {
        double u = eta.eta(x), v = avg[static_cast<std::size_t>(x)];
        if (u > M) s += std::pow(u, alpha);
        if (v > M) s += std::pow(v, alpha);
    }
    return s / static_cast<double>(eta.lattice.site_count());
}

double entropy_dissipation_statistic(const Configuration& eta, double alpha) {
    const auto& L = eta.lattice;
    double s = 0.0;
    for (Site x = 0; x < L.site_count(); ++x) {
        double fx = std::pow(eta.eta(x), alpha / 2.0);
        for (int i = 0; i < L.dim(); ++i) {
            double diff = fx - std::pow(eta.eta(L.shift(x, i, 1)), alpha / 2.0);
            s += diff * diff;
        }
    }
    return std::pow(static_cast<double>(L.side()), 2 - L.dim()) * s;
}

}  // namespace zrp
