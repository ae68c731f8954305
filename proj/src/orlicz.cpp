#include "zrp/orlicz.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

namespace zrp {

std::vector<double> young_grid(std::size_t points, double lo, double hi) {
    std::vector<double> g{0.0};
    double llo = std::log(lo), lhi = std::log(hi);
    for (std::size_t i = 0; i < points; ++i)
        g.push_back(std::exp(llo + (lhi - llo) * static_cast<double>(i) / static_cast<double>(points - 1)));
    return g;
}

YoungFunction YoungFunction::from_nodes(std::vector<Node> nodes, std::string name) {
    if (nodes.empty() || nodes.front().u != 0.0 || nodes.front().value != 0.0)
        throw std::invalid_argument("Young function nodes must start at (0, 0)");
    for (std::size_t i = 1; i < nodes.size(); ++i)
        if (!(nodes[i].u > nodes[i - 1].u)) throw std::invalid_argument("Young function nodes must increase");
    YoungFunction f;
    f.nodes_ = std::move(nodes);
    f.name_ = std::move(name);
    return f;
}

YoungFunction YoungFunction::from_function(const std::function<double(double)>& phi, const std::function<double(double)>& dphi,
                                           std::string name, const std::vector<double>& grid) {
    std::vector<Node> nodes;
    for (double u : grid) {
        double d = dphi(u);
        nodes.push_back({u, u == 0.0 ? 0.0 : phi(u), d, d});
    }
    auto f = from_nodes(std::move(nodes), std::move(name));
    f.exact_ = phi;
    f.exact_derivative_ = dphi;
    return f;
}

YoungFunction YoungFunction::power(double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("power Young function needs q >= 1");
    auto f = from_function([q](double u) { return std::pow(u, q); },
                           [q](double u) { return q == 1.0 ? 1.0 : q * std::pow(u, q - 1.0); },
                           "power(" + std::to_string(q) + ")");
    f.exact_inverse_ = [q](double v) { return v <= 0.0 ? 0.0 : std::pow(v, 1.0 / q); };
    f.power_ = q;
    return f;
}

namespace {

std::size_t segment(const std::vector<YoungFunction::Node>& n, double u) {
    auto it = std::upper_bound(n.begin(), n.end(), u, [](double v, const auto& node) { return v < node.u; });
    return static_cast<std::size_t>(it - n.begin()) - 1;
}

double hermite(const YoungFunction::Node& a, const YoungFunction::Node& b, double u) {
    double h = b.u - a.u, t = (u - a.u) / h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * a.value + (t3 - 2 * t2 + t) * h * a.dright + (-2 * t3 + 3 * t2) * b.value +
           (t3 - t2) * h * b.dleft;
}

double hermite_derivative(const YoungFunction::Node& a, const YoungFunction::Node& b, double u) {
    double h = b.u - a.u, t = (u - a.u) / h;
    double t2 = t * t;
    return ((6 * t2 - 6 * t) * a.value + (-6 * t2 + 6 * t) * b.value) / h + (3 * t2 - 4 * t + 1) * a.dright +
           (3 * t2 - 2 * t) * b.dleft;
}

}  // namespace

double YoungFunction::operator()(double u) const {
    u = std::abs(u);
    if (exact_) return u == 0.0 ? 0.0 : exact_(u);
    const auto& n = nodes_;
    if (u >= n.back().u) return n.back().value + n.back().dright * (u - n.back().u);
    std::size_t i = segment(n, u);
    return std::max(0.0, hermite(n[i], n[i + 1], u));
}

double YoungFunction::derivative(double u) const {
    u = std::abs(u);
    if (exact_derivative_) return exact_derivative_(u);
    const auto& n = nodes_;
    if (u >= n.back().u) return n.back().dright;
    std::size_t i = segment(n, u);
    if (u == n[i].u) return n[i].dright;
    return hermite_derivative(n[i], n[i + 1], u);
}

double YoungFunction::inverse(double v) const {
    if (exact_inverse_) return exact_inverse_(v);
    const auto& n = nodes_;
    if (v >= n.back().value) {
        if (n.back().dright <= 0.0) return std::numeric_limits<double>::infinity();
        return n.back().u + (v - n.back().value) / n.back().dright;
    }
    // last node with value <= v
    auto it = std::upper_bound(n.begin(), n.end(), v, [](double val, const auto& node) { return val < node.value; });
    std::size_t i = static_cast<std::size_t>(it - n.begin()) - 1;
    double lo = n[i].u, hi = n[i + 1].u;
    for (int k = 0; k < 200 && hi - lo > 1e-16 * hi; ++k) {
        double mid = 0.5 * (lo + hi);
        ((*this)(mid) <= v ? lo : hi) = mid;
    }
    return lo;
}

YoungFunction YoungFunction::dual() const {
    // Fenchel equality at every node: Psi(Phi'(u)) = u Phi'(u) - Phi(u), Psi' = u.
    struct P {
        double x, value, deriv;
    };
    std::vector<P> pts;
    for (const auto& nd : nodes_) {
        pts.push_back({nd.dleft, nd.u * nd.dleft - nd.value, nd.u});
        if (nd.dright != nd.dleft) pts.push_back({nd.dright, nd.u * nd.dright - nd.value, nd.u});
    }
    std::vector<Node> out;
    if (pts.front().x > 0.0) out.push_back({0.0, 0.0, 0.0, 0.0});
    for (const auto& p : pts) {
        if (!out.empty() && std::abs(p.x - out.back().u) <= 1e-14 * std::max(1.0, p.x)) {
            out.back().dleft = std::min(out.back().dleft, p.deriv);
            out.back().dright = std::max(out.back().dright, p.deriv);
            continue;
        }
        if (!out.empty() && p.x < out.back().u) continue;
        out.push_back({p.x, std::max(0.0, p.value), p.deriv, p.deriv});
    }
    out.front().value = 0.0;
    auto d = from_nodes(std::move(out), "dual(" + name_ + ")");
    if (power_ && *power_ > 1.0) {
        double q = *power_, r = q / (q - 1.0);
        // (u^q)^* (x) = (q-1) (x/q)^{r}
        d.exact_ = [q, r](double x) { return (q - 1.0) * std::pow(x / q, r); };
        d.exact_derivative_ = [q, r](double x) { return r * (q - 1.0) / q * std::pow(x / q, r - 1.0); };
        d.exact_inverse_ = [q, r](double v) { return v <= 0.0 ? 0.0 : q * std::pow(v / (q - 1.0), 1.0 / r); };
    }
    return d;
}

bool YoungFunction::strict() const {
    const double top = nodes_.back().u;
    double prev = -1.0, first = -1.0;
    for (const auto& nd : nodes_) {
        if (nd.u < top * 1e-3) continue;
        double v = (*this)(nd.u);
        if (!std::isfinite(v)) return false;
        double ratio = v / nd.u;
        if (first < 0) first = ratio;
        if (ratio < prev * (1.0 - 1e-12)) return false;
        prev = ratio;
    }
    return prev > first * (1.0 + 1e-6);
}

double YoungFunction::convexity_defect() const {
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < nodes_.size(); ++i) {
        double u0 = nodes_[i - 1].u, u1 = nodes_[i].u, u2 = nodes_[i + 1].u;
        double f0 = (*this)(u0), f1 = (*this)(u1), f2 = (*this)(u2);
        double s1 = (f1 - f0) / (u1 - u0), s2 = (f2 - f1) / (u2 - u1);
        double scale = std::max({std::abs(s1), std::abs(s2), 1e-300});
        worst = std::min(worst, (s2 - s1) / scale);
    }
    return worst;
}

double YoungFunction::bidual_error() const {
    YoungFunction bi = dual().dual();
    double worst = 0.0;
    for (const auto& nd : nodes_) {
        if (nd.u == 0.0) continue;
        double a = nd.value, b = bi(nd.u);
        worst = std::max(worst, std::abs(a - b) / std::max(std::abs(a), 1e-300));
        if (a == 0.0 && b == 0.0) continue;
    }
    return worst;
}

bool YoungFunction::theta_convex(double p) const {
    if (power_) return p >= *power_ - 1e-12;
    if (theta_p_) return p >= *theta_p_ - 1e-12;
    return false;
}

namespace {

std::vector<double> normalized(std::vector<double> w) {
    double total = 0.0;
    for (double v : w) {
        if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("weights must be positive and finite");
        total += v;
    }
    for (auto& v : w) v /= total;
    return w;
}

}  // namespace

double orlicz_norm(const std::vector<double>& h, const std::vector<double>& raw_weights, const YoungFunction& phi) {
    if (h.size() != raw_weights.size()) throw std::invalid_argument("orlicz_norm: size mismatch");
    auto weights = normalized(raw_weights);
    double hmax = 0.0, wmin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < h.size(); ++i) {
        if (!std::isfinite(h[i])) throw std::invalid_argument("orlicz_norm: non-finite value");
        hmax = std::max(hmax, std::abs(h[i]));
        wmin = std::min(wmin, weights[i]);
    }
    if (hmax == 0.0) return 0.0;
    auto constraint = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < h.size(); ++i) s += weights[i] * phi(h[i] / t);
        return s;
    };
    double hi = hmax / phi.inverse(1.0);
    double lo = hmax / phi.inverse(1.0 / wmin);
    if (!std::isfinite(hi) || !std::isfinite(lo) || !(lo > 0.0))
        throw std::domain_error("orlicz_norm: Young function is not finite where needed");
    lo *= 1.0 - 1e-12;
    hi *= 1.0 + 1e-12;
    while (constraint(lo) <= 1.0 && lo > 1e-300) lo *= 0.5;
    while (constraint(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 300 && hi - lo > 1e-15 * hi; ++it) {
        double mid = std::sqrt(lo * hi);
        (constraint(mid) <= 1.0 ? hi : lo) = mid;
    }
    return hi;
}

double lp_norm(const std::vector<double>& h, const std::vector<double>& raw_weights, double p) {
    if (h.size() != raw_weights.size()) throw std::invalid_argument("lp_norm: size mismatch");
    auto weights = normalized(raw_weights);
    double s = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) s += weights[i] * std::pow(std::abs(h[i]), p);
    return std::pow(s, 1.0 / p);
}

std::vector<double> block_weights(const Partition& P, const Weighting& w) {
    std::vector<double> out(static_cast<std::size_t>(P.block_count()));
    double total = 0.0;
    for (std::int64_t b = 0; b < P.block_count(); ++b) total += (out[b] = w.box_weight(P.block(b)));
    for (auto& v : out) v /= total;
    return out;
}

double orlicz_norm(const WeightedBlockFunction& h, const YoungFunction& phi, const LatticeBox* scope) {
    const auto& P = *h.partition;
    if (static_cast<std::int64_t>(h.values.size()) != P.block_count()) throw std::invalid_argument("block count mismatch");
    if (!scope) return orlicz_norm(h.values, block_weights(P, *h.weighting), phi);
    std::vector<double> vals, ws;
    double total = 0.0;
    for (std::int64_t b = 0; b < P.block_count(); ++b) {
        auto box = P.block(b);
        if (!scope->contains(P.lattice(), box.sites(P.lattice()).front())) continue;
        vals.push_back(h.values[b]);
        ws.push_back(h.weighting->box_weight(box));
        total += ws.back();
    }
    for (auto& v : ws) v /= total;
    return orlicz_norm(vals, ws, phi);
}

ConsistencyReport consistency_check(const std::vector<double>& h, const Partition& fine, const Partition& coarse,
                                    const Weighting& w, const YoungFunction& phi, double p) {
    if (!phi.theta_convex(p)) throw std::invalid_argument("consistency_check: (Phi^-1)^p convexity is not certified");
    auto map = refinement_map(fine, coarse);
    std::vector<double> fw(static_cast<std::size_t>(fine.block_count()));
    for (std::int64_t b = 0; b < fine.block_count(); ++b) fw[b] = w.box_weight(fine.block(b));
    std::vector<double> cw(static_cast<std::size_t>(coarse.block_count()), 0.0), acc(cw.size(), 0.0);
    for (std::size_t b = 0; b < fw.size(); ++b) cw[map[b]] += fw[b];
    for (std::size_t b = 0; b < fw.size(); ++b) acc[map[b]] += fw[b] / cw[map[b]] * std::pow(std::abs(h[b]), p);
    std::vector<double> htilde(cw.size());
    for (std::size_t c = 0; c < cw.size(); ++c) htilde[c] = std::pow(acc[c], 1.0 / p);
    double total = 0.0;
    for (double v : fw) total += v;
    std::vector<double> fwn(fw.size()), cwn(cw.size());
    for (std::size_t b = 0; b < fw.size(); ++b) fwn[b] = fw[b] / total;
    for (std::size_t c = 0; c < cw.size(); ++c) cwn[c] = cw[c] / total;
    ConsistencyReport r;
    r.lhs = orlicz_norm(h, fwn, phi);
    r.rhs = orlicz_norm(htilde, cwn, phi);
    r.pass = r.lhs <= r.rhs + 1e-9 * std::max(1.0, r.rhs);
    return r;
}

InterpolationBound interpolation_bound(const YoungFunction& phi, double b, double delta, double alpha) {
    if (!phi.strict()) throw std::invalid_argument("interpolation_bound: Young function is not strict");
    if (!(b > 0.0) || !(delta > 0.0)) throw std::invalid_argument("interpolation_bound: b and delta must be positive");
    InterpolationBound ib;
    ib.phi = &phi;
    ib.alpha = alpha;
    ib.b = b;
    ib.delta = delta;
    ib.k = b * phi.dual()(2.0 / delta);
    ib.z = std::pow(ib.k, alpha) * (1.0 + 1e-12);
    return ib;
}

InterpolationBound::Check InterpolationBound::check(const std::vector<double>& u) const {
    std::vector<double> ua(u.size()), w(u.size(), 1.0 / static_cast<double>(u.size()));
    double l1 = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        ua[i] = std::pow(u[i], alpha);
        l1 += ua[i] * w[i];
    }
    Check c;
    c.lhs = l1;
    c.rhs = delta * orlicz_norm(ua, w, *phi) + z;
    c.pass = c.lhs <= c.rhs + 1e-9 * std::max(1.0, c.rhs);
    return c;
}

double lipschitz_truncation(double u, double M, double alpha) {
    if (!(M > 0.0)) throw std::invalid_argument("truncation level must be positive");
    if (u <= M) return std::pow(u, alpha);
    return std::pow(M, alpha) + alpha * std::pow(M, alpha - 1.0) * (u - M);
}

namespace {

/// Cubic B-spline bump on [-1, 0] with unit mass, and its derivative.
double bspline(double s) {
    s = std::abs(s);
    if (s >= 2.0) return 0.0;
    if (s >= 1.0) return (2.0 - s) * (2.0 - s) * (2.0 - s) / 6.0;
    return (4.0 - 6.0 * s * s + 3.0 * s * s * s) / 6.0;
}
double bspline_derivative(double s) {
    double a = std::abs(s), sg = s < 0 ? -1.0 : 1.0;
    if (a >= 2.0) return 0.0;
    if (a >= 1.0) return -sg * (2.0 - a) * (2.0 - a) / 2.0;
    return sg * (-2.0 * a + 1.5 * a * a);
}
double mollifier(double tau) { return 4.0 * bspline(4.0 * tau + 2.0); }
double mollifier_derivative(double tau) { return 16.0 * bspline_derivative(4.0 * tau + 2.0); }

constexpr std::array<double, 8> kGaussX{-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                                        0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr std::array<double, 8> kGaussW{0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                                        0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

/// Integral over [-1, 0] split at the spline knots.
template <class Fn>
double knot_quadrature(Fn&& fn) {
    double s = 0.0;
    for (int piece = 0; piece < 4; ++piece) {
        double a = -1.0 + 0.25 * piece, b = a + 0.25;
        for (int i = 0; i < 8; ++i) {
            double t = 0.5 * (a + b) + 0.5 * (b - a) * kGaussX[i];
            s += 0.5 * (b - a) * kGaussW[i] * fn(t);
        }
    }
    return s;
}

struct BaseYoung {
    int d = 1;
    std::vector<double> xs, ys;       // breakpoints including (0, 0)
    std::vector<double> slope_max;    // Psi2' on [xs[n], xs[n+1]) (last entry applies beyond)
    std::vector<double> psi2_at;      // Psi2(xs[n])

    double psi2_derivative(double x) const {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t n = static_cast<std::size_t>(it - xs.begin()) - 1;
        return slope_max[std::min(n, slope_max.size() - 1)];
    }
    double psi2(double x) const {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t n = static_cast<std::size_t>(it - xs.begin()) - 1;
        return psi2_at[n] + slope_max[std::min(n, slope_max.size() - 1)] * (x - xs[n]);
    }
    double psi(double x) const { return std::pow(x, d) + psi2(x) + x * x; }
    double psi_right_derivative(double x) const {
        double p1 = d == 1 ? 1.0 : d * std::pow(x, d - 1);
        return p1 + psi2_derivative(x) + 2.0 * x;
    }
    /// Maximizer of u x - Psi(x): inf{x >= 0 : Psi'_+(x) >= u}.
    double argmax(double u) const {
        if (psi_right_derivative(0.0) >= u) return 0.0;
        double lo = 0.0, hi = std::max(u, 1.0);
        for (int k = 0; k < 200 && hi - lo > 1e-16 * hi; ++k) {
            double mid = 0.5 * (lo + hi);
            (psi_right_derivative(mid) >= u ? hi : lo) = mid;
        }
        return hi;
    }
    double phi(double u) const {
        double x = argmax(u);
        return std::max(0.0, u * x - psi(x));
    }
};

}  // namespace

ConstructedYoung construct_phi(const std::vector<YoungEntry>& entries, double delta, double p, int d) {
    if (entries.empty()) throw std::invalid_argument("construct_phi: empty sequence");
    if (!(p > 1.0) || !(delta > 0.0)) throw std::invalid_argument("construct_phi: need p > 1, delta > 0");
    ConstructedYoung out;
    out.entries = entries;
    out.delta = delta;
    out.p = p;
    out.d = d;

    // Breakpoints (chi^{-delta/2}, N^d) of the piecewise-linear part.
    std::map<double, double> bp;
    for (const auto& e : entries) {
        if (!(e.chi > 0.0 && e.chi < 1.0)) throw std::invalid_argument("construct_phi: chi must lie in (0, 1)");
        double x = std::pow(e.chi, -delta / 2.0), y = std::pow(static_cast<double>(e.N), d);
        auto [it, fresh] = bp.emplace(x, y);
        if (!fresh) it->second = std::max(it->second, y);
    }
    auto so = std::make_shared<BaseYoung>();
    so->d = d;
    so->xs.push_back(0.0);
    so->ys.push_back(0.0);
    for (const auto& [x, y] : bp) {
        if (!(y > so->ys.back())) throw std::invalid_argument("construct_phi: breakpoint values are not increasing");
        so->xs.push_back(x);
        so->ys.push_back(y);
    }
    double running = 0.0;
    for (std::size_t n = 0; n + 1 < so->xs.size(); ++n) {
        running = std::max(running, (so->ys[n + 1] - so->ys[n]) / (so->xs[n + 1] - so->xs[n]));
        so->slope_max.push_back(running);
    }
    so->psi2_at.push_back(0.0);
    for (std::size_t n = 0; n + 1 < so->xs.size(); ++n)
        so->psi2_at.push_back(so->psi2_at[n] + so->slope_max[n] * (so->xs[n + 1] - so->xs[n]));

    out.base_dual = [so](double x) { return so->psi(std::abs(x)); };
    const auto grid = young_grid();
    out.base = YoungFunction::from_function([so](double u) { return so->phi(u); }, [so](double u) { return so->argmax(u); },
                                           "young-base", grid);

    // Anchor of the convexity correction.
    const double x1 = so->xs[1];
    const double budget = 0.5 * (std::pow(x1, d) + x1 * x1);
    double a1 = so->argmax(1.0);
    if (a1 > 0.0 && so->psi(a1) <= budget) {
        out.x0 = 1.0;
        out.a = a1;
    } else {
        double lo = 0.0, hi = 0.5;
        if (so->psi(hi) > budget) {
            for (int k = 0; k < 200; ++k) {
                double mid = 0.5 * (lo + hi);
                (so->psi(mid) <= budget ? lo : hi) = mid;
            }
        } else {
            lo = hi;
        }
        out.a = lo;
        out.x0 = so->psi_right_derivative(out.a);
    }
    const double a = out.a, x0 = out.x0;
    out.ordering_constant = std::max(0.0, a * x0 - so->phi(x0));

    auto V = [so, a](double y) { return y <= 0.0 ? 0.0 : std::max(0.0, so->argmax(y) - a); };
    auto F = [V, a](double x) { return a + knot_quadrature([&](double t) { return mollifier(t) * V(x + t); }); };
    auto f = [V](double x) { return -knot_quadrature([&](double t) { return mollifier_derivative(t) * V(x + t); }); };

    using State = std::array<double, 2>;  // psi, Phihat
    auto rhs = [&](const State& s, State& ds, double x) {
        double Fy = F(s[0]), fy = std::max(0.0, f(s[0]));
        ds[0] = std::tanh((p - 1.0) / (2.0 * x) * Fy * Fy / (fy + 1.0));
        ds[1] = Fy;
    };
    std::vector<double> times{x0};
    for (double u : grid)
        if (u > x0 * (1.0 + 1e-12)) times.push_back(u);
    std::vector<State> states;
    State s0{x0, a * x0};
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_dense_output(1e-12, 1e-11, ode::runge_kutta_dopri5<State>());
    ode::integrate_times(stepper, rhs, s0, times.begin(), times.end(), 1e-3,
                         [&](const State& s, double) { states.push_back(s); });
    if (states.size() != times.size()) throw std::runtime_error("construct_phi: ODE integration failed");

    std::vector<YoungFunction::Node> nodes;
    std::vector<double> second;  // Phihat'' from the ODE, for reporting
    for (double u : grid) {
        if (u > x0 * (1.0 - 1e-12)) break;
        nodes.push_back({u, a * u, a, a});
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        double Fy = F(states[i][0]);
        nodes.push_back({times[i], states[i][1], Fy, Fy});
    }
    out.corrected = YoungFunction::from_nodes(nodes, "young-corrected");
    out.corrected.certify_theta(p);
    out.corrected_dual = out.corrected.dual();

    // Certificate (a).
    out.growth_bound = std::pow(1.0 + out.ordering_constant, 1.0 / d) * (1.0 + 1e-6);
    out.growth_max = 0.0;
    const double psi_top = out.corrected_dual.nodes().back().value;
    for (double u : grid) {
        if (u < 1.0 || u > psi_top) continue;
        out.growth_max = std::max(out.growth_max, std::pow(u, -1.0 / d) * out.corrected_dual.inverse(u));
    }
    out.growth_ok = std::isfinite(out.growth_max) && out.growth_max <= out.growth_bound;

    // Certificate (b).
    out.scale_ok = true;
    for (const auto& e : entries) {
        double v = out.corrected_dual.inverse(std::pow(static_cast<double>(e.N), d));
        double bound = std::pow(e.chi, -delta / 2.0);
        out.scale_value.push_back(v);
        out.scale_bound.push_back(bound);
        if (!(v <= bound * (1.0 + 1e-9))) out.scale_ok = false;
    }

    // Certificate (c): second derivative by central differences of the stored Phihat'.
    const auto& nd = out.corrected.nodes();
    out.convexity_min_margin = 1.0;
    for (std::size_t i = 1; i + 1 < nd.size(); ++i) {
        if (nd[i].u <= x0) continue;
        double second_derivative = (nd[i + 1].dleft - nd[i - 1].dright) / (nd[i + 1].u - nd[i - 1].u);
        double lhs = (p - 1.0) * nd[i].dright * nd[i].dright;
        double margin = (lhs - nd[i].u * second_derivative) / std::max(lhs, 1e-300);
        out.convexity_min_margin = std::min(out.convexity_min_margin, margin);
    }
    out.convexity_ok = out.convexity_min_margin >= -1e-8;

    // Theta convexity over three decades starting at Phihat(x0).
    {
        const int M = 600;
        double u_lo = std::max(out.corrected(x0), 1e-6), u_hi = 1e3 * u_lo;
        std::vector<double> us(M), th(M);
        for (int i = 0; i < M; ++i) {
            us[i] = u_lo * std::pow(u_hi / u_lo, static_cast<double>(i) / (M - 1));
            th[i] = std::pow(out.corrected.inverse(us[i]), p);
        }
        out.theta_min_second_difference = INFINITY;
        for (int i = 1; i + 1 < M; ++i) {
            double s1 = (th[i] - th[i - 1]) / (us[i] - us[i - 1]);
            double s2 = (th[i + 1] - th[i]) / (us[i + 1] - us[i]);
            out.theta_min_second_difference = std::min(out.theta_min_second_difference, (s2 - s1) / std::max(std::abs(s2), 1e-300));
        }
        out.theta_convex = out.theta_min_second_difference >= -1e-8;
    }

    // Ordering transfer Phihat <= Phi + C.
    out.ordering_max_excess = 0.0;
    for (const auto& n : nd) {
        double excess = n.value - (so->phi(n.u) + out.ordering_constant);
        out.ordering_max_excess = std::max(out.ordering_max_excess, excess / std::max(1.0, n.value));
    }
    out.ordering = out.ordering_max_excess <= 1e-9;
    out.strict = out.corrected.strict();
    out.bidual_error = out.corrected.bidual_error();
    return out;
}

}  // namespace zrp
