#include "zrp/pme.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace zrp {

namespace {

double kahan_sum(const std::vector<double>& v) {
    double s = 0.0, c = 0.0;
    for (double x : v) {
        double y = x - c;
        double t = s + y;
        c = (t - s) - y;
        s = t;
    }
    return s;
}

}  // namespace

GridField::GridField(int d_, int M_, double fill) : d(d_), M(M_) {
    if (d < 1 || d > 3 || M < 2) throw std::invalid_argument("grid needs d in [1,3] and M >= 2");
    std::size_t n = 1;
    for (int i = 0; i < d; ++i) n *= static_cast<std::size_t>(M);
    values.assign(n, fill);
}

GridField GridField::sample(int d, int M, const std::function<double(const std::vector<double>&)>& u0) {
    GridField g(d, M);
    std::vector<double> p(d);
    for (std::size_t x = 0; x < g.size(); ++x) {
        std::size_t r = x;
        for (int i = d - 1; i >= 0; --i) {
            p[i] = (static_cast<double>(r % M) + 0.5) / M;
            r /= M;
        }
        double v = u0(p);
        if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("initial profile must be finite and nonnegative");
        g.values[x] = v;
    }
    return g;
}

double GridField::mass() const { return kahan_sum(values) / static_cast<double>(values.size()); }

double GridField::max() const { return *std::max_element(values.begin(), values.end()); }

double GridField::interpolate(const std::vector<double>& point) const {
    std::vector<int> lo(d);
    std::vector<double> frac(d);
    for (int i = 0; i < d; ++i) {
        double s = point[i] * M - 0.5;
        double f = std::floor(s);
        frac[i] = s - f;
        lo[i] = static_cast<int>(((static_cast<long long>(f) % M) + M) % M);
    }
    double out = 0.0;
    for (int corner = 0; corner < (1 << d); ++corner) {
        double weight = 1.0;
        std::size_t idx = 0;
        for (int i = 0; i < d; ++i) {
            int bit = (corner >> i) & 1;
            weight *= bit ? frac[i] : 1.0 - frac[i];
            idx = idx * M + static_cast<std::size_t>((lo[i] + bit) % M);
        }
        out += weight * values[idx];
    }
    return out;
}

double pme_cfl_bound(const GridField& u, double alpha) {
    if (!(alpha >= 1.0)) throw std::invalid_argument("solver needs alpha >= 1");
    double dx = u.spacing();
    double slope = alpha * std::pow(std::max(u.max(), 0.0), alpha - 1.0);
    if (slope <= 0.0) return INFINITY;
    return dx * dx / (2.0 * u.d * slope);
}

GridField step_pme(const GridField& u, double dt, double alpha) {
    double bound = pme_cfl_bound(u, alpha);
    if (!(dt > 0.0) || dt > bound) throw std::domain_error("time step violates the CFL bound");
    const int M = u.M, d = u.d;
    std::vector<double> v(u.size());
    for (std::size_t x = 0; x < u.size(); ++x) v[x] = alpha == 1.0 ? u.values[x] : std::pow(u.values[x], alpha);
    GridField out = u;
    const double c = dt * M * M / 2.0;
    std::size_t stride = 1;
    for (int axis = d - 1; axis >= 0; --axis) {
        for (std::size_t x = 0; x < u.size(); ++x) {
            auto coord = (x / stride) % static_cast<std::size_t>(M);
            std::size_t next = coord + 1 == static_cast<std::size_t>(M) ? x - coord * stride : x + stride;
            // flux across the face between x and next
            double flux = c * (v[next] - v[x]);
            out.values[x] += flux;
            out.values[next] -= flux;
        }
        stride *= static_cast<std::size_t>(M);
    }
    for (auto& val : out.values) val = std::max(val, 0.0);
    return out;
}

PmeSolution solve_pme(const GridField& u0, double t_fin, double alpha, std::vector<double> output_times) {
    if (!(t_fin > 0.0)) throw std::invalid_argument("t_fin must be positive");
    std::sort(output_times.begin(), output_times.end());
    for (double t : output_times)
        if (t < 0.0 || t > t_fin) throw std::invalid_argument("output times must lie in [0, t_fin]");
    PmeSolution sol;
    GridField u = u0;
    double t = 0.0;
    std::size_t next = 0;
    auto record = [&]() {
        while (next < output_times.size() && output_times[next] <= t) {
            sol.times.push_back(output_times[next]);
            sol.frames.push_back(u);
            sol.masses.push_back(u.mass());
            ++next;
        }
    };
    record();
    while (t < t_fin) {
        double target = next < output_times.size() ? std::min(output_times[next], t_fin) : t_fin;
        double dt = std::min(kPmeSafety * pme_cfl_bound(u, alpha), target - t);
        u = step_pme(u, dt, alpha);
        t = (dt == target - t) ? target : t + dt;
        ++sol.steps;
        record();
    }
    sol.final = u;
    return sol;
}

double l1_distance(const GridField& a, const GridField& b) {
    if (a.d != b.d || a.M != b.M) throw std::invalid_argument("l1_distance: grid mismatch");
    double s = 0.0;
    for (std::size_t x = 0; x < a.size(); ++x) s += std::abs(a.values[x] - b.values[x]);
    return s / static_cast<double>(a.size());
}

double l1_distance_restricted(const GridField& coarse, const GridField& fine) {
    if (coarse.d != fine.d || fine.M % coarse.M != 0) throw std::invalid_argument("grids are not nested");
    const int r = fine.M / coarse.M, d = coarse.d;
    GridField avg(d, coarse.M);
    for (std::size_t x = 0; x < fine.size(); ++x) {
        std::size_t rem = x, idx = 0, mul = 1;
        for (int i = d - 1; i >= 0; --i) {
            idx += mul * ((rem % fine.M) / r);
            rem /= fine.M;
            mul *= coarse.M;
        }
        avg.values[idx] += fine.values[x];
    }
    double cells = std::pow(static_cast<double>(r), d);
    for (auto& v : avg.values) v /= cells;
    return l1_distance(coarse, avg);
}

HydroSeries compare_hydrodynamic(const std::vector<std::vector<Configuration>>& snapshots, const std::vector<double>& times,
                                 const std::vector<GridField>& pde_frames, double eps) {
    if (pde_frames.size() != times.size()) throw std::invalid_argument("compare_hydrodynamic: one PDE frame per time");
    if (snapshots.empty()) throw std::invalid_argument("compare_hydrodynamic: no trajectories");
    HydroSeries out;
    out.times = times;
    const auto& L = snapshots.front().front().lattice;
    const int d = L.dim(), N = L.side();
    for (const auto& frame : pde_frames)
        if (frame.d != d) throw std::invalid_argument("compare_hydrodynamic: PDE grid dimension mismatch");
    std::vector<std::vector<double>> reference(times.size(), std::vector<double>(static_cast<std::size_t>(L.site_count())));
    for (std::size_t t = 0; t < times.size(); ++t)
        for (Site x = 0; x < L.site_count(); ++x) {
            auto c = L.coords(x);
            std::vector<double> p(d);
            for (int i = 0; i < d; ++i) p[i] = static_cast<double>(c[i]) / N;
            reference[t][static_cast<std::size_t>(x)] = pde_frames[t].interpolate(p);
        }
    for (const auto& traj : snapshots) {
        if (traj.size() != times.size()) throw std::invalid_argument("compare_hydrodynamic: snapshot grid mismatch");
        std::vector<double> dist;
        for (std::size_t t = 0; t < times.size(); ++t) {
            if (!(traj[t].lattice == L)) throw std::invalid_argument("compare_hydrodynamic: lattice mismatch");
            auto avg = local_average_field(traj[t], eps);
            double s = 0.0;
            for (std::size_t x = 0; x < avg.size(); ++x) s += std::abs(avg[x] - reference[t][x]);
            dist.push_back(s / static_cast<double>(avg.size()));
        }
        out.per_trajectory.push_back(std::move(dist));
    }
    const double n = static_cast<double>(out.per_trajectory.size());
    for (std::size_t t = 0; t < times.size(); ++t) {
        double m = 0.0, m2 = 0.0;
        for (const auto& row : out.per_trajectory) m += row[t];
        m /= n;
        for (const auto& row : out.per_trajectory) m2 += (row[t] - m) * (row[t] - m);
        out.mean.push_back(m);
        out.standard_error.push_back(n > 1 ? std::sqrt(m2 / (n - 1) / n) : 0.0);
    }
    return out;
}

}  // namespace zrp
