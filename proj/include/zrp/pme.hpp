/// @file pme.hpp
/// @brief Explicit conservative solver for du/dt = (1/2) Laplacian(u^alpha) on the unit torus.
#pragma once

#include <functional>
#include <vector>

#include "zrp/configuration.hpp"

namespace zrp {

/// Cell averages on an M^d grid over [0,1)^d, row-major with the last axis fastest.
struct GridField {
    int d = 1;
    int M = 2;
    std::vector<double> values;

    GridField() = default;
    GridField(int d, int M, double fill = 0.0);
    static GridField sample(int d, int M, const std::function<double(const std::vector<double>&)>& u0);
    std::size_t size() const { return values.size(); }
    double spacing() const { return 1.0 / M; }
    /// Integral over the unit torus, compensated summation.
    double mass() const;
    double max() const;
    /// Periodic multilinear interpolation of cell-centred values at a point of [0,1)^d.
    double interpolate(const std::vector<double>& point) const;
};

/// Largest admissible explicit step dx^2 / (2 d alpha max(u)^{alpha-1}).
double pme_cfl_bound(const GridField& u, double alpha);

/// One explicit step; throws std::domain_error when dt exceeds the CFL bound.
GridField step_pme(const GridField& u, double dt, double alpha);

struct PmeSolution {
    GridField final;
    std::vector<double> times;      // requested output times
    std::vector<GridField> frames;  // solution at each output time
    std::vector<double> masses;
    std::uint64_t steps = 0;
};

inline constexpr double kPmeSafety = 0.9;

/// Integrates to t_fin with dt = 0.9 * CFL bound, landing exactly on every output time.
PmeSolution solve_pme(const GridField& u0, double t_fin, double alpha, std::vector<double> output_times = {});

/// L^1 distance between two fields on the same grid.
double l1_distance(const GridField& a, const GridField& b);

/// Mean over cells of |u - v| after averaging the finer field down to the coarser grid.
double l1_distance_restricted(const GridField& coarse, const GridField& fine);

struct HydroSeries {
    std::vector<double> times;
    std::vector<double> mean;
    std::vector<double> standard_error;
    std::vector<std::vector<double>> per_trajectory;  // [trajectory][time]
};

/// For each grid time: N^{-d} sum_x |eps-window average of eta at x - u(t, x/N)|, averaged over
/// trajectories. snapshots[trajectory][time]; pde frames at the same times.
HydroSeries compare_hydrodynamic(const std::vector<std::vector<Configuration>>& snapshots, const std::vector<double>& times,
                                 const std::vector<GridField>& pde_frames, double eps);

}  // namespace zrp
