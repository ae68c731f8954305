/// @file multiscale.hpp
/// @brief Block alpha-averages, coarse gradients, the discrete Sobolev audit, the telescoping
/// decomposition and the diffusivity-error statistics.
#pragma once

#include <optional>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/lattice.hpp"
#include "zrp/orlicz.hpp"
#include "zrp/rng.hpp"

namespace zrp {

/// ((1/w(B)) sum_{x in B} w(x) eta(x)^alpha)^{1/alpha}
double alpha_average(const Configuration& eta, const LatticeBox& B, const Weighting& w, double alpha);

/// alpha_average over every block of P.
std::vector<double> block_alpha_averages(const Configuration& eta, const Partition& P, const Weighting& w, double alpha);

/// Fine blocks of P lying inside the box.
std::vector<std::int64_t> blocks_inside(const Partition& P, const LatticeBox& box);

/// (l / l_coarse)^{d-2} sum over adjacent fine-block pairs inside the box of
/// (Lambda_B^{alpha/2} - Lambda_B'^{alpha/2})^2, where l is the fine scale and l_coarse the
/// shortest side of the box.
double coarse_gradient_sq(const Configuration& eta, const LatticeBox& coarse_block, const Partition& fine,
                          const Weighting& w, double alpha);

/// Same quantity from precomputed fine-block values Lambda_B.
double coarse_gradient_sq_from_values(const std::vector<double>& lambda, const std::vector<std::int64_t>& inside,
                                      const Partition& fine, double coarse_side, double alpha);

/// Real field on a non-periodic box, row-major with the last axis fastest.
struct BoxField {
    std::vector<int> sides;
    std::vector<double> values;
    std::size_t size() const { return values.size(); }
};

struct SobolevTerms {
    double lhs = 0;       // ||f^2||_{l^p}, uniform probability weight
    double l2_sq = 0;     // ||f||_{l^2}^2
    double gradient = 0;  // l^{2-d} sum_{x~y} |f(x)-f(y)|^2 over unordered box bonds, l the shortest side
};

SobolevTerms sobolev_terms(const BoxField& f, double p);

struct SobolevReport {
    double lhs = 0, rhs = 0;
    bool pass = false;
};

SobolevReport discrete_sobolev_check(const BoxField& f, double lambda, double p, double C);

/// Smallest C with lhs <= (1 + lambda) ||f||^2 + C (1 + 1/lambda) ||grad f||^2; 0 if none needed.
double sobolev_constant_needed(const BoxField& f, double lambda, double p);

/// Random field on a box: mixtures of noise, spikes, plateaus, ramps and smooth bumps.
BoxField random_box_field(CounterRng& rng, const std::vector<int>& sides);

/// Random box sides in [lo, hi] with ratio at most `aspect`.
std::vector<int> random_box_sides(CounterRng& rng, int d, int lo, int hi, double aspect);

/// [||Lambda_B^alpha||_{l^p(fine inside box, w)} - (1 + lambda) Lambda_box^alpha]_+
double delta_btilde(const Configuration& eta, const LatticeBox& coarse_block, const Partition& fine, const Weighting& w,
                    double alpha, double p, double lambda);

struct LambdaSchedule {
    std::vector<double> lambda;  // lambda_1 .. lambda_{K-1}
    double sum = 0;
    double max_partial_product = 1;  // max_k prod_{m<k} (1 + lambda_m)
    bool all_in_unit_interval = true;
};

LambdaSchedule lambda_schedule(const PartitionFamily& family);

struct TelescopeReport {
    std::vector<double> Z;                      // Z_1 .. Z_K
    std::vector<double> lambda;                 // lambda_1 .. lambda_{K-1}
    std::vector<double> differences;            // Z_k - (1 + lambda_k) Z_{k+1}
    std::vector<double> products;               // prod_{m<k} (1 + lambda_m), k = 1..K
    double reconstruction = 0;
    double residual = 0;                        // |reconstruction - Z_1| / max(1, Z_1)
    double site_norm = 0;                       // ||eta^alpha||_{l_Phi} with uniform weight
    double first_level_factor = 0;              // Z_1 / site_norm
    double top_alpha_average = 0;               // Lambda_torus^alpha
    double l1_norm = 0;                         // mean of eta^alpha
    double top_level_factor = 0;                // Lambda_torus^alpha / l1_norm
    double top_level_identity_error = 0;        // |Z_K Phi^{-1}(1) - Lambda_torus^alpha| / Lambda_torus^alpha
};

TelescopeReport telescope(const Configuration& eta, const PartitionFamily& family, const YoungFunction& phi,
                          const LambdaSchedule& schedule, double alpha);

/// N^{-d} sum_x |phi(eta(x)) - phi(mean over the eps-window)| with phi(u) = u^alpha, or its
/// Lipschitz truncation at M when given.
double vna_snapshot(const Configuration& eta, double eps, double alpha, std::optional<double> M = std::nullopt);

/// Right-endpoint quadrature of vna_snapshot over a uniform sample grid.
double vna_statistic(const std::vector<double>& times, const std::vector<Configuration>& snapshots, double eps,
                     double alpha, std::optional<double> M = std::nullopt);

/// ||eta^alpha 1(eta > M)||_{l^1} + ||etabar^alpha 1(etabar > M)||_{l^1}, the bound on |V - V_M|.
double truncation_tail(const Configuration& eta, double eps, double alpha, double M);

/// N^{2-d} sum over the d bonds (x, x + e_i) of each site of (eta(x)^{alpha/2} - eta(x+e_i)^{alpha/2})^2.
double entropy_dissipation_statistic(const Configuration& eta, double alpha);

}  // namespace zrp
