/// @file orlicz.hpp
/// @brief Young functions, Legendre duals, Orlicz norms and the Young-function construction.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "zrp/lattice.hpp"

namespace zrp {

/// Nonnegative grid 0, then log-spaced [1e-6, 1e12].
std::vector<double> young_grid(std::size_t points = 4096, double lo = 1e-6, double hi = 1e12);

/// Convex even function with Phi(0) = 0, stored as Hermite nodes on [0, inf) with one-sided
/// derivatives; linear beyond the last node. An analytic evaluator overrides the nodes when set.
class YoungFunction {
public:
    struct Node {
        double u, value, dleft, dright;
    };

    static YoungFunction from_nodes(std::vector<Node> nodes, std::string name);
    static YoungFunction from_function(const std::function<double(double)>& phi, const std::function<double(double)>& dphi,
                                       std::string name, const std::vector<double>& grid = young_grid());
    /// |u|^q, q >= 1.
    static YoungFunction power(double q);

    double operator()(double u) const;
    /// Right derivative on [0, inf).
    double derivative(double u) const;
    /// sup{u >= 0 : Phi(u) <= v}
    double inverse(double v) const;
    YoungFunction dual() const;

    const std::vector<Node>& nodes() const { return nodes_; }
    const std::string& name() const { return name_; }

    /// Phi(u)/u strictly increasing over the top three decades of the grid.
    bool strict() const;
    /// Smallest second divided difference on the nodes, relative to the local value scale.
    double convexity_defect() const;
    /// Max relative gap between the bidual and Phi on the nodes.
    double bidual_error() const;

    /// (Phi^{-1})^p is known to be convex for this p.
    bool theta_convex(double p) const;
    void certify_theta(double p) { theta_p_ = p; }
    std::optional<double> power_exponent() const { return power_; }

private:
    std::vector<Node> nodes_;
    std::string name_;
    std::function<double(double)> exact_;
    std::function<double(double)> exact_derivative_;
    std::function<double(double)> exact_inverse_;
    std::optional<double> power_;
    std::optional<double> theta_p_;
};

/// inf{t > 0 : sum_i weights_i Phi(h_i / t) <= 1} with the weights normalized to sum to 1.
double orlicz_norm(const std::vector<double>& h, const std::vector<double>& weights, const YoungFunction& phi);
double lp_norm(const std::vector<double>& h, const std::vector<double>& weights, double p);

struct WeightedBlockFunction {
    const Partition* partition = nullptr;
    const Weighting* weighting = nullptr;
    std::vector<double> values;  // per block of the partition
};

/// Full-torus scope when scope is null; otherwise the blocks inside the box *scope.
double orlicz_norm(const WeightedBlockFunction& h, const YoungFunction& phi, const LatticeBox* scope = nullptr);

/// Normalized block weights w(B)/w(scope) over the blocks of a partition (all blocks).
std::vector<double> block_weights(const Partition& P, const Weighting& w);

struct ConsistencyReport {
    double lhs = 0, rhs = 0;
    bool pass = false;
};

ConsistencyReport consistency_check(const std::vector<double>& h, const Partition& fine, const Partition& coarse,
                                    const Weighting& w, const YoungFunction& phi, double p);

struct InterpolationBound {
    double z = 0.0;
    double k = 0.0;
    double alpha = 1.0, b = 1.0, delta = 1.0;
    const YoungFunction* phi = nullptr;

    struct Check {
        double lhs = 0, rhs = 0;
        bool pass = false;
    };
    /// Uniform site weights; u >= 0 with mean at most b.
    Check check(const std::vector<double>& u) const;
};

InterpolationBound interpolation_bound(const YoungFunction& phi, double b, double delta, double alpha);

double lipschitz_truncation(double u, double M, double alpha);

struct YoungEntry {
    int N = 2;
    double chi = 0.5;
};

struct ConstructedYoung {
    YoungFunction base;                       // Legendre dual of base_dual
    YoungFunction corrected;                  // (corrected^{-1})^p convex, corrected <= base + ordering_constant
    YoungFunction corrected_dual;
    std::function<double(double)> base_dual;  // x^d + piecewise-linear part + x^2
    double a = 0, x0 = 1, ordering_constant = 0;
    double p = 1.5, delta = 1.0;
    int d = 1;
    std::vector<YoungEntry> entries;

    double growth_max = 0, growth_bound = 0;    // sup_u u^{-1/d} corrected_dual^{-1}(u) and its bound
    bool growth_ok = false;
    std::vector<double> scale_value, scale_bound;  // corrected_dual^{-1}(N^d) and chi_N^{-delta/2}, per entry
    bool scale_ok = false;
    double convexity_min_margin = 0;  // min over grid of ((p-1) Phi'^2 - x Phi'') / ((p-1) Phi'^2)
    bool convexity_ok = false;
    double theta_min_second_difference = 0;
    bool theta_convex = false;
    double ordering_max_excess = 0;
    bool ordering = false;
    bool strict = false;
    double bidual_error = 0;
    bool all_pass() const { return growth_ok && scale_ok && convexity_ok && theta_convex && ordering && strict; }
};

ConstructedYoung construct_phi(const std::vector<YoungEntry>& entries, double delta, double p, int d);

/// Default exponent 1 + 1/(2d).
inline double default_sobolev_exponent(int d) { return 1.0 + 1.0 / (2.0 * d); }

}  // namespace zrp
