/// @file exact.hpp
/// @brief Enumerated state spaces and brute-force oracles for the dynamics.
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/kmc.hpp"

namespace zrp {

class StateSpaceSector {
public:
    /// All configurations with exactly n particles; Pi is the product measure conditioned on n.
    static StateSpaceSector fixed(TorusLattice lattice, double chi, double alpha, int n);
    /// All configurations with at most cap particles per site under Pi_level, renormalized.
    static StateSpaceSector capped(TorusLattice lattice, double chi, double alpha, double level, int cap);

    const TorusLattice& lattice() const { return lattice_; }
    double chi() const { return chi_; }
    double alpha() const { return alpha_; }
    bool is_fixed() const { return n_ >= 0; }
    int particles() const { return n_; }
    std::size_t size() const { return states_.size(); }
    const std::vector<std::uint32_t>& state(std::size_t i) const { return states_[i]; }
    double pi(std::size_t i) const { return pi_[i]; }
    const std::vector<double>& pi() const { return pi_; }
    /// Index of a count vector, or -1 when it is outside the sector.
    long find(const std::vector<std::uint32_t>& k) const;
    Configuration configuration(std::size_t i) const { return Configuration(lattice_, chi_, states_[i]); }
    /// Pi mass that the cap cut away (capped sectors only).
    double truncated_mass() const { return truncated_mass_; }

private:
    std::uint64_t key(const std::vector<std::uint32_t>& k) const;
    void finish(const std::vector<double>& log_weights);

    TorusLattice lattice_;
    double chi_ = 1.0, alpha_ = 1.0;
    int n_ = -1;
    std::uint32_t base_ = 1;
    std::vector<std::vector<std::uint32_t>> states_;
    std::unordered_map<std::uint64_t, std::size_t> index_;
    std::vector<double> pi_;
    double truncated_mass_ = 0.0;
};

inline constexpr std::size_t kMaxSectorStates = 1'000'000;

struct GeneratorMatrix {
    std::size_t size = 0;
    std::vector<std::vector<std::pair<std::size_t, double>>> off;  // per row, summed over edge multiplicity
    std::vector<double> diag;

    double entry(std::size_t i, std::size_t j) const;
    std::vector<double> apply(const std::vector<double>& v) const;
    double max_row_sum() const;
};

GeneratorMatrix build_generator(const StateSpaceSector& sector, const RateModel& model = {});

double reversibility_residual(const StateSpaceSector& sector, const GeneratorMatrix& Q);

/// Densities are vectors over the sector with sum f * pi = 1.
std::vector<double> normalize_density(const StateSpaceSector& sector, std::vector<double> f);

/// sum_eta pi(eta) 1/2 sum_{directed edges x->y} eta(x)^alpha / chi (sqrt f(eta^{x,y}) - sqrt f(eta))^2
double dirichlet_form(const StateSpaceSector& sector, const std::vector<double>& f);
/// Same edge sum with g in place of sqrt f.
double dirichlet_form_sqrt(const StateSpaceSector& sector, const std::vector<double>& g);
/// (2 / N^2) * (-<sqrt f, Q sqrt f>_pi), the matrix route to the same number.
double dirichlet_form_from_matrix(const StateSpaceSector& sector, const GeneratorMatrix& Q, const std::vector<double>& f);

/// For every group element, the permutation of sector indices it induces.
std::vector<std::vector<std::size_t>> sector_symmetry_action(const StateSpaceSector& sector);
std::vector<double> symmetrize_density(const StateSpaceSector& sector, const std::vector<double>& f);
bool is_invariant(const StateSpaceSector& sector, const std::vector<double>& f, double rel_tol = 1e-12);
double expectation(const StateSpaceSector& sector, const std::vector<double>& f, const std::vector<double>& F);

struct InequalityReport {
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    double margin() const { return rhs - lhs; }
};

/// Long jump x -> y against k^2 N^-d dform(f) with k the lattice distance.
InequalityReport canonical_path_check(const StateSpaceSector& sector, const std::vector<double>& f, Site x, Site y);

struct RegularityTerms {
    std::vector<double> discrepancy;   // squared difference observable
    std::vector<double> error_weight;  // chi^delta (1 + ||eta^alpha||_l1) times the block prefactor
    double dirichlet_coefficient = 0;  // multiplies dform(f)
};

/// Site form: (eta(x)^{a/2} - eta(y)^{a/2})^2, coefficient chi k^2 N^-d.
RegularityTerms site_regularity_terms(const StateSpaceSector& sector, Site x, Site y);
/// Block form with alpha-averages over boxes B, B2 of side l, path bound ltilde and weight ratio A.
RegularityTerms block_regularity_terms(const StateSpaceSector& sector, const LatticeBox& B, const LatticeBox& B2,
                                       const Weighting& w, double l, double ltilde);

struct RegularityReport {
    double lhs = 0, dirichlet_term = 0, error_term = 0, rhs = 0;
    bool pass = false;
};

RegularityReport pathwise_regularity_check(const StateSpaceSector& sector, const std::vector<double>& f,
                                           const RegularityTerms& terms, double C);

/// Smallest C with sup_f {E_f[discrepancy - C error] - coefficient dform(f)} <= 0, by bisection on
/// the principal eigenvalue of the group-averaged operator.
double calibrate_regularity_constant(const StateSpaceSector& sector, const GeneratorMatrix& Q, const RegularityTerms& terms);

struct FeynmanKacResult {
    double principal = 0.0;
    double variational = 0.0;
    long power_iterations = 0;
    long ascent_iterations = 0;
    std::vector<double> optimal_density;
};

struct FeynmanKacOptions {
    long power_budget = 5'000'000;
    long ascent_budget = 100'000;
    double tolerance = 1e-14;
};

/// Principal eigenvalue of diag(F) + 2 chi N^-d Q (Pi-symmetrized) by shifted power iteration, and
/// sup_f {E_f F - chi N^{2-d} dform(f)} by subspace ascent over sqrt f using dirichlet_form only.
FeynmanKacResult feynman_kac_eigen(const StateSpaceSector& sector, const GeneratorMatrix& Q, const std::vector<double>& F,
                                   const FeynmanKacOptions& options = {});

struct FiniteTimeFK {
    double lhs = 0.0;              // chi N^-d log E_Pi exp(N^d/chi int_0^t F)
    double rigorous_bound = 0.0;   // t sup {E_f F - 1/2 chi N^{2-d} dform}
    double displayed_bound = 0.0;  // t sup {E_f F - chi N^{2-d} dform}
};

FiniteTimeFK finite_time_feynman_kac(const StateSpaceSector& sector, const GeneratorMatrix& Q, const std::vector<double>& F,
                                     double t);

}  // namespace zrp
