/// @file configuration.hpp
/// @brief Particle configurations eta = chi * k on the torus.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zrp/lattice.hpp"

namespace zrp {

inline constexpr std::int64_t kMaxSites = std::int64_t{1} << 24;

struct Configuration {
    TorusLattice lattice;
    double chi = 1.0;
    std::vector<std::uint32_t> counts;

    Configuration() = default;
    Configuration(TorusLattice lattice, double chi);
    Configuration(TorusLattice lattice, double chi, std::vector<std::uint32_t> counts);

    double eta(Site x) const { return chi * static_cast<double>(counts[static_cast<std::size_t>(x)]); }
    std::vector<double> field() const;
    std::uint64_t particle_count() const;
};

double total_mass(const Configuration& eta);

struct MassClass {
    double b = 1.0;
    bool contains(const Configuration& eta) const { return total_mass(eta) <= b; }
};

/// Mean of eta over the box of side 2*floor(eps*N)+1 around x; sites are counted with
/// multiplicity when the window wraps the torus.
double local_average(const Configuration& eta, double eps, Site x);

/// local_average at every site, via separable cyclic window sums.
std::vector<double> local_average_field(const Configuration& eta, double eps);

double entropy_density(double u);
double entropy(const Configuration& eta);

/// x -> P(x) * signs + translation (mod N), with P an axis permutation.
struct Symmetry {
    std::vector<int> permutation;
    std::vector<int> signs;
    std::vector<int> translation;

    static Symmetry identity(int d);
    static Symmetry translate(std::vector<int> t);
    Site apply(const TorusLattice& lattice, Site x) const;
    /// (this o other)(x) = this(other(x))
    Symmetry compose(const Symmetry& other, int N) const;
    void validate(int d) const;
};

/// All signed axis permutations combined with all translations.
std::vector<Symmetry> symmetry_group(const TorusLattice& lattice);

Configuration apply_symmetry(const Configuration& eta, const Symmetry& g);

/// Binary snapshot: "ZRPS", u32 version, u32 d, u32 N, f64 chi, u32 payload kind, then
/// row-major little-endian payload (u32 counts or f64 values).
enum class SnapshotPayload : std::uint32_t { Counts = 0, Doubles = 1 };
inline constexpr std::uint32_t kSnapshotVersion = 1;

std::vector<unsigned char> encode_snapshot(const Configuration& eta);
std::vector<unsigned char> encode_field_snapshot(const TorusLattice& lattice, double chi, const std::vector<double>& values);
Configuration decode_snapshot(const std::vector<unsigned char>& bytes);
std::vector<double> decode_field_snapshot(const std::vector<unsigned char>& bytes, TorusLattice* lattice = nullptr);
void write_snapshot(const std::string& path, const Configuration& eta, const std::string& sidecar_json);
Configuration read_snapshot(const std::string& path);

}  // namespace zrp
