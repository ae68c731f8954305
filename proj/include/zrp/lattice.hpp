/// @file lattice.hpp
/// @brief Discrete torus, boxes, block partitions and the multiscale partition ladder.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace zrp {

using Site = std::int64_t;

inline constexpr int kMaxDimension = 3;

class TorusLattice {
public:
    TorusLattice() = default;
    TorusLattice(int d, int N);

    int dim() const { return d_; }
    int side() const { return N_; }
    Site site_count() const { return sites_; }

    /// Row-major: the last axis varies fastest.
    std::vector<int> coords(Site x) const;
    Site index(const std::vector<int>& c) const;
    int coord(Site x, int axis) const;

    /// Directions 0..2d-1: axis = dir/2, positive step for even dir.
    /// For N = 2 both directions of an axis reach the same site.
    Site neighbor(Site x, int dir) const;
    int direction_count() const { return 2 * d_; }
    Site shift(Site x, int axis, int delta) const;

    /// Number of directed edges from x to y (0, 1 or 2 when N = 2).
    int edge_multiplicity(Site x, Site y) const;

    bool operator==(const TorusLattice& o) const { return d_ == o.d_ && N_ == o.N_; }

private:
    int d_ = 1;
    int N_ = 2;
    Site sites_ = 2;
    std::vector<Site> stride_;
};

int lattice_distance(const TorusLattice& lattice, Site x, Site y);

/// Cyclic interval {start, start+1, ..., start+length-1} mod N.
struct Interval {
    int start = 0;
    int length = 1;
    bool operator==(const Interval&) const = default;
};

/// Product of cyclic intervals, one per axis.
struct LatticeBox {
    std::vector<Interval> axes;
    std::int64_t volume() const;
    bool contains(const TorusLattice& lattice, Site x) const;
    std::vector<Site> sites(const TorusLattice& lattice) const;
};

/// Partition of one axis into consecutive intervals covering 0..N-1.
using AxisPartition = std::vector<Interval>;

AxisPartition nearly_dyadic_1d(int N);

/// Tensor-product box partition. Blocks are indexed row-major over per-axis interval indices.
class Partition {
public:
    Partition() = default;
    Partition(TorusLattice lattice, std::int64_t scale, std::vector<AxisPartition> axes);

    const TorusLattice& lattice() const { return lattice_; }
    std::int64_t scale() const { return scale_; }
    const std::vector<AxisPartition>& axes() const { return axes_; }
    std::int64_t block_count() const { return blocks_; }

    LatticeBox block(std::int64_t b) const;
    std::vector<int> block_coords(std::int64_t b) const;
    std::int64_t block_index(const std::vector<int>& per_axis) const;
    std::int64_t block_of(Site x) const;

    /// Unordered adjacent block pairs (b < b'), deduplicated.
    std::vector<std::pair<std::int64_t, std::int64_t>> adjacent_pairs() const;
    bool adjacent(std::int64_t b1, std::int64_t b2) const;

    /// Sites of block b in row-major order.
    std::vector<Site> block_sites(std::int64_t b) const;

private:
    TorusLattice lattice_;
    std::int64_t scale_ = 1;
    std::vector<AxisPartition> axes_;
    std::vector<std::vector<int>> lookup_;  // axis -> coordinate -> interval index
    std::int64_t blocks_ = 0;
};

/// Maps each fine block to the coarse block containing it; throws std::invalid_argument
/// naming the first fine block that is not contained in a single coarse block.
std::vector<std::int64_t> refinement_map(const Partition& fine, const Partition& coarse);

/// Product-form weighting w(x) = prod_i factor_i(x_i).
class Weighting {
public:
    Weighting() = default;
    Weighting(TorusLattice lattice, std::vector<std::vector<double>> factors);
    static Weighting uniform(const TorusLattice& lattice);

    double at(Site x) const;
    double box_weight(const LatticeBox& box) const;
    double total() const;
    /// sup w / inf w
    double ratio() const;
    const std::vector<std::vector<double>>& factors() const { return factors_; }

private:
    TorusLattice lattice_;
    std::vector<std::vector<double>> factors_;
};

struct PartitionFamily {
    TorusLattice lattice;
    double chi = 1.0;
    double delta = 1.0;
    int q_raw = 0;
    int q = 1;
    bool q_clamped = false;
    int m = 1;
    int K = 2;
    std::vector<std::int64_t> scales;  // l^1 .. l^K
    std::vector<Partition> levels;     // P^1 .. P^K
    Weighting weight;
    std::vector<double> level_block_weight;

    /// Both consistency-of-scales quantities for step k -> k+1 (0-based k).
    double upper_bound_quantity(int k) const;
    double lower_bound_quantity(int k) const;
};

inline constexpr double kScaleConstant = 4.0;

int raw_q(double chi, double delta);

PartitionFamily build_partition_family(const TorusLattice& lattice, double chi, double delta);

struct FamilyAudit {
    bool ok = true;
    std::vector<std::string> failures;
    double top_step_lower_quantity = 0.0;
};

/// Checks every PartitionFamily invariant. Side lengths and refinement are checked per axis,
/// which covers the tensor-product blocks.
FamilyAudit audit_partition_family(const PartitionFamily& family);

std::string serialize_partition_family(const PartitionFamily& family);
PartitionFamily deserialize_partition_family(const std::string& text);

}  // namespace zrp
