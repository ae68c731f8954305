#include "zrp/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

namespace zrp {

TorusLattice::TorusLattice(int d, int N) : d_(d), N_(N) {
    if (d < 1 || d > kMaxDimension) throw std::invalid_argument("lattice dimension must be in [1, 3]");
    if (N < 2) throw std::invalid_argument("lattice side N must be >= 2");
    stride_.assign(d, 1);
    sites_ = 1;
    for (int i = d - 1; i >= 0; --i) {
        stride_[i] = sites_;
        sites_ *= N;
    }
}

std::vector<int> TorusLattice::coords(Site x) const {
    std::vector<int> c(d_);
    for (int i = d_ - 1; i >= 0; --i) {
        c[i] = static_cast<int>(x % N_);
        x /= N_;
    }
    return c;
}

Site TorusLattice::index(const std::vector<int>& c) const {
    Site x = 0;
    for (int i = 0; i < d_; ++i) {
        int v = ((c[i] % N_) + N_) % N_;
        x += stride_[i] * v;
    }
    return x;
}

int TorusLattice::coord(Site x, int axis) const {
    return static_cast<int>((x / stride_[axis]) % N_);
}

Site TorusLattice::shift(Site x, int axis, int delta) const {
    int c = coord(x, axis);
    int nc = static_cast<int>(((static_cast<long long>(c) + delta) % N_ + N_) % N_);
    return x + stride_[axis] * (nc - c);
}

Site TorusLattice::neighbor(Site x, int dir) const {
    return shift(x, dir / 2, (dir % 2 == 0) ? 1 : -1);
}

int TorusLattice::edge_multiplicity(Site x, Site y) const {
    int m = 0;
    for (int dir = 0; dir < 2 * d_; ++dir)
        if (neighbor(x, dir) == y) ++m;
    return m;
}

int lattice_distance(const TorusLattice& lattice, Site x, Site y) {
    int total = 0;
    for (int i = 0; i < lattice.dim(); ++i) {
        int a = lattice.coord(x, i), b = lattice.coord(y, i);
        int diff = std::abs(a - b);
        total += std::min(diff, lattice.side() - diff);
    }
    return total;
}

std::int64_t LatticeBox::volume() const {
    std::int64_t v = 1;
    for (const auto& iv : axes) v *= iv.length;
    return v;
}

bool LatticeBox::contains(const TorusLattice& lattice, Site x) const {
    for (int i = 0; i < lattice.dim(); ++i) {
        int off = ((lattice.coord(x, i) - axes[i].start) % lattice.side() + lattice.side()) % lattice.side();
        if (off >= axes[i].length) return false;
    }
    return true;
}

std::vector<Site> LatticeBox::sites(const TorusLattice& lattice) const {
    std::vector<Site> out;
    out.reserve(static_cast<std::size_t>(volume()));
    std::vector<int> off(lattice.dim(), 0), c(lattice.dim());
    while (true) {
        for (int i = 0; i < lattice.dim(); ++i) c[i] = axes[i].start + off[i];
        out.push_back(lattice.index(c));
        int i = lattice.dim() - 1;
        while (i >= 0 && ++off[i] == axes[i].length) off[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

AxisPartition nearly_dyadic_1d(int N) {
    if (N < 2) throw std::invalid_argument("nearly_dyadic_1d requires N >= 2");
    int m = 0;
    while ((2LL << m) <= N) ++m;
    int M = 1 << m;
    int h = N - M;
    AxisPartition out;
    out.reserve(M);
    for (int x = 0; x < h; ++x) out.push_back({2 * x, 2});
    for (int x = 2 * h; x < N; ++x) out.push_back({x, 1});
    return out;
}

Partition::Partition(TorusLattice lattice, std::int64_t scale, std::vector<AxisPartition> axes)
    : lattice_(lattice), scale_(scale), axes_(std::move(axes)) {
    if (static_cast<int>(axes_.size()) != lattice_.dim()) throw std::invalid_argument("partition axis count mismatch");
    lookup_.resize(axes_.size());
    blocks_ = 1;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        lookup_[i].assign(lattice_.side(), -1);
        for (std::size_t j = 0; j < axes_[i].size(); ++j) {
            const auto& iv = axes_[i][j];
            for (int o = 0; o < iv.length; ++o) {
                int c = (iv.start + o) % lattice_.side();
                if (lookup_[i][c] != -1) throw std::invalid_argument("partition intervals overlap");
                lookup_[i][c] = static_cast<int>(j);
            }
        }
        for (int v : lookup_[i])
            if (v < 0) throw std::invalid_argument("partition intervals do not cover the axis");
        blocks_ *= static_cast<std::int64_t>(axes_[i].size());
    }
}

std::vector<int> Partition::block_coords(std::int64_t b) const {
    std::vector<int> c(axes_.size());
    for (int i = static_cast<int>(axes_.size()) - 1; i >= 0; --i) {
        auto n = static_cast<std::int64_t>(axes_[i].size());
        c[i] = static_cast<int>(b % n);
        b /= n;
    }
    return c;
}

std::int64_t Partition::block_index(const std::vector<int>& per_axis) const {
    std::int64_t b = 0;
    for (std::size_t i = 0; i < axes_.size(); ++i) b = b * static_cast<std::int64_t>(axes_[i].size()) + per_axis[i];
    return b;
}

LatticeBox Partition::block(std::int64_t b) const {
    auto c = block_coords(b);
    LatticeBox box;
    for (std::size_t i = 0; i < axes_.size(); ++i) box.axes.push_back(axes_[i][c[i]]);
    return box;
}

std::int64_t Partition::block_of(Site x) const {
    std::vector<int> c(axes_.size());
    for (std::size_t i = 0; i < axes_.size(); ++i) c[i] = lookup_[i][lattice_.coord(x, static_cast<int>(i))];
    return block_index(c);
}

std::vector<std::pair<std::int64_t, std::int64_t>> Partition::adjacent_pairs() const {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    for (std::int64_t b = 0; b < blocks_; ++b) {
        auto c = block_coords(b);
        for (std::size_t i = 0; i < axes_.size(); ++i) {
            int n = static_cast<int>(axes_[i].size());
            if (n < 2) continue;
            for (int s : {1, -1}) {
                auto c2 = c;
                c2[i] = ((c[i] + s) % n + n) % n;
                std::int64_t b2 = block_index(c2);
                if (b < b2) out.emplace_back(b, b2);
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

bool Partition::adjacent(std::int64_t b1, std::int64_t b2) const {
    if (b1 == b2) return false;
    auto c1 = block_coords(b1), c2 = block_coords(b2);
    int differing = -1;
    for (std::size_t i = 0; i < axes_.size(); ++i) {
        if (c1[i] != c2[i]) {
            if (differing >= 0) return false;
            differing = static_cast<int>(i);
        }
    }
    int n = static_cast<int>(axes_[differing].size());
    int diff = ((c1[differing] - c2[differing]) % n + n) % n;
    return diff == 1 || diff == n - 1;
}

std::vector<Site> Partition::block_sites(std::int64_t b) const { return block(b).sites(lattice_); }

std::vector<std::int64_t> refinement_map(const Partition& fine, const Partition& coarse) {
    if (!(fine.lattice() == coarse.lattice())) throw std::invalid_argument("refinement_map: lattices differ");
    const auto& L = fine.lattice();
    // Per axis, every fine interval must sit inside one coarse interval.
    std::vector<std::vector<int>> axis_map(L.dim());
    for (int i = 0; i < L.dim(); ++i) {
        for (const auto& iv : fine.axes()[i]) {
            int target = -1;
            for (int o = 0; o < iv.length; ++o) {
                std::vector<int> c(L.dim(), 0);
                c[i] = iv.start + o;
                auto cb = coarse.block_coords(coarse.block_of(L.index(c)))[i];
                if (target == -1) target = cb;
                else if (target != cb) {
                    throw std::invalid_argument("refinement_map: fine interval [" + std::to_string(iv.start) + ", +" +
                                                std::to_string(iv.length) + ") on axis " + std::to_string(i) +
                                                " meets coarse intervals " + std::to_string(target) + " and " +
                                                std::to_string(cb));
                }
            }
            axis_map[i].push_back(target);
        }
    }
    std::vector<std::int64_t> out(static_cast<std::size_t>(fine.block_count()));
    std::vector<int> cc(L.dim());
    for (std::int64_t b = 0; b < fine.block_count(); ++b) {
        auto c = fine.block_coords(b);
        for (int i = 0; i < L.dim(); ++i) cc[i] = axis_map[i][c[i]];
        out[b] = coarse.block_index(cc);
    }
    return out;
}

Weighting::Weighting(TorusLattice lattice, std::vector<std::vector<double>> factors)
    : lattice_(lattice), factors_(std::move(factors)) {
    if (static_cast<int>(factors_.size()) != lattice_.dim()) throw std::invalid_argument("weighting axis count mismatch");
    for (const auto& f : factors_) {
        if (static_cast<int>(f.size()) != lattice_.side()) throw std::invalid_argument("weighting factor length mismatch");
        for (double v : f)
            if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("weighting must be strictly positive");
    }
}

Weighting Weighting::uniform(const TorusLattice& lattice) {
    return Weighting(lattice, std::vector<std::vector<double>>(lattice.dim(), std::vector<double>(lattice.side(), 1.0)));
}

double Weighting::at(Site x) const {
    double w = 1.0;
    for (int i = 0; i < lattice_.dim(); ++i) w *= factors_[i][lattice_.coord(x, i)];
    return w;
}

double Weighting::box_weight(const LatticeBox& box) const {
    double w = 1.0;
    for (int i = 0; i < lattice_.dim(); ++i) {
        double s = 0.0;
        for (int o = 0; o < box.axes[i].length; ++o) s += factors_[i][(box.axes[i].start + o) % lattice_.side()];
        w *= s;
    }
    return w;
}

double Weighting::total() const {
    double w = 1.0;
    for (const auto& f : factors_) {
        double s = 0.0;
        for (double v : f) s += v;
        w *= s;
    }
    return w;
}

double Weighting::ratio() const {
    double r = 1.0;
    for (const auto& f : factors_) r *= *std::max_element(f.begin(), f.end()) / *std::min_element(f.begin(), f.end());
    return r;
}

int raw_q(double chi, double delta) {
    double v = -delta * std::log2(std::min(chi, 0.5)) / 8.0;
    return static_cast<int>(std::floor(v));
}

double PartitionFamily::upper_bound_quantity(int k) const {
    double ratio = static_cast<double>(scales[k + 1]) / static_cast<double>(scales[k]);
    return std::pow(chi, delta / 2.0) * ratio * ratio;
}

double PartitionFamily::lower_bound_quantity(int k) const {
    double ratio = static_cast<double>(scales[k + 1]) / static_cast<double>(scales[k]);
    return std::pow(std::min(chi, 0.5), delta / 4.0) * ratio * ratio;
}

PartitionFamily build_partition_family(const TorusLattice& lattice, double chi, double delta) {
    if (!std::isfinite(chi) || !(chi > 0.0)) throw std::invalid_argument("chi must be finite and positive");
    if (!std::isfinite(delta) || !(delta > 0.0)) throw std::invalid_argument("delta must be finite and positive");
    PartitionFamily fam;
    fam.lattice = lattice;
    fam.chi = chi;
    fam.delta = delta;
    fam.q_raw = raw_q(chi, delta);
    fam.q = std::max(1, fam.q_raw);
    fam.q_clamped = fam.q_raw < 1;
    const int N = lattice.side();
    int m = 0;
    while ((2LL << m) <= N) ++m;
    fam.m = m;
    fam.K = std::max(2, m / fam.q + 1);
    for (int k = 1; k < fam.K; ++k) fam.scales.push_back(std::int64_t{1} << (fam.q * (k - 1)));
    fam.scales.push_back(std::int64_t{1} << m);

    AxisPartition basic = nearly_dyadic_1d(N);
    std::vector<double> factor(N);
    for (const auto& iv : basic)
        for (int o = 0; o < iv.length; ++o) factor[iv.start + o] = 1.0 / iv.length;
    fam.weight = Weighting(lattice, std::vector<std::vector<double>>(lattice.dim(), factor));

    for (int k = 0; k < fam.K; ++k) {
        std::int64_t group = fam.scales[k];
        AxisPartition axis;
        axis.reserve(basic.size() / group);
        for (std::size_t j = 0; j < basic.size(); j += group) {
            Interval iv{basic[j].start, 0};
            for (std::size_t t = j; t < j + group; ++t) iv.length += basic[t].length;
            axis.push_back(iv);
        }
        fam.levels.emplace_back(lattice, group, std::vector<AxisPartition>(lattice.dim(), axis));
        fam.level_block_weight.push_back(std::pow(static_cast<double>(group), lattice.dim()));
    }
    return fam;
}

FamilyAudit audit_partition_family(const PartitionFamily& fam) {
    FamilyAudit a;
    auto fail = [&](std::string msg) {
        a.ok = false;
        a.failures.push_back(std::move(msg));
    };
    const int N = fam.lattice.side();
    const int d = fam.lattice.dim();
    if (fam.scales.empty() || fam.scales.front() != 1) fail("l^1 != 1");
    if (static_cast<int>(fam.levels.size()) != fam.K || static_cast<int>(fam.scales.size()) != fam.K) fail("level count");
    for (int k = 0; k + 1 < fam.K; ++k)
        if (fam.scales[k] > fam.scales[k + 1]) fail("scales not monotone");
    for (int k = 0; k < fam.K && a.ok; ++k) {
        const auto& P = fam.levels[k];
        const std::int64_t l = fam.scales[k];
        for (int i = 0; i < d; ++i) {
            const auto& axis = P.axes()[i];
            int expect = 0;
            for (const auto& iv : axis) {
                if (iv.start != expect) fail("level " + std::to_string(k + 1) + " not consecutive");
                if (iv.length < l || iv.length > 2 * l)
                    fail("level " + std::to_string(k + 1) + " side " + std::to_string(iv.length) + " outside [l, 2l]");
                double bw = 0.0;
                for (int o = 0; o < iv.length; ++o) bw += fam.weight.factors()[i][iv.start + o];
                if (std::abs(bw - static_cast<double>(l)) > 1e-9 * static_cast<double>(l))
                    fail("unequal block weight at level " + std::to_string(k + 1));
                expect += iv.length;
            }
            if (expect != N) fail("level " + std::to_string(k + 1) + " does not cover the axis");
            if (k + 1 < fam.K) {
                // refinement: every fine interval lies inside one coarse interval
                const auto& coarse = fam.levels[k + 1].axes()[i];
                std::size_t c = 0;
                for (const auto& iv : axis) {
                    while (c < coarse.size() && coarse[c].start + coarse[c].length <= iv.start) ++c;
                    if (c == coarse.size() || iv.start < coarse[c].start ||
                        iv.start + iv.length > coarse[c].start + coarse[c].length)
                        fail("level " + std::to_string(k + 1) + " does not refine level " + std::to_string(k + 2));
                }
            }
        }
    }
    if (!fam.levels.empty() && fam.levels.back().block_count() != 1) fail("top level is not the whole torus");
    if (fam.weight.ratio() > std::pow(2.0, d) * (1 + 1e-12)) fail("weight ratio exceeds 2^d");
    for (int k = 0; k + 1 < fam.K; ++k) {
        if (fam.upper_bound_quantity(k) > kScaleConstant) fail("upper scale bound at step " + std::to_string(k + 1));
        if (k + 1 < fam.K - 1) {
            if (fam.lower_bound_quantity(k) < 0.25) fail("lower scale bound at step " + std::to_string(k + 1));
        } else {
            a.top_step_lower_quantity = fam.lower_bound_quantity(k);
        }
    }
    return a;
}

std::string serialize_partition_family(const PartitionFamily& fam) {
    nlohmann::json j;
    j["format"] = "zrp-partition-family";
    j["version"] = 1;
    j["d"] = fam.lattice.dim();
    j["N"] = fam.lattice.side();
    j["chi"] = fam.chi;
    j["delta"] = fam.delta;
    j["q_raw"] = fam.q_raw;
    j["q"] = fam.q;
    j["q_clamped"] = fam.q_clamped;
    j["m"] = fam.m;
    j["K"] = fam.K;
    j["scales"] = fam.scales;
    j["weight_factors"] = fam.weight.factors();
    nlohmann::json levels = nlohmann::json::array();
    for (const auto& P : fam.levels) {
        nlohmann::json axes = nlohmann::json::array();
        for (const auto& axis : P.axes()) {
            nlohmann::json a = nlohmann::json::array();
            for (const auto& iv : axis) a.push_back({iv.start, iv.length});
            axes.push_back(a);
        }
        levels.push_back({{"scale", P.scale()}, {"axis_intervals", axes}});
    }
    j["levels"] = levels;
    return j.dump();
}

PartitionFamily deserialize_partition_family(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    if (j.at("format") != "zrp-partition-family" || j.at("version") != 1)
        throw std::invalid_argument("unsupported partition family document");
    PartitionFamily fam;
    fam.lattice = TorusLattice(j.at("d"), j.at("N"));
    fam.chi = j.at("chi");
    fam.delta = j.at("delta");
    fam.q_raw = j.at("q_raw");
    fam.q = j.at("q");
    fam.q_clamped = j.at("q_clamped");
    fam.m = j.at("m");
    fam.K = j.at("K");
    fam.scales = j.at("scales").get<std::vector<std::int64_t>>();
    fam.weight = Weighting(fam.lattice, j.at("weight_factors").get<std::vector<std::vector<double>>>());
    for (const auto& lv : j.at("levels")) {
        std::vector<AxisPartition> axes;
        for (const auto& a : lv.at("axis_intervals")) {
            AxisPartition axis;
            for (const auto& iv : a) axis.push_back({iv[0].get<int>(), iv[1].get<int>()});
            axes.push_back(axis);
        }
        fam.levels.emplace_back(fam.lattice, lv.at("scale").get<std::int64_t>(), axes);
        fam.level_block_weight.push_back(std::pow(static_cast<double>(lv.at("scale").get<std::int64_t>()), fam.lattice.dim()));
    }
    return fam;
}

}  // namespace zrp
