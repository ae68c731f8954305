#include "zrp/kmc.hpp"

#include <cmath>
#include <stdexcept>

namespace zrp {

RateIndex::RateIndex(const std::vector<double>& rates) : size_(rates.size()) {
    while (leaves_ < size_) leaves_ <<= 1;
    tree_.assign(2 * leaves_, 0.0);
    for (std::size_t i = 0; i < size_; ++i) tree_[leaves_ + i] = rates[i];
    rebuild();
}

void RateIndex::set(std::size_t i, double r) {
    std::size_t node = leaves_ + i;
    double diff = r - tree_[node];
    tree_[node] = r;
    for (node >>= 1; node >= 1; node >>= 1) tree_[node] += diff;
}

std::size_t RateIndex::find(double u) const {
    std::size_t node = 1;
    while (node < leaves_) {
        double left = tree_[2 * node];
        if (u < left) {
            node = 2 * node;
        } else {
            u -= left;
            node = 2 * node + 1;
        }
    }
    std::size_t i = node - leaves_;
    // Rounding can land on an empty leaf; step back to the nearest positive one.
    while (i > 0 && (i >= size_ || tree_[leaves_ + i] <= 0.0)) --i;
    return i;
}

double RateIndex::rebuild() {
    double before = tree_.size() > 1 ? tree_[1] : 0.0;
    for (std::size_t node = leaves_ - 1; node >= 1; --node) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
    double after = tree_[1];
    return after > 0.0 ? std::abs(before - after) / after : std::abs(before);
}

double jump_rate(const Configuration& eta, Site x, Site y, const RateModel& model) {
    if (eta.lattice.edge_multiplicity(x, y) == 0) throw std::invalid_argument("jump_rate: y is not a neighbour of x");
    double N = eta.lattice.side();
    return model.rate_scale * N * N * std::pow(eta.eta(x), model.alpha) / (2.0 * eta.chi);
}

Simulator::Simulator(Configuration initial, RateModel model) : eta_(std::move(initial)), model_(model) {
    double N = eta_.lattice.side();
    // Out-rate of a site: 2d directed edges, each N^2 eta^alpha / (2 chi).
    prefactor_ = model_.rate_scale * N * N * eta_.lattice.dim() / eta_.chi;
    std::vector<double> rates(eta_.counts.size());
    for (std::size_t x = 0; x < rates.size(); ++x) rates[x] = site_rate(eta_.counts[x]);
    index_ = RateIndex(rates);
}

double Simulator::site_rate(std::uint32_t k) {
    while (pow_table_.size() <= k) pow_table_.push_back(std::pow(eta_.chi * static_cast<double>(pow_table_.size()), model_.alpha));
    return pow_table_[k];
}

double Simulator::total_rate() const { return prefactor_ * index_.total(); }

Jump Simulator::step(CounterRng& rng) {
    Jump j;
    double total = total_rate();
    if (!(total > 0.0) || eta_.particle_count() == 0) {
        j.absorbed = true;
        return j;
    }
    j.waiting_time = rng.exponential(total);
    std::size_t x = index_.find(rng.uniform() * index_.total());
    int dir = static_cast<int>(rng.below(static_cast<std::uint64_t>(eta_.lattice.direction_count())));
    Site y = eta_.lattice.neighbor(static_cast<Site>(x), dir);
    eta_.counts[x] -= 1;
    eta_.counts[static_cast<std::size_t>(y)] += 1;
    index_.set(x, site_rate(eta_.counts[x]));
    index_.set(static_cast<std::size_t>(y), site_rate(eta_.counts[static_cast<std::size_t>(y)]));
    time_ += j.waiting_time;
    j.from = static_cast<Site>(x);
    j.to = y;
    ++events_;
    if (events_ % kRebuildInterval == 0) max_drift_ = std::max(max_drift_, index_.rebuild());
    return j;
}

TrajectoryRecord simulate(const Configuration& initial, const RateModel& model, double t_fin,
                          const std::vector<Observable>& observables, const std::vector<double>& grid, CounterRng& rng,
                          const SimulationOptions& options) {
    if (!(t_fin > 0.0)) throw std::invalid_argument("simulate: t_fin must be positive");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0 || grid[i] > t_fin) throw std::invalid_argument("simulate: grid time outside [0, t_fin]");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("simulate: grid must be strictly increasing");
    }
    TrajectoryRecord rec;
    rec.stream = rng.stream();
    for (const auto& o : observables) rec.names.push_back(o.name);
    rec.values.assign(observables.size(), {});
    Simulator sim(initial, model);
    // Mirror of the state just before the pending jump, for right-continuous sampling.
    Configuration before = sim.state();
    std::size_t next = 0;
    std::uint64_t overshoot = 0;
    rec.max_total_rate = sim.total_rate();
    while (next < grid.size()) {
        if (sim.events() >= options.event_cap) {
            rec.truncated = true;
            break;
        }
        Jump j = sim.step(rng);
        double t_jump = j.absorbed ? INFINITY : sim.time();
        while (next < grid.size() && grid[next] < t_jump) {
            rec.times.push_back(grid[next]);
            for (std::size_t i = 0; i < observables.size(); ++i) rec.values[i].push_back(observables[i].fn(before));
            if (options.keep_snapshots) rec.snapshots.push_back(before);
            ++next;
        }
        if (j.absorbed) {
            rec.absorbed = true;
            break;
        }
        if (next == grid.size()) {
            overshoot = 1;  // this jump lies past the last grid time
            break;
        }
        before.counts[static_cast<std::size_t>(j.from)] -= 1;
        before.counts[static_cast<std::size_t>(j.to)] += 1;
        rec.max_total_rate = std::max(rec.max_total_rate, sim.total_rate());
    }
    rec.events = sim.events() - overshoot;
    rec.max_rebuild_drift = sim.max_rebuild_drift();
    return rec;
}

double crude_rate_bound(const TorusLattice& lattice, double chi, double alpha, double b, double rate_scale) {
    double N = lattice.side(), d = lattice.dim();
    return rate_scale * d * std::pow(N, 2.0 + d * alpha) * std::pow(b, alpha) / chi;
}

}  // namespace zrp
