/// @file kmc.hpp
/// @brief Event-driven simulation of the rescaled zero-range process.
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "zrp/configuration.hpp"
#include "zrp/rng.hpp"

namespace zrp {

/// Partial-sum tree over per-site rates.
class RateIndex {
public:
    RateIndex() = default;
    explicit RateIndex(const std::vector<double>& rates);

    void set(std::size_t i, double r);
    double rate(std::size_t i) const { return tree_[leaves_ + i]; }
    double total() const { return tree_[1]; }
    /// Leaf i with prefix(i) <= u < prefix(i+1), for u in [0, total).
    std::size_t find(double u) const;
    /// Recomputes every internal node; returns the relative change of the root.
    double rebuild();
    std::size_t size() const { return size_; }

private:
    std::size_t size_ = 0;
    std::size_t leaves_ = 1;
    std::vector<double> tree_;
};

struct RateModel {
    double alpha = 1.0;
    /// 1 follows the generator; 2 follows the prose reading of the local jump rate.
    double rate_scale = 1.0;
};

/// Rate of a jump along one directed edge x -> y (y a neighbour of x).
double jump_rate(const Configuration& eta, Site x, Site y, const RateModel& model);

struct Jump {
    double waiting_time = 0.0;
    Site from = -1;
    Site to = -1;
    bool absorbed = false;
};

class Simulator {
public:
    Simulator(Configuration initial, RateModel model);

    const Configuration& state() const { return eta_; }
    double time() const { return time_; }
    std::uint64_t events() const { return events_; }
    double total_rate() const;
    double max_rebuild_drift() const { return max_drift_; }

    /// Samples the waiting time and jump, advances time and applies the jump.
    Jump step(CounterRng& rng);

private:
    double site_rate(std::uint32_t k);
    Configuration eta_;
    RateModel model_;
    RateIndex index_;
    std::vector<double> pow_table_;
    double prefactor_ = 0.0;
    double time_ = 0.0;
    std::uint64_t events_ = 0;
    double max_drift_ = 0.0;
};

inline constexpr std::uint64_t kRebuildInterval = std::uint64_t{1} << 20;

struct Observable {
    std::string name;
    std::function<double(const Configuration&)> fn;
};

struct SimulationOptions {
    std::uint64_t event_cap = 2'000'000'000ULL;
    bool keep_snapshots = false;
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> values;  // values[observable][time]
    std::vector<Configuration> snapshots;
    std::uint64_t events = 0;
    std::uint64_t stream = 0;
    bool truncated = false;
    bool absorbed = false;
    double max_total_rate = 0.0;
    double max_rebuild_drift = 0.0;
};

/// Exact evolution to t_fin; observables see the right-continuous path at every grid time.
TrajectoryRecord simulate(const Configuration& initial, const RateModel& model, double t_fin,
                          const std::vector<Observable>& observables, const std::vector<double>& grid, CounterRng& rng,
                          const SimulationOptions& options = {});

/// Upper bound on the total jump rate over configurations of mass at most b.
double crude_rate_bound(const TorusLattice& lattice, double chi, double alpha, double b, double rate_scale = 1.0);

}  // namespace zrp
