#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "csbp/mechanism.hpp"
#include "csbp/partition.hpp"
#include "csbp/rng.hpp"

namespace csbp {

// finite measure mu on {2,3,...} with tail mu_bar(k) = sum_{j>=k} mu(j)
struct ReproductionMeasure {
  std::function<double(int)> mass;
  std::function<double(int)> tail;

  static ReproductionMeasure neveu();
  static ReproductionMeasure from_mechanism(const BranchingMechanism& mech, double theta);
  // masses[k] for k = 2..masses.size()-1; entries 0 and 1 are ignored
  static ReproductionMeasure finite(std::vector<double> masses);
};

// Time-dependent coagulation rates mu_t(k) with cached thinning bounds on an aligned grid.
class RateSchedule {
 public:
  // fill mass[k], tail[k] for k = 2..kmax (vectors are resized to kmax + 1)
  using TableFn = std::function<void(double t, int kmax, std::vector<double>& mass, std::vector<double>& tail)>;

  RateSchedule(TableFn fn, int support, double t_origin = 0.0, double step = 0.1);

  // mu_t^lambda(k) with theta = v_t(lambda); lambda = inf allowed
  static RateSchedule from_mechanism(const BranchingMechanism& mech, double lam, double t_origin = 0.0);
  static RateSchedule homogeneous(const ReproductionMeasure& mu);

  double rate(double t, int k) const;
  double tail(double t, int k) const;
  void table(double t, int kmax, std::vector<double>& mass, std::vector<double>& tail) const;
  // total rate of events on m blocks
  double total(double t, int m) const;
  // 1.5 x the maximum of total(., m) over a 64-point grid of [t0, t1]
  double bound(double t0, double t1, int m) const;
  // the same bound over the aligned interval containing t, memoized across calls
  double cached_bound(double t, int m, double* interval_end) const;

  int support() const { return support_; }

 private:
  struct Cache;
  TableFn fn_;
  int support_;
  double origin_;
  double step_;
  std::shared_ptr<Cache> cache_;
};

// sum_{k=2}^{m} [(m-k) mass[k] + tail[k]]
double total_rate(const std::vector<double>& mass, const std::vector<double>& tail, int m);

struct TimedEvent {
  double t;
  MergeEvent e;
};

struct CoalescentTrajectory {
  std::uint64_t n = 0;
  std::vector<TimedEvent> events;
  std::vector<std::pair<double, ConsecutivePartition>> snapshots;
  ConsecutivePartition final_state;

  std::string to_json() const;
};

struct SimOptions {
  std::vector<double> snapshot_times;
  bool record_events = false;
};

CoalescentTrajectory simulate_homogeneous(const ReproductionMeasure& mu, std::uint64_t n, double t_end, Rng& rng,
                                          const SimOptions& opts = {});
CoalescentTrajectory simulate_inhomogeneous(const RateSchedule& sched, std::uint64_t n, double t_start, double t_end,
                                            Rng& rng, const SimOptions& opts = {});

// block-count chain: l -> l - k + 1 at rate r(l, k)
using CountRate = std::function<double(int l, int k)>;
CountRate count_rates(const ReproductionMeasure& mu);
CountRate bolthausen_sznitman_count_rates();
// law of the block count at t started from n blocks; entry l for l = 1..n (entry 0 unused)
std::vector<double> block_count_distribution(const CountRate& r, int n, double t);
int sample_block_count(const CountRate& r, int n, double t, Rng& rng);
// the same chain for the rates l/(k(k-1)), with constant-time event selection
std::uint64_t sample_bs_block_count(std::uint64_t n, double t, Rng& rng);

using PartitionDistribution = std::map<std::string, double>;

struct OracleResult {
  PartitionDistribution dist;
  double richardson_gap = 0.0;  // max difference between step h and h/2 (inhomogeneous only)
};

OracleResult ctmc_oracle(const ReproductionMeasure& mu, int n, double t);
OracleResult ctmc_oracle(const RateSchedule& sched, int n, double t_start, double t_end, double step = 1e-3);

// E z^{#C_1^lambda(t)}
double marginal_block_gf(const BranchingMechanism& mech, double lam, double t, double z);
// lambda = inf started at s: 1 - v_{t-s}(v_s(inf)(1-z)) / v_t(inf)
double marginal_block_gf_inf(const BranchingMechanism& mech, double s, double t, double z);
double limit_partition_gf(const BranchingMechanism& mech, double lam, double z);
double singleton_fraction(const BranchingMechanism& mech, double lam, double t);
double blocks_geometric_param(const BranchingMechanism& mech, double lam, double t);
// E z^{Z^T(t)} for the reduced process, and the probability of no branching on the lineage before t
double reduced_tree_gf(const BranchingMechanism& mech, double T, double t, double z);
double reduced_tree_survival(const BranchingMechanism& mech, double T, double t);

}  // namespace csbp
