#include "csbp/coalescent.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <unsupported/Eigen/MatrixFunctions>

#include "csbp/errors.hpp"
#include "csbp/numeric.hpp"

namespace csbp {

ReproductionMeasure ReproductionMeasure::neveu() {
  return {[](int k) { return 1.0 / (double(k) * (k - 1.0)); }, [](int k) { return 1.0 / (k - 1.0); }};
}

ReproductionMeasure ReproductionMeasure::from_mechanism(const BranchingMechanism& mech, double theta) {
  return {[mech, theta](int k) { return rate_measure(mech, theta, k); },
          [mech, theta](int k) { return rate_tail(mech, theta, k); }};
}

ReproductionMeasure ReproductionMeasure::finite(std::vector<double> masses) {
  for (std::size_t k = 2; k < masses.size(); ++k) require(masses[k] >= 0.0, "reproduction masses must be nonnegative");
  auto tails = std::make_shared<std::vector<double>>(masses.size() + 1, 0.0);
  for (std::size_t k = masses.size(); k-- > 2;) (*tails)[k] = (*tails)[k + 1] + masses[k];
  auto m = std::make_shared<std::vector<double>>(std::move(masses));
  return {[m](int k) { return std::size_t(k) < m->size() ? (*m)[k] : 0.0; },
          [tails](int k) { return std::size_t(k) < tails->size() ? (*tails)[k] : 0.0; }};
}

double total_rate(const std::vector<double>& mass, const std::vector<double>& tail, int m) {
  double s = 0.0;
  int kmax = std::min<int>(m, int(mass.size()) - 1);
  for (int k = 2; k <= kmax; ++k) s += (m - k) * mass[k] + tail[k];
  return s;
}

struct RateSchedule::Cache {
  std::mutex mu;
  int kmax = 0;
  std::map<long, std::vector<std::pair<std::vector<double>, std::vector<double>>>> grids;
  std::map<std::pair<long, int>, double> bounds;
};

RateSchedule::RateSchedule(TableFn fn, int support, double t_origin, double step)
    : fn_(std::move(fn)), support_(support), origin_(t_origin), step_(step), cache_(std::make_shared<Cache>()) {
  require(support >= 2, "rate support must include k = 2");
  require(step > 0.0, "grid step must be positive");
}

RateSchedule RateSchedule::from_mechanism(const BranchingMechanism& mech, double lam, double t_origin) {
  require(lam > 0.0, "lambda must be positive");
  if (std::isinf(lam)) require(grey(mech).extinction, "lambda = inf needs the extinction condition");
  auto theta = [mech, lam](double t) { return std::isinf(lam) ? v_inf(mech, t) : v(mech, t, lam); };
  const double half_s2 = 0.5 * mech.sigma2();
  if (std::holds_alternative<NoLevy>(mech.levy())) {
    return RateSchedule(
        [theta, half_s2](double t, int kmax, std::vector<double>& mass, std::vector<double>& tail) {
          mass.assign(kmax + 1, 0.0);
          tail.assign(kmax + 1, 0.0);
          if (kmax >= 2) mass[2] = tail[2] = half_s2 * theta(t);
        },
        2, t_origin);
  }
  const int big = 1 << 30;
  if (mech.is_neveu()) {
    return RateSchedule(
        [theta, half_s2](double t, int kmax, std::vector<double>& mass, std::vector<double>& tail) {
          mass.assign(kmax + 1, 0.0);
          tail.assign(kmax + 1, 0.0);
          for (int k = 2; k <= kmax; ++k) {
            mass[k] = 1.0 / (double(k) * (k - 1.0));
            tail[k] = 1.0 / (k - 1.0);
          }
          if (half_s2 > 0.0 && kmax >= 2) {
            double d = half_s2 * theta(t);
            mass[2] += d;
            tail[2] += d;
          }
        },
        big, t_origin);
  }
  if (const auto* s = std::get_if<StableLevy>(&mech.levy())) {
    const double a = s->alpha;
    const double cp = stable_density_constant(*s);
    // Gamma(k-a)/k! and Gamma(k-a)/(a Gamma(k)) for k < kPre
    constexpr int kPre = 4096;
    auto gk = std::make_shared<std::vector<double>>(kPre, 0.0);
    auto tk = std::make_shared<std::vector<double>>(kPre, 0.0);
    for (int k = 2; k < kPre; ++k) {
      double lg = std::lgamma(k - a);
      (*gk)[k] = std::exp(lg - std::lgamma(k + 1.0));
      (*tk)[k] = std::exp(lg - std::lgamma(double(k))) / a;
    }
    return RateSchedule(
        [theta, half_s2, a, cp, gk, tk](double t, int kmax, std::vector<double>& mass, std::vector<double>& tail) {
          mass.assign(kmax + 1, 0.0);
          tail.assign(kmax + 1, 0.0);
          double th = theta(t);
          double f = cp * std::pow(th, a - 1.0);
          for (int k = 2; k <= kmax; ++k) {
            if (k < kPre) {
              mass[k] = f * (*gk)[k];
              tail[k] = f * (*tk)[k];
            } else {
              double lg = std::lgamma(k - a);
              mass[k] = f * std::exp(lg - std::lgamma(k + 1.0));
              tail[k] = f * std::exp(lg - std::lgamma(double(k))) / a;
            }
          }
          if (kmax >= 2) {
            mass[2] += half_s2 * th;
            tail[2] += half_s2 * th;
          }
        },
        big, t_origin);
  }
  return RateSchedule(
      [mech, theta](double t, int kmax, std::vector<double>& mass, std::vector<double>& tail) {
        mass.assign(kmax + 1, 0.0);
        tail.assign(kmax + 1, 0.0);
        double th = theta(t);
        for (int k = 2; k <= kmax; ++k) {
          mass[k] = rate_measure(mech, th, k);
          tail[k] = rate_tail(mech, th, k);
        }
      },
      big, t_origin);
}

RateSchedule RateSchedule::homogeneous(const ReproductionMeasure& mu) {
  return RateSchedule(
      [mu](double, int kmax, std::vector<double>& mass, std::vector<double>& tail) {
        mass.assign(kmax + 1, 0.0);
        tail.assign(kmax + 1, 0.0);
        for (int k = 2; k <= kmax; ++k) {
          mass[k] = mu.mass(k);
          tail[k] = mu.tail(k);
        }
      },
      1 << 30, 0.0);
}

void RateSchedule::table(double t, int kmax, std::vector<double>& mass, std::vector<double>& tail) const {
  fn_(t, std::min(kmax, support_), mass, tail);
}

double RateSchedule::rate(double t, int k) const {
  std::vector<double> m, tl;
  table(t, k, m, tl);
  return k < int(m.size()) ? m[k] : 0.0;
}

double RateSchedule::tail(double t, int k) const {
  std::vector<double> m, tl;
  table(t, k, m, tl);
  return k < int(tl.size()) ? tl[k] : 0.0;
}

double RateSchedule::total(double t, int m) const {
  std::vector<double> mass, tl;
  table(t, m, mass, tl);
  return total_rate(mass, tl, m);
}

double RateSchedule::bound(double t0, double t1, int m) const {
  std::vector<double> mass, tl;
  double best = 0.0;
  for (int i = 0; i < 64; ++i) {
    double t = t0 + (t1 - t0) * i / 63.0;
    table(t, m, mass, tl);
    best = std::max(best, total_rate(mass, tl, m));
  }
  return 1.5 * best;
}

double RateSchedule::cached_bound(double t, int m, double* interval_end) const {
  long idx = long(std::floor((t - origin_) / step_ + 1e-12));
  double a = origin_ + idx * step_;
  double b = a + step_;
  if (t >= b) {
    ++idx;
    a = b;
    b = a + step_;
  }
  if (interval_end) *interval_end = b;
  std::lock_guard<std::mutex> lock(cache_->mu);
  auto key = std::make_pair(idx, m);
  if (auto it = cache_->bounds.find(key); it != cache_->bounds.end()) return it->second;
  int kneed = std::min(m, support_);
  if (kneed > cache_->kmax) {
    cache_->grids.clear();
    cache_->bounds.clear();
    cache_->kmax = std::max(kneed, 2 * cache_->kmax);
  }
  auto& grid = cache_->grids[idx];
  if (grid.empty()) {
    grid.resize(64);
    for (int i = 0; i < 64; ++i) {
      double s = a + (b - a) * i / 63.0;
      fn_(s, std::min(cache_->kmax, support_), grid[i].first, grid[i].second);
    }
  }
  double best = 0.0;
  for (const auto& [mass, tl] : grid) best = std::max(best, total_rate(mass, tl, m));
  double bnd = 1.5 * best;
  cache_->bounds[key] = bnd;
  return bnd;
}

std::string CoalescentTrajectory::to_json() const {
  nlohmann::ordered_json j;
  j["n"] = n;
  auto evs = nlohmann::json::array();
  for (const auto& e : events) {
    evs.push_back({{"t", e.t}, {"j", e.e.j}, {"k", e.e.k}, {"boundary", e.e.boundary}});
  }
  j["events"] = evs;
  nlohmann::ordered_json snaps = nlohmann::ordered_json::object();
  for (const auto& [t, p] : snapshots) {
    std::ostringstream key;
    key << t;
    snaps[key.str()] = p.to_string();
  }
  j["snapshots"] = snaps;
  j["final"] = final_state.to_string();
  return j.dump();
}

namespace {

using Sizes = std::vector<ConsecutivePartition::Size>;

// merge blocks [first, last] (0-based) in place
void merge_range(Sizes& sizes, std::size_t first, std::size_t last) {
  ConsecutivePartition::Size sum = 0;
  for (std::size_t i = first; i <= last; ++i) sum += sizes[i];
  sizes[first] = sum;
  sizes.erase(sizes.begin() + first + 1, sizes.begin() + last + 1);
}

// pick k from weights (m-k) mass[k] + tail[k], then the event
MergeEvent choose_event(const std::vector<double>& mass, const std::vector<double>& tail, int m, double u, Rng& rng) {
  int kmax = std::min<int>(m, int(mass.size()) - 1);
  double total = total_rate(mass, tail, m);
  double target = u * total;
  double acc = 0.0;
  int k = kmax;
  for (int kk = 2; kk <= kmax; ++kk) {
    acc += (m - kk) * mass[kk] + tail[kk];
    if (acc >= target) {
      k = kk;
      break;
    }
  }
  double w = (m - k) * mass[k] + tail[k];
  if (rng.uniform() * w < tail[k]) return {std::uint64_t(m - k + 1), std::uint64_t(k), true};
  auto j = std::uint64_t(std::floor(rng.uniform() * (m - k))) + 1;
  return {std::min<std::uint64_t>(j, m - k), std::uint64_t(k), false};
}

void apply_in_place(Sizes& sizes, const MergeEvent& e) {
  std::size_t first = e.j - 1;
  std::size_t last = e.boundary ? sizes.size() - 1 : first + e.k - 1;
  merge_range(sizes, first, last);
}

struct SnapshotWriter {
  const std::vector<double>& times;
  std::size_t next = 0;
  CoalescentTrajectory& out;
  void advance(double t_before, const Sizes& sizes) {
    while (next < times.size() && times[next] < t_before) {
      out.snapshots.emplace_back(times[next], ConsecutivePartition(sizes));
      ++next;
    }
  }
  void finish(const Sizes& sizes) { advance(kInf, sizes); }
};

}  // namespace

CoalescentTrajectory simulate_homogeneous(const ReproductionMeasure& mu, std::uint64_t n, double t_end, Rng& rng,
                                          const SimOptions& opts) {
  require(n >= 1, "n must be >= 1");
  require(t_end >= 0.0, "t_end must be >= 0");
  CoalescentTrajectory out;
  out.n = n;
  // cumulative weights: W_m(K) = m P1(K) + P2(K) with P1 = sum mu(k), P2 = sum (mu_bar(k) - k mu(k))
  std::vector<double> mass(n + 1, 0.0), tail(n + 1, 0.0), p1(n + 1, 0.0), p2(n + 1, 0.0);
  for (std::uint64_t k = 2; k <= n; ++k) {
    mass[k] = mu.mass(int(k));
    tail[k] = mu.tail(int(k));
    require(mass[k] >= 0.0 && tail[k] >= 0.0, "reproduction measure must be nonnegative");
    p1[k] = p1[k - 1] + mass[k];
    p2[k] = p2[k - 1] + tail[k] - double(k) * mass[k];
  }
  Sizes sizes(n, 1);
  SnapshotWriter snaps{opts.snapshot_times, 0, out};
  double t = 0.0;
  while (sizes.size() > 1) {
    const std::uint64_t m = sizes.size();
    double total = double(m) * p1[m] + p2[m];
    if (total <= 0.0) break;
    double dt = rng.exponential(total);
    if (t + dt > t_end) break;
    t += dt;
    snaps.advance(t, sizes);
    double target = rng.uniform() * total;
    std::uint64_t lo = 2, hi = m;
    while (lo < hi) {
      std::uint64_t mid = (lo + hi) / 2;
      if (double(m) * p1[mid] + p2[mid] >= target) hi = mid;
      else lo = mid + 1;
    }
    const std::uint64_t k = lo;
    double w = double(m - k) * mass[k] + tail[k];
    MergeEvent e;
    if (rng.uniform() * w < tail[k]) {
      e = {m - k + 1, k, true};
    } else {
      auto j = std::uint64_t(std::floor(rng.uniform() * double(m - k))) + 1;
      e = {std::min(j, m - k), k, false};
    }
    if (e.boundary && e.j == m) continue;  // zero-width boundary move cannot occur; guard against round-off
    apply_in_place(sizes, e);
    if (opts.record_events) out.events.push_back({t, e});
  }
  snaps.finish(sizes);
  out.final_state = ConsecutivePartition(std::move(sizes));
  return out;
}

CoalescentTrajectory simulate_inhomogeneous(const RateSchedule& sched, std::uint64_t n, double t_start, double t_end,
                                            Rng& rng, const SimOptions& opts) {
  require(n >= 1, "n must be >= 1");
  require(t_end >= t_start, "t_end must be >= t_start");
  CoalescentTrajectory out;
  out.n = n;
  Sizes sizes(n, 1);
  SnapshotWriter snaps{opts.snapshot_times, 0, out};
  std::vector<double> mass, tail;
  double t = t_start;
  while (sizes.size() > 1 && t < t_end) {
    const int m = int(sizes.size());
    double interval_end;
    double bnd = sched.cached_bound(t, m, &interval_end);
    interval_end = std::min(interval_end, t_end);
    if (bnd <= 0.0) {
      t = interval_end;
      continue;
    }
    double cand = t + rng.exponential(bnd);
    if (cand >= interval_end) {
      t = interval_end;
      continue;
    }
    t = cand;
    sched.table(t, m, mass, tail);
    double r = total_rate(mass, tail, m);
    if (r > bnd) throw ConsistencyError("thinning bound violated: rate exceeds the grid bound");
    if (rng.uniform() * bnd >= r) continue;
    snaps.advance(t, sizes);
    MergeEvent e = choose_event(mass, tail, m, rng.uniform(), rng);
    apply_in_place(sizes, e);
    if (opts.record_events) out.events.push_back({t, e});
  }
  snaps.finish(sizes);
  out.final_state = ConsecutivePartition(std::move(sizes));
  return out;
}

CountRate count_rates(const ReproductionMeasure& mu) {
  return [mu](int l, int k) { return (l - k) * mu.mass(k) + mu.tail(k); };
}

CountRate bolthausen_sznitman_count_rates() {
  return [](int l, int k) { return double(l) / (double(k) * (k - 1.0)); };
}

std::vector<double> block_count_distribution(const CountRate& r, int n, double t) {
  require(n >= 1 && t >= 0.0, "needs n >= 1 and t >= 0");
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
  for (int l = 2; l <= n; ++l) {
    for (int k = 2; k <= l; ++k) {
      double rate = r(l, k);
      q(l - 1, l - k) += rate;
      q(l - 1, l - 1) -= rate;
    }
  }
  Eigen::MatrixXd p = (q * t).exp();
  std::vector<double> out(n + 1, 0.0);
  for (int l = 1; l <= n; ++l) out[l] = std::max(0.0, p(n - 1, l - 1));
  return out;
}

int sample_block_count(const CountRate& r, int n, double t_end, Rng& rng) {
  int l = n;
  double t = 0.0;
  std::vector<double> w;
  while (l > 1) {
    w.assign(l + 1, 0.0);
    double total = 0.0;
    for (int k = 2; k <= l; ++k) total += (w[k] = r(l, k));
    t += rng.exponential(total);
    if (t > t_end) break;
    double target = rng.uniform() * total;
    int k = 2;
    for (double acc = w[2]; acc < target && k < l; acc += w[++k]) {
    }
    l = l - k + 1;
  }
  return l;
}

std::uint64_t sample_bs_block_count(std::uint64_t n, double t_end, Rng& rng) {
  require(n >= 1 && t_end >= 0.0, "needs n >= 1 and t >= 0");
  std::uint64_t l = n;
  double t = 0.0;
  while (l > 1) {
    // total rate l (1 - 1/l); P(k <= K) proportional to 1 - 1/K
    t += rng.exponential(double(l) - 1.0);
    if (t > t_end) break;
    double u = rng.uniform() * (1.0 - 1.0 / double(l));
    auto k = std::uint64_t(std::ceil(1.0 / (1.0 - u)));
    k = std::clamp<std::uint64_t>(k, 2, l);
    l = l - k + 1;
  }
  return l;
}

namespace {

// states: bit i set (i = 0..n-2) means a cut between i+1 and i+2
Sizes mask_to_sizes(unsigned mask, int n) {
  Sizes s;
  ConsecutivePartition::Size cur = 1;
  for (int i = 0; i < n - 1; ++i) {
    if (mask >> i & 1u) {
      s.push_back(cur);
      cur = 1;
    } else {
      ++cur;
    }
  }
  s.push_back(cur);
  return s;
}

unsigned sizes_to_mask(const Sizes& s) {
  unsigned mask = 0;
  ConsecutivePartition::Size pos = 0;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    pos += s[i];
    mask |= 1u << (pos - 1);
  }
  return mask;
}

Eigen::MatrixXd generator_matrix(const std::vector<double>& mass, const std::vector<double>& tail, int n) {
  const unsigned states = 1u << (n - 1);
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(states, states);
  for (unsigned s = 0; s < states; ++s) {
    Sizes sz = mask_to_sizes(s, n);
    const int m = int(sz.size());
    auto add = [&](const MergeEvent& e, double rate) {
      if (rate == 0.0) return;
      Sizes next = sz;
      apply_in_place(next, e);
      unsigned target = sizes_to_mask(next);
      q(s, target) += rate;
      q(s, s) -= rate;
    };
    for (int j = 1; j <= m; ++j) {
      for (int k = 2; j + k - 1 <= m - 1; ++k) add({std::uint64_t(j), std::uint64_t(k), false}, mass[k]);
      if (j < m) add({std::uint64_t(j), std::uint64_t(m - j + 1), true}, tail[m - j + 1]);
    }
  }
  return q;
}

PartitionDistribution to_distribution(const Eigen::RowVectorXd& p, int n) {
  PartitionDistribution d;
  for (unsigned s = 0; s < unsigned(p.size()); ++s) d[ConsecutivePartition(mask_to_sizes(s, n)).to_string()] = p(s);
  return d;
}

Eigen::RowVectorXd start_vector(int n) {
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(1u << (n - 1));
  p((1u << (n - 1)) - 1) = 1.0;
  return p;
}

Eigen::RowVectorXd evolve(const RateSchedule& sched, int n, double t0, double t1, double h) {
  Eigen::RowVectorXd p = start_vector(n);
  int steps = std::max(1, int(std::ceil((t1 - t0) / h - 1e-9)));
  double dt = (t1 - t0) / steps;
  std::vector<double> mass, tail;
  for (int i = 0; i < steps; ++i) {
    sched.table(t0 + (i + 0.5) * dt, n, mass, tail);
    mass.resize(n + 1, 0.0);
    tail.resize(n + 1, 0.0);
    p = p * (generator_matrix(mass, tail, n) * dt).exp();
  }
  return p;
}

}  // namespace

OracleResult ctmc_oracle(const ReproductionMeasure& mu, int n, double t) {
  require(n >= 1 && n <= 8, "oracle needs 1 <= n <= 8");
  require(t >= 0.0, "oracle needs t >= 0");
  std::vector<double> mass(n + 1, 0.0), tail(n + 1, 0.0);
  for (int k = 2; k <= n; ++k) {
    mass[k] = mu.mass(k);
    tail[k] = mu.tail(k);
  }
  Eigen::RowVectorXd p = start_vector(n) * (generator_matrix(mass, tail, n) * t).exp();
  return {to_distribution(p, n), 0.0};
}

OracleResult ctmc_oracle(const RateSchedule& sched, int n, double t_start, double t_end, double step) {
  require(n >= 1 && n <= 8, "oracle needs 1 <= n <= 8");
  require(t_end >= t_start, "oracle needs t_end >= t_start");
  Eigen::RowVectorXd coarse = evolve(sched, n, t_start, t_end, step);
  Eigen::RowVectorXd fine = evolve(sched, n, t_start, t_end, step / 2.0);
  double gap = (coarse - fine).cwiseAbs().maxCoeff();
  return {to_distribution(fine, n), gap};
}

double marginal_block_gf(const BranchingMechanism& mech, double lam, double t, double z) {
  require(z >= 0.0 && z <= 1.0, "z must lie in [0,1]");
  if (z == 1.0) return 1.0;
  return 1.0 - v(mech, t, lam * (1.0 - z)) / v(mech, t, lam);
}

double marginal_block_gf_inf(const BranchingMechanism& mech, double s, double t, double z) {
  require(s > 0.0 && t >= s, "needs 0 < s <= t");
  require(z >= 0.0 && z <= 1.0, "z must lie in [0,1]");
  if (z == 1.0) return 1.0;
  return 1.0 - v(mech, t - s, v_inf(mech, s) * (1.0 - z)) / v_inf(mech, t);
}

double limit_partition_gf(const BranchingMechanism& mech, double lam, double z) {
  double d = psi_prime_zero(mech);
  require(d > 0.0, "limit partition needs a subcritical mechanism");
  require(z >= 0.0 && z <= 1.0, "z must lie in [0,1]");
  if (z == 1.0) return 1.0;
  double a = lam * (1.0 - z);
  double integral;
  if (std::holds_alternative<NoLevy>(mech.levy()) && mech.sigma2() > 0.0) {
    // 1/Psi = (1/d) (1/u - c/(c u + d)) with c = sigma2/2
    double c = 0.5 * mech.sigma2();
    integral = (std::log(lam / a) - std::log((c * lam + d) / (c * a + d))) / d;
  } else {
    integral = numeric::integrate([&](double u) { return 1.0 / psi(mech, u); }, a, lam, 1e-12);
  }
  return -std::expm1(-d * integral);
}

double singleton_fraction(const BranchingMechanism& mech, double lam, double t) {
  double vt = v(mech, t, lam);
  double pl = psi(mech, lam);
  // at a root of psi, v_t(lam) = lam and the ratio tends to v_t'(lam) = e^{-psi'(lam) t}
  if (pl == 0.0) return std::exp(-psi_prime(mech, lam) * t);
  return lam / pl * psi(mech, vt) / vt;
}

double blocks_geometric_param(const BranchingMechanism& mech, double lam, double t) {
  return v_zero(mech, t) / v(mech, t, lam);
}

double reduced_tree_gf(const BranchingMechanism& mech, double T, double t, double z) {
  require(t >= 0.0 && t < T, "needs 0 <= t < T");
  return marginal_block_gf_inf(mech, T - t, T, z);
}

double reduced_tree_survival(const BranchingMechanism& mech, double T, double t) {
  require(t >= 0.0 && t < T, "needs 0 <= t < T");
  double a = v_inf(mech, T);
  double b = v_inf(mech, T - t);
  return psi(mech, a) / a * b / psi(mech, b);
}

}  // namespace csbp
