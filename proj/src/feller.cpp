#include "csbp/feller.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "csbp/coalescent.hpp"
#include "csbp/errors.hpp"

namespace csbp {

FellerParams::FellerParams(double sigma2_, double beta_) : sigma2(sigma2_), beta(beta_) {
  require(sigma2 > 0.0 && std::isfinite(sigma2), "Feller sigma2 must be positive and finite");
  require(std::isfinite(beta), "Feller beta must be finite");
}

double beta_hat(const FellerParams& p, double t) {
  require(t > 0.0, "beta_hat needs t > 0");
  if (std::isinf(t)) return std::max(-2.0 * p.beta / p.sigma2, 0.0);
  double bt = p.beta * t;
  double ratio = bt == 0.0 ? 1.0 : bt / std::expm1(bt);
  return 2.0 / (p.sigma2 * t) * ratio;
}

double feller_v_inf(const FellerParams& p, double t) {
  require(t > 0.0, "v_t(inf) needs t > 0");
  if (std::isinf(t)) return std::max(2.0 * p.beta / p.sigma2, 0.0);
  double bt = p.beta * t;
  double ratio = bt == 0.0 ? 1.0 : bt / -std::expm1(-bt);
  return 2.0 / (p.sigma2 * t) * ratio;
}

double beta_hat_inverse(const FellerParams& p, double b) {
  require(b >= 0.0, "beta_hat_inverse needs b >= 0");
  if (b <= beta_hat(p, kInf)) return kInf;
  if (std::isinf(b)) return 0.0;
  if (p.beta == 0.0) return 2.0 / (p.sigma2 * b);
  return std::log1p(2.0 * p.beta / (p.sigma2 * b)) / p.beta;
}

double mrca_cdf(const FellerParams& p, double t, double x, double y) {
  require(x >= 0.0 && x <= y, "mrca_cdf needs 0 <= x <= y");
  require(t >= 0.0, "mrca_cdf needs t >= 0");
  double d = y - x;
  if (d == 0.0) return 1.0;
  if (t == 0.0) return 0.0;
  return std::exp(-beta_hat(p, t) * d);
}

double mrca_no_ancestor_prob(const FellerParams& p, double d) {
  require(d >= 0.0, "window length must be nonnegative");
  if (p.beta >= 0.0) return 0.0;
  return -std::expm1(2.0 * p.beta / p.sigma2 * d);
}

double cpp_intensity(const FellerParams& p, double t) {
  require(t > 0.0, "intensity needs t > 0");
  if (p.beta == 0.0) return 2.0 / (p.sigma2 * t * t);
  double e = std::expm1(p.beta * t);
  return 2.0 * p.beta * p.beta / p.sigma2 * std::exp(p.beta * t) / (e * e);
}

double CoalescentPointProcess::mrca(double x, double y) const {
  require(x <= y, "mrca needs x <= y");
  auto lo = std::upper_bound(atoms.begin(), atoms.end(), x, [](double v, const CppAtom& a) { return v < a.x; });
  auto hi = std::upper_bound(atoms.begin(), atoms.end(), y, [](double v, const CppAtom& a) { return v < a.x; });
  double best = 0.0;
  for (auto it = lo; it != hi; ++it) best = std::max(best, it->depth);
  return best;
}

void CoalescentPointProcess::write_csv(std::ostream& os) const {
  os << "x,depth\n";
  for (const auto& a : atoms) {
    os << a.x << ',';
    if (std::isinf(a.depth)) os << "inf";
    else os << a.depth;
    os << '\n';
  }
}

CoalescentPointProcess sample_cpp(const FellerParams& p, double x_max, Rng& rng, double t_min) {
  require(x_max > 0.0, "x_max must be positive");
  require(t_min > 0.0, "t_min must be positive");
  const double b0 = beta_hat(p, t_min);
  auto count = rng.poisson(x_max * b0);
  CoalescentPointProcess cpp{{}, x_max, t_min};
  cpp.atoms.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    double x = x_max * rng.uniform();
    double depth = beta_hat_inverse(p, b0 * rng.uniform());
    cpp.atoms.push_back({x, std::max(depth, t_min)});
  }
  std::sort(cpp.atoms.begin(), cpp.atoms.end(), [](const CppAtom& a, const CppAtom& b) { return a.x < b.x; });
  return cpp;
}

std::vector<double> prolific_points(const FellerParams& p, double x_max, Rng& rng) {
  require(p.beta < 0.0, "prolific individuals need beta < 0");
  require(x_max >= 0.0, "x_max must be nonnegative");
  auto count = rng.poisson(x_max * 2.0 * -p.beta / p.sigma2);
  std::vector<double> xs(count);
  for (auto& x : xs) x = x_max * rng.uniform();
  std::sort(xs.begin(), xs.end());
  return xs;
}

BinaryMergingResult binary_merging_check(const FellerParams& p, const std::vector<double>& positions, Rng& rng) {
  require(positions.size() >= 3, "binary merging check needs n >= 3");
  for (std::size_t i = 1; i < positions.size(); ++i)
    require(positions[i] > positions[i - 1], "positions must be strictly increasing");
  BinaryMergingResult r{{}, true};
  for (std::size_t i = 1; i < positions.size(); ++i) {
    double d = positions[i] - positions[i - 1];
    r.times.push_back(beta_hat_inverse(p, -std::log(rng.uniform()) / d));
  }
  std::vector<double> finite;
  for (double t : r.times)
    if (std::isfinite(t)) finite.push_back(t);
  std::sort(finite.begin(), finite.end());
  r.distinct = std::adjacent_find(finite.begin(), finite.end()) == finite.end();
  return r;
}

std::vector<double> IntervalPartition::lengths() const {
  std::vector<double> out;
  out.reserve(ends.size());
  double prev = 0.0;
  for (double e : ends) {
    out.push_back(e - prev);
    prev = e;
  }
  return out;
}

IntervalPartition coag(const IntervalPartition& c, const ConsecutivePartition& d) {
  require(c.ends.size() <= d.finite_ground() || d.infinite_tail(), "coag needs #C <= ground size of D");
  IntervalPartition out;
  std::size_t pos = 0;
  for (auto s : d.sizes()) {
    if (pos >= c.ends.size()) break;
    pos = std::min<std::size_t>(pos + s, c.ends.size());
    out.ends.push_back(c.ends[pos - 1]);
  }
  if (pos < c.ends.size()) out.ends.push_back(c.ends.back());
  return out;
}

namespace {

// number of fine ends in each coarse interval (lo, hi]
ConsecutivePartition count_step(const std::vector<double>& fine, const std::vector<double>& coarse) {
  std::vector<ConsecutivePartition::Size> sizes;
  std::size_t i = 0;
  for (double hi : coarse) {
    ConsecutivePartition::Size c = 0;
    while (i < fine.size() && fine[i] <= hi) {
      ++c;
      ++i;
    }
    if (c == 0) throw ConsistencyError("coarse interval without a fine end");
    sizes.push_back(c);
  }
  if (i != fine.size()) throw ConsistencyError("fine ends beyond the coarse window");
  return ConsecutivePartition(std::move(sizes));
}

}  // namespace

IntervalGenealogy interval_genealogy(const FellerParams& p, const std::vector<double>& t_grid, double x_max,
                                     Rng& rng) {
  require(!t_grid.empty(), "time grid must be nonempty");
  require(x_max > 0.0, "x_max must be positive");
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    require(t_grid[i] > (i == 0 ? 0.0 : t_grid[i - 1]), "time grid must be positive and increasing");
  const std::size_t k = t_grid.size();
  // g[i] = X_{-t_i, -t_{i-1}}, sampled from the deepest level upwards
  std::vector<SubordinatorPath> g;
  g.reserve(k);
  std::vector<SubordinatorPath> rev;
  double horizon = x_max;
  for (std::size_t i = k; i-- > 0;) {
    double dt = t_grid[i] - (i == 0 ? 0.0 : t_grid[i - 1]);
    rev.push_back(sample_feller_forward(p.sigma2, p.beta, dt, horizon, rng));
    horizon = rev.back().value(horizon);
  }
  for (std::size_t i = k; i-- > 0;) g.push_back(std::move(rev[i]));

  // H_i = g_0 o ... o g_i evaluated pointwise
  auto h_eval = [&](std::size_t i, double x) {
    for (std::size_t j = i + 1; j-- > 0;) x = g[j].value(x);
    return x;
  };
  IntervalGenealogy out;
  out.times = t_grid;
  for (std::size_t i = 0; i < k; ++i) {
    IntervalPartition level;
    double prev = 0.0;
    for (const auto& jump : g[i].jumps()) {
      double y = jump.loc;
      double hi = h_eval(i, y);
      double lo = i == 0 ? g[0].value_left(y) : h_eval(i - 1, g[i].value_left(y));
      if (hi > lo && hi > prev) {
        level.ends.push_back(hi);
        prev = hi;
      }
    }
    out.levels.push_back(std::move(level));
  }
  for (std::size_t i = 0; i + 1 < k; ++i) out.steps.push_back(count_step(out.levels[i].ends, out.levels[i + 1].ends));
  return out;
}

IntervalGenealogy interval_genealogy_coalescent(const FellerParams& p, const std::vector<double>& t_grid, double y_max,
                                                Rng& rng) {
  require(!t_grid.empty(), "time grid must be nonempty");
  require(y_max > 0.0, "y_max must be positive");
  for (std::size_t i = 0; i < t_grid.size(); ++i)
    require(t_grid[i] > (i == 0 ? 0.0 : t_grid[i - 1]), "time grid must be positive and increasing");
  const double t1 = t_grid.front();
  // family sizes at depth t1 are the jump sizes of X_{-t1,0}
  const double bh = beta_hat(p, t1);
  IntervalPartition first;
  double total = 0.0;
  while (true) {
    double s = rng.exponential(bh);
    if (total + s > y_max) break;
    total += s;
    first.ends.push_back(total);
  }
  IntervalGenealogy out;
  out.times = t_grid;
  out.levels.push_back(first);
  const std::size_t n = first.ends.size();
  if (t_grid.size() == 1 || n == 0) {
    for (std::size_t i = 1; i < t_grid.size(); ++i) out.levels.push_back(first);
    for (std::size_t i = 0; i + 1 < t_grid.size(); ++i)
      out.steps.push_back(ConsecutivePartition::singletons(out.levels[i].ends.size()));
    return out;
  }
  auto sched = RateSchedule::from_mechanism(p.mechanism(), kInf, t1);
  SimOptions opts;
  opts.snapshot_times.assign(t_grid.begin() + 1, t_grid.end());
  auto traj = simulate_inhomogeneous(sched, n, t1, t_grid.back(), rng, opts);
  for (const auto& [t, part] : traj.snapshots) out.levels.push_back(coag(first, part));
  for (std::size_t i = 0; i + 1 < out.levels.size(); ++i)
    out.steps.push_back(count_step(out.levels[i].ends, out.levels[i + 1].ends));
  return out;
}

}  // namespace csbp
