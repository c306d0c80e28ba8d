#include "csbp/poissonbox.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "csbp/errors.hpp"
#include "csbp/feller.hpp"
#include "csbp/numeric.hpp"

namespace csbp {

LaplaceExponent LaplaceExponent::stable_type(double kill, double drift, double scale, double a) {
  require(kill >= 0.0 && drift >= 0.0 && scale >= 0.0, "exponent parameters must be nonnegative");
  require(a > 0.0 && a < 1.0, "stable index must lie in (0,1)");
  LaplaceExponent e;
  e.kill = kill;
  e.drift = drift;
  e.phi = [=](double mu) { return kill + drift * mu + scale * std::pow(mu, a); };
  const double lg1a = std::lgamma(1.0 - a);
  if (scale > 0.0) e.density = [=](double x) { return scale * a / std::exp(lg1a) * std::pow(x, -1.0 - a); };
  e.pmf_closed = [=](double lam, std::uint64_t k) {
    double f = kill + drift * lam + scale * std::pow(lam, a);
    double jumps = scale == 0.0 ? 0.0
                                : scale * a * std::pow(lam, a) * std::exp(std::lgamma(k - a) - lg1a - std::lgamma(k + 1.0));
    return ((k == 1 ? drift * lam : 0.0) + jumps) / f;
  };
  e.tail_closed = [=](double lam, std::uint64_t k) {
    if (scale == 0.0) return 0.0;
    double f = kill + drift * lam + scale * std::pow(lam, a);
    return scale * std::pow(lam, a) * std::exp(std::lgamma(k + 1.0 - a) - lg1a - std::lgamma(k + 1.0)) / f;
  };
  e.label = "stable type";
  return e;
}

LaplaceExponent LaplaceExponent::feller_at(double sigma2, double beta, double t) {
  FellerParams p(sigma2, beta);
  require(t > 0.0, "t must be positive");
  const double rate = feller_v_inf(p, t);
  const double b = beta_hat(p, t);
  LaplaceExponent e;
  e.phi = [=](double mu) { return rate * mu / (mu + b); };
  e.density = [=](double x) { return rate * b * std::exp(-b * x); };
  e.pmf_closed = [=](double lam, std::uint64_t k) {
    double q = lam / (lam + b);
    return (1.0 - q) * std::pow(q, double(k) - 1.0);
  };
  e.tail_closed = [=](double lam, std::uint64_t k) { return std::pow(lam / (lam + b), double(k)); };
  e.label = "Feller v_t";
  return e;
}

LaplaceExponent LaplaceExponent::neveu_at(double t) {
  require(t > 0.0, "t must be positive");
  auto e = stable_type(0.0, 0.0, 1.0, std::exp(-t));
  e.label = "Neveu v_t";
  return e;
}

LaplaceExponent LaplaceExponent::root_explosive_at(double t) {
  require(t > 0.0, "t must be positive");
  auto e = stable_type(0.25 * t * t, 1.0, t, 0.5);
  e.label = "explosive root v_t";
  return e;
}

LaplaceExponent LaplaceExponent::drift_only(double d) {
  require(d > 0.0, "drift must be positive");
  LaplaceExponent e;
  e.drift = d;
  e.phi = [d](double mu) { return d * mu; };
  e.pmf_closed = [](double, std::uint64_t k) { return k == 1 ? 1.0 : 0.0; };
  e.tail_closed = [](double, std::uint64_t) { return 0.0; };
  e.label = "drift";
  return e;
}

LaplaceExponent LaplaceExponent::killed(double kill, double drift) {
  require(kill > 0.0 && drift > 0.0, "killed exponent needs kill > 0 and drift > 0");
  LaplaceExponent e;
  e.kill = kill;
  e.drift = drift;
  e.phi = [=](double mu) { return kill + drift * mu; };
  e.pmf_closed = [=](double lam, std::uint64_t k) { return k == 1 ? drift * lam / (kill + drift * lam) : 0.0; };
  e.tail_closed = [](double, std::uint64_t) { return 0.0; };
  e.label = "killed drift";
  return e;
}

LaplaceExponent LaplaceExponent::explicit_exponent(std::function<double(double)> phi, double drift, double kill,
                                                   std::function<double(double)> density) {
  require(drift >= 0.0 && kill >= 0.0, "exponent parameters must be nonnegative");
  LaplaceExponent e;
  e.phi = std::move(phi);
  e.drift = drift;
  e.kill = kill;
  e.density = std::move(density);
  e.label = "explicit";
  return e;
}

double BlockSizeLaw::generating_function(double s) const {
  double g = 0.0;
  double sk = 1.0;
  for (std::size_t k = 1; k < pmf.size(); ++k) {
    sk *= s;
    g += pmf[k] * sk;
  }
  return g;
}

BlockSizeLaw block_size_law(const LaplaceExponent& e, double lam, std::uint64_t k_max) {
  require(lam > 0.0, "lambda must be positive");
  require(k_max >= 1, "k_max must be >= 1");
  const double f = e.phi(lam);
  require(f > 0.0, "phi(lambda) must be positive");
  BlockSizeLaw law;
  law.pmf.assign(k_max + 1, 0.0);
  law.p_inf = e.kill / f;
  if (e.pmf_closed) {
    for (std::uint64_t k = 1; k <= k_max; ++k) law.pmf[k] = e.pmf_closed(lam, k);
  } else if (e.density) {
    for (std::uint64_t k = 1; k <= k_max; ++k) {
      // substitute u = lam x
      const double lk = std::lgamma(k + 1.0);
      auto g = [&](double u) {
        if (u <= 0.0) return 0.0;
        double val = std::exp(k * std::log(u) - u - lk) * e.density(u / lam);
        // nodes next to 0 can overflow the density; their weight is negligible
        return std::isfinite(val) ? val : 0.0;
      };
      double jumps = numeric::integrate_half_line(g, 1e-12) / lam;
      law.pmf[k] = ((k == 1 ? e.drift * lam : 0.0) + jumps) / f;
    }
  } else {
    throw DomainError("block size law needs closed-form probabilities or a Levy density");
  }
  double sum = law.p_inf;
  for (std::uint64_t k = 1; k <= k_max; ++k) sum += law.pmf[k];
  if (e.tail_closed) {
    auto tc = e.tail_closed;
    law.tail_fn = [tc, lam](std::uint64_t k) { return tc(lam, k); };
    law.tail = tc(lam, k_max);
  }
  double missing = 1.0 - sum - law.tail;
  if (std::abs(missing) > 1e-6)
    throw NumericFailure("block size law truncation leaves mass " + std::to_string(missing) + "; raise k_max");
  if (!law.tail_fn) law.tail = 0.0;
  return law;
}

std::uint64_t sample_block_size(const BlockSizeLaw& law, Rng& rng) {
  double u = rng.uniform();
  if (u < law.p_inf) return 0;
  u -= law.p_inf;
  const std::uint64_t k_max = law.pmf.size() - 1;
  for (std::uint64_t k = 1; k <= k_max; ++k) {
    if (u < law.pmf[k]) return k;
    u -= law.pmf[k];
  }
  if (!law.tail_fn || law.tail <= 0.0) return k_max;
  // beyond k_max: smallest k with P(k_max < X <= k) > u, i.e. tail(k) < tail(k_max) - u
  const double target = law.tail - u;
  std::uint64_t lo = k_max, hi = 2 * k_max;
  while (law.tail_fn(hi) >= target) {
    lo = hi;
    if (hi > (std::uint64_t(1) << 62)) return hi;
    hi *= 2;
  }
  while (hi - lo > 1) {
    std::uint64_t mid = lo + (hi - lo) / 2;
    if (law.tail_fn(mid) >= target) lo = mid;
    else hi = mid;
  }
  return hi;
}

ConsecutivePartition sample_box_direct(const BlockSizeLaw& law, std::uint64_t n, Rng& rng) {
  require(n >= 1, "ground size must be >= 1");
  std::vector<ConsecutivePartition::Size> sizes;
  std::uint64_t total = 0;
  while (total < n) {
    auto k = sample_block_size(law, rng);
    if (k == 0) {
      sizes.push_back(n - total);
      return ConsecutivePartition(std::move(sizes));
    }
    k = std::min(k, n - total);
    sizes.push_back(k);
    total += k;
  }
  return ConsecutivePartition(std::move(sizes));
}

ConsecutivePartition sample_box_blocks(const BlockSizeLaw& law, std::uint64_t n_blocks, Rng& rng) {
  std::vector<ConsecutivePartition::Size> sizes;
  sizes.reserve(n_blocks);
  for (std::uint64_t i = 0; i < n_blocks; ++i) {
    auto k = sample_block_size(law, rng);
    if (k == 0) return ConsecutivePartition(std::move(sizes), true);
    sizes.push_back(k);
  }
  return ConsecutivePartition(std::move(sizes));
}

SubordinatorSpec SubordinatorSpec::feller_at(double sigma2, double beta, double t) {
  FellerParams p(sigma2, beta);
  SubordinatorSpec s;
  s.cp_rate = feller_v_inf(p, t);
  s.cp_size_rate = beta_hat(p, t);
  return s;
}

SubordinatorSpec SubordinatorSpec::neveu_at(double t, double epsilon) {
  SubordinatorSpec s;
  s.stable_scale = 1.0;
  s.stable_index = std::exp(-t);
  s.epsilon = epsilon;
  return s;
}

SubordinatorSpec SubordinatorSpec::root_explosive_at(double t, double epsilon) {
  SubordinatorSpec s;
  s.kill = 0.25 * t * t;
  s.drift = 1.0;
  s.stable_scale = t;
  s.stable_index = 0.5;
  s.epsilon = epsilon;
  return s;
}

SubordinatorSpec SubordinatorSpec::drift_only(double d) {
  SubordinatorSpec s;
  s.drift = d;
  return s;
}

SubordinatorPath sample_subordinator(const SubordinatorSpec& spec, double horizon, Rng& rng) {
  require(horizon >= 0.0, "horizon must be nonnegative");
  double drift = spec.drift;
  std::vector<Jump> jumps;
  if (spec.stable_scale > 0.0) {
    const double a = spec.stable_index;
    const double eps = spec.epsilon;
    require(a > 0.0 && a < 1.0 && eps > 0.0, "stable part needs index in (0,1) and epsilon > 0");
    // Levy density scale a / Gamma(1-a) x^{-1-a}
    const double g = spec.stable_scale / std::tgamma(1.0 - a);
    drift += g * a * std::pow(eps, 1.0 - a) / (1.0 - a);
    const double rate = g * std::pow(eps, -a);
    double x = rng.exponential(rate);
    while (x <= horizon) {
      jumps.push_back({x, eps * std::pow(rng.uniform(), -1.0 / a)});
      x += rng.exponential(rate);
    }
  }
  if (spec.cp_rate > 0.0) {
    std::vector<Jump> cp;
    double x = rng.exponential(spec.cp_rate);
    while (x <= horizon) {
      cp.push_back({x, rng.exponential(spec.cp_size_rate)});
      x += rng.exponential(spec.cp_rate);
    }
    std::vector<Jump> merged;
    merged.reserve(jumps.size() + cp.size());
    std::merge(jumps.begin(), jumps.end(), cp.begin(), cp.end(), std::back_inserter(merged),
               [](const Jump& a, const Jump& b) { return a.loc < b.loc; });
    jumps = std::move(merged);
  }
  double kill = kInf;
  if (spec.kill > 0.0) {
    double z = rng.exponential(spec.kill);
    if (z <= horizon) kill = z;
  }
  return SubordinatorPath(drift, std::move(jumps), horizon, 0.0, kill);
}

BoxSample pullback(const SubordinatorPath& path, const std::vector<double>& arrivals) {
  require(std::is_sorted(arrivals.begin(), arrivals.end()), "arrivals must be sorted");
  BoxSample out;
  std::vector<ConsecutivePartition::Size> sizes;
  bool infinite = false;
  for (double j : arrivals) {
    double x = right_inverse(path, j);
    if (!out.arrivals.empty() && x == out.arrivals.back()) {
      ++sizes.back();
    } else {
      out.arrivals.push_back(x);
      sizes.push_back(1);
    }
    if (x >= path.kill()) infinite = true;
  }
  if (infinite) sizes.pop_back();
  out.partition = ConsecutivePartition(std::move(sizes), infinite);
  return out;
}

BoxSample sample_box_pullback(const SubordinatorSpec& spec, double lam, std::uint64_t n_blocks, Rng& rng,
                              double segment) {
  require(lam > 0.0, "lambda must be positive");
  require(segment > 0.0, "segment length must be positive");
  BoxSample out;
  std::vector<ConsecutivePartition::Size> sizes;
  sizes.reserve(std::min<std::uint64_t>(n_blocks, 1 << 16));
  out.arrivals.reserve(std::min<std::uint64_t>(n_blocks, 1 << 16) + 1);
  double x0 = 0.0;
  bool infinite = false;
  while (sizes.size() < n_blocks && !infinite) {
    auto path = sample_subordinator(spec, segment, rng);
    const double drift_rate = lam * path.drift();
    const double end = std::min(segment, path.kill());
    double next = drift_rate > 0.0 ? rng.exponential(drift_rate) : kInf;
    auto emit_drift_until = [&](double limit) {
      while (next < limit && sizes.size() < n_blocks) {
        sizes.push_back(1);
        out.arrivals.push_back(x0 + next);
        next += rng.exponential(drift_rate);
      }
    };
    for (const auto& jmp : path.jumps()) {
      if (jmp.loc >= end || sizes.size() >= n_blocks) break;
      emit_drift_until(jmp.loc);
      if (sizes.size() >= n_blocks) break;
      auto c = rng.poisson(lam * jmp.size);
      if (c > 0) {
        sizes.push_back(c);
        out.arrivals.push_back(x0 + jmp.loc);
      }
    }
    emit_drift_until(end);
    if (sizes.size() < n_blocks && path.kill() <= segment) {
      out.arrivals.push_back(x0 + path.kill());
      infinite = true;
    }
    x0 += segment;
  }
  out.partition = ConsecutivePartition(std::move(sizes), infinite);
  return out;
}

}  // namespace csbp
