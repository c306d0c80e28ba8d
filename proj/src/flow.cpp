#include "csbp/flow.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <ostream>

#include "csbp/errors.hpp"
#include "csbp/feller.hpp"
#include "csbp/numeric.hpp"

namespace csbp {

SubordinatorPath::SubordinatorPath(double drift, std::vector<Jump> jumps, double horizon, double start, double kill)
    : drift_(drift), start_(start), horizon_(horizon), kill_(kill), jumps_(std::move(jumps)) {
  require(drift >= 0.0 && std::isfinite(drift), "path drift must be finite and nonnegative");
  require(start >= 0.0 && std::isfinite(start), "path start must be finite and nonnegative");
  require(horizon >= 0.0, "path horizon must be nonnegative");
  require(kill > 0.0, "kill location must be positive");
  cum_.reserve(jumps_.size());
  double sum = 0.0;
  double prev = -1.0;
  for (const auto& j : jumps_) {
    require(j.loc > prev, "jump locations must be strictly increasing");
    require(j.loc >= 0.0 && j.loc <= horizon, "jump location outside [0, horizon]");
    require(j.size > 0.0, "jump sizes must be positive");
    prev = j.loc;
    sum += j.size;
    cum_.push_back(sum);
  }
}

double SubordinatorPath::value(double x) const {
  if (x < 0.0 || x > horizon_) throw RangeError("path evaluated outside [0, horizon]");
  if (x >= kill_) return kInf;
  auto it = std::upper_bound(jumps_.begin(), jumps_.end(), x, [](double v, const Jump& j) { return v < j.loc; });
  return start_ + drift_ * x + cumulative_before(std::size_t(it - jumps_.begin()));
}

double SubordinatorPath::value_left(double x) const {
  if (x <= 0.0) return start_;
  if (x > horizon_) throw RangeError("path evaluated outside [0, horizon]");
  if (x > kill_) return kInf;
  auto it = std::lower_bound(jumps_.begin(), jumps_.end(), x, [](const Jump& j, double v) { return j.loc < v; });
  return start_ + drift_ * x + cumulative_before(std::size_t(it - jumps_.begin()));
}

SubordinatorPath SubordinatorPath::extended(const SubordinatorPath& inc) const {
  require(inc.drift_ == drift_, "extension needs equal drift");
  require(std::isinf(kill_), "a killed path cannot be extended");
  std::vector<Jump> js = jumps_;
  const double h = horizon_;
  auto add = [&](double loc, double size) {
    if (!js.empty() && js.back().loc == loc) js.back().size += size;
    else js.push_back({loc, size});
  };
  if (inc.start_ > 0.0) add(h, inc.start_);
  for (const auto& j : inc.jumps_) add(h + j.loc, j.size);
  double kill = std::isinf(inc.kill_) ? kInf : h + inc.kill_;
  return SubordinatorPath(drift_, std::move(js), h + inc.horizon_, start_, kill);
}

void SubordinatorPath::write_csv(std::ostream& os) const {
  os << "location,value\n";
  os << 0.0 << ',' << start_ << '\n';
  for (std::size_t i = 0; i < jumps_.size(); ++i) {
    double x = jumps_[i].loc;
    if (x >= kill_) break;
    os << x << ',' << start_ + drift_ * x + cumulative_before(i) << '\n';
    os << x << ',' << start_ + drift_ * x + cum_[i] << '\n';
  }
  if (std::isinf(kill_) || kill_ > horizon_) {
    os << horizon_ << ',' << value(horizon_) << '\n';
  } else {
    os << kill_ << ",inf\n";
  }
}

double right_inverse(const SubordinatorPath& path, double y) {
  require(y >= 0.0, "right_inverse needs y >= 0");
  if (path.start() > y) return 0.0;
  const auto& js = path.jumps();
  const double d = path.drift();
  const double limit = std::min(path.kill(), path.horizon());
  const std::size_t n_eff =
      std::size_t(std::lower_bound(js.begin(), js.end(), limit, [](const Jump& j, double v) { return j.loc < v; }) -
                  js.begin());
  // first jump whose post-jump value exceeds y
  std::size_t lo = 0, hi = n_eff;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (path.value(js[mid].loc) > y) hi = mid;
    else lo = mid + 1;
  }
  double seg_start = lo == 0 ? 0.0 : js[lo - 1].loc;
  double seg_end = lo < n_eff ? js[lo].loc : limit;
  if (d > 0.0) {
    double base = path.value(seg_start);
    double cross = seg_start + (y - base) / d;
    if (cross < seg_end) return cross;
  }
  if (lo < n_eff) return js[lo].loc;
  if (path.kill() <= path.horizon()) return path.kill();
  throw RangeError("right_inverse: level not reached before the path horizon");
}

SubordinatorPath compose(const SubordinatorPath& f, const SubordinatorPath& g) {
  require(std::isinf(f.kill()) && std::isinf(g.kill()), "compose needs unkilled paths");
  require(g.value(g.horizon()) <= f.horizon(), "compose needs g(horizon) within the horizon of f");
  std::vector<Jump> out;
  const auto& gj = g.jumps();
  const auto& fj = f.jumps();
  double prev_loc = 0.0;
  for (std::size_t i = 0; i <= gj.size(); ++i) {
    double seg_end = i < gj.size() ? gj[i].loc : g.horizon();
    if (g.drift() > 0.0) {
      // f jumps crossed continuously by g on (prev_loc, seg_end)
      double a = g.value(prev_loc);
      double b = g.value_left(seg_end);
      auto it = std::upper_bound(fj.begin(), fj.end(), a, [](double v, const Jump& j) { return v < j.loc; });
      for (; it != fj.end() && it->loc < b; ++it) {
        double x = prev_loc + (it->loc - a) / g.drift();
        if (x > prev_loc && x < seg_end) out.push_back({x, it->size});
      }
    }
    if (i < gj.size()) {
      double left = g.drift() > 0.0 ? f.value_left(g.value_left(gj[i].loc)) : f.value(g.value_left(gj[i].loc));
      double size = f.value(g.value(gj[i].loc)) - left;
      if (size > 0.0) out.push_back({gj[i].loc, size});
      prev_loc = gj[i].loc;
    }
  }
  return SubordinatorPath(f.drift() * g.drift(), std::move(out), g.horizon(), f.value(g.start()));
}

SubordinatorPath sample_feller_forward(double sigma2, double beta, double t, double horizon, Rng& rng) {
  require(t > 0.0, "Feller forward flow needs t > 0");
  require(horizon >= 0.0, "horizon must be nonnegative");
  FellerParams p(sigma2, beta);
  const double rate = feller_v_inf(p, t);
  const double bh = beta_hat(p, t);
  std::vector<Jump> js;
  double x = rng.exponential(rate);
  while (x <= horizon) {
    js.push_back({x, rng.exponential(bh)});
    x += rng.exponential(rate);
  }
  return SubordinatorPath(0.0, std::move(js), horizon);
}

SubordinatorPath sample_feller_inverse(double sigma2, double beta, double t, double y_max, Rng& rng) {
  require(t > 0.0, "Feller inverse flow needs t > 0");
  require(y_max >= 0.0, "y_max must be nonnegative");
  FellerParams p(sigma2, beta);
  const double rate = feller_v_inf(p, t);
  const double bh = beta_hat(p, t);
  // inter-arrival times of the forward jump locations become the inverse jump sizes,
  // forward jump sizes become the inverse renewal spacings
  double start = rng.exponential(rate);
  std::vector<Jump> js;
  double y = rng.exponential(bh);
  while (y <= y_max) {
    js.push_back({y, rng.exponential(rate)});
    y += rng.exponential(bh);
  }
  return SubordinatorPath(0.0, std::move(js), y_max, start);
}

double sample_positive_stable(double a, Rng& rng) {
  require(a > 0.0 && a <= 1.0, "stable index must lie in (0,1]");
  if (a == 1.0) return 1.0;
  // Kanter's representation
  const double pi = std::numbers::pi;
  double u = rng.uniform();
  double e = rng.exponential(1.0);
  double s1 = std::sin(a * pi * u) / std::sin(pi * u);
  double s2 = std::sin((1.0 - a) * pi * u) / (std::sin(a * pi * u) * e);
  return std::pow(s1, 1.0 / a) * std::pow(s2, (1.0 - a) / a);
}

double sample_neveu_marginal(double t, double x, Rng& rng) {
  require(t >= 0.0 && x >= 0.0, "Neveu marginal needs t, x >= 0");
  double a = std::exp(-t);
  return std::pow(x, 1.0 / a) * sample_positive_stable(a, rng);
}

double semigroup_exponential_sample(const BranchingMechanism& mech, double t, double q, Rng& rng) {
  require(t >= 0.0 && q > 0.0, "semigroup sample needs t >= 0 and q > 0");
  double e = rng.exponential(q);
  if (t == 0.0) return e;
  if (mech.is_feller()) {
    auto path = sample_feller_inverse(mech.sigma2(), mech.beta(), t, e, rng);
    return path.value(e);
  }
  if (mech.is_neveu() && mech.sigma2() == 0.0) {
    // X_{-t,0}(x) = (x k)^{1/a} S with v_t(lam) = k lam^a, inverted at level e
    double a = std::exp(-t);
    double kscale = std::exp(mech.beta() * (1.0 - a));
    double s = sample_positive_stable(a, rng);
    return std::pow(e / s, a) / kscale;
  }
  throw DomainError("semigroup sampling is implemented for the Feller and Neveu families");
}

double entrance_sample(const BranchingMechanism& mech, double t, Boundary b, Rng& rng) {
  require(t > 0.0, "entrance law needs t > 0");
  if (b == Boundary::Zero) {
    require(grey(mech).extinction, "entrance from 0 needs the extinction condition");
    return rng.exponential(v_inf(mech, t));
  }
  require(grey(mech).explosion, "entrance from infinity needs the explosion condition");
  return rng.exponential(v_zero(mech, t));
}

double feller_inverse_expectation(double sigma2, double beta, double t, double y, const std::function<double(double)>& f) {
  require(t > 0.0 && y >= 0.0, "needs t > 0 and y >= 0");
  FellerParams p(sigma2, beta);
  const double rate = feller_v_inf(p, t);
  const double mu = beta_hat(p, t) * y;
  // Xhat_t(y) ~ Gamma(M + 1, rate) with M ~ Poisson(mu)
  long lo = std::max(0L, long(std::floor(mu - 12.0 * std::sqrt(mu) - 20.0)));
  long hi = long(std::ceil(mu + 12.0 * std::sqrt(mu) + 20.0));
  double total = 0.0;
  double wsum = 0.0;
  for (long m = lo; m <= hi; ++m) {
    double w = mu == 0.0 ? (m == 0 ? 1.0 : 0.0) : std::exp(m * std::log(mu) - mu - std::lgamma(m + 1.0));
    if (w < 1e-300) continue;
    double shape = m + 1.0;
    double mean = shape / rate;
    double sd = std::sqrt(shape) / rate;
    double a = std::max(0.0, mean - 14.0 * sd - 30.0 / rate);
    double b = mean + 14.0 * sd + 30.0 / rate;
    auto g = [&](double x) { return f(x) * rate * boost::math::gamma_p_derivative(shape, rate * x); };
    total += w * numeric::integrate(g, a, b, 1e-13);
    wsum += w;
  }
  return total / wsum;
}

namespace {

// quadrature nodes can sit so close to 0 that the density overflows; their weight is negligible
double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

double continuous_drift(const BranchingMechanism& mech, double z) {
  auto dens = [&](double h) { return mech.levy_density(h); };
  double a;
  if (z <= 1.0) {
    a = z * numeric::integrate([&](double h) { return h * dens(h); }, z, 1.0) +
        numeric::integrate([&](double h) { return finite_or_zero(h * h * dens(h)); }, 0.0, z);
  } else {
    a = numeric::integrate([&](double h) { return finite_or_zero(h * h * dens(h)); }, 0.0, 1.0) -
        numeric::integrate([&](double h) { return h * (z - h) * dens(h); }, 1.0, z);
  }
  double b = numeric::integrate([&](double h) { return finite_or_zero(h * mech.levy_tail(h)); }, 0.0, z);
  return a - b;
}

double atomic_drift(const FiniteAtomicLevy& lev, double z) {
  double a = 0.0, b = 0.0;
  for (const auto& at : lev.atoms) {
    if (at.h <= 1.0) a += at.m * z * at.h;
    if (at.h <= z) a -= at.m * at.h * (z - at.h);
    double c = std::min(z, at.h);
    b += at.m * c * c / 2.0;
  }
  return a - b;
}

// f(z-h) - f(z) + h f'(z)
double second_difference(const GeneratorInput& g, double h) {
  if (h < 1e-5 * std::max(1.0, g.z)) return 0.5 * h * h * g.fpp(g.z);
  return g.f(g.z - h) - g.f(g.z) + h * g.fp(g.z);
}

}  // namespace

double generator_kernel(const BranchingMechanism& mech, double z, double h) {
  require(h > 0.0 && h <= z, "kernel needs 0 < h <= z");
  return (z - h) * mech.levy_density(h) + mech.levy_tail(h);
}

double generator_drift(const BranchingMechanism& mech, double z) {
  require(z > 0.0, "drift needs z > 0");
  double base = -mech.lk_beta() * z + 0.5 * mech.sigma2();
  if (std::holds_alternative<NoLevy>(mech.levy())) return base;
  if (const auto* at = std::get_if<FiniteAtomicLevy>(&mech.levy())) return base + atomic_drift(*at, z);
  return base + continuous_drift(mech, z);
}

double generator_jump(const BranchingMechanism& mech, const GeneratorInput& g) {
  const double z = g.z;
  if (std::holds_alternative<NoLevy>(mech.levy())) return 0.0;
  if (const auto* lev = std::get_if<FiniteAtomicLevy>(&mech.levy())) {
    double sum = 0.0;
    std::vector<double> cuts{0.0};
    for (const auto& at : lev->atoms) {
      if (at.h <= z) {
        sum += at.m * (z - at.h) * second_difference(g, at.h);
        cuts.push_back(at.h);
      }
    }
    cuts.push_back(z);
    std::sort(cuts.begin(), cuts.end());
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      sum += numeric::integrate([&](double h) { return second_difference(g, h) * mech.levy_tail(h); }, cuts[i],
                                cuts[i + 1]);
    }
    return sum;
  }
  return numeric::integrate(
      [&](double h) { return finite_or_zero(second_difference(g, h) * generator_kernel(mech, z, h)); }, 0.0, z);
}

double generator_apply(const BranchingMechanism& mech, const GeneratorInput& g) {
  require(g.z > 0.0, "generator needs z > 0");
  require(bool(g.f) && bool(g.fp) && bool(g.fpp), "generator needs f, f' and f''");
  return 0.5 * mech.sigma2() * g.z * g.fpp(g.z) + generator_jump(mech, g) + generator_drift(mech, g.z) * g.fp(g.z);
}

double generator_drift_closed(const BranchingMechanism& mech, double z) {
  double base = 0.5 * mech.sigma2() - mech.beta() * z;
  if (std::holds_alternative<NoLevy>(mech.levy())) return base;
  if (mech.is_neveu()) return base + (1.0 - std::numbers::egamma) * z - z * std::log(z);
  if (const auto* s = std::get_if<StableLevy>(&mech.levy())) {
    require(s->alpha > 1.0, "closed drift is available for alpha in (1,2)");
    double a = s->alpha;
    return base + stable_density_constant(*s) * std::pow(z, 2.0 - a) / (a * (a - 1.0) * (2.0 - a));
  }
  throw DomainError("no closed-form drift for this family");
}

double generator_kernel_closed(const BranchingMechanism& mech, double z, double h) {
  if (mech.is_neveu()) return z / (h * h);
  if (const auto* s = std::get_if<StableLevy>(&mech.levy())) {
    double a = s->alpha;
    return stable_density_constant(*s) * ((z - h) * std::pow(h, -1.0 - a) + std::pow(h, -a) / a);
  }
  throw DomainError("no closed-form kernel for this family");
}

}  // namespace csbp
