#include "csbp/mechanism.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>

#include "csbp/errors.hpp"
#include "csbp/numeric.hpp"

namespace csbp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// e^{-x} - 1 + x (compensated) or e^{-x} - 1
double comp(double x, bool compensated) {
  if (!compensated) return std::expm1(-x);
  if (x < 1e-3) {
    return x * x * (0.5 - x * (1.0 / 6.0 - x * (1.0 / 24.0 - x / 120.0)));
  }
  return std::expm1(-x) + x;
}

// quadrature nodes can sit so close to 0 that the density overflows; their weight is negligible
double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

double tabulated_psi(const TabulatedLevy& tab, double q) {
  if (q == 0.0) return 0.0;
  return numeric::integrate_half_line([&](double x) { return finite_or_zero(comp(q * x, x <= 1.0) * tab.density(x)); });
}

double tabulated_psi_prime(const TabulatedLevy& tab, double q) {
  auto f = [&](double x) {
    double inside = x <= 1.0 ? 1.0 : 0.0;
    double val = x <= 1.0 ? -std::expm1(-q * x) : inside - std::exp(-q * x);
    return finite_or_zero(x * val * tab.density(x));
  };
  return numeric::integrate_half_line(f);
}

// local power-law exponent of |Psi| around u
double local_exponent(const BranchingMechanism& mech, double u) {
  double a = std::abs(psi(mech, u));
  double b = std::abs(psi(mech, 2.0 * u));
  if (a == 0.0 || b == 0.0) return 0.0;
  return std::log2(b / a);
}

// w = v^{1-alpha} evolves linearly for sigma2 = 0 stable mechanisms
double stable_w(const StableLevy& s, double beta, double t, double w0) {
  double sgn = s.alpha > 1.0 ? 1.0 : -1.0;
  double g = (1.0 - s.alpha) * beta;
  double growth = std::exp(g * t);
  double ratio = beta == 0.0 ? (1.0 - s.alpha) * t : std::expm1(g * t) / beta;
  return w0 * growth - sgn * s.c * ratio;
}

std::optional<double> v_closed(const BranchingMechanism& mech, double t, double lam) {
  const double s2 = mech.sigma2();
  const double b = mech.beta();
  if (std::holds_alternative<NoLevy>(mech.levy())) {
    if (s2 == 0.0) return lam * std::exp(b * t);
    if (b == 0.0) return lam / (1.0 + 0.5 * s2 * lam * t);
    if (b > 0.0) return lam * b / (b * std::exp(-b * t) - 0.5 * lam * s2 * std::expm1(-b * t));
    return lam * b * std::exp(b * t) / (b + 0.5 * lam * s2 * std::expm1(b * t));
  }
  if (s2 != 0.0) return std::nullopt;
  if (mech.is_neveu()) {
    return std::exp(b + (std::log(lam) - b) * std::exp(-t));
  }
  if (const auto* s = std::get_if<StableLevy>(&mech.levy())) {
    double w = stable_w(*s, b, t, std::pow(lam, 1.0 - s->alpha));
    return std::pow(w, 1.0 / (1.0 - s->alpha));
  }
  return std::nullopt;
}

}  // namespace

double stable_density_constant(const StableLevy& s) {
  if (s.alpha > 1.0) return s.alpha * (s.alpha - 1.0) * s.c / std::tgamma(2.0 - s.alpha);
  return s.alpha * s.c / std::tgamma(1.0 - s.alpha);
}

BranchingMechanism::BranchingMechanism(double sigma2, double beta, LevyFamily levy)
    : sigma2_(sigma2), beta_(beta), levy_(std::move(levy)) {
  require(std::isfinite(sigma2) && sigma2 >= 0.0, "sigma2 must be finite and nonnegative");
  require(std::isfinite(beta), "beta must be finite");
  std::visit(overloaded{
                 [](const NoLevy&) {},
                 [](const StableLevy& s) {
                   require(s.alpha > 0.0 && s.alpha < 2.0 && s.alpha != 1.0, "stable index must lie in (0,2) minus {1}");
                   require(s.c > 0.0 && std::isfinite(s.c), "stable constant must be positive");
                 },
                 [](const NeveuLevy&) {},
                 [](const FiniteAtomicLevy& a) {
                   require(!a.atoms.empty(), "finite atomic measure needs at least one atom");
                   std::vector<double> sizes;
                   for (const auto& at : a.atoms) {
                     require(at.h > 0.0 && at.m > 0.0, "atom sizes and masses must be positive");
                     sizes.push_back(at.h);
                   }
                   std::sort(sizes.begin(), sizes.end());
                   require(std::adjacent_find(sizes.begin(), sizes.end()) == sizes.end(), "atom sizes must be distinct");
                 },
                 [](const TabulatedLevy& tab) {
                   require(bool(tab.density) && bool(tab.tail), "tabulated density needs density and tail callables");
                   double mass = numeric::integrate_half_line(
                       [&](double x) { return finite_or_zero(std::min(1.0, x * x) * tab.density(x)); }, 1e-10);
                   require(std::isfinite(mass), "tabulated density violates int (1 ^ x^2) pi(dx) < inf");
                 },
             },
             levy_);
  require(sigma2_ > 0.0 || beta_ != 0.0 || !std::holds_alternative<NoLevy>(levy_), "degenerate mechanism");
}

bool BranchingMechanism::has_density() const {
  return std::holds_alternative<StableLevy>(levy_) || std::holds_alternative<NeveuLevy>(levy_) ||
         std::holds_alternative<TabulatedLevy>(levy_);
}

double BranchingMechanism::levy_density(double h) const {
  if (const auto* s = std::get_if<StableLevy>(&levy_)) return stable_density_constant(*s) * std::pow(h, -1.0 - s->alpha);
  if (is_neveu()) return 1.0 / (h * h);
  if (const auto* tab = std::get_if<TabulatedLevy>(&levy_)) return tab->density(h);
  if (std::holds_alternative<NoLevy>(levy_)) return 0.0;
  throw DomainError("atomic Levy measure has no density");
}

double BranchingMechanism::levy_tail(double h) const {
  return std::visit(overloaded{
                        [](const NoLevy&) { return 0.0; },
                        [&](const StableLevy& s) { return stable_density_constant(s) * std::pow(h, -s.alpha) / s.alpha; },
                        [&](const NeveuLevy&) { return 1.0 / h; },
                        [&](const FiniteAtomicLevy& a) {
                          double sum = 0.0;
                          for (const auto& at : a.atoms)
                            if (at.h > h) sum += at.m;
                          return sum;
                        },
                        [&](const TabulatedLevy& tab) { return tab.tail(h); },
                    },
                    levy_);
}

double BranchingMechanism::lk_beta() const {
  if (const auto* s = std::get_if<StableLevy>(&levy_)) {
    double cp = stable_density_constant(*s);
    return s->alpha > 1.0 ? beta_ - cp / (s->alpha - 1.0) : beta_ + cp / (1.0 - s->alpha);
  }
  if (is_neveu()) return beta_ + std::numbers::egamma - 1.0;
  return beta_;
}

std::string BranchingMechanism::describe() const {
  std::ostringstream os;
  os << "sigma2=" << sigma2_ << " beta=" << beta_ << " levy=";
  std::visit(overloaded{
                 [&](const NoLevy&) { os << "none"; },
                 [&](const StableLevy& s) { os << "stable(alpha=" << s.alpha << ",c=" << s.c << ")"; },
                 [&](const NeveuLevy&) { os << "neveu"; },
                 [&](const FiniteAtomicLevy& a) { os << "finite_atomic(" << a.atoms.size() << " atoms)"; },
                 [&](const TabulatedLevy&) { os << "tabulated"; },
             },
             levy_);
  return os.str();
}

double psi(const BranchingMechanism& mech, double q) {
  require(q >= 0.0, "psi needs q >= 0");
  if (std::isinf(q)) throw DomainError("psi needs finite q");
  double base = 0.5 * mech.sigma2() * q * q - mech.beta() * q;
  double jump = std::visit(overloaded{
                               [](const NoLevy&) { return 0.0; },
                               [&](const StableLevy& s) {
                                 double p = s.c * std::pow(q, s.alpha);
                                 return s.alpha > 1.0 ? p : -p;
                               },
                               [&](const NeveuLevy&) { return q == 0.0 ? 0.0 : q * std::log(q); },
                               [&](const FiniteAtomicLevy& a) {
                                 double sum = 0.0;
                                 for (const auto& at : a.atoms) sum += at.m * comp(q * at.h, at.h <= 1.0);
                                 return sum;
                               },
                               [&](const TabulatedLevy& tab) { return tabulated_psi(tab, q); },
                           },
                           mech.levy());
  return base + jump;
}

double psi_prime(const BranchingMechanism& mech, double q) {
  require(q >= 0.0, "psi_prime needs q >= 0");
  double base = mech.sigma2() * q - mech.beta();
  double jump = std::visit(overloaded{
                               [](const NoLevy&) { return 0.0; },
                               [&](const StableLevy& s) {
                                 if (q == 0.0) return s.alpha > 1.0 ? 0.0 : -kInf;
                                 double p = s.c * s.alpha * std::pow(q, s.alpha - 1.0);
                                 return s.alpha > 1.0 ? p : -p;
                               },
                               [&](const NeveuLevy&) { return q == 0.0 ? -kInf : std::log(q) + 1.0; },
                               [&](const FiniteAtomicLevy& a) {
                                 double sum = 0.0;
                                 for (const auto& at : a.atoms)
                                   sum += at.m * at.h * ((at.h <= 1.0 ? 1.0 : 0.0) - std::exp(-q * at.h));
                                 return sum;
                               },
                               [&](const TabulatedLevy& tab) { return tabulated_psi_prime(tab, q); },
                           },
                           mech.levy());
  return base + jump;
}

double psi_prime_zero(const BranchingMechanism& mech) {
  if (const auto* tab = std::get_if<TabulatedLevy>(&mech.levy())) {
    try {
      double tail_mean = numeric::integrate_to_inf([&](double x) { return x * tab->density(x); }, 1.0, 1e-10);
      if (std::isfinite(tail_mean)) return -mech.beta() - tail_mean;
    } catch (const NumericFailure&) {
    }
    const double h = 1e-8;
    return psi(mech, h) / h;
  }
  return psi_prime(mech, 0.0);
}

Criticality classify(const BranchingMechanism& mech) {
  double d = psi_prime_zero(mech);
  if (d > 0.0) return {CriticalityKind::Subcritical, 0.0};
  if (d == 0.0) return {CriticalityKind::Critical, 0.0};
  if (std::holds_alternative<NoLevy>(mech.levy()) && mech.sigma2() > 0.0) {
    return {CriticalityKind::Supercritical, 2.0 * mech.beta() / mech.sigma2()};
  }
  auto f = [&](double q) { return psi(mech, q); };
  double lo = 1e-12;
  while (f(lo) >= 0.0 && lo > 1e-300) lo *= 1e-3;
  double hi = 1.0;
  while (f(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e18) return {CriticalityKind::Supercritical, kInf};
  }
  if (hi > 1.0) lo = std::max(lo, hi / 2.0);
  return {CriticalityKind::Supercritical, numeric::bisect(f, lo, hi)};
}

GreyReport grey(const BranchingMechanism& mech) {
  const double s2 = mech.sigma2();
  GreyReport r{false, false, false};
  Criticality c = classify(mech);
  bool critical_transient = false;
  std::visit(overloaded{
                 [&](const NoLevy&) { r.extinction = s2 > 0.0; },
                 [&](const StableLevy& s) {
                   if (s.alpha > 1.0) {
                     r.extinction = true;
                     critical_transient = true;
                   } else {
                     r.extinction = s2 > 0.0;
                     r.explosion = true;
                   }
                 },
                 [&](const NeveuLevy&) { r.extinction = s2 > 0.0; },
                 [&](const FiniteAtomicLevy&) { r.extinction = s2 > 0.0; },
                 [&](const TabulatedLevy&) {
                   const double big = 1e10;
                   const double small = 1e-10;
                   r.extinction = s2 > 0.0 || (psi(mech, big) > 0.0 && local_exponent(mech, big) > 1.1);
                   double p0 = local_exponent(mech, small);
                   r.explosion = psi(mech, small) < 0.0 && p0 < 0.9;
                   critical_transient = p0 < 1.9;
                 },
             },
             mech.levy());
  if (c.kind == CriticalityKind::Subcritical) r.transient = true;
  if (c.kind == CriticalityKind::Critical) r.transient = critical_transient;
  return r;
}

double v_ode(const BranchingMechanism& mech, double t, double lam) {
  require(t >= 0.0, "v needs t >= 0");
  require(lam > 0.0 && std::isfinite(lam), "v needs a finite lambda > 0");
  // integrate u = log v, du/dt = -Psi(e^u)/e^u
  auto rhs = [&](double u) {
    double x = std::exp(u);
    if (x == 0.0 || std::isinf(x)) throw NumericFailure("cumulant left (0, inf)");
    return -psi(mech, x) / x;
  };
  return std::exp(numeric::solve_autonomous(rhs, std::log(lam), t));
}

double v(const BranchingMechanism& mech, double t, double lam) {
  require(t >= 0.0, "v needs t >= 0");
  require(lam > 0.0, "v needs lambda > 0");
  if (std::isinf(lam)) return v_inf(mech, t);
  if (t == 0.0) return lam;
  if (auto c = v_closed(mech, t, lam)) return *c;
  return v_ode(mech, t, lam);
}

double v_inf(const BranchingMechanism& mech, double t) {
  require(t > 0.0, "v_inf needs t > 0");
  const double s2 = mech.sigma2();
  const double b = mech.beta();
  if (std::holds_alternative<NoLevy>(mech.levy())) {
    if (s2 == 0.0) return kInf;
    if (b == 0.0) return 2.0 / (s2 * t);
    return 2.0 * b / (s2 * -std::expm1(-b * t));
  }
  if (s2 == 0.0) {
    if (mech.is_neveu()) return kInf;
    if (const auto* s = std::get_if<StableLevy>(&mech.levy())) {
      if (s->alpha < 1.0) return kInf;
      return std::pow(stable_w(*s, b, t, 0.0), 1.0 / (1.0 - s->alpha));
    }
  }
  if (!grey(mech).extinction) return kInf;
  double prev = v(mech, t, 2.0);
  for (int j = 2; j <= 60; ++j) {
    double cur = v(mech, t, std::ldexp(1.0, j));
    if (std::abs(cur - prev) < 1e-9 * cur) return cur;
    prev = cur;
  }
  throw NumericFailure("v_inf probing did not converge by lambda = 2^60");
}

double v_zero(const BranchingMechanism& mech, double t) {
  require(t > 0.0, "v_zero needs t > 0");
  if (mech.sigma2() == 0.0) {
    if (const auto* s = std::get_if<StableLevy>(&mech.levy())) {
      if (s->alpha > 1.0) return 0.0;
      return std::pow(stable_w(*s, mech.beta(), t, 0.0), 1.0 / (1.0 - s->alpha));
    }
  }
  if (std::holds_alternative<NoLevy>(mech.levy()) || mech.is_neveu()) return 0.0;
  if (!grey(mech).explosion) return 0.0;
  double prev = v(mech, t, 0.5);
  for (int j = 2; j <= 60; ++j) {
    double cur = v(mech, t, std::ldexp(1.0, -j));
    if (std::abs(cur - prev) < 1e-9 * cur) return cur;
    prev = cur;
  }
  throw NumericFailure("v_zero probing did not converge by lambda = 2^-60");
}

double qsd_laplace(const BranchingMechanism& mech, double u) {
  require(u >= 0.0, "qsd_laplace needs u >= 0");
  double d = psi_prime_zero(mech);
  require(d > 0.0, "qsd_laplace needs a subcritical mechanism");
  require(grey(mech).extinction, "qsd_laplace needs the extinction condition");
  if (u == 0.0) return 1.0;
  if (std::holds_alternative<NoLevy>(mech.levy())) {
    double a = 2.0 * d / mech.sigma2();
    return a / (u + a);
  }
  double integral = numeric::integrate_to_inf([&](double x) { return 1.0 / psi(mech, x); }, u, 1e-12);
  return -std::expm1(-d * integral);
}

double rate_measure(const BranchingMechanism& mech, double theta, int k) {
  require(theta > 0.0 && std::isfinite(theta), "rate_measure needs a finite theta > 0");
  require(k >= 2, "rate_measure needs k >= 2");
  double diffusion = k == 2 ? 0.5 * mech.sigma2() * theta : 0.0;
  const double lk = std::lgamma(k + 1.0);
  double jump = std::visit(
      overloaded{
          [](const NoLevy&) { return 0.0; },
          [&](const StableLevy& s) {
            return stable_density_constant(s) * std::exp(std::lgamma(k - s.alpha) - lk) * std::pow(theta, s.alpha - 1.0);
          },
          [&](const NeveuLevy&) { return 1.0 / (double(k) * (k - 1.0)); },
          [&](const FiniteAtomicLevy& a) {
            double sum = 0.0;
            for (const auto& at : a.atoms) {
              double x = theta * at.h;
              sum += at.m / theta * std::exp(k * std::log(x) - x - lk);
            }
            return sum;
          },
          [&](const TabulatedLevy& tab) {
            auto f = [&](double u) {
              return u == 0.0 ? 0.0 : finite_or_zero(std::exp(k * std::log(u) - u - lk) * tab.density(u / theta));
            };
            double kk = double(k);
            return (numeric::integrate(f, 0.0, kk, 1e-12) + numeric::integrate_to_inf(f, kk, 1e-12)) / (theta * theta);
          },
      },
      mech.levy());
  return diffusion + jump;
}

double rate_tail(const BranchingMechanism& mech, double theta, int k) {
  require(theta > 0.0 && std::isfinite(theta), "rate_tail needs a finite theta > 0");
  require(k >= 2, "rate_tail needs k >= 2");
  double diffusion = k <= 2 ? 0.5 * mech.sigma2() * theta : 0.0;
  double jump = std::visit(
      overloaded{
          [](const NoLevy&) { return 0.0; },
          [&](const StableLevy& s) {
            return stable_density_constant(s) * std::pow(theta, s.alpha - 1.0) *
                   std::exp(std::lgamma(k - s.alpha) - std::lgamma(double(k))) / s.alpha;
          },
          [&](const NeveuLevy&) { return 1.0 / (k - 1.0); },
          [&](const FiniteAtomicLevy& a) {
            double sum = 0.0;
            for (const auto& at : a.atoms) sum += at.m / theta * boost::math::gamma_p(double(k), theta * at.h);
            return sum;
          },
          [&](const TabulatedLevy& tab) {
            auto f = [&](double u) {
              return u == 0.0 ? 0.0 : finite_or_zero(boost::math::gamma_p(double(k), u) * tab.density(u / theta));
            };
            double kk = double(k);
            return (numeric::integrate(f, 0.0, kk, 1e-12) + numeric::integrate_to_inf(f, kk, 1e-12)) / (theta * theta);
          },
      },
      mech.levy());
  return diffusion + jump;
}

}  // namespace csbp
