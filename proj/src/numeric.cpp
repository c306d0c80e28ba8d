#include "csbp/numeric.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <limits>

#include "csbp/errors.hpp"

namespace csbp::numeric {

namespace bq = boost::math::quadrature;

double integrate(const Fn& f, double a, double b, double tol) {
  if (b <= a) return 0.0;
  thread_local bq::tanh_sinh<double> ts(15);
  double err = 0.0;
  double val = ts.integrate(f, a, b, tol, &err);
  if (!std::isfinite(val)) throw NumericFailure("quadrature produced a non-finite value");
  return val;
}

double integrate_to_inf(const Fn& f, double a, double tol) {
  thread_local bq::exp_sinh<double> es(9);
  double err = 0.0;
  auto g = [&](double x) { return f(x + a); };
  double val = es.integrate(g, 0.0, std::numeric_limits<double>::infinity(), tol, &err);
  if (!std::isfinite(val)) throw NumericFailure("quadrature produced a non-finite value");
  return val;
}

double integrate_half_line(const Fn& f, double tol) {
  return integrate(f, 0.0, 1.0, tol) + integrate_to_inf(f, 1.0, tol);
}

double solve_autonomous(const Fn& rhs, double u0, double t, double rtol, double atol) {
  namespace ode = boost::numeric::odeint;
  if (t == 0.0) return u0;
  double u = u0;
  auto sys = [&](const double& x, double& dxdt, double) {
    dxdt = rhs(x);
    if (!std::isfinite(dxdt)) throw NumericFailure("ODE right-hand side is not finite");
  };
  auto stepper = ode::make_controlled(atol, rtol, ode::runge_kutta_dopri5<double>());
  double dt0 = std::min(t, 1e-6);
  ode::integrate_adaptive(stepper, sys, u, 0.0, t, dt0);
  if (!std::isfinite(u)) throw NumericFailure("ODE solution left the domain");
  return u;
}

double bisect(const Fn& f, double lo, double hi, double rel_tol) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) throw NumericFailure("bisection bracket has no sign change");
  for (int it = 0; it < 400 && hi - lo > rel_tol * std::abs(hi); ++it) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0) == (flo > 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace csbp::numeric
