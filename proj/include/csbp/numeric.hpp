#pragma once

#include <functional>

namespace csbp::numeric {

using Fn = std::function<double(double)>;

// adaptive quadrature on a finite interval (endpoint singularities allowed)
double integrate(const Fn& f, double a, double b, double tol = 1e-13);
// adaptive quadrature on [a, inf)
double integrate_to_inf(const Fn& f, double a, double tol = 1e-13);
// [0, inf) split at 1
double integrate_half_line(const Fn& f, double tol = 1e-13);

// solve du/dt = rhs(u) from u0 over [0, t] with an embedded RK 4/5 pair
double solve_autonomous(const Fn& rhs, double u0, double t, double rtol = 1e-10, double atol = 1e-14);

// bisection for a sign change of f on [lo, hi]
double bisect(const Fn& f, double lo, double hi, double rel_tol = 1e-14);

}  // namespace csbp::numeric
