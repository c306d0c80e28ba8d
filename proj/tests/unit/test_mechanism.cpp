#include <doctest.h>

#include <cmath>
#include <numbers>

#include "csbp/errors.hpp"
#include "csbp/mechanism.hpp"

using namespace csbp;

namespace {

// sigma2 = 1, beta = 0.5, atoms (0.5, 2), (2, 1)
BranchingMechanism atomic() { return BranchingMechanism(1.0, 0.5, FiniteAtomicLevy{{{0.5, 2.0}, {2.0, 1.0}}}); }

}  // namespace

TEST_SUITE("mechanism") {
  TEST_CASE("psi on the named families") {
    CHECK(psi(BranchingMechanism::feller(2.0, 0.0), 3.0) == doctest::Approx(9.0));
    CHECK(psi(BranchingMechanism::neveu(), 1.0) == doctest::Approx(0.0));
    CHECK(psi(BranchingMechanism::stable(1.5, 1.0), 4.0) == doctest::Approx(8.0));
    CHECK(psi(BranchingMechanism::stable(0.5, 1.0), 4.0) == doctest::Approx(-2.0));
  }

  TEST_CASE("psi prime agrees with a central difference") {
    for (const auto& m : {BranchingMechanism::feller(2.0, 1.0), BranchingMechanism::neveu(),
                          BranchingMechanism::stable(1.5, 1.0, 0.3, 0.5), atomic()}) {
      for (double q : {0.3, 1.0, 4.0}) {
        double h = 1e-5 * q;
        double fd = (psi(m, q + h) - psi(m, q - h)) / (2.0 * h);
        CHECK(psi_prime(m, q) == doctest::Approx(fd).epsilon(1e-6));
      }
    }
  }

  TEST_CASE("invalid parameters are rejected") {
    CHECK_THROWS_AS(BranchingMechanism::feller(-1.0, 0.0), DomainError);
    CHECK_THROWS_AS(BranchingMechanism::stable(2.5, 1.0), DomainError);
    CHECK_THROWS_AS(BranchingMechanism(0.0, 0.0, NoLevy{}), DomainError);
    CHECK_THROWS_AS(BranchingMechanism(0.0, 0.0, FiniteAtomicLevy{{{-1.0, 1.0}}}), DomainError);
  }

  TEST_CASE("criticality") {
    auto sup = classify(BranchingMechanism::feller(2.0, 1.0));
    CHECK(sup.kind == CriticalityKind::Supercritical);
    CHECK(sup.rho == doctest::Approx(1.0));
    auto sub = classify(BranchingMechanism::feller(2.0, -1.0));
    CHECK(sub.kind == CriticalityKind::Subcritical);
    CHECK(sub.rho == 0.0);
    auto nev = classify(BranchingMechanism::neveu());
    CHECK(nev.kind == CriticalityKind::Supercritical);
    CHECK(nev.rho == doctest::Approx(1.0));
    CHECK(classify(BranchingMechanism::stable(1.5, 1.0)).kind == CriticalityKind::Critical);
  }

  TEST_CASE("v closed forms") {
    CHECK(v(BranchingMechanism::feller(2.0, 0.0), 1.0, 1.0) == doctest::Approx(0.5));
    CHECK(v(BranchingMechanism::neveu(), std::log(2.0), 4.0) == doctest::Approx(2.0));
    for (const auto& m : {BranchingMechanism::feller(2.0, 1.0), BranchingMechanism::neveu(), atomic()})
      CHECK(v(m, 0.0, 3.7) == 3.7);
  }

  TEST_CASE("v against frozen ODE oracles") {
    // independent high-precision ODE solutions
    const auto m = atomic();
    CHECK(v(m, 1.0, 1.0) == doctest::Approx(1.4282925644618724).epsilon(1e-9));
    CHECK(v(m, 2.0, 0.3) == doctest::Approx(1.4252237937919878).epsilon(1e-9));
    CHECK(v(m, 0.5, 5.0) == doctest::Approx(2.4932653964449061).epsilon(1e-9));
    const auto st = BranchingMechanism::stable(1.5, 1.0);
    CHECK(v(st, 0.7, 2.0) == doctest::Approx(0.89487480843413351).epsilon(1e-10));
    CHECK(v_ode(st, 0.7, 2.0) == doctest::Approx(0.89487480843413351).epsilon(1e-8));
  }

  TEST_CASE("v satisfies the semigroup identity") {
    for (const auto& m : {BranchingMechanism::feller(1.0, -0.5), BranchingMechanism::neveu(),
                          BranchingMechanism::stable(1.5, 2.0, 0.4), atomic()}) {
      for (double lam : {0.1, 1.0, 10.0}) {
        double whole = v(m, 0.9, lam);
        double split = v(m, 0.4, v(m, 0.5, lam));
        CHECK(split == doctest::Approx(whole).epsilon(1e-8));
      }
    }
  }

  TEST_CASE("v is increasing in lambda") {
    const auto m = atomic();
    double prev = 0.0;
    for (double lam = 0.05; lam < 20.0; lam *= 1.7) {
      double x = v(m, 1.3, lam);
      CHECK(x > prev);
      prev = x;
    }
  }

  TEST_CASE("boundary values") {
    CHECK(v_inf(BranchingMechanism::feller(2.0, 0.0), 1.0) == doctest::Approx(1.0));
    CHECK(std::isinf(v_inf(BranchingMechanism::neveu(), 1.0)));
    const auto root = BranchingMechanism::stable(0.5, 1.0);
    CHECK(v_zero(root, 1.0) == doctest::Approx(0.25));
    CHECK(v_zero(root, 2.0) == doctest::Approx(1.0));
  }

  TEST_CASE("Grey conditions") {
    auto f = grey(BranchingMechanism::feller(2.0, 0.3));
    CHECK(f.extinction);
    CHECK_FALSE(f.explosion);
    auto n = grey(BranchingMechanism::neveu());
    CHECK_FALSE(n.extinction);
    CHECK_FALSE(n.explosion);
    CHECK(grey(BranchingMechanism::stable(1.5, 1.0)).transient);
    CHECK(grey(BranchingMechanism::stable(0.5, 1.0)).explosion);
  }

  TEST_CASE("quasi-stationary Laplace transform") {
    const auto m = BranchingMechanism::feller(2.0, -1.0);
    CHECK(qsd_laplace(m, 1.0) == doctest::Approx(0.5));
    CHECK(qsd_laplace(m, 2.0) == doctest::Approx(1.0 / 3.0));
    CHECK(qsd_laplace(m, 0.0) == doctest::Approx(1.0));
    CHECK(qsd_laplace(m, 1e12) == doctest::Approx(0.0).epsilon(1e-9));
  }

  TEST_CASE("coagulation rate measure") {
    CHECK(rate_measure(BranchingMechanism::neveu(), 2.7, 3) == doctest::Approx(1.0 / 6.0));
    CHECK(rate_measure(BranchingMechanism::feller(2.0, 0.0), 5.0, 2) == doctest::Approx(5.0));
    CHECK(rate_measure(BranchingMechanism::feller(2.0, 0.0), 5.0, 3) == 0.0);
    // c'_alpha = 1 when c = Gamma(1/2) / 0.75
    const auto st = BranchingMechanism::stable(1.5, std::tgamma(0.5) / 0.75);
    CHECK(stable_density_constant(std::get<StableLevy>(st.levy())) == doctest::Approx(1.0));
    CHECK(rate_measure(st, 1.0, 2) == doctest::Approx(0.88622692545275801).epsilon(1e-10));
    CHECK(rate_measure(st, 1.0, 3) == doctest::Approx(0.14770448757545967).epsilon(1e-10));
    CHECK(rate_measure(atomic(), 1.3, 2) == doctest::Approx(1.0127761808045983).epsilon(1e-12));
    CHECK(rate_measure(atomic(), 1.3, 3) == doctest::Approx(0.20412385302322056).epsilon(1e-12));
  }

  TEST_CASE("rate tails telescope") {
    CHECK(rate_tail(BranchingMechanism::neveu(), 1.0, 2) == doctest::Approx(1.0));
    CHECK(rate_tail(BranchingMechanism::neveu(), 1.0, 4) == doctest::Approx(1.0 / 3.0));
    CHECK(rate_tail(BranchingMechanism::feller(2.0, 1.0), 3.0, 3) == 0.0);
    const auto st = BranchingMechanism::stable(1.5, 1.0);
    double direct = 0.0;
    for (int k = 5; k < 20000; ++k) direct += rate_measure(st, 0.8, k);
    CHECK(rate_tail(st, 0.8, 5) == doctest::Approx(direct).epsilon(1e-3));
    CHECK(rate_tail(st, 0.8, 5) - rate_tail(st, 0.8, 6) == doctest::Approx(rate_measure(st, 0.8, 5)).epsilon(1e-9));
  }
}
