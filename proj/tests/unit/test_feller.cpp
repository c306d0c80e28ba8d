#include <doctest.h>

#include <cmath>
#include <vector>

#include "csbp/errors.hpp"
#include "csbp/feller.hpp"
#include "csbp/stats.hpp"

using namespace csbp;

TEST_SUITE("feller") {
  TEST_CASE("beta hat") {
    CHECK(beta_hat(FellerParams(2.0, 0.0), 1.0) == doctest::Approx(1.0));
    CHECK(beta_hat(FellerParams(2.0, 1.0), 60.0) == doctest::Approx(0.0).epsilon(1e-20));
    CHECK(beta_hat(FellerParams(2.0, -1.0), kInf) == doctest::Approx(1.0));
    CHECK(beta_hat(FellerParams(2.0, -1.0), 40.0) == doctest::Approx(1.0));
    // beta_hat_t = v_t(inf) e^{-beta t}
    FellerParams p(1.3, 0.7);
    CHECK(beta_hat(p, 0.9) == doctest::Approx(feller_v_inf(p, 0.9) * std::exp(-0.7 * 0.9)));
    CHECK(feller_v_inf(p, 0.9) == doctest::Approx(v_inf(p.mechanism(), 0.9)));
  }

  TEST_CASE("beta hat inverse") {
    FellerParams p(2.0, -0.5);
    for (double t : {0.1, 1.0, 5.0}) CHECK(beta_hat_inverse(p, beta_hat(p, t)) == doctest::Approx(t));
    CHECK(std::isinf(beta_hat_inverse(p, 0.4)));
    CHECK(beta_hat_inverse(FellerParams(2.0, 0.0), 0.25) == doctest::Approx(4.0));
  }

  TEST_CASE("MRCA law") {
    FellerParams p(2.0, 0.0);
    CHECK(mrca_cdf(p, 1.0, 0.0, 1.0) == doctest::Approx(std::exp(-1.0)));
    CHECK(mrca_cdf(p, 0.3, 2.0, 2.0) == 1.0);
    // mass of T = inf: 1 - e^{2 beta d / sigma2}
    FellerParams sub(2.0, -1.0);
    CHECK(mrca_no_ancestor_prob(sub, 1.0) == doctest::Approx(1.0 - std::exp(-1.0)));
    CHECK(mrca_no_ancestor_prob(sub, 1.0) == doctest::Approx(1.0 - mrca_cdf(sub, 1e9, 0.0, 1.0)));
    CHECK(mrca_no_ancestor_prob(sub, 0.0) == 0.0);
    CHECK(mrca_no_ancestor_prob(FellerParams(2.0, 0.5), 3.0) == 0.0);
  }

  TEST_CASE("intensity integrates to beta hat") {
    FellerParams p(1.5, 0.8);
    const double t0 = 0.4, t1 = 3.0;
    double s = 0.0;
    const int n = 20000;
    for (int i = 0; i < n; ++i) {
      double t = t0 + (t1 - t0) * (i + 0.5) / n;
      s += cpp_intensity(p, t) * (t1 - t0) / n;
    }
    CHECK(s == doctest::Approx(beta_hat(p, t0) - beta_hat(p, t1)).epsilon(1e-6));
    CHECK(cpp_intensity(FellerParams(2.0, 0.0), 2.0) == doctest::Approx(0.25));
  }

  TEST_CASE("sampled MRCA times") {
    Rng rng(61);
    FellerParams p(2.0, 0.4);
    int hits = 0;
    const int reps = 40000;
    for (int i = 0; i < reps; ++i) hits += sample_cpp(p, 1.0, rng, 0.25).mrca(0.2, 0.8) <= 0.5 ? 1 : 0;
    double est = double(hits) / reps;
    double target = mrca_cdf(p, 0.5, 0.2, 0.8);
    CHECK(std::abs(est - target) < 3.0 * std::sqrt(target * (1.0 - target) / reps));
  }

  TEST_CASE("depths of the point process") {
    Rng rng(62);
    FellerParams crit(2.0, 0.0);
    auto cpp = sample_cpp(crit, 1000.0, rng, 0.5);
    // 2 / (sigma2 t0) atoms per unit length
    CHECK(std::abs(double(cpp.atoms.size()) - 2000.0) < 4.0 * std::sqrt(2000.0));
    for (const auto& a : cpp.atoms) CHECK(std::isfinite(a.depth));
    auto sup = sample_cpp(FellerParams(2.0, 1.0), 200.0, rng, 0.1);
    for (const auto& a : sup.atoms) CHECK(std::isfinite(a.depth));
  }

  TEST_CASE("prolific individuals") {
    Rng rng(63);
    FellerParams p(2.0, -1.0);
    double total = 0.0;
    const int reps = 4000;
    std::vector<double> firsts, infs;
    for (int i = 0; i < reps; ++i) {
      auto xs = prolific_points(p, 10.0, rng);
      total += double(xs.size());
      if (!xs.empty()) firsts.push_back(xs.front());
      auto cpp = sample_cpp(p, 10.0, rng, 0.5);
      for (const auto& a : cpp.atoms)
        if (std::isinf(a.depth)) {
          infs.push_back(a.x);
          break;
        }
    }
    CHECK(total / reps == doctest::Approx(10.0).epsilon(0.02));
    CHECK(stats::ks_two_sample(firsts, infs).pass);
    CHECK_THROWS_AS(prolific_points(FellerParams(2.0, 0.0), 1.0, rng), DomainError);
  }

  TEST_CASE("binary merging") {
    Rng rng(64);
    FellerParams p(2.0, 0.3);
    for (int i = 0; i < 20000; ++i) {
      auto r = binary_merging_check(p, {0.0, 0.4, 1.1}, rng);
      REQUIRE(r.times.size() == 2);
      CHECK(r.distinct);
      CHECK(r.times[0] != r.times[1]);
    }
    CHECK_THROWS_AS(binary_merging_check(p, {0.0, 0.0, 1.0}, rng), DomainError);
  }

  TEST_CASE("interval coag") {
    IntervalPartition c{{1.0, 2.5, 3.0, 4.0}};
    CHECK(coag(c, ConsecutivePartition({2, 2})) == IntervalPartition{{2.5, 4.0}});
    CHECK(coag(c, ConsecutivePartition::singletons(4)) == c);
    CHECK(c.lengths() == std::vector<double>{1.0, 1.5, 0.5, 1.0});
  }

  TEST_CASE("interval genealogy") {
    Rng rng(65);
    FellerParams p(2.0, -0.5);
    std::vector<double> lengths;
    for (int rep = 0; rep < 200; ++rep) {
      auto g = interval_genealogy(p, {0.5, 1.0, 2.0}, 50.0, rng);
      REQUIRE(g.levels.size() == 3);
      for (std::size_t i = 0; i + 1 < g.levels.size(); ++i) CHECK(coag(g.levels[i], g.steps[i]) == g.levels[i + 1]);
      auto l = g.levels[0].lengths();
      lengths.insert(lengths.end(), l.begin(), l.end() - 1);
    }
    const double rate = beta_hat(p, 0.5);
    CHECK(stats::ks_test(lengths, [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }).pass);
  }

  TEST_CASE("coalescent-driven genealogy") {
    Rng rng(66);
    FellerParams p(2.0, -1.0);
    std::vector<double> lengths;
    for (int rep = 0; rep < 300; ++rep) {
      auto g = interval_genealogy_coalescent(p, {0.5, 1.5, 4.0}, 100.0, rng);
      for (std::size_t i = 0; i + 1 < g.levels.size(); ++i) CHECK(coag(g.levels[i], g.steps[i]) == g.levels[i + 1]);
      auto l = g.levels[1].lengths();
      lengths.insert(lengths.end(), l.begin(), l.end() - 1);
    }
    const double rate = beta_hat(p, 1.5);
    CHECK(stats::ks_test(lengths, [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); }).pass);
  }

  TEST_CASE("invalid input") {
    CHECK_THROWS_AS(FellerParams(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(beta_hat(FellerParams(2.0, 0.0), 0.0), DomainError);
  }
}
