#include <doctest.h>

#include <cmath>
#include <vector>

#include "csbp/errors.hpp"
#include "csbp/feller.hpp"
#include "csbp/poissonbox.hpp"
#include "csbp/stats.hpp"

using namespace csbp;

namespace {

std::vector<double> histogram(const std::vector<std::uint64_t>& sizes, std::size_t cells) {
  std::vector<double> h(cells, 0.0);
  for (auto s : sizes) h[std::min<std::size_t>(s == 0 ? cells : s, cells) - 1] += 1.0;
  return h;
}

std::vector<double> cell_probs(const BlockSizeLaw& law, std::size_t cells) {
  std::vector<double> p(cells, 0.0);
  double acc = 0.0;
  for (std::size_t k = 1; k < cells; ++k) {
    p[k - 1] = law.pmf[k];
    acc += p[k - 1];
  }
  p[cells - 1] = 1.0 - acc;
  return p;
}

}  // namespace

TEST_SUITE("poissonbox") {
  TEST_CASE("Neveu-type exponent") {
    auto law = block_size_law(LaplaceExponent::stable_type(0.0, 0.0, 1.0, 0.5), 1.0, 200);
    CHECK(law.pmf[1] == doctest::Approx(0.5));
    // coefficient of z^2 in 1 - (1 - z)^{1/2}
    CHECK(law.pmf[2] == doctest::Approx(0.125));
    CHECK(law.pmf[3] == doctest::Approx(0.0625));
    CHECK(law.p_inf == 0.0);
  }

  TEST_CASE("generating function of the Neveu box") {
    const double t = 0.7, a = std::exp(-t);
    auto law = block_size_law(LaplaceExponent::neveu_at(t), 1.0, 4000);
    for (double z : {0.2, 0.5, 0.8})
      CHECK(law.generating_function(z) == doctest::Approx(1.0 - std::pow(1.0 - z, a)).epsilon(1e-9));
  }

  TEST_CASE("drift and killing") {
    auto drift = block_size_law(LaplaceExponent::drift_only(2.0), 1.3, 10);
    CHECK(drift.pmf[1] == doctest::Approx(1.0));
    auto killed = block_size_law(LaplaceExponent::killed(0.5, 1.0), 2.0, 10);
    CHECK(killed.p_inf == doctest::Approx(0.5 / 2.5));
    CHECK(killed.pmf[1] == doctest::Approx(2.0 / 2.5));
  }

  TEST_CASE("closed pmfs agree with quadrature of the density") {
    // Feller-at-t: compound Poisson with Exp(beta_hat) jumps at rate v_t(inf)
    const double s2 = 2.0, b = 0.4, t = 0.9, lam = 1.7;
    FellerParams p(s2, b);
    const double r = feller_v_inf(p, t), bh = beta_hat(p, t);
    auto closed = LaplaceExponent::feller_at(s2, b, t);
    auto quad = LaplaceExponent::explicit_exponent(closed.phi, 0.0, 0.0,
                                                   [=](double x) { return r * bh * std::exp(-bh * x); });
    auto a = block_size_law(closed, lam, 40);
    auto q = block_size_law(quad, lam, 40);
    for (int k = 1; k <= 40; ++k) CHECK(q.pmf[k] == doctest::Approx(a.pmf[k]).epsilon(1e-7));

    // tempered stable density c x^{-1-ia} e^{-x} plus drift d
    const double c = 0.5, ia = 0.6, d = 0.3, mu = 0.8;
    auto tphi = [=](double m) { return d * m + c * std::tgamma(1.0 - ia) / ia * (std::pow(1.0 + m, ia) - 1.0); };
    auto tq = LaplaceExponent::explicit_exponent(tphi, d, 0.0,
                                                 [=](double x) { return c * std::pow(x, -1.0 - ia) * std::exp(-x); });
    auto tl = block_size_law(tq, mu, 200);
    for (int k = 1; k <= 30; ++k) {
      double jump = c * std::exp(k * std::log(mu) - std::lgamma(k + 1.0) + std::lgamma(k - ia) - (k - ia) * std::log1p(mu));
      double expect = ((k == 1 ? d * mu : 0.0) + jump) / tphi(mu);
      CHECK(tl.pmf[k] == doctest::Approx(expect).epsilon(1e-7));
    }
  }

  TEST_CASE("masses add up") {
    for (const auto& e : {LaplaceExponent::feller_at(2.0, 1.0, 1.0), LaplaceExponent::neveu_at(0.3),
                          LaplaceExponent::root_explosive_at(0.5), LaplaceExponent::stable_type(0.2, 0.1, 1.0, 0.4)}) {
      auto law = block_size_law(e, 1.0, 300);
      double sum = law.p_inf + law.tail;
      for (std::size_t k = 1; k < law.pmf.size(); ++k) sum += law.pmf[k];
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("direct sampling matches the law") {
    Rng rng(41);
    auto law = block_size_law(LaplaceExponent::neveu_at(std::log(2.0)), 1.0, 2000);
    std::vector<std::uint64_t> sizes;
    for (int i = 0; i < 100000; ++i) sizes.push_back(sample_block_size(law, rng));
    CHECK(stats::chi_square(histogram(sizes, 40), cell_probs(law, 40)).pass);
    auto box = sample_box_direct(law, 1000, rng);
    CHECK(box.finite_ground() == 1000);
    CHECK(sample_box_direct(block_size_law(LaplaceExponent::drift_only(1.0), 1.0, 4), 7, rng) ==
          ConsecutivePartition::singletons(7));
  }

  TEST_CASE("killed box has a geometric number of blocks") {
    Rng rng(42);
    auto law = block_size_law(LaplaceExponent::killed(0.5, 1.0), 1.5, 10);
    std::vector<double> counts(60, 0.0), probs(60, 0.0);
    const double p = 0.5 / 2.0;
    double acc = 0.0;
    for (int i = 0; i < 50000; ++i) {
      auto box = sample_box_blocks(law, 1000000, rng);
      CHECK(box.infinite_tail());
      counts[std::min<std::size_t>(box.block_count(), 60) - 1] += 1.0;
    }
    for (int k = 1; k < 60; ++k) {
      probs[k - 1] = p * std::pow(1.0 - p, k - 1);
      acc += probs[k - 1];
    }
    probs[59] = 1.0 - acc;
    CHECK(stats::chi_square(counts, probs).pass);
  }

  TEST_CASE("pullback through a linear path") {
    Rng rng(43);
    auto box = sample_box_pullback(SubordinatorSpec::drift_only(2.0), 1.0, 20000, rng);
    CHECK(box.partition == ConsecutivePartition::singletons(20000));
    std::vector<double> gaps;
    for (std::size_t i = 0; i < box.arrivals.size(); ++i)
      gaps.push_back(box.arrivals[i] - (i == 0 ? 0.0 : box.arrivals[i - 1]));
    CHECK(stats::ks_test(gaps, [](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-2.0 * x); }).pass);
  }

  TEST_CASE("pullback by the literal definition") {
    SubordinatorPath path(0.0, {{1.0, 2.0}, {3.0, 1.0}}, 10.0);
    auto box = pullback(path, {0.5, 1.2, 1.9, 2.5});
    CHECK(box.partition == ConsecutivePartition({3, 1}));
    CHECK(box.arrivals.size() == 2);
    CHECK(box.arrivals[0] == doctest::Approx(1.0));
    CHECK(box.arrivals[1] == doctest::Approx(3.0));
  }

  TEST_CASE("pullback block law for the Feller-at-t exponent") {
    Rng rng(44);
    auto law = block_size_law(LaplaceExponent::feller_at(2.0, 0.5, 1.0), 1.0, 200);
    auto box = sample_box_pullback(SubordinatorSpec::feller_at(2.0, 0.5, 1.0), 1.0, 100000, rng);
    CHECK(stats::chi_square(histogram(box.partition.sizes(), 30), cell_probs(law, 30)).pass);
  }

  TEST_CASE("block sizes are independent of the arrivals") {
    Rng rng(45);
    std::vector<double> sizes, firsts;
    for (int i = 0; i < 20000; ++i) {
      auto box = sample_box_pullback(SubordinatorSpec::feller_at(2.0, 0.0, 1.0), 1.0, 1, rng);
      sizes.push_back(double(box.partition.block_size(1)));
      firsts.push_back(box.arrivals[0]);
    }
    auto ms = stats::mean_se(sizes), mf = stats::mean_se(firsts);
    double cov = 0.0, vs = 0.0, vf = 0.0;
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      cov += (sizes[i] - ms.mean) * (firsts[i] - mf.mean);
      vs += (sizes[i] - ms.mean) * (sizes[i] - ms.mean);
      vf += (firsts[i] - mf.mean) * (firsts[i] - mf.mean);
    }
    double corr = cov / std::sqrt(vs * vf);
    CHECK(std::abs(corr) < 3.0 / std::sqrt(double(sizes.size())));
  }

  TEST_CASE("invalid input") {
    CHECK_THROWS_AS(LaplaceExponent::stable_type(0.0, 0.0, 1.0, 1.5), DomainError);
    CHECK_THROWS_AS(block_size_law(LaplaceExponent::drift_only(1.0), -1.0, 10), DomainError);
  }
}
