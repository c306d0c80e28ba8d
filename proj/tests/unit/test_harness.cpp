#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <vector>

#include "csbp/config.hpp"
#include "csbp/errors.hpp"
#include "csbp/experiments.hpp"
#include "csbp/rng.hpp"
#include "csbp/stats.hpp"

using namespace csbp;

namespace {

std::function<double(double)> exp_cdf(double rate) {
  return [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); };
}

}  // namespace

TEST_SUITE("harness") {
  TEST_CASE("KS p-values are calibrated") {
    Rng rng(71);
    int small = 0;
    for (int meta = 0; meta < 200; ++meta) {
      std::vector<double> xs(1000);
      for (auto& x : xs) x = rng.exponential(1.0);
      small += stats::ks_test(xs, exp_cdf(1.0)).p_value < 0.05 ? 1 : 0;
    }
    // Binomial(200, 0.05) lies in [2, 22] with probability above 0.999
    CHECK(small >= 2);
    CHECK(small <= 22);
  }

  TEST_CASE("KS has power") {
    Rng rng(72);
    std::vector<double> xs(10000);
    for (auto& x : xs) x = rng.exponential(1.0);
    CHECK_FALSE(stats::ks_test(xs, exp_cdf(2.0)).pass);
  }

  TEST_CASE("Kolmogorov survival function") {
    CHECK(stats::kolmogorov_q(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(stats::kolmogorov_q(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  }

  TEST_CASE("chi-square") {
    Rng rng(73);
    std::vector<double> obs(6, 0.0), probs(6, 1.0 / 6.0);
    for (int i = 0; i < 60000; ++i) obs[std::min(5, int(rng.uniform() * 6.0))] += 1.0;
    CHECK(stats::chi_square(obs, probs).pass);
    std::vector<double> skew{20000, 10000, 10000, 10000, 5000, 5000};
    CHECK_FALSE(stats::chi_square(skew, probs).pass);
    // pooling leaves at least expectation 5 per cell
    std::vector<double> sparse{95, 4, 1, 0}, sp{0.95, 0.04, 0.008, 0.002};
    auto r = stats::chi_square(sparse, sp);
    CHECK(r.p_value >= 0.0);
  }

  TEST_CASE("total variation") {
    std::vector<double> a{1, 2, 3};
    CHECK(stats::tv_distance(a, a) == 0.0);
    CHECK(stats::tv_distance({1, 0}, {0, 1}) == doctest::Approx(1.0));
    CHECK(stats::tv_distance({2, 2}, {1, 1}) == 0.0);
  }

  TEST_CASE("z-test") {
    CHECK(stats::z_test(1.0, 0.1, 1.25).pass);
    CHECK_FALSE(stats::z_test(1.0, 0.1, 1.35).pass);
  }

  TEST_CASE("degenerate input") {
    CHECK_THROWS_AS(stats::ks_test(std::vector<double>(10, 1.0), exp_cdf(1.0)), DomainError);
    CHECK_THROWS_AS(stats::tv_distance({0, 0}, {1, 1}), DomainError);
    CHECK_THROWS_AS(stats::mean_se({1.0}), DomainError);
  }

  TEST_CASE("mechanism configs") {
    auto m = parse_mechanism(nlohmann::json::parse(R"({"sigma2": 1, "beta": 0.5, "levy": {"family": "stable", "alpha": 1.5, "c": 2}})"));
    CHECK(m.is_stable());
    CHECK(m.sigma2() == 1.0);
    auto d = parse_mechanism(nlohmann::json::parse(R"({"levy.family": "finite_atomic", "levy.atoms": [[0.5, 2], [2, 1]], "sigma2": 1})"));
    CHECK(std::get<FiniteAtomicLevy>(d.levy()).atoms.size() == 2);
    CHECK(parse_mechanism(mechanism_to_json(m)).describe() == m.describe());
    CHECK(parse_mechanism(nlohmann::json::parse(R"({"levy": {"family": "neveu"}})")).is_neveu());
  }

  TEST_CASE("config errors name the key") {
    auto msg = [](const char* text) {
      try {
        parse_mechanism(nlohmann::json::parse(text));
      } catch (const ConfigError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(msg(R"({"levy.family": "gamma"})").find("levy.family") != std::string::npos);
    CHECK(msg(R"({"levy.family": "stable", "levy.c": 1})").find("levy.alpha") != std::string::npos);
    CHECK(msg(R"({"sigma2": "two"})").find("sigma2") != std::string::npos);
    CHECK(msg(R"({"sigma2": -1})").find("sigma2") != std::string::npos);
  }

  TEST_CASE("seed override") {
    ::unsetenv("CSBP_SEED");
    CHECK(resolve_seed(std::nullopt, 5) == 5);
    CHECK(resolve_seed(9, 5) == 9);
    ::setenv("CSBP_SEED", "123", 1);
    CHECK(resolve_seed(9, 5) == 123);
    ::setenv("CSBP_SEED", "12x", 1);
    CHECK_THROWS_AS(resolve_seed(9, 5), ConfigError);
    ::unsetenv("CSBP_SEED");
  }

  TEST_CASE("unknown experiments are config errors") {
    CHECK_THROWS_AS(run_experiment("nope", ExperimentParams{}), ConfigError);
    CHECK(experiment_names().size() == 12);
  }

  TEST_CASE("reports are byte-identical across runs and thread counts") {
    ExperimentParams params;
    params.rep_scale = 0.05;
    auto a = run_experiment("feller-cpp", params).report_json();
    ::setenv("CSBP_THREADS", "1", 1);
    auto b = run_experiment("feller-cpp", params).report_json();
    ::setenv("CSBP_THREADS", "3", 1);
    auto c = run_experiment("feller-cpp", params).report_json();
    ::unsetenv("CSBP_THREADS");
    CHECK(a == b);
    CHECK(a == c);
  }

  TEST_CASE("semigroup experiment") {
    auto res = run_experiment("semigroup", ExperimentParams{});
    CHECK(res.pass());
    for (const auto& r : res.reports) CHECK(r.value <= 1e-8);
  }

  TEST_CASE("feller-cpp experiment at full size") {
    auto res = run_experiment("feller-cpp", ExperimentParams{});
    CHECK(res.pass());
    for (const auto& r : res.reports) CHECK(r.n == 100000);
  }
}
