#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace csbp::stats {

struct TestReport {
  std::string name;       // what is being compared
  std::string statistic;  // KS | chi-square | TV | z-score | max-error
  double value = 0.0;     // the statistic
  double p_value = -1.0;  // negative when not applicable
  double threshold = 0.0; // the pass rule: p > threshold, or value < threshold
  bool pass = false;
  std::uint64_t n = 0;
};

// asymptotic Kolmogorov survival function Q(x) = 2 sum (-1)^{k-1} exp(-2 k^2 x^2)
double kolmogorov_q(double x);

TestReport ks_test(std::vector<double> samples, const std::function<double(double)>& cdf, double alpha = 0.01);
TestReport ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha = 0.01);
// observed counts per cell and cell probabilities; cells with expectation below 5 are pooled
TestReport chi_square(const std::vector<double>& observed, const std::vector<double>& probs, double alpha = 0.01,
                      int fitted_params = 0);
// total variation between two histograms, each normalized to mass one
double tv_distance(const std::vector<double>& a, const std::vector<double>& b);
TestReport tv_test(const std::vector<double>& a, const std::vector<double>& b, double bound);
// |estimate - target| <= k se
TestReport z_test(double estimate, double se, double target, double k = 3.0, std::uint64_t n = 0);

struct MeanEstimate {
  double mean;
  double se;
};
MeanEstimate mean_se(const std::vector<double>& x);

}  // namespace csbp::stats
