#include "csbp/stats.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numeric>

#include "csbp/errors.hpp"

namespace csbp::stats {

double kolmogorov_q(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 == 1 ? term : -term);
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

namespace {

double ks_p(double d, double n_eff) {
  double s = std::sqrt(n_eff);
  return kolmogorov_q((s + 0.12 + 0.11 / s) * d);
}

}  // namespace

TestReport ks_test(std::vector<double> samples, const std::function<double(double)>& cdf, double alpha) {
  require(samples.size() >= 100, "KS test needs at least 100 samples");
  std::sort(samples.begin(), samples.end());
  const double n = double(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double f = cdf(samples[i]);
    d = std::max({d, (i + 1) / n - f, f - i / n});
  }
  TestReport r{"", "KS", d, ks_p(d, n), alpha, false, samples.size()};
  r.pass = r.p_value > alpha;
  return r;
}

TestReport ks_two_sample(std::vector<double> a, std::vector<double> b, double alpha) {
  require(a.size() >= 100 && b.size() >= 100, "KS test needs at least 100 samples per side");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = double(a.size()), nb = double(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(i / na - j / nb));
  }
  TestReport r{"", "KS", d, ks_p(d, na * nb / (na + nb)), alpha, false, a.size() + b.size()};
  r.pass = r.p_value > alpha;
  return r;
}

TestReport chi_square(const std::vector<double>& observed, const std::vector<double>& probs, double alpha,
                      int fitted_params) {
  require(observed.size() == probs.size() && !observed.empty(), "chi-square needs matching cells");
  const double n = std::accumulate(observed.begin(), observed.end(), 0.0);
  require(n >= 100, "chi-square needs at least 100 observations");
  const double psum = std::accumulate(probs.begin(), probs.end(), 0.0);
  require(std::abs(psum - 1.0) < 1e-6, "cell probabilities must sum to one");
  // pool consecutive cells until each expectation reaches 5
  std::vector<double> obs, expv;
  double o = 0.0, e = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    o += observed[i];
    e += n * probs[i];
    if (e >= 5.0) {
      obs.push_back(o);
      expv.push_back(e);
      o = e = 0.0;
    }
  }
  if (e > 0.0 || o > 0.0) {
    if (expv.empty()) {
      obs.push_back(o);
      expv.push_back(e);
    } else {
      obs.back() += o;
      expv.back() += e;
    }
  }
  int df = int(obs.size()) - 1 - fitted_params;
  require(df >= 1, "chi-square needs at least two pooled cells");
  double x2 = 0.0;
  for (std::size_t i = 0; i < obs.size(); ++i) x2 += (obs[i] - expv[i]) * (obs[i] - expv[i]) / expv[i];
  TestReport r{"", "chi-square", x2, boost::math::gamma_q(0.5 * df, 0.5 * x2), alpha, false, std::uint64_t(n)};
  r.pass = r.p_value > alpha;
  return r;
}

double tv_distance(const std::vector<double>& a, const std::vector<double>& b) {
  const double sa = std::accumulate(a.begin(), a.end(), 0.0);
  const double sb = std::accumulate(b.begin(), b.end(), 0.0);
  require(sa > 0.0 && sb > 0.0, "TV needs nonempty histograms");
  const std::size_t m = std::max(a.size(), b.size());
  double tv = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double pa = i < a.size() ? a[i] / sa : 0.0;
    double pb = i < b.size() ? b[i] / sb : 0.0;
    tv += std::abs(pa - pb);
  }
  return 0.5 * tv;
}

TestReport tv_test(const std::vector<double>& a, const std::vector<double>& b, double bound) {
  double n = std::accumulate(a.begin(), a.end(), 0.0);
  TestReport r{"", "TV", tv_distance(a, b), -1.0, bound, false, std::uint64_t(n)};
  r.pass = r.value < bound;
  return r;
}

TestReport z_test(double estimate, double se, double target, double k, std::uint64_t n) {
  require(se >= 0.0, "standard error must be nonnegative");
  double z = se > 0.0 ? (estimate - target) / se : (estimate == target ? 0.0 : INFINITY);
  TestReport r{"", "z-score", z, -1.0, k, false, n};
  r.pass = std::abs(z) <= k;
  return r;
}

MeanEstimate mean_se(const std::vector<double>& x) {
  require(x.size() >= 2, "mean_se needs two or more values");
  const double n = double(x.size());
  double m = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / (n - 1.0) / n)};
}

}  // namespace csbp::stats
