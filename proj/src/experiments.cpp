#include "csbp/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>
#include <thread>

#include "csbp/coalescent.hpp"
#include "csbp/errors.hpp"
#include "csbp/feller.hpp"
#include "csbp/flow.hpp"
#include "csbp/mechanism.hpp"
#include "csbp/numeric.hpp"
#include "csbp/poissonbox.hpp"

namespace csbp {

bool ExperimentResult::pass() const {
  return !reports.empty() && std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.pass; });
}

std::string ExperimentResult::report_json() const {
  nlohmann::ordered_json j;
  j["experiment"] = name;
  j["property"] = property;
  j["pass"] = pass();
  auto arr = nlohmann::ordered_json::array();
  for (const auto& r : reports) {
    nlohmann::ordered_json o;
    o["name"] = r.name;
    o["statistic"] = r.statistic;
    o["value"] = r.value;
    if (r.p_value >= 0.0) o["p_value"] = r.p_value;
    o["threshold"] = r.threshold;
    o["n"] = r.n;
    o["pass"] = r.pass;
    arr.push_back(o);
  }
  j["reports"] = arr;
  return j.dump(2);
}

void ExperimentResult::write_data(const std::string& dir) const {
  std::filesystem::create_directories(dir);
  for (const auto& [series, values] : data) {
    std::ofstream os(std::filesystem::path(dir) / (name + "_" + series + ".csv"));
    os.precision(17);
    os << "value\n";
    for (double v : values) os << v << '\n';
  }
}

namespace {

using stats::TestReport;

std::uint64_t scaled(const ExperimentParams& p, std::uint64_t base) {
  return std::max<std::uint64_t>(1, std::uint64_t(std::llround(double(base) * p.rep_scale)));
}

std::uint64_t sub_seed(const ExperimentParams& p, std::uint64_t tag) { return mix64(p.seed ^ mix64(tag)); }

// CSBP_THREADS when set, else the hardware concurrency
unsigned worker_count() {
  if (const char* env = std::getenv("CSBP_THREADS"); env && *env) {
    char* end = nullptr;
    auto v = std::strtoul(env, &end, 10);
    if (*end != '\0' || v == 0) throw ConfigError("CSBP_THREADS must be a positive integer");
    return unsigned(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

// f(rng, i) for i < n with per-replicate seeds; results do not depend on the thread count
template <class T, class F>
std::vector<T> replicate(std::uint64_t seed, std::uint64_t n, F&& f) {
  std::vector<T> out(n);
  unsigned threads = worker_count();
  threads = unsigned(std::min<std::uint64_t>(threads, n));
  auto work = [&](unsigned w) {
    for (std::uint64_t i = w; i < n; i += threads) {
      Rng rng(replicate_seed(seed, i));
      out[i] = f(rng, i);
    }
  };
  if (threads <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
  }
  return out;
}

TestReport named(TestReport r, std::string name) {
  r.name = std::move(name);
  return r;
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::function<double(double)> exp_cdf(double rate) {
  return [rate](double x) { return x <= 0.0 ? 0.0 : -std::expm1(-rate * x); };
}

// pi(h) = h^{-5/2} e^{-h}
BranchingMechanism tempered_stable() {
  auto density = [](double h) { return std::pow(h, -2.5) * std::exp(-h); };
  auto tail = [](double x) {
    const double sp = std::sqrt(std::numbers::pi);
    double g_half = sp * std::erfc(std::sqrt(x));
    double g_mhalf = 2.0 * (std::exp(-x) / std::sqrt(x) - g_half);
    return 2.0 / 3.0 * (std::exp(-x) * std::pow(x, -1.5) - g_mhalf);
  };
  return BranchingMechanism(0.0, 0.0, TabulatedLevy{density, tail});
}

// ---------------------------------------------------------------------------

ExperimentResult semigroup(const ExperimentParams&) {
  ExperimentResult res{"semigroup", "v_{t+s} = v_t o v_s", {}, {}};
  std::vector<double> ts, lams;
  for (int i = 0; i < 20; ++i) {
    ts.push_back(0.02 * std::pow(150.0, i / 19.0));
    lams.push_back(1e-2 * std::pow(1e4, i / 19.0));
  }
  struct Case {
    std::string name;
    BranchingMechanism mech;
    bool full_grid;
  };
  std::vector<Case> cases{{"Feller sigma2=2 beta=1", BranchingMechanism::feller(2.0, 1.0), true},
                          {"Neveu", BranchingMechanism::neveu(), true},
                          {"stable alpha=1.5 c=1", BranchingMechanism::stable(1.5, 1.0), true},
                          {"tempered stable density", tempered_stable(), false}};
  for (const auto& c : cases) {
    double worst = 0.0;
    std::uint64_t count = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
      for (std::size_t j = 0; j < ts.size(); ++j) {
        for (std::size_t k = 0; k < lams.size(); ++k) {
          if (!c.full_grid && k != (i + j) % lams.size()) continue;
          double whole = v(c.mech, ts[i] + ts[j], lams[k]);
          double split = v(c.mech, ts[i], v(c.mech, ts[j], lams[k]));
          worst = std::max(worst, std::abs(whole - split) / whole);
          ++count;
        }
      }
    }
    TestReport r{c.name, "max-error", worst, -1.0, 1e-8, worst <= 1e-8, count};
    res.reports.push_back(r);
  }
  return res;
}

ExperimentResult feller_cpp(const ExperimentParams& p) {
  ExperimentResult res{"feller-cpp", "P(T_{x,y} <= t) = exp(-beta_hat_t (y-x)) from the coalescent point process", {},
                       {}};
  struct Case {
    double sigma2, beta, t, d;
  };
  std::vector<Case> cases{{2, 0, 1, 1}, {2, 0, 0.5, 2}, {2, 1, 1, 1}, {1, 0.5, 2, 0.5}, {2, -1, 1, 1}, {2, -1, kInf, 1}};
  const std::uint64_t reps = scaled(p, 100000);
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& c = cases[ci];
    FellerParams fp(c.sigma2, c.beta);
    const double t_min = std::isinf(c.t) ? 1.0 : 0.5 * c.t;
    auto hits = replicate<double>(sub_seed(p, ci), reps, [&](Rng& rng, std::uint64_t) {
      auto cpp = sample_cpp(fp, c.d, rng, t_min);
      double T = cpp.mrca(0.0, c.d);
      return std::isinf(c.t) ? double(std::isinf(T)) : double(T <= c.t);
    });
    double target = std::isinf(c.t) ? mrca_no_ancestor_prob(fp, c.d) : mrca_cdf(fp, c.t, 0.0, c.d);
    double mean = 0.0;
    for (double h : hits) mean += h;
    mean /= double(reps);
    double se = std::sqrt(target * (1.0 - target) / double(reps));
    std::string label = "sigma2=" + fmt(c.sigma2) + " beta=" + fmt(c.beta) + " t=" + fmt(c.t) + " y-x=" + fmt(c.d) +
                        (std::isinf(c.t) ? " P(T=inf)" : " P(T<=t)");
    res.reports.push_back(named(stats::z_test(mean, se, target, 3.0, reps), label));
  }
  return res;
}

ExperimentResult inverse_semigroup(const ExperimentParams& p) {
  ExperimentResult res{"inverse-semigroup", "Xhat_t(e_q) ~ Exp(v_t(q))", {}, {}};
  struct Case {
    std::string name;
    BranchingMechanism mech;
    double t, q;
  };
  std::vector<Case> cases{{"Feller sigma2=2 beta=0", BranchingMechanism::feller(2.0, 0.0), 1.0, 0.5},
                          {"Feller sigma2=2 beta=0", BranchingMechanism::feller(2.0, 0.0), 1.0, 1.0},
                          {"Feller sigma2=2 beta=0", BranchingMechanism::feller(2.0, 0.0), 1.0, 2.0},
                          {"Neveu", BranchingMechanism::neveu(), std::log(2.0), 4.0}};
  const std::uint64_t reps = scaled(p, 100000);
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& c = cases[ci];
    auto xs = replicate<double>(sub_seed(p, 100 + ci), reps,
                                [&](Rng& rng, std::uint64_t) { return semigroup_exponential_sample(c.mech, c.t, c.q, rng); });
    double rate = v(c.mech, c.t, c.q);
    std::string label = c.name + " t=" + fmt(c.t) + " q=" + fmt(c.q) + " vs Exp(" + fmt(rate) + ")";
    res.reports.push_back(named(stats::ks_test(xs, exp_cdf(rate)), label));
    res.data.push_back({"q" + fmt(c.q) + (c.mech.is_neveu() ? "_neveu" : "_feller"), xs});
  }
  return res;
}

std::vector<double> size_histogram(const std::vector<ConsecutivePartition::Size>& sizes, std::size_t pool_at) {
  std::vector<double> h(pool_at + 1, 0.0);
  for (auto s : sizes) h[std::min<std::size_t>(s, pool_at)] += 1.0;
  h.erase(h.begin());
  return h;
}

ExperimentResult poisson_box(const ExperimentParams& p) {
  ExperimentResult res{"poisson-box", "direct and pullback Poisson boxes agree; J' is Poisson(phi(lambda))", {}, {}};
  struct Case {
    std::string name;
    LaplaceExponent exponent;
    SubordinatorSpec spec;
    double lam;
  };
  std::vector<Case> cases{
      {"Feller sigma2=2 beta=1 t=1", LaplaceExponent::feller_at(2.0, 1.0, 1.0), SubordinatorSpec::feller_at(2.0, 1.0, 1.0), 1.0},
      {"Neveu t=log 2", LaplaceExponent::neveu_at(std::log(2.0)), SubordinatorSpec::neveu_at(std::log(2.0), 1e-4), 1.0}};
  const std::uint64_t blocks = scaled(p, 300000);
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& c = cases[ci];
    auto law = block_size_law(c.exponent, c.lam, 4096);
    Rng rd(sub_seed(p, 200 + ci));
    auto direct = sample_box_blocks(law, blocks, rd);
    Rng rp(sub_seed(p, 210 + ci));
    auto pulled = sample_box_pullback(c.spec, c.lam, blocks, rp);
    auto hd = size_histogram(direct.sizes(), 32);
    auto hp = size_histogram(pulled.partition.sizes(), 32);
    res.reports.push_back(named(stats::tv_test(hd, hp, 0.01), c.name + " block sizes, direct vs pullback"));
    std::vector<double> gaps;
    double prev = 0.0;
    for (double a : pulled.arrivals) {
      gaps.push_back(a - prev);
      prev = a;
    }
    double rate = c.exponent.phi(c.lam);
    res.reports.push_back(named(stats::ks_test(gaps, exp_cdf(rate)), c.name + " J' spacings vs Exp(" + fmt(rate) + ")"));
    std::vector<double> ds(direct.sizes().begin(), direct.sizes().end());
    std::vector<double> ps(pulled.partition.sizes().begin(), pulled.partition.sizes().end());
    std::string tag = ci == 0 ? "feller" : "neveu";
    res.data.push_back({tag + "_direct_sizes", ds});
    res.data.push_back({tag + "_pullback_sizes", ps});
  }
  return res;
}

// first-block size of the coalescent C^lam restricted to [n] at time t
std::vector<double> first_block_sizes(const RateSchedule& sched, std::uint64_t n, double t0, double t1,
                                      std::uint64_t reps, std::uint64_t seed) {
  return replicate<double>(seed, reps, [&](Rng& rng, std::uint64_t) {
    auto traj = simulate_inhomogeneous(sched, n, t0, t1, rng);
    return double(traj.final_state.block_size(1));
  });
}

void gf_reports(ExperimentResult& res, const std::string& label, const std::vector<double>& sizes,
                const std::function<double(double)>& target) {
  for (double z : {0.2, 0.5, 0.8}) {
    std::vector<double> w(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) w[i] = std::pow(z, sizes[i]);
    auto est = stats::mean_se(w);
    res.reports.push_back(named(stats::z_test(est.mean, est.se, target(z), 3.0, sizes.size()), label + " z=" + fmt(z)));
  }
}

ExperimentResult coalescent_marginals(const ExperimentParams& p) {
  ExperimentResult res{"coalescent-marginals", "E z^{#C_1(t)} = 1 - v_t(lam(1-z)) / v_t(lam)", {}, {}};
  struct Case {
    std::string name;
    BranchingMechanism mech;
  };
  std::vector<Case> cases{{"Feller sigma2=2 beta=0", BranchingMechanism::feller(2.0, 0.0)},
                          {"Neveu", BranchingMechanism::neveu()},
                          {"stable alpha=1.5 c=1", BranchingMechanism::stable(1.5, 1.0)}};
  const double lam = 1.0, t = 1.0;
  const std::uint64_t n = 60;
  const std::uint64_t reps = scaled(p, 100000);
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& c = cases[ci];
    auto sched = RateSchedule::from_mechanism(c.mech, lam);
    auto sizes = first_block_sizes(sched, n, 0.0, t, reps, sub_seed(p, 300 + ci));
    gf_reports(res, c.name + " lam=1 t=1", sizes, [&](double z) { return marginal_block_gf(c.mech, lam, t, z); });
  }
  return res;
}

std::vector<double> as_vector(const PartitionDistribution& d, const std::vector<std::string>& keys) {
  std::vector<double> out;
  for (const auto& k : keys) {
    auto it = d.find(k);
    out.push_back(it == d.end() ? 0.0 : it->second);
  }
  return out;
}

ExperimentResult ctmc_oracle_experiment(const ExperimentParams& p) {
  ExperimentResult res{"ctmc-oracle", "simulated partition laws match the matrix-exponential oracle", {}, {}};
  const std::uint64_t reps = scaled(p, 400000);
  const auto stable = BranchingMechanism::stable(1.5, 1.0);
  const double s0 = 0.5, s1 = 1.0;
  for (int n : {4, 6}) {
    {
      auto oracle = ctmc_oracle(ReproductionMeasure::neveu(), n, 1.0);
      auto mu = ReproductionMeasure::neveu();
      auto finals = replicate<std::string>(sub_seed(p, 400 + n), reps, [&](Rng& rng, std::uint64_t) {
        return simulate_homogeneous(mu, n, 1.0, rng).final_state.to_string();
      });
      PartitionDistribution emp;
      for (const auto& f : finals) emp[f] += 1.0;
      std::vector<std::string> keys;
      for (const auto& [k, _] : oracle.dist) keys.push_back(k);
      auto r = stats::tv_test(as_vector(emp, keys), as_vector(oracle.dist, keys), 0.01);
      r.n = reps;
      res.reports.push_back(named(r, "Neveu homogeneous n=" + std::to_string(n) + " t=1"));
    }
    {
      auto sched = RateSchedule::from_mechanism(stable, kInf, s0);
      auto oracle = ctmc_oracle(sched, n, s0, s1, 1e-3);
      auto finals = replicate<std::string>(sub_seed(p, 410 + n), reps, [&](Rng& rng, std::uint64_t) {
        return simulate_inhomogeneous(sched, n, s0, s1, rng).final_state.to_string();
      });
      PartitionDistribution emp;
      for (const auto& f : finals) emp[f] += 1.0;
      std::vector<std::string> keys;
      for (const auto& [k, _] : oracle.dist) keys.push_back(k);
      auto r = stats::tv_test(as_vector(emp, keys), as_vector(oracle.dist, keys), 0.01);
      r.n = reps;
      res.reports.push_back(named(r, "stable alpha=1.5 lam=inf n=" + std::to_string(n) + " on [0.5,1]"));
      res.reports.push_back(TestReport{"oracle Richardson gap, n=" + std::to_string(n), "max-error", oracle.richardson_gap,
                                       -1.0, 1e-6, oracle.richardson_gap < 1e-6, 0});
    }
  }
  return res;
}

ExperimentResult neveu_bs(const ExperimentParams& p) {
  ExperimentResult res{"neveu-bs", "Neveu block counts follow the Bolthausen-Sznitman block-count chain", {}, {}};
  {
    const int n = 50;
    const double t = 1.0;
    const std::uint64_t reps = scaled(p, 100000);
    auto exact = block_count_distribution(bolthausen_sznitman_count_rates(), n, t);
    auto mu = ReproductionMeasure::neveu();
    auto counts = replicate<double>(sub_seed(p, 500), reps, [&](Rng& rng, std::uint64_t) {
      return double(simulate_homogeneous(mu, n, t, rng).final_state.block_count());
    });
    std::vector<double> hist(n + 1, 0.0);
    for (double c : counts) hist[std::size_t(c)] += 1.0;
    auto r = stats::tv_test(hist, exact, 0.01);
    r.n = reps;
    res.reports.push_back(named(r, "n=50 t=1 partition simulation vs chain law"));
    res.data.push_back({"counts_n50", counts});
  }
  {
    const double t = 1.0;
    const std::uint64_t reps = scaled(p, 100000);
    const double a = std::exp(-t);
    auto scaled_counts = [&](std::uint64_t n, std::uint64_t tag) {
      return replicate<double>(sub_seed(p, tag), reps, [&](Rng& rng, std::uint64_t) {
        return double(sample_bs_block_count(n, t, rng)) / std::pow(double(n), a);
      });
    };
    auto c2 = scaled_counts(2000, 510);
    auto c8 = scaled_counts(8000, 511);
    res.reports.push_back(named(stats::ks_two_sample(c2, c8), "#C/n^{e^{-t}} at n=2000 vs n=8000, t=1"));
    res.data.push_back({"scaled_n2000", c2});
    res.data.push_back({"scaled_n8000", c8});
  }
  return res;
}

ExperimentResult subcritical_limits(const ExperimentParams& p) {
  ExperimentResult res{"subcritical-limits", "subcritical interval lengths approach the QSD; frozen partition law", {},
                       {}};
  const FellerParams fp(2.0, -1.0);
  {
    const std::uint64_t reps = scaled(p, 100);
    const double y_max = 1000.0;
    auto per_rep = replicate<std::vector<double>>(sub_seed(p, 600), reps, [&](Rng& rng, std::uint64_t) {
      auto g = interval_genealogy_coalescent(fp, {1.0, 20.0}, y_max, rng);
      auto lens = g.levels.back().lengths();
      if (!lens.empty()) lens.pop_back();  // the last interval is cut by the window
      return lens;
    });
    std::vector<double> lengths;
    for (const auto& v : per_rep) lengths.insert(lengths.end(), v.begin(), v.end());
    res.reports.push_back(named(stats::ks_test(lengths, exp_cdf(1.0)), "Feller beta=-1 sigma2=2 interval lengths at t=20 vs Exp(1)"));
    res.data.push_back({"interval_lengths_t20", lengths});
  }
  {
    const auto mech = fp.mechanism();
    const double lam = 1.0, t = 30.0, z = 0.5;
    double analytic = limit_partition_gf(mech, lam, z);
    res.reports.push_back(TestReport{"limit gf at lam=1 z=0.5 equals 1/3", "max-error", std::abs(analytic - 1.0 / 3.0),
                                     -1.0, 1e-10, std::abs(analytic - 1.0 / 3.0) < 1e-10, 0});
    const std::uint64_t reps = scaled(p, 100000);
    auto sched = RateSchedule::from_mechanism(mech, lam);
    auto sizes = first_block_sizes(sched, 60, 0.0, t, reps, sub_seed(p, 601));
    std::vector<double> w(sizes.size());
    for (std::size_t i = 0; i < sizes.size(); ++i) w[i] = std::pow(z, sizes[i]);
    auto est = stats::mean_se(w);
    res.reports.push_back(named(stats::z_test(est.mean, est.se, 1.0 / 3.0, 3.0, reps), "E z^{#C_1} at t=30, z=0.5 vs 1/3"));
  }
  return res;
}

ExperimentResult supercritical_stationarity(const ExperimentParams& p) {
  ExperimentResult res{"supercritical-stationarity", "Xhat_T(y) approaches Exp(rho) for a supercritical Feller flow", {},
                       {}};
  const std::uint64_t reps = scaled(p, 100000);
  auto xs = replicate<double>(sub_seed(p, 700), reps, [&](Rng& rng, std::uint64_t) {
    return sample_feller_inverse(2.0, 1.0, 20.0, 1.0, rng).value(1.0);
  });
  res.reports.push_back(named(stats::ks_test(xs, exp_cdf(1.0)), "Feller beta=1 sigma2=2 Xhat_20(1) vs Exp(1)"));
  res.data.push_back({"xhat_20", xs});
  return res;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

ExperimentResult generator(const ExperimentParams&) {
  ExperimentResult res{"generator", "semigroup derivative equals the Courrege-form generator; closed drifts and jumps", {},
                       {}};
  {
    const double s2 = 2.0, beta = 0.5;
    const auto mech = BranchingMechanism::feller(s2, beta);
    auto f = [](double x) { return std::exp(-(x - 1.0) * (x - 1.0)); };
    auto fp = [&](double x) { return -2.0 * (x - 1.0) * f(x); };
    auto fpp = [&](double x) { return (4.0 * (x - 1.0) * (x - 1.0) - 2.0) * f(x); };
    for (double z : {0.5, 1.0, 2.0}) {
      double lf = generator_apply(mech, {f, fp, fpp, z});
      auto diff = [&](double h) { return std::abs((feller_inverse_expectation(s2, beta, h, z, f) - f(z)) / h - lf); };
      double d2 = diff(1e-2), d3 = diff(1e-3);
      double c = d2 / 1e-2;
      double bound = 2.0 * c * 1e-3 + 1e-9;
      res.reports.push_back(TestReport{"Feller z=" + fmt(z) + " |diff(1e-3)| <= 2 C 1e-3 with C = diff(1e-2)/1e-2",
                                       "max-error", d3, -1.0, bound, d3 <= bound, 0});
    }
  }
  const auto stable = BranchingMechanism::stable(1.5, 1.0);
  const auto neveu = BranchingMechanism::neveu();
  for (double z : {0.5, 1.0, 2.0}) {
    for (const auto* m : {&stable, &neveu}) {
      double e = rel_err(generator_drift(*m, z), generator_drift_closed(*m, z));
      res.reports.push_back(TestReport{std::string(m->is_neveu() ? "Neveu" : "stable alpha=1.5") + " drift z=" + fmt(z),
                                       "max-error", e, -1.0, 1e-6, e <= 1e-6, 0});
    }
  }
  // jump part on monomials: f(z-h) - f(z) + h f'(z) is h^2 for z^2 and 3 z h^2 - h^3 for z^3
  const double cp = stable_density_constant(std::get<StableLevy>(stable.levy()));
  const double a = 1.5;
  auto stable_mono = [&](double z, double s) {
    // int_0^z h^s [(z-h) h^{-1-a} + h^{-a}/a] dh
    return cp * (z * std::pow(z, s - a) / (s - a) - std::pow(z, s - a + 1.0) / (s - a + 1.0) +
                 std::pow(z, s - a + 1.0) / (a * (s - a + 1.0)));
  };
  for (double z : {0.5, 1.0, 2.0}) {
    GeneratorInput sq{[](double x) { return x * x; }, [](double x) { return 2.0 * x; }, [](double) { return 2.0; }, z};
    GeneratorInput cu{[](double x) { return x * x * x; }, [](double x) { return 3.0 * x * x; },
                      [](double x) { return 6.0 * x; }, z};
    double s_sq = stable_mono(z, 2.0);
    double s_cu = 3.0 * z * stable_mono(z, 2.0) - stable_mono(z, 3.0);
    double n_sq = z * z;
    double n_cu = 2.5 * z * z * z;
    std::vector<std::pair<std::string, double>> errs{
        {"stable alpha=1.5 jump f=z^2", rel_err(generator_jump(stable, sq), s_sq)},
        {"stable alpha=1.5 jump f=z^3", rel_err(generator_jump(stable, cu), s_cu)},
        {"Neveu jump f=z^2", rel_err(generator_jump(neveu, sq), n_sq)},
        {"Neveu jump f=z^3", rel_err(generator_jump(neveu, cu), n_cu)}};
    for (const auto& [label, e] : errs)
      res.reports.push_back(TestReport{label + " z=" + fmt(z), "max-error", e, -1.0, 1e-6, e <= 1e-6, 0});
  }
  return res;
}

ExperimentResult cdi(const ExperimentParams& p) {
  ExperimentResult res{"cdi", "block counts of C^lam(t) are geometric(v_t(0)/v_t(lam)) for Psi(q) = -q^{1/2}", {}, {}};
  const auto mech = BranchingMechanism::stable(0.5, 1.0);
  const double lam = 1.0;
  {
    const double t = 1.0;
    const double param = blocks_geometric_param(mech, lam, t);
    const std::uint64_t reps = scaled(p, 100000);
    const auto spec = SubordinatorSpec::root_explosive_at(t, 1e-4);
    auto counts = replicate<double>(sub_seed(p, 1100), reps, [&](Rng& rng, std::uint64_t) {
      auto box = sample_box_pullback(spec, lam, std::uint64_t(1) << 40, rng, 4.0);
      return double(box.partition.block_count());
    });
    const std::size_t cells = 400;
    std::vector<double> obs(cells + 1, 0.0), probs(cells + 1, 0.0);
    for (double c : counts) obs[std::min<std::size_t>(std::size_t(c), cells) - 1] += 1.0;
    double acc = 0.0;
    for (std::size_t k = 1; k <= cells; ++k) {
      probs[k - 1] = param * std::pow(1.0 - param, double(k) - 1.0);
      acc += probs[k - 1];
    }
    obs.pop_back();
    probs.pop_back();
    probs.back() += 1.0 - acc;
    res.reports.push_back(named(stats::chi_square(obs, probs), "t=1 lam=1 pullback block count vs geometric(" + fmt(param) + ")"));
    res.data.push_back({"block_counts_t1", counts});
  }
  {
    const double t = 1e-3;
    const auto law = block_size_law(LaplaceExponent::root_explosive_at(t), lam, 64);
    const double v0 = v_zero(mech, t);
    const double formula = blocks_geometric_param(mech, lam, t);
    double e = rel_err(law.p_inf, formula);
    res.reports.push_back(TestReport{"P(infinite block) equals v_t(0)/v_t(lam) at t=1e-3", "max-error", e, -1.0, 1e-9,
                                     e <= 1e-9, 0});
    const std::uint64_t reps = scaled(p, 100000);
    auto xs = replicate<double>(sub_seed(p, 1101), reps, [&](Rng& rng, std::uint64_t) {
      return v0 * double(rng.geometric(law.p_inf) + 1);
    });
    res.reports.push_back(named(stats::ks_test(xs, exp_cdf(1.0 / lam)), "t=1e-3 v_t(0) #C vs Exp(1/lam)"));
  }
  return res;
}

ExperimentResult singletons(const ExperimentParams& p) {
  ExperimentResult res{"singletons", "fraction of singleton blocks equals (lam/Psi(lam)) Psi(v_t(lam))/v_t(lam)", {}, {}};
  struct Case {
    std::string name;
    BranchingMechanism mech;
    SubordinatorSpec spec;
    double lam, t;
    double analytic;
  };
  const double t = 1.0;
  std::vector<Case> cases{
      {"Neveu lam=e t=1", BranchingMechanism::neveu(), SubordinatorSpec::neveu_at(t, 1e-4), std::numbers::e, t, std::exp(-t)},
      {"Feller sigma2=2 beta=1 lam=1 t=1", BranchingMechanism::feller(2.0, 1.0), SubordinatorSpec::feller_at(2.0, 1.0, t),
       1.0, t, -1.0}};
  const std::uint64_t reps = scaled(p, 50);
  const std::uint64_t blocks = 10000;
  for (std::size_t ci = 0; ci < cases.size(); ++ci) {
    const auto& c = cases[ci];
    double target = singleton_fraction(c.mech, c.lam, c.t);
    if (c.analytic >= 0.0) {
      double e = rel_err(target, c.analytic);
      res.reports.push_back(TestReport{c.name + " D_t equals e^{-t}", "max-error", e, -1.0, 1e-9, e <= 1e-9, 0});
    }
    auto fr = replicate<double>(sub_seed(p, 1200 + ci), reps, [&](Rng& rng, std::uint64_t) {
      auto box = sample_box_pullback(c.spec, c.lam, blocks, rng);
      const auto& sz = box.partition.sizes();
      return double(std::count(sz.begin(), sz.end(), 1)) / double(sz.size());
    });
    auto est = stats::mean_se(fr);
    res.reports.push_back(named(stats::z_test(est.mean, est.se, target, 3.0, reps * blocks),
                                c.name + " singleton fraction vs D_t = " + fmt(target)));
  }
  return res;
}

using Runner = ExperimentResult (*)(const ExperimentParams&);

const std::vector<std::pair<std::string, Runner>>& registry() {
  static const std::vector<std::pair<std::string, Runner>> r{
      {"semigroup", semigroup},
      {"feller-cpp", feller_cpp},
      {"inverse-semigroup", inverse_semigroup},
      {"poisson-box", poisson_box},
      {"coalescent-marginals", coalescent_marginals},
      {"ctmc-oracle", ctmc_oracle_experiment},
      {"neveu-bs", neveu_bs},
      {"subcritical-limits", subcritical_limits},
      {"supercritical-stationarity", supercritical_stationarity},
      {"generator", generator},
      {"cdi", cdi},
      {"singletons", singletons},
  };
  return r;
}

}  // namespace

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> n;
    for (const auto& [k, _] : registry()) n.push_back(k);
    return n;
  }();
  return names;
}

ExperimentResult run_experiment(const std::string& name, const ExperimentParams& params) {
  for (const auto& [k, fn] : registry())
    if (k == name) return fn(params);
  throw ConfigError("unknown experiment '" + name + "'");
}

}  // namespace csbp
