#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "csbp/flow.hpp"
#include "csbp/partition.hpp"
#include "csbp/rng.hpp"

namespace csbp {

// phi(mu) = kill + drift mu + int (1 - e^{-mu x}) density(x) dx
struct LaplaceExponent {
  std::function<double(double)> phi;
  double drift = 0.0;
  double kill = 0.0;
  std::function<double(double)> density;                         // Levy density, may be empty
  std::function<double(double lam, std::uint64_t k)> pmf_closed;   // P(#C_1 = k), may be empty
  std::function<double(double lam, std::uint64_t k)> tail_closed;  // P(k < #C_1 < inf), may be empty
  std::string label;

  // kill + drift mu + scale mu^a, a in (0,1); scale = 0 allowed
  static LaplaceExponent stable_type(double kill, double drift, double scale, double a);
  // v_t of the Feller mechanism: compound Poisson with Exp(beta_hat_t) jumps
  static LaplaceExponent feller_at(double sigma2, double beta, double t);
  // v_t of the Neveu mechanism with beta = 0: mu^{e^{-t}}
  static LaplaceExponent neveu_at(double t);
  // v_t of the explosive mechanism Psi(q) = -q^{1/2}: (mu^{1/2} + t/2)^2
  static LaplaceExponent root_explosive_at(double t);
  static LaplaceExponent drift_only(double d);
  static LaplaceExponent killed(double kill, double drift);
  // the pmf is then computed by quadrature of the density
  static LaplaceExponent explicit_exponent(std::function<double(double)> phi, double drift, double kill,
                                           std::function<double(double)> density);
};

struct BlockSizeLaw {
  std::vector<double> pmf;  // entries 1..k_max (entry 0 unused)
  double p_inf = 0.0;
  double tail = 0.0;        // P(k_max < #C_1 < inf)
  std::function<double(std::uint64_t)> tail_fn;  // k -> P(k < #C_1 < inf), used beyond k_max

  double generating_function(double s) const;  // truncated at k_max
};

BlockSizeLaw block_size_law(const LaplaceExponent& phi, double lam, std::uint64_t k_max);

// one block size; 0 encodes the infinite block
std::uint64_t sample_block_size(const BlockSizeLaw& law, Rng& rng);
// i.i.d. block sizes until the ground size reaches n (restricted to [n]) or an infinite block occurs
ConsecutivePartition sample_box_direct(const BlockSizeLaw& law, std::uint64_t n, Rng& rng);
// n_blocks i.i.d. block sizes, stopping early at an infinite block
ConsecutivePartition sample_box_blocks(const BlockSizeLaw& law, std::uint64_t n_blocks, Rng& rng);

// Levy triplet of a subordinator that can be sampled pathwise
struct SubordinatorSpec {
  double drift = 0.0;
  double kill = 0.0;
  double stable_scale = 0.0;  // scale mu^a part
  double stable_index = 0.5;
  double epsilon = 1e-4;      // stable jumps below epsilon are replaced by their mean drift
  double cp_rate = 0.0;       // compound Poisson jumps with Exp(cp_size_rate) sizes
  double cp_size_rate = 1.0;

  static SubordinatorSpec feller_at(double sigma2, double beta, double t);
  static SubordinatorSpec neveu_at(double t, double epsilon = 1e-4);
  static SubordinatorSpec root_explosive_at(double t, double epsilon = 1e-4);
  static SubordinatorSpec drift_only(double d);
};

// a path on [0, horizon] started at 0, killed at an Exp(kill) location when kill > 0
SubordinatorPath sample_subordinator(const SubordinatorSpec& spec, double horizon, Rng& rng);

struct BoxSample {
  ConsecutivePartition partition;
  std::vector<double> arrivals;  // J'_i, the distinct values of X^{-1}(J)
};

// literal definition: group the sorted arrivals by their right inverse through the path
BoxSample pullback(const SubordinatorPath& path, const std::vector<double>& arrivals);

// streams path segments of length segment and rate-lam arrivals until n_blocks blocks are complete
BoxSample sample_box_pullback(const SubordinatorSpec& spec, double lam, std::uint64_t n_blocks, Rng& rng,
                              double segment = 1.0);

}  // namespace csbp
