#pragma once

#include <iosfwd>
#include <vector>

#include "csbp/flow.hpp"
#include "csbp/partition.hpp"
#include "csbp/rng.hpp"

namespace csbp {

struct FellerParams {
  double sigma2;
  double beta;

  FellerParams(double sigma2_, double beta_);
  BranchingMechanism mechanism() const { return BranchingMechanism::feller(sigma2, beta); }
};

// v_t(inf) e^{-beta t}; t = inf gives the limit max(-2 beta / sigma2, 0)
double beta_hat(const FellerParams& p, double t);
double feller_v_inf(const FellerParams& p, double t);
// the t with beta_hat(t) = b, +inf when b <= beta_hat(inf)
double beta_hat_inverse(const FellerParams& p, double b);

double mrca_cdf(const FellerParams& p, double t, double x, double y);
double mrca_no_ancestor_prob(const FellerParams& p, double d);
// density of the depth intensity mu(dt)
double cpp_intensity(const FellerParams& p, double t);

struct CppAtom {
  double x;
  double depth;  // +inf for the "no common ancestor" sentinel
};

struct CoalescentPointProcess {
  std::vector<CppAtom> atoms;  // sorted by position
  double x_max;
  double t_min;

  // T(x,y): deepest atom in (x, y]; 0 when no atom of depth >= t_min falls in the window
  double mrca(double x, double y) const;
  void write_csv(std::ostream& os) const;
};

CoalescentPointProcess sample_cpp(const FellerParams& p, double x_max, Rng& rng, double t_min = 1e-4);
std::vector<double> prolific_points(const FellerParams& p, double x_max, Rng& rng);

struct BinaryMergingResult {
  std::vector<double> times;  // T(x_i, x_{i+1})
  bool distinct;              // finite times pairwise distinct
};
BinaryMergingResult binary_merging_check(const FellerParams& p, const std::vector<double>& positions, Rng& rng);

// Interval partition of (0, ends.back()] with consecutive intervals (ends[i-1], ends[i]].
struct IntervalPartition {
  std::vector<double> ends;

  std::vector<double> lengths() const;
  bool operator==(const IntervalPartition& o) const = default;
};

IntervalPartition coag(const IntervalPartition& c, const ConsecutivePartition& d);

struct IntervalGenealogy {
  std::vector<double> times;
  std::vector<IntervalPartition> levels;       // C(t_i)
  std::vector<ConsecutivePartition> steps;     // C(t_i, t_{i+1})
};

// forward-flow construction over an ancestral window [0, x_max] at depth t_grid.back()
IntervalGenealogy interval_genealogy(const FellerParams& p, const std::vector<double>& t_grid, double x_max, Rng& rng);
// C(t_1) from X_{-t_1,0} over the present window [0, y_max], later levels through the
// consecutive coalescent started at t_1 with lambda = inf
IntervalGenealogy interval_genealogy_coalescent(const FellerParams& p, const std::vector<double>& t_grid, double y_max,
                                                Rng& rng);

}  // namespace csbp
