#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "csbp/mechanism.hpp"
#include "csbp/rng.hpp"

namespace csbp {

struct Jump {
  double loc;
  double size;
};

// X(x) = start + drift x + sum_{loc <= x} size on [0, horizon], and X = inf from kill on.
class SubordinatorPath {
 public:
  SubordinatorPath(double drift, std::vector<Jump> jumps, double horizon, double start = 0.0, double kill = kInf);

  double drift() const { return drift_; }
  double start() const { return start_; }
  double horizon() const { return horizon_; }
  double kill() const { return kill_; }
  const std::vector<Jump>& jumps() const { return jumps_; }

  double value(double x) const;
  double value_left(double x) const;  // X(x-)

  // concatenate an independent increment path (its start is added as a jump at the junction)
  SubordinatorPath extended(const SubordinatorPath& increment) const;

  void write_csv(std::ostream& os) const;

 private:
  double cumulative_before(std::size_t i) const { return i == 0 ? 0.0 : cum_[i - 1]; }

  double drift_;
  double start_;
  double horizon_;
  double kill_;
  std::vector<Jump> jumps_;
  std::vector<double> cum_;  // prefix sums of jump sizes
};

// inf{x >= 0 : X(x) > y}
double right_inverse(const SubordinatorPath& path, double y);

// (f o g)(x) = f(g(x)); needs g(horizon of g) <= horizon of f and no killing
SubordinatorPath compose(const SubordinatorPath& f, const SubordinatorPath& g);

// X_{-t,0} of the Feller flow on [0, horizon]
SubordinatorPath sample_feller_forward(double sigma2, double beta, double t, double horizon, Rng& rng);
// inverse flow y -> Xhat_{0,t}(y) on [0, y_max]
SubordinatorPath sample_feller_inverse(double sigma2, double beta, double t, double y_max, Rng& rng);

// positive stable variable with E exp(-lam S) = exp(-lam^a), a in (0,1]
double sample_positive_stable(double a, Rng& rng);
// X_{-t,0}(x) for the Neveu flow
double sample_neveu_marginal(double t, double x, Rng& rng);

// Xhat_t(e_q) with e_q ~ Exp(q) independent of the flow
double semigroup_exponential_sample(const BranchingMechanism& mech, double t, double q, Rng& rng);

enum class Boundary { Zero, Infinity };
double entrance_sample(const BranchingMechanism& mech, double t, Boundary b, Rng& rng);

// E f(Xhat_t(y)) for the Feller inverse flow, by exact mixture quadrature
double feller_inverse_expectation(double sigma2, double beta, double t, double y, const std::function<double(double)>& f);

struct GeneratorInput {
  std::function<double(double)> f;
  std::function<double(double)> fp;
  std::function<double(double)> fpp;
  double z;
};

// sigma2/2 z f'' + int_0^z [f(z-h) - f(z) + h f'(z)] nu(z,dh) + b(z) f'(z)
double generator_apply(const BranchingMechanism& mech, const GeneratorInput& g);
// b(z) by quadrature over pi and its tail
double generator_drift(const BranchingMechanism& mech, double z);
// density of nu(z, dh) = (z-h) pi(dh) + pi((h,inf)) dh on (0, z]
double generator_kernel(const BranchingMechanism& mech, double z, double h);
// jump integral against nu(z, dh)
double generator_jump(const BranchingMechanism& mech, const GeneratorInput& g);
// closed forms for Feller, stable with alpha in (1,2), Neveu
double generator_drift_closed(const BranchingMechanism& mech, double z);
double generator_kernel_closed(const BranchingMechanism& mech, double z, double h);

}  // namespace csbp
