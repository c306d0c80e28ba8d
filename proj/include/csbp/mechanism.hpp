#pragma once

#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace csbp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Named families contribute a closed-form term Phi(q) to
//   Psi(q) = sigma2/2 q^2 - beta q + Phi(q)
// Stable: Phi = c q^alpha for alpha in (1,2), -c q^alpha for alpha in (0,1).
// Neveu: Phi = q log q.
// FiniteAtomic, TabulatedDensity: Phi is the compensated integral
//   int (e^{-qx} - 1 + qx 1{x<=1}) pi(dx).
struct NoLevy {};

struct StableLevy {
  double alpha;
  double c;
};

struct NeveuLevy {};

struct Atom {
  double h;  // jump size
  double m;  // mass
};

struct FiniteAtomicLevy {
  std::vector<Atom> atoms;
};

struct TabulatedLevy {
  std::function<double(double)> density;  // h -> pi density
  std::function<double(double)> tail;     // x -> pi((x, inf))
};

using LevyFamily = std::variant<NoLevy, StableLevy, NeveuLevy, FiniteAtomicLevy, TabulatedLevy>;

class BranchingMechanism {
 public:
  BranchingMechanism(double sigma2, double beta, LevyFamily levy = NoLevy{});

  static BranchingMechanism feller(double sigma2, double beta) { return {sigma2, beta, NoLevy{}}; }
  static BranchingMechanism neveu() { return {0.0, 0.0, NeveuLevy{}}; }
  static BranchingMechanism stable(double alpha, double c, double beta = 0.0, double sigma2 = 0.0) {
    return {sigma2, beta, StableLevy{alpha, c}};
  }

  double sigma2() const { return sigma2_; }
  double beta() const { return beta_; }
  const LevyFamily& levy() const { return levy_; }

  bool is_feller() const { return std::holds_alternative<NoLevy>(levy_) && sigma2_ > 0; }
  bool is_neveu() const { return std::holds_alternative<NeveuLevy>(levy_); }
  bool is_stable() const { return std::holds_alternative<StableLevy>(levy_); }
  bool has_density() const;  // pi absolutely continuous (stable, Neveu, tabulated)

  // Levy density and tail pi((h, inf)) for the absolutely continuous families
  double levy_density(double h) const;
  double levy_tail(double h) const;

  // drift beta' of the truncated Levy-Khintchine form
  //   Psi(q) = sigma2/2 q^2 - beta' q + int (e^{-qx} - 1 + qx 1{x<=1}) pi(dx)
  double lk_beta() const;

  std::string describe() const;

 private:
  double sigma2_;
  double beta_;
  LevyFamily levy_;
};

// c'_alpha of pi(dh) = c'_alpha h^{-1-alpha} dh
double stable_density_constant(const StableLevy& s);

enum class CriticalityKind { Subcritical, Critical, Supercritical };

struct Criticality {
  CriticalityKind kind;
  double rho;  // largest root of Psi, +inf when Psi < 0 on (0, inf)
};

struct GreyReport {
  bool extinction;
  bool explosion;
  bool transient;
};

double psi(const BranchingMechanism& mech, double q);
double psi_prime(const BranchingMechanism& mech, double q);
double psi_prime_zero(const BranchingMechanism& mech);  // may be -inf

Criticality classify(const BranchingMechanism& mech);
GreyReport grey(const BranchingMechanism& mech);

// v_t(lambda): closed form where available, else the ODE
double v(const BranchingMechanism& mech, double t, double lam);
// always integrates dv/dt = -Psi(v) numerically
double v_ode(const BranchingMechanism& mech, double t, double lam);
double v_inf(const BranchingMechanism& mech, double t);
double v_zero(const BranchingMechanism& mech, double t);

double qsd_laplace(const BranchingMechanism& mech, double u);

// p_theta(k) and sum_{j>=k} p_theta(j)
double rate_measure(const BranchingMechanism& mech, double theta, int k);
double rate_tail(const BranchingMechanism& mech, double theta, int k);

}  // namespace csbp
