#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace csbp {

// splitmix64 finalizer, used to derive replicate seeds
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// seed_i = master xor hash(i)
inline std::uint64_t replicate_seed(std::uint64_t master, std::uint64_t i) {
  return master ^ mix64(i);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  // uniform on the open interval (0,1)
  double uniform() {
    double u;
    do {
      u = std::generate_canonical<double, 53>(eng_);
    } while (u <= 0.0);
    return u;
  }
  double exponential(double rate) { return -std::log(uniform()) / rate; }
  std::uint64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    std::poisson_distribution<std::uint64_t> d(mean);
    return d(eng_);
  }
  double gamma(double shape, double rate) {
    std::gamma_distribution<double> d(shape, 1.0 / rate);
    return d(eng_);
  }
  // number of failures before the first success
  std::uint64_t geometric(double p) {
    if (p >= 1.0) return 0;
    std::geometric_distribution<std::uint64_t> d(p);
    return d(eng_);
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace csbp
