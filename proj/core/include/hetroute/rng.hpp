#ifndef HETROUTE_RNG_HPP
#define HETROUTE_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hetroute {

/// Deterministic random stream. Wraps mt19937_64 but derives doubles by
/// hand so that sequences are identical across standard libraries; every
/// seeded run of any command reproduces byte-identical output.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [0, n). Rejection-free modulo is fine at desk scale.
  long uniform_int(long n) {
    return static_cast<long>(gen_() % static_cast<std::uint64_t>(n));
  }

  /// Exponential with the given rate; never returns 0.
  double exponential(double rate = 1.0) {
    return -std::log1p(-uniform()) / rate;
  }

  /// Flat Dirichlet(1,...,1) over k coordinates.
  std::vector<double> dirichlet(int k) {
    std::vector<double> x(static_cast<std::size_t>(k));
    double sum = 0.0;
    for (auto& v : x) {
      v = exponential();
      sum += v;
    }
    for (auto& v : x) v /= sum;
    return x;
  }

  /// Sub-stream derivation, used to partition seeds across workers.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t index) {
    // splitmix64 finalizer over seed+index
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace hetroute

#endif
