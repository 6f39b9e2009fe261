#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace bmf {

/// Deterministic random number source. All samplers draw through this class
/// rather than <random> distributions, so that a (seed, call sequence) pair
/// produces the same stream on every platform and standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential(double rate);

  /// Gamma with shape-rate parameterization (Marsaglia-Tsang squeeze).
  double gamma(double shape, double rate);

  double beta(double a, double b);

  /// Index draw from unnormalized log weights (max-shifted softmax).
  int categorical_from_log(std::span<const double> log_weights);

  /// Random permutation indices 0..n-1 (Fisher-Yates).
  std::vector<int> permutation(int n);

 private:
  std::mt19937_64 engine_;
};

/// Stream derivation for parallel work: hashes a root seed together with a
/// list of integer tags (e.g. {replication, prior index}) through splitmix64
/// so that every (root, tags) pair yields an independent, order-free stream.
std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags);

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace bmf
