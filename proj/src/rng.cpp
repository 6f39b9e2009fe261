#include "bmf/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace bmf {

double Rng::exponential(double rate) {
  if (rate <= 0.0) throw std::invalid_argument("exponential: rate must be > 0");
  return -std::log(uniform_pos()) / rate;
}

double Rng::gamma(double shape, double rate) {
  if (shape <= 0.0 || rate <= 0.0) {
    throw std::invalid_argument("gamma: shape and rate must be > 0");
  }
  if (shape < 1.0) {
    // Boost to shape+1 and scale back: G(a) = G(a+1) * U^{1/a}.
    const double g = gamma(shape + 1.0, 1.0);
    const double u = uniform_pos();
    return g * std::pow(u, 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform_pos();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::beta(double a, double b) {
  const double x = gamma(a, 1.0);
  const double y = gamma(b, 1.0);
  return x / (x + y);
}

int Rng::categorical_from_log(std::span<const double> log_weights) {
  const int n = static_cast<int>(log_weights.size());
  if (n == 0) throw std::invalid_argument("categorical_from_log: empty weights");
  double mx = log_weights[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, log_weights[i]);
  if (!std::isfinite(mx)) {
    throw std::runtime_error("categorical_from_log: all weights are zero");
  }
  double total = 0.0;
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    w[static_cast<std::size_t>(i)] = std::exp(log_weights[i] - mx);
    total += w[static_cast<std::size_t>(i)];
  }
  const double u = uniform() * total;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    acc += w[static_cast<std::size_t>(i)];
    if (u < acc) return i;
  }
  return n - 1;
}

std::vector<int> Rng::permutation(int n) {
  std::vector<int> idx(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(next_u64() % static_cast<std::uint64_t>(i + 1));
    std::swap(idx[static_cast<std::size_t>(i)], idx[static_cast<std::size_t>(j)]);
  }
  return idx;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
  std::uint64_t h = splitmix64(root);
  for (std::uint64_t t : tags) h = splitmix64(h ^ splitmix64(t + 0x632be59bd9b4e019ULL));
  return h;
}

}  // namespace bmf
