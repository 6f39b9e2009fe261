#include "bmf/summary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bmf {

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("quantile: p outside [0,1]");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return (1.0 - frac) * values[lo] + frac * values[hi];
}

void kernel_density(const std::vector<double>& values, int grid_points,
                    Eigen::VectorXd& grid, Eigen::VectorXd& density) {
  if (values.size() < 2) throw std::invalid_argument("kernel_density: need at least two values");
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (n - 1.0));

  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double q1 = quantile(sorted, 0.25), q3 = quantile(sorted, 0.75);
  const double iqr = q3 - q1;
  double spread = sd;
  if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
  double bw = 0.9 * spread * std::pow(n, -0.2);
  if (!(bw > 0.0)) bw = std::max(std::abs(mean) * 1e-6, 1e-12);

  const double lo = sorted.front() - 3.0 * bw;
  const double hi = sorted.back() + 3.0 * bw;
  grid.resize(grid_points);
  density.resize(grid_points);
  const double step = grid_points > 1 ? (hi - lo) / (grid_points - 1) : 0.0;
  const double norm = 1.0 / (n * bw * std::sqrt(2.0 * M_PI));
  for (int g = 0; g < grid_points; ++g) {
    const double x = lo + step * g;
    double acc = 0.0;
    for (double v : values) {
      const double u = (x - v) / bw;
      acc += std::exp(-0.5 * u * u);
    }
    grid(g) = x;
    density(g) = norm * acc;
  }
}

PosteriorSummary summarize_store(const DrawStore& store) {
  const Eigen::Index n = store.n_draws();
  if (n < 2) {
    throw std::runtime_error("summarize_store: at least two retained draws are required");
  }
  const Eigen::Index k = store.k;
  PosteriorSummary s;
  s.n_draws = n;

  auto credible = [n](std::vector<double>& values) {
    CredibleScalar c;
    double sum = 0.0;
    for (double v : values) sum += v;
    c.mean = sum / static_cast<double>(n);
    c.lower = quantile(values, 0.025);
    c.upper = quantile(values, 0.975);
    return c;
  };

  std::vector<double> column(static_cast<std::size_t>(n));
  for (Eigen::Index c = 0; c < k; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) column[static_cast<std::size_t>(r)] = store.omega(r, c);
    s.omega.push_back(credible(column));
  }

  std::vector<double> tau_inv(static_cast<std::size_t>(n));
  double tau_sum = 0.0, snr_sum = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    tau_inv[static_cast<std::size_t>(r)] = 1.0 / store.tau(r);
    tau_sum += store.tau(r);
    snr_sum += store.tau(r) * store.omega.row(r).squaredNorm();
  }
  s.tau_mean = tau_sum / static_cast<double>(n);
  s.snr_mean = snr_sum / static_cast<double>(n);
  kernel_density(tau_inv, 512, s.tau_inv_grid, s.tau_inv_density);

  // Shares per draw, then summarized componentwise.
  Eigen::MatrixXd shares(n, k + 1);
  for (Eigen::Index r = 0; r < n; ++r) {
    shares.row(r) =
        variance_decomposition(store.omega.row(r).transpose(), store.tau(r)).transpose();
  }
  for (Eigen::Index c = 0; c <= k; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) column[static_cast<std::size_t>(r)] = shares(r, c);
    s.variance_shares.push_back(credible(column));
  }

  if (store.has_factors()) {
    // Same incremental mean, in the same order, as the in-run accumulation.
    s.theta_mean = Eigen::MatrixXd::Zero(store.j, store.t);
    for (Eigen::Index r = 0; r < n; ++r) {
      // Rows of the store are strided; materialize before mapping as J x K.
      const Eigen::VectorXd phi_flat = store.phi.row(r);
      const Eigen::VectorXd psi_flat = store.psi.row(r);
      const Eigen::Map<const Eigen::MatrixXd> phi(phi_flat.data(), store.j, store.k);
      const Eigen::Map<const Eigen::MatrixXd> psi(psi_flat.data(), store.t, store.k);
      const Eigen::MatrixXd theta =
          phi * store.omega.row(r).transpose().asDiagonal() * psi.transpose();
      s.theta_mean += (theta - s.theta_mean) / static_cast<double>(r + 1);
    }
  } else {
    s.theta_mean = store.theta_mean;
  }
  return s;
}

}  // namespace bmf
