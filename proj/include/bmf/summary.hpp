#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bmf/chain.hpp"

namespace bmf {

struct CredibleScalar {
  double mean = 0.0;
  double lower = 0.0;  // 2.5% quantile
  double upper = 0.0;  // 97.5% quantile
};

/// Posterior summary recomputable from a draw store alone: per-k omega
/// summaries, a kernel density grid of the noise variance, the posterior
/// mean of Theta, variance-decomposition shares and the signal-to-noise
/// posterior mean.
struct PosteriorSummary {
  std::vector<CredibleScalar> omega;            // length K
  Eigen::VectorXd tau_inv_grid;                 // 512 points
  Eigen::VectorXd tau_inv_density;
  Eigen::MatrixXd theta_mean;                   // J x T
  std::vector<CredibleScalar> variance_shares;  // length K+1, noise share last
  double tau_mean = 0.0;
  double snr_mean = 0.0;
  long n_draws = 0;
};

/// Empirical quantile with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

/// Gaussian kernel density on an equally spaced grid (Silverman bandwidth).
void kernel_density(const std::vector<double>& values, int grid_points,
                    Eigen::VectorXd& grid, Eigen::VectorXd& density);

/// Builds the summary from retained draws; requires at least two. The Theta
/// mean is recomputed from the stored factors when present so that a summary
/// computed at fit time and one recomputed from the persisted store agree
/// bit for bit.
PosteriorSummary summarize_store(const DrawStore& store);

}  // namespace bmf
