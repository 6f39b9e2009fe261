#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bmf/chain.hpp"
#include "bmf/model.hpp"
#include "bmf/priors.hpp"

namespace bmf {

/// One Monte Carlo benchmark configuration: matrix size, true rank,
/// signal-to-noise ratio, missing share, replication count and the prior
/// grid run against the shared data of each replication.
struct Scenario {
  int j = 30;
  int t = 30;
  int true_rank = 3;
  double snr = 10.0;
  double missing_fraction = 0.0;
  int replications = 80;
  std::vector<PriorSpec> prior_grid;
  std::uint64_t seed = 0;
  SamplerConfig sampler;
  int k = 0;        // 0 = auto from max_rank(j, t)
  int workers = 0;  // 0 = hardware concurrency

  int model_rank() const { return k > 0 ? k : max_rank(j, t); }
  void validate() const;
};

struct DgpDraw {
  Eigen::MatrixXd theta0;  // normalized true matrix, rank = true_rank
  Eigen::VectorXd omega0;  // full singular value spectrum of theta0
  ObservedMatrix y;
};

/// Low-rank factor DGP: Theta0 = A F with standard normal entries, factor
/// rows centered so the overall mean is exactly zero without breaking the
/// rank, then scaled to unit variance over all JT cells. Noise variance is
/// 1/snr; missing cells are drawn uniformly without replacement.
DgpDraw generate_dgp(const Scenario& scenario, std::uint64_t rep_seed);

}  // namespace bmf
