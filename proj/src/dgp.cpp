#include "bmf/dgp.hpp"

#include <cmath>
#include <stdexcept>

#include "bmf/rng.hpp"

namespace bmf {

void Scenario::validate() const {
  if (j < 1 || t < 1) throw std::invalid_argument("Scenario: dimensions must be >= 1");
  if (true_rank < 1 || true_rank >= std::min(j, t)) {
    throw std::invalid_argument("Scenario: true rank must lie in 1..min(J,T)-1");
  }
  if (model_rank() < 1 || model_rank() > max_rank(j, t)) {
    throw std::invalid_argument("Scenario: K must lie in 1..max_rank(J,T)");
  }
  if (true_rank > model_rank()) {
    throw std::invalid_argument("Scenario: true rank exceeds the model rank");
  }
  if (snr <= 0.0) throw std::invalid_argument("Scenario: snr must be > 0");
  if (!(missing_fraction >= 0.0 && missing_fraction < 1.0)) {
    throw std::invalid_argument("Scenario: missing fraction must lie in [0,1)");
  }
  if (replications < 1) throw std::invalid_argument("Scenario: replications must be >= 1");
  if (prior_grid.empty()) throw std::invalid_argument("Scenario: empty prior grid");
  sampler.validate();
}

DgpDraw generate_dgp(const Scenario& scenario, std::uint64_t rep_seed) {
  const int j = scenario.j, t = scenario.t, kstar = scenario.true_rank;
  if (kstar >= std::min(j, t)) {
    throw std::invalid_argument("generate_dgp: true rank must be below min(J,T)");
  }
  Rng rng(rep_seed);

  Eigen::MatrixXd loadings(j, kstar);
  for (int c = 0; c < kstar; ++c) {
    for (int r = 0; r < j; ++r) loadings(r, c) = rng.normal();
  }
  Eigen::MatrixXd factors(kstar, t);
  for (int c = 0; c < t; ++c) {
    for (int r = 0; r < kstar; ++r) factors(r, c) = rng.normal();
  }
  // Center each factor series; the product then has exact zero mean and the
  // centering is rank-preserving, unlike demeaning the product itself.
  factors.colwise() -= factors.rowwise().mean();

  Eigen::MatrixXd theta0 = loadings * factors;
  const double sd = std::sqrt(theta0.squaredNorm() / static_cast<double>(j * t));
  if (sd <= 0.0) throw std::runtime_error("generate_dgp: degenerate draw with zero variance");
  theta0 /= sd;

  const double tau = scenario.snr;  // unit signal variance after normalization
  const double noise_sd = 1.0 / std::sqrt(tau);
  Eigen::MatrixXd values = theta0;
  for (int c = 0; c < t; ++c) {
    for (int r = 0; r < j; ++r) values(r, c) += noise_sd * rng.normal();
  }

  Mask mask = Mask::Constant(j, t, true);
  const long n_missing = std::lround(scenario.missing_fraction * j * t);
  if (n_missing > 0) {
    const std::vector<int> order = rng.permutation(j * t);
    for (long m = 0; m < n_missing; ++m) {
      const int cell = order[static_cast<std::size_t>(m)];
      mask(cell % j, cell / j) = false;
    }
  }

  DgpDraw draw;
  draw.omega0 = Eigen::BDCSVD<Eigen::MatrixXd>(theta0).singularValues();
  draw.theta0 = std::move(theta0);
  draw.y = ObservedMatrix(std::move(values), std::move(mask));
  return draw;
}

}  // namespace bmf
