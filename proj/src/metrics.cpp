#include "bmf/metrics.hpp"

#include <cmath>
#include <stdexcept>

namespace bmf {

MetricRow compute_metrics(const Eigen::VectorXd& estimate_omega,
                          const Eigen::VectorXd& truth_omega,
                          const Eigen::MatrixXd& estimate_theta,
                          const Eigen::MatrixXd& truth_theta, const Mask* mask) {
  if (estimate_theta.rows() != truth_theta.rows() ||
      estimate_theta.cols() != truth_theta.cols()) {
    throw std::invalid_argument("compute_metrics: theta shape mismatch");
  }
  const Eigen::Index k = estimate_omega.size();

  MetricRow row;
  for (Eigen::Index i = 0; i < k; ++i) {
    const double truth = i < truth_omega.size() ? truth_omega(i) : 0.0;
    const double d = estimate_omega(i) - truth;
    row.ae_omega += std::abs(d);
    row.se_omega += d * d;
  }
  // Truth entries beyond K must be numerically zero (rank below K).
  for (Eigen::Index i = k; i < truth_omega.size(); ++i) {
    if (std::abs(truth_omega(i)) > 1e-8) {
      throw std::invalid_argument("compute_metrics: truth spectrum extends past K");
    }
  }

  for (Eigen::Index c = 0; c < truth_theta.cols(); ++c) {
    for (Eigen::Index r = 0; r < truth_theta.rows(); ++r) {
      const double d = estimate_theta(r, c) - truth_theta(r, c);
      row.ae_theta += std::abs(d);
      row.se_theta += d * d;
      if (mask != nullptr && !(*mask)(r, c)) {
        row.ae_theta_missing += std::abs(d);
        row.se_theta_missing += d * d;
      }
    }
  }
  return row;
}

}  // namespace bmf
