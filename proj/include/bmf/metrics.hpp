#pragma once

#include <Eigen/Dense>
#include <string>

#include "bmf/model.hpp"

namespace bmf {

/// Sum-of-absolute-error and sum-of-squared-error metrics of the posterior
/// mean estimates against the DGP truth. Theta errors run over all JT cells;
/// the missing-only variants are filled when a mask is supplied and are zero
/// otherwise.
struct MetricRow {
  std::string prior_label;
  double ae_omega = 0.0;
  double se_omega = 0.0;
  double ae_theta = 0.0;
  double se_theta = 0.0;
  double ae_theta_missing = 0.0;
  double se_theta_missing = 0.0;
};

/// The truth spectrum is padded with zeros (or trimmed past its true rank)
/// to the estimate's length K before differencing.
MetricRow compute_metrics(const Eigen::VectorXd& estimate_omega,
                          const Eigen::VectorXd& truth_omega,
                          const Eigen::MatrixXd& estimate_theta,
                          const Eigen::MatrixXd& truth_theta, const Mask* mask = nullptr);

}  // namespace bmf
