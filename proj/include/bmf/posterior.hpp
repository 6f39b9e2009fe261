#pragma once

#include <Eigen/Dense>

#include "bmf/model.hpp"
#include "bmf/priors.hpp"

namespace bmf {

/// Warm-up schedule for the relaxation strengths eta_1 (orthonormality) and
/// eta_2 (nonnegative increments): eta rises along the scaled exponential CDF
/// and is clamped at eta_bar once the iteration index reaches it.
struct RelaxationSchedule {
  double eta_bar1 = 1e3;
  double eta_bar2 = 1e3;
  double a_eta = 0.5;
  double b_eta = 0.1;

  double eta(long iteration, int which) const;
};

/// Everything the relaxed kernel of theta = (vec Phi, vec Psi, omega_star)
/// conditions on: the completed data matrix, the noise precision, the
/// per-index exponential rates (SSE/CSPE only), the relaxation strengths and
/// the prior. References must outlive the context.
struct KernelContext {
  const Eigen::MatrixXd& y;  // completed data, imputations filled in
  double tau = 1.0;
  Eigen::VectorXd rates;  // empty unless the prior needs conditional rates
  double eta1 = 0.0;
  double eta2 = 0.0;
  const PriorSpec& prior;
  int k = 1;
  /// Above this many doubles the omega_star likelihood gradient switches from
  /// a materialized (JT)-by-K basis matrix to streaming column dot products.
  Eigen::Index dense_basis_budget = Eigen::Index(1) << 22;
};

/// Flat parameter layout: [vec Phi | vec Psi | omega_star], column-major.
struct ThetaView {
  Eigen::Map<const Eigen::MatrixXd> phi;
  Eigen::Map<const Eigen::MatrixXd> psi;
  Eigen::Map<const Eigen::VectorXd> omega_star;
};

ThetaView split_theta(const Eigen::VectorXd& theta, Eigen::Index j, Eigen::Index t,
                      Eigen::Index k);

Eigen::VectorXd pack_theta(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi,
                           const Eigen::VectorXd& omega_star);

/// Log of the relaxed conditional posterior kernel: Gaussian log likelihood of
/// the completed matrix (with its additive constant), both orthonormality
/// penalties, the sigmoid relaxation of omega_star >= 0, and the prior on
/// omega(omega_star). Non-finite values signal divergence to the sampler.
double log_kernel(const Eigen::VectorXd& theta, const KernelContext& ctx);

/// Analytic gradient of log_kernel, stacked in the theta layout.
Eigen::VectorXd grad_log_kernel(const Eigen::VectorXd& theta, const KernelContext& ctx);

/// Column signs of phi's first row (fallback: first nonzero element of the
/// column; +1 for an all-zero column).
Eigen::VectorXi reference_signs(const Eigen::MatrixXd& phi);

/// Flip matching columns of phi and psi so that sign(phi(0,k)) agrees with
/// the reference; Theta is unchanged. Idempotent.
Factorization align_signs(const Factorization& current, const Eigen::VectorXi& ref_signs);

/// In-place variant used in the sampling loop; accepts mapped blocks.
void align_signs_inplace(Eigen::Ref<Eigen::MatrixXd> phi, Eigen::Ref<Eigen::MatrixXd> psi,
                         const Eigen::VectorXi& ref_signs);

}  // namespace bmf
