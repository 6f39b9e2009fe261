#pragma once

#include <Eigen/Dense>

namespace bmf {

using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// J-by-T data matrix with an explicit missingness mask (true = observed).
/// Observed cells must be finite; a matrix with no observed entry is rejected.
struct ObservedMatrix {
  Eigen::MatrixXd values;
  Mask mask;

  ObservedMatrix() = default;
  ObservedMatrix(Eigen::MatrixXd values_in, Mask mask_in);

  /// Fully observed convenience constructor.
  explicit ObservedMatrix(Eigen::MatrixXd values_in);

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
  Eigen::Index n_observed() const;
  Eigen::Index n_missing() const { return values.size() - n_observed(); }
};

/// Three-component factorization (Phi, omega, Psi) with Phi J-by-K and Psi
/// T-by-K column-orthonormal up to a soft tolerance, and omega descending
/// nonnegative. Constraints are soft during sampling; validate() checks them
/// post hoc.
struct Factorization {
  Eigen::MatrixXd phi;
  Eigen::MatrixXd psi;
  Eigen::VectorXd omega;

  Eigen::Index k() const { return omega.size(); }

  /// Throws std::invalid_argument naming the violated rule.
  void validate(double eps_unitary = 1e-2, double eps_order = 1e-6) const;
};

/// Largest K with J*K + K + T*K <= J*T, i.e. floor(JT / (J+T+1)).
int max_rank(int j, int t);

/// Phi * diag(omega) * Psi^T.
Eigen::MatrixXd compose_theta(const Factorization& f);

/// Forward difference transform: (w1-w2, ..., w_{K-1}-w_K, w_K).
Eigen::VectorXd to_increments(const Eigen::VectorXd& omega);

/// Backward transform (suffix sums): w_k = sum_{l>=k} increments_l.
/// Nonnegative input yields a descending nonnegative output by construction.
Eigen::VectorXd from_increments(const Eigen::VectorXd& omega_star);

/// Shares (w_1^2, ..., w_K^2, 1/tau) / (sum_k w_k^2 + 1/tau); length K+1,
/// sums to one. Throws for tau <= 0.
Eigen::VectorXd variance_decomposition(const Eigen::VectorXd& omega, double tau);

/// Frobenius distance of X^T X from the identity.
double unitarity_violation(const Eigen::MatrixXd& x);

}  // namespace bmf
