#include "bmf/model.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace bmf {

ObservedMatrix::ObservedMatrix(Eigen::MatrixXd values_in, Mask mask_in)
    : values(std::move(values_in)), mask(std::move(mask_in)) {
  if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
    throw std::invalid_argument("ObservedMatrix: values and mask shapes differ");
  }
  if (values.size() == 0) {
    throw std::invalid_argument("ObservedMatrix: empty matrix");
  }
  bool any_observed = false;
  for (Eigen::Index t = 0; t < values.cols(); ++t) {
    for (Eigen::Index j = 0; j < values.rows(); ++j) {
      if (!mask(j, t)) continue;
      any_observed = true;
      if (!std::isfinite(values(j, t))) {
        throw std::invalid_argument("ObservedMatrix: non-finite value at observed cell (" +
                                    std::to_string(j) + "," + std::to_string(t) + ")");
      }
    }
  }
  if (!any_observed) {
    throw std::invalid_argument(
        "ObservedMatrix: every entry is missing; at least one observed entry is required");
  }
}

ObservedMatrix::ObservedMatrix(Eigen::MatrixXd values_in) {
  Mask all = Mask::Constant(values_in.rows(), values_in.cols(), true);
  *this = ObservedMatrix(std::move(values_in), std::move(all));
}

Eigen::Index ObservedMatrix::n_observed() const {
  Eigen::Index n = 0;
  for (Eigen::Index t = 0; t < mask.cols(); ++t) {
    for (Eigen::Index j = 0; j < mask.rows(); ++j) {
      if (mask(j, t)) ++n;
    }
  }
  return n;
}

void Factorization::validate(double eps_unitary, double eps_order) const {
  const Eigen::Index kk = omega.size();
  if (phi.cols() != kk || psi.cols() != kk) {
    throw std::invalid_argument("Factorization: phi/psi column count must equal omega length");
  }
  const Eigen::Index j = phi.rows();
  const Eigen::Index t = psi.rows();
  if (kk > max_rank(static_cast<int>(j), static_cast<int>(t))) {
    throw std::invalid_argument("Factorization: K exceeds floor(JT/(J+T+1))");
  }
  const double viol_phi = unitarity_violation(phi);
  const double viol_psi = unitarity_violation(psi);
  if (viol_phi > eps_unitary) {
    throw std::invalid_argument("Factorization: phi columns not orthonormal, |Phi'Phi - I|_F = " +
                                std::to_string(viol_phi));
  }
  if (viol_psi > eps_unitary) {
    throw std::invalid_argument("Factorization: psi columns not orthonormal, |Psi'Psi - I|_F = " +
                                std::to_string(viol_psi));
  }
  for (Eigen::Index i = 0; i < kk; ++i) {
    if (omega(i) < -eps_order) {
      throw std::invalid_argument("Factorization: omega has a negative entry");
    }
    if (i + 1 < kk && omega(i + 1) - omega(i) > eps_order) {
      throw std::invalid_argument("Factorization: omega is not descending");
    }
  }
}

int max_rank(int j, int t) {
  if (j < 1 || t < 1) throw std::invalid_argument("max_rank: dimensions must be >= 1");
  const long long num = static_cast<long long>(j) * t;
  const long long den = static_cast<long long>(j) + t + 1;
  return static_cast<int>(num / den);
}

Eigen::MatrixXd compose_theta(const Factorization& f) {
  if (f.phi.cols() != f.omega.size() || f.psi.cols() != f.omega.size()) {
    throw std::invalid_argument("compose_theta: dimension mismatch");
  }
  return f.phi * f.omega.asDiagonal() * f.psi.transpose();
}

Eigen::VectorXd to_increments(const Eigen::VectorXd& omega) {
  const Eigen::Index k = omega.size();
  Eigen::VectorXd d(k);
  for (Eigen::Index i = 0; i + 1 < k; ++i) d(i) = omega(i) - omega(i + 1);
  if (k > 0) d(k - 1) = omega(k - 1);
  return d;
}

Eigen::VectorXd from_increments(const Eigen::VectorXd& omega_star) {
  const Eigen::Index k = omega_star.size();
  Eigen::VectorXd w(k);
  double acc = 0.0;
  for (Eigen::Index i = k - 1; i >= 0; --i) {
    acc += omega_star(i);
    w(i) = acc;
  }
  return w;
}

Eigen::VectorXd variance_decomposition(const Eigen::VectorXd& omega, double tau) {
  if (tau <= 0.0) throw std::invalid_argument("variance_decomposition: tau must be > 0");
  const Eigen::Index k = omega.size();
  Eigen::VectorXd shares(k + 1);
  const double noise = 1.0 / tau;
  const double total = omega.squaredNorm() + noise;
  for (Eigen::Index i = 0; i < k; ++i) shares(i) = omega(i) * omega(i) / total;
  shares(k) = noise / total;
  return shares;
}

double unitarity_violation(const Eigen::MatrixXd& x) {
  Eigen::MatrixXd g = x.transpose() * x;
  g.diagonal().array() -= 1.0;
  return g.norm();
}

}  // namespace bmf
