#include "bmf/posterior.hpp"

#include <cmath>
#include <stdexcept>

namespace bmf {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

// log(1 + exp(u)) without overflow.
double softplus(double u) {
  if (u > 0.0) return u + std::log1p(std::exp(-u));
  return std::log1p(std::exp(u));
}

// 1 / (1 + exp(-u)) evaluated stably.
double sigmoid(double u) {
  if (u >= 0.0) {
    const double e = std::exp(-u);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(u);
  return e / (1.0 + e);
}

}  // namespace

double RelaxationSchedule::eta(long iteration, int which) const {
  if (which != 1 && which != 2) throw std::invalid_argument("RelaxationSchedule: which must be 1 or 2");
  const double bar = which == 1 ? eta_bar1 : eta_bar2;
  if (static_cast<double>(iteration) >= bar) return bar;
  const double rate = std::log1p(-a_eta) / (b_eta * bar);
  return bar * (1.0 - std::exp(rate * static_cast<double>(iteration)));
}

ThetaView split_theta(const Eigen::VectorXd& theta, Eigen::Index j, Eigen::Index t,
                      Eigen::Index k) {
  if (theta.size() != j * k + t * k + k) {
    throw std::invalid_argument("split_theta: flat vector has the wrong length");
  }
  const double* base = theta.data();
  return ThetaView{
      Eigen::Map<const Eigen::MatrixXd>(base, j, k),
      Eigen::Map<const Eigen::MatrixXd>(base + j * k, t, k),
      Eigen::Map<const Eigen::VectorXd>(base + j * k + t * k, k),
  };
}

Eigen::VectorXd pack_theta(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& psi,
                           const Eigen::VectorXd& omega_star) {
  const Eigen::Index j = phi.rows(), t = psi.rows(), k = omega_star.size();
  if (phi.cols() != k || psi.cols() != k) {
    throw std::invalid_argument("pack_theta: inconsistent column counts");
  }
  Eigen::VectorXd theta(j * k + t * k + k);
  Eigen::Map<Eigen::MatrixXd>(theta.data(), j, k) = phi;
  Eigen::Map<Eigen::MatrixXd>(theta.data() + j * k, t, k) = psi;
  theta.tail(k) = omega_star;
  return theta;
}

double log_kernel(const Eigen::VectorXd& theta, const KernelContext& ctx) {
  const Eigen::Index j = ctx.y.rows(), t = ctx.y.cols(), k = ctx.k;
  const ThetaView v = split_theta(theta, j, t, k);
  const Eigen::VectorXd omega = from_increments(v.omega_star);

  const Eigen::MatrixXd resid = ctx.y - v.phi * omega.asDiagonal() * v.psi.transpose();
  const double n = static_cast<double>(j * t);
  double lp = -0.5 * ctx.tau * resid.squaredNorm() + 0.5 * n * std::log(ctx.tau / kTwoPi);

  if (ctx.eta1 != 0.0) {
    const double viol_phi = unitarity_violation(v.phi);
    const double viol_psi = unitarity_violation(v.psi);
    lp -= ctx.eta1 * (viol_phi * viol_phi + viol_psi * viol_psi);
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    lp -= softplus(-ctx.eta2 * v.omega_star(i));
  }

  const Eigen::VectorXd* rates = ctx.prior.needs_rates() ? &ctx.rates : nullptr;
  lp += log_prior_and_grad_omega_star(ctx.prior, v.omega_star, rates).first;
  return lp;
}

Eigen::VectorXd grad_log_kernel(const Eigen::VectorXd& theta, const KernelContext& ctx) {
  const Eigen::Index j = ctx.y.rows(), t = ctx.y.cols(), k = ctx.k;
  const ThetaView v = split_theta(theta, j, t, k);
  const Eigen::VectorXd omega = from_increments(v.omega_star);
  const Eigen::DiagonalMatrix<double, Eigen::Dynamic> omega_diag = omega.asDiagonal();

  Eigen::VectorXd grad(theta.size());
  auto grad_phi = Eigen::Map<Eigen::MatrixXd>(grad.data(), j, k);
  auto grad_psi = Eigen::Map<Eigen::MatrixXd>(grad.data() + j * k, t, k);
  auto grad_ws = grad.tail(k);

  // Likelihood blocks: tau * (Y - Theta) Psi Omega and its transpose twin.
  const Eigen::MatrixXd resid = ctx.y - v.phi * omega_diag * v.psi.transpose();
  grad_phi = ctx.tau * (resid * v.psi * omega_diag);
  grad_psi = ctx.tau * (resid.transpose() * v.phi * omega_diag);

  // Orthonormality penalties: -4 eta1 X (X'X - I).
  if (ctx.eta1 != 0.0) {
    Eigen::MatrixXd g = v.phi.transpose() * v.phi;
    g.diagonal().array() -= 1.0;
    grad_phi.noalias() -= 4.0 * ctx.eta1 * (v.phi * g);
    g = v.psi.transpose() * v.psi;
    g.diagonal().array() -= 1.0;
    grad_psi.noalias() -= 4.0 * ctx.eta1 * (v.psi * g);
  }

  // omega_star likelihood block: tau * C^{-T} B' vec(resid), where column k
  // of B is vec(phi_k psi_k'). Materialize B when it fits the budget,
  // otherwise stream the per-column bilinear forms.
  Eigen::VectorXd bt_r(k);
  if (j * t * k <= ctx.dense_basis_budget) {
    Eigen::MatrixXd basis(j * t, k);
    for (Eigen::Index c = 0; c < k; ++c) {
      Eigen::Map<Eigen::MatrixXd>(basis.col(c).data(), j, t) =
          v.phi.col(c) * v.psi.col(c).transpose();
    }
    bt_r.noalias() = basis.transpose() * Eigen::Map<const Eigen::VectorXd>(resid.data(), j * t);
  } else {
    for (Eigen::Index c = 0; c < k; ++c) {
      bt_r(c) = v.phi.col(c).dot(resid * v.psi.col(c));
    }
  }
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += bt_r(i);
    grad_ws(i) = ctx.tau * acc;
  }

  // Sigmoid relaxation: d/dw -softplus(-eta2 w) = eta2 * sigmoid(-eta2 w).
  for (Eigen::Index i = 0; i < k; ++i) {
    grad_ws(i) += ctx.eta2 * sigmoid(-ctx.eta2 * v.omega_star(i));
  }

  const Eigen::VectorXd* rates = ctx.prior.needs_rates() ? &ctx.rates : nullptr;
  grad_ws += log_prior_and_grad_omega_star(ctx.prior, v.omega_star, rates).second;
  return grad;
}

Eigen::VectorXi reference_signs(const Eigen::MatrixXd& phi) {
  Eigen::VectorXi signs(phi.cols());
  for (Eigen::Index c = 0; c < phi.cols(); ++c) {
    double lead = phi(0, c);
    for (Eigen::Index r = 1; lead == 0.0 && r < phi.rows(); ++r) lead = phi(r, c);
    signs(c) = lead < 0.0 ? -1 : 1;
  }
  return signs;
}

void align_signs_inplace(Eigen::Ref<Eigen::MatrixXd> phi, Eigen::Ref<Eigen::MatrixXd> psi,
                         const Eigen::VectorXi& ref_signs) {
  if (ref_signs.size() != phi.cols() || psi.cols() != phi.cols()) {
    throw std::invalid_argument("align_signs: sign vector length must equal K");
  }
  for (Eigen::Index c = 0; c < phi.cols(); ++c) {
    double lead = phi(0, c);
    for (Eigen::Index r = 1; lead == 0.0 && r < phi.rows(); ++r) lead = phi(r, c);
    const int sign = lead < 0.0 ? -1 : 1;
    if (sign != ref_signs(c)) {
      phi.col(c) = -phi.col(c);
      psi.col(c) = -psi.col(c);
    }
  }
}

Factorization align_signs(const Factorization& current, const Eigen::VectorXi& ref_signs) {
  Factorization out = current;
  align_signs_inplace(out.phi, out.psi, ref_signs);
  return out;
}

}  // namespace bmf
