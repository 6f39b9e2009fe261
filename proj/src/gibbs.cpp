#include "bmf/gibbs.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace bmf {

namespace {

// Spike/slab log kernels extended to the slightly negative omega values the
// sigmoid relaxation can produce; they agree with the pdf on omega >= 0 and
// keep the Gibbs conditionals consistent with the relaxed NUTS kernel.
double log_spike_kernel(double omega, const CspeHyper& h) {
  return std::log(h.delta) - h.delta * omega;
}

double log_slab_kernel(double omega, const CspeHyper& h) {
  if (omega <= -h.kappa2) return -std::numeric_limits<double>::infinity();
  return std::log(h.kappa1 / h.kappa2) - (h.kappa1 + 1.0) * std::log1p(omega / h.kappa2);
}

}  // namespace

Eigen::VectorXi gibbs_update_z(const Eigen::VectorXd& omega, const Eigen::VectorXd& weights,
                               const CspeHyper& hyper, Rng& rng) {
  const Eigen::Index k = omega.size();
  if (weights.size() != k) throw std::invalid_argument("gibbs_update_z: weight length mismatch");
  Eigen::VectorXi z(k);
  std::vector<double> logw(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const double log_spike = log_spike_kernel(omega(i), hyper);
    const double log_slab = log_slab_kernel(omega(i), hyper);
    for (Eigen::Index l = 0; l < k; ++l) {
      const double lw = weights(l) > 0.0 ? std::log(weights(l))
                                         : -std::numeric_limits<double>::infinity();
      logw[static_cast<std::size_t>(l)] = lw + (l <= i ? log_spike : log_slab);
    }
    z(i) = rng.categorical_from_log(logw) + 1;
  }
  return z;
}

void gibbs_update_upsilon(const Eigen::VectorXi& z, double alpha, SpikeSlabState& state,
                          Rng& rng) {
  const Eigen::Index k = z.size();
  state.upsilon.resize(k);
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    const int label = static_cast<int>(i) + 1;
    int n_equal = 0, n_greater = 0;
    for (Eigen::Index l = 0; l < k; ++l) {
      if (z(l) == label) ++n_equal;
      if (z(l) > label) ++n_greater;
    }
    state.upsilon(i) = rng.beta(1.0 + n_equal, alpha + n_greater);
  }
  state.upsilon(k - 1) = 1.0;
  auto [gamma, pi] = stick_breaking(state.upsilon);
  state.gamma = std::move(gamma);
  state.pi = std::move(pi);
  state.z = z;
}

Eigen::VectorXd gibbs_update_lambda(const Eigen::VectorXi& z, const Eigen::VectorXd& omega,
                                    const CspeHyper& hyper, Rng& rng) {
  const Eigen::Index k = omega.size();
  if (z.size() != k) throw std::invalid_argument("gibbs_update_lambda: z length mismatch");
  Eigen::VectorXd lambda(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    if (z(i) <= static_cast<int>(i) + 1) {
      lambda(i) = hyper.delta;
    } else {
      // kappa2 + omega stays positive: the slab label has zero conditional
      // probability once omega <= -kappa2.
      lambda(i) = rng.gamma(hyper.kappa1 + 1.0, hyper.kappa2 + omega(i));
    }
  }
  return lambda;
}

double gibbs_update_tau(const Eigen::MatrixXd& y, const Eigen::MatrixXd& theta, double nu1,
                        double nu2, Rng& rng) {
  if (y.rows() != theta.rows() || y.cols() != theta.cols()) {
    throw std::invalid_argument("gibbs_update_tau: shape mismatch");
  }
  const double sse = (y - theta).squaredNorm();
  const double shape = nu1 + 0.5 * static_cast<double>(y.size());
  const double rate = nu2 + 0.5 * sse;
  return rng.gamma(shape, rate);
}

void impute_missing(Eigen::MatrixXd& y, const Mask& mask, const Eigen::MatrixXd& theta,
                    double tau, Rng& rng) {
  if (tau <= 0.0) throw std::invalid_argument("impute_missing: tau must be > 0");
  const double sd = 1.0 / std::sqrt(tau);
  for (Eigen::Index t = 0; t < y.cols(); ++t) {
    for (Eigen::Index j = 0; j < y.rows(); ++j) {
      if (!mask(j, t)) y(j, t) = theta(j, t) + sd * rng.normal();
    }
  }
}

void sse_update(SseState& state, const Eigen::VectorXd& omega, const CspeHyper& hyper,
                Rng& rng) {
  const Eigen::Index k = omega.size();
  state.spike.resize(k);
  state.lambda.resize(k);
  if (state.pi.size() != k) throw std::invalid_argument("sse_update: pi length mismatch");
  for (Eigen::Index i = 0; i < k; ++i) {
    const double log_spike = std::log(state.pi(i)) + log_spike_kernel(omega(i), hyper);
    const double log_slab = std::log1p(-state.pi(i)) + log_slab_kernel(omega(i), hyper);
    const double m = std::max(log_spike, log_slab);
    const double p_spike = std::exp(log_spike - m) /
                           (std::exp(log_spike - m) + std::exp(log_slab - m));
    state.spike(i) = rng.uniform() < p_spike ? 1 : 0;
    state.pi(i) = rng.beta(1.0 + state.spike(i), 2.0 - state.spike(i));
    state.lambda(i) = state.spike(i) == 1
                          ? hyper.delta
                          : rng.gamma(hyper.kappa1 + 1.0, hyper.kappa2 + omega(i));
  }
}

}  // namespace bmf
