#pragma once

#include <Eigen/Dense>

#include "bmf/model.hpp"
#include "bmf/priors.hpp"
#include "bmf/rng.hpp"

namespace bmf {

/// Which mixture weights enter the z conditional: the stick weights gamma
/// (proper categorical, the default) or the cumulative weights pi (literal
/// reading of the update).
enum class ZWeights { Stick, Cumulative };

/// Draw each z_k from the discrete conditional with unnormalized weights
/// w_l * f_E(omega_k | delta) for l <= k and w_l * f_L(omega_k | kappa1,
/// kappa2) for l > k. Weights are normalized in log space. Returns 1-based
/// labels.
Eigen::VectorXi gibbs_update_z(const Eigen::VectorXd& omega, const Eigen::VectorXd& weights,
                               const CspeHyper& hyper, Rng& rng);

/// Draw upsilon_k ~ Beta(1 + #{z_l = k}, alpha + #{z_l > k}) for k < K, pin
/// upsilon_K = 1 and refresh gamma and pi in place.
void gibbs_update_upsilon(const Eigen::VectorXi& z, double alpha, SpikeSlabState& state,
                          Rng& rng);

/// lambda_k = delta when z_k <= k (spike), else Gamma(kappa1 + 1,
/// kappa2 + omega_k).
Eigen::VectorXd gibbs_update_lambda(const Eigen::VectorXi& z, const Eigen::VectorXd& omega,
                                    const CspeHyper& hyper, Rng& rng);

/// tau ~ Gamma(nu1 + JT/2, nu2 + ||Y - Theta||_F^2 / 2) on the completed
/// matrix.
double gibbs_update_tau(const Eigen::MatrixXd& y, const Eigen::MatrixXd& theta, double nu1,
                        double nu2, Rng& rng);

/// Redraw every masked-false cell of y from N(theta_jt, 1/tau); observed
/// cells are untouched.
void impute_missing(Eigen::MatrixXd& y, const Mask& mask, const Eigen::MatrixXd& theta,
                    double tau, Rng& rng);

/// Latent state of the independent spike-and-slab mixture: binary spike
/// indicators and per-index weights with a uniform prior.
struct SseState {
  Eigen::VectorXi spike;  // 1 = spike component
  Eigen::VectorXd pi;     // spike probabilities
  Eigen::VectorXd lambda;
};

/// One full sweep of the SSE latents: indicator from the marginalized
/// spike/slab densities, pi_k ~ Beta(1 + s_k, 2 - s_k), then the rate.
void sse_update(SseState& state, const Eigen::VectorXd& omega, const CspeHyper& hyper,
                Rng& rng);

}  // namespace bmf
