#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <utility>

namespace bmf {

/// Hyperparameters of the cumulative-shrinkage spike-and-slab hierarchy:
/// spike rate delta, slab Gamma(kappa1, kappa2) on the exponential rate
/// (Lomax(kappa1, kappa2) marginal), stick-breaking concentration alpha,
/// truncation K.
struct CspeHyper {
  double delta = 10.0;
  double kappa1 = 2.0;
  double kappa2 = 20.0;
  double alpha = 1.0;
  int k = 1;

  void validate() const;
};

/// Latent stick-breaking state: z_k in 1..K selects the mixture component of
/// the rate lambda_k (spike iff z_k <= k), upsilon are Beta sticks with
/// upsilon_K = 1, gamma the stick weights, pi their running sums.
struct SpikeSlabState {
  Eigen::VectorXi z;        // 1-based component labels
  Eigen::VectorXd upsilon;  // sticks, last equals 1
  Eigen::VectorXd gamma;    // weights, sum to 1
  Eigen::VectorXd pi;       // cumulative weights, nondecreasing, last equals 1
  Eigen::VectorXd lambda;   // exponential rates, all > 0
};

enum class PriorFamily { Noninformative, Exponential, Lomax, Sse, Cspe };

/// Tagged union of the five prior families on the singular values.
struct PriorSpec {
  PriorFamily family = PriorFamily::Noninformative;
  double chi = 1.0;    // Exponential rate
  double mu1 = 2.0;    // Lomax shape
  double mu2 = 20.0;   // Lomax scale
  CspeHyper hyper;     // Sse (alpha ignored) and Cspe
  std::string display;  // optional table label; label() derives one if empty

  static PriorSpec noninformative();
  static PriorSpec exponential(double chi);
  static PriorSpec lomax(double mu1, double mu2);
  static PriorSpec sse(const CspeHyper& h);
  static PriorSpec cspe(const CspeHyper& h);

  /// True for the families whose omega-conditional is Exp(lambda_k).
  bool needs_rates() const {
    return family == PriorFamily::Sse || family == PriorFamily::Cspe;
  }

  std::string label() const;
  void validate() const;
};

/// Stick-breaking weights gamma_l = upsilon_l * prod_{m<l} (1 - upsilon_m)
/// and cumulative weights pi. Requires upsilon in [0,1] with upsilon_K = 1.
std::pair<Eigen::VectorXd, Eigen::VectorXd> stick_breaking(const Eigen::VectorXd& upsilon);

/// Prior mean of pi_k: 1 - alpha^k / (1+alpha)^k.
double expected_pi(double alpha, int k);

/// Concentration alpha with E[pi_k] = q: (1-q)^{1/k} / (1 - (1-q)^{1/k}).
double elicit_alpha(double q, int k);

double log_exponential_pdf(double x, double rate);
double log_lomax_pdf(double x, double shape, double scale);

/// Marginal spike/slab mixture density of omega given the cumulative weight
/// pi_k: (1-pi_k) Lomax(kappa1, kappa2) + pi_k Exp(delta).
double cspe_marginal_log_density(double omega, double pi_k, const CspeHyper& h);

/// Log prior density of a single omega_k >= 0. The Sse/Cspe families are
/// conditional on the current rate lambda_k, which must be supplied.
double log_density_omega(const PriorSpec& spec, double omega_k,
                         std::optional<double> rate_k = std::nullopt);

/// Total log prior of omega(omega_star) plus its gradient in omega_star
/// coordinates. The chain rule through the suffix-sum backward transform
/// turns the per-omega derivatives into prefix sums; for exponential-family
/// conditionals the gradient component is g_k = -sum_{l<=k} lambda_l.
std::pair<double, Eigen::VectorXd> log_prior_and_grad_omega_star(
    const PriorSpec& spec, const Eigen::VectorXd& omega_star,
    const Eigen::VectorXd* rates = nullptr);

}  // namespace bmf
