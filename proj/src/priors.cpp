#include "bmf/priors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "bmf/model.hpp"

namespace bmf {

void CspeHyper::validate() const {
  if (delta <= 0.0 || kappa1 <= 0.0 || kappa2 <= 0.0 || alpha <= 0.0) {
    throw std::invalid_argument("CspeHyper: all hyperparameters must be > 0");
  }
  if (k < 1) throw std::invalid_argument("CspeHyper: K must be >= 1");
}

PriorSpec PriorSpec::noninformative() { return PriorSpec{}; }

PriorSpec PriorSpec::exponential(double chi) {
  PriorSpec s;
  s.family = PriorFamily::Exponential;
  s.chi = chi;
  s.validate();
  return s;
}

PriorSpec PriorSpec::lomax(double mu1, double mu2) {
  PriorSpec s;
  s.family = PriorFamily::Lomax;
  s.mu1 = mu1;
  s.mu2 = mu2;
  s.validate();
  return s;
}

PriorSpec PriorSpec::sse(const CspeHyper& h) {
  PriorSpec s;
  s.family = PriorFamily::Sse;
  s.hyper = h;
  s.validate();
  return s;
}

PriorSpec PriorSpec::cspe(const CspeHyper& h) {
  PriorSpec s;
  s.family = PriorFamily::Cspe;
  s.hyper = h;
  s.validate();
  return s;
}

std::string PriorSpec::label() const {
  if (!display.empty()) return display;
  switch (family) {
    case PriorFamily::Noninformative:
      return "noninformative";
    case PriorFamily::Exponential:
      return "exponential(chi=" + std::to_string(chi) + ")";
    case PriorFamily::Lomax:
      return "lomax(mu1=" + std::to_string(mu1) + ",mu2=" + std::to_string(mu2) + ")";
    case PriorFamily::Sse:
      return "sse";
    case PriorFamily::Cspe:
      return "cspe(alpha=" + std::to_string(hyper.alpha) + ")";
  }
  return "unknown";
}

void PriorSpec::validate() const {
  switch (family) {
    case PriorFamily::Noninformative:
      break;
    case PriorFamily::Exponential:
      if (chi <= 0.0) throw std::invalid_argument("PriorSpec: chi must be > 0");
      break;
    case PriorFamily::Lomax:
      if (mu1 <= 0.0 || mu2 <= 0.0) {
        throw std::invalid_argument("PriorSpec: Lomax parameters must be > 0");
      }
      break;
    case PriorFamily::Sse:
    case PriorFamily::Cspe:
      hyper.validate();
      break;
  }
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> stick_breaking(const Eigen::VectorXd& upsilon) {
  const Eigen::Index k = upsilon.size();
  if (k == 0) throw std::invalid_argument("stick_breaking: empty upsilon");
  for (Eigen::Index i = 0; i < k; ++i) {
    if (!(upsilon(i) >= 0.0 && upsilon(i) <= 1.0)) {
      throw std::invalid_argument("stick_breaking: upsilon outside [0,1]");
    }
  }
  if (upsilon(k - 1) != 1.0) {
    throw std::invalid_argument("stick_breaking: last stick must equal 1");
  }
  Eigen::VectorXd gamma(k), pi(k);
  double remaining = 1.0;
  double cum = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    gamma(i) = upsilon(i) * remaining;
    remaining *= 1.0 - upsilon(i);
    cum += gamma(i);
    pi(i) = std::min(cum, 1.0);
  }
  pi(k - 1) = 1.0;  // sticks sum to one because the last equals 1
  return {gamma, pi};
}

double expected_pi(double alpha, int k) {
  if (alpha <= 0.0 || k < 1) throw std::invalid_argument("expected_pi: alpha > 0, k >= 1 required");
  return 1.0 - std::exp(static_cast<double>(k) * (std::log(alpha) - std::log1p(alpha)));
}

double elicit_alpha(double q, int k) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("elicit_alpha: q must lie in (0,1)");
  if (k < 1) throw std::invalid_argument("elicit_alpha: k must be >= 1");
  const double r = std::exp(std::log1p(-q) / static_cast<double>(k));  // (1-q)^{1/k}
  return r / (1.0 - r);
}

double log_exponential_pdf(double x, double rate) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(rate) - rate * x;
}

double log_lomax_pdf(double x, double shape, double scale) {
  if (x < 0.0) return -std::numeric_limits<double>::infinity();
  return std::log(shape / scale) - (shape + 1.0) * std::log1p(x / scale);
}

double cspe_marginal_log_density(double omega, double pi_k, const CspeHyper& h) {
  if (!(pi_k >= 0.0 && pi_k <= 1.0)) {
    throw std::invalid_argument("cspe_marginal_log_density: pi outside [0,1]");
  }
  const double log_spike = log_exponential_pdf(omega, h.delta);
  const double log_slab = log_lomax_pdf(omega, h.kappa1, h.kappa2);
  if (pi_k <= 0.0) return log_slab;
  if (pi_k >= 1.0) return log_spike;
  const double a = std::log(pi_k) + log_spike;
  const double b = std::log1p(-pi_k) + log_slab;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

double log_density_omega(const PriorSpec& spec, double omega_k, std::optional<double> rate_k) {
  if (omega_k < 0.0) throw std::invalid_argument("log_density_omega: omega must be >= 0");
  switch (spec.family) {
    case PriorFamily::Noninformative:
      return 0.0;
    case PriorFamily::Exponential:
      return log_exponential_pdf(omega_k, spec.chi);
    case PriorFamily::Lomax:
      return log_lomax_pdf(omega_k, spec.mu1, spec.mu2);
    case PriorFamily::Sse:
    case PriorFamily::Cspe:
      if (!rate_k) {
        throw std::invalid_argument("log_density_omega: conditional rate required for SSE/CSPE");
      }
      if (*rate_k <= 0.0) throw std::invalid_argument("log_density_omega: rate must be > 0");
      return log_exponential_pdf(omega_k, *rate_k);
  }
  throw std::logic_error("log_density_omega: unreachable");
}

std::pair<double, Eigen::VectorXd> log_prior_and_grad_omega_star(
    const PriorSpec& spec, const Eigen::VectorXd& omega_star, const Eigen::VectorXd* rates) {
  const Eigen::Index k = omega_star.size();
  const Eigen::VectorXd omega = from_increments(omega_star);
  if (spec.needs_rates()) {
    if (rates == nullptr || rates->size() != k) {
      throw std::invalid_argument(
          "log_prior_and_grad_omega_star: rate vector of length K required for SSE/CSPE");
    }
  }

  double logp = 0.0;
  Eigen::VectorXd d(k);  // d log p / d omega_l
  for (Eigen::Index l = 0; l < k; ++l) {
    const double w = omega(l);
    switch (spec.family) {
      case PriorFamily::Noninformative:
        d(l) = 0.0;
        break;
      case PriorFamily::Exponential:
        logp += std::log(spec.chi) - spec.chi * w;
        d(l) = -spec.chi;
        break;
      case PriorFamily::Lomax:
        logp += std::log(spec.mu1 / spec.mu2) - (spec.mu1 + 1.0) * std::log1p(w / spec.mu2);
        d(l) = -(spec.mu1 + 1.0) / (spec.mu2 + w);
        break;
      case PriorFamily::Sse:
      case PriorFamily::Cspe: {
        const double rate = (*rates)(l);
        logp += std::log(rate) - rate * w;
        d(l) = -rate;
        break;
      }
    }
  }

  // Chain rule through omega = C^{-1} omega_star: gradient is the prefix sum.
  Eigen::VectorXd grad(k);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    acc += d(i);
    grad(i) = acc;
  }
  return {logp, grad};
}

}  // namespace bmf
