#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bmf/gibbs.hpp"
#include "bmf/model.hpp"
#include "bmf/nuts.hpp"
#include "bmf/posterior.hpp"
#include "bmf/priors.hpp"

namespace bmf {

struct SamplerConfig {
  long iterations = 12000;
  long burn_in = 2000;
  long thin = 1;
  NutsConfig nuts;  // nuts.seed is the chain seed
  RelaxationSchedule schedule;
  double nu1 = 1e-3;
  double nu2 = 1e-3;
  ZWeights z_weights = ZWeights::Stick;
  bool store_factors = true;

  void validate() const;
};

/// Full sampler state: theta = (vec Phi, vec Psi, omega_star), the noise
/// precision, the prior latents, the completed data and the iteration count.
struct ChainState {
  Eigen::VectorXd theta;
  double tau = 1.0;
  SpikeSlabState spike_slab;  // CSPE
  SseState sse;               // SSE
  Eigen::MatrixXd y_completed;
  Eigen::VectorXi ref_signs;
  long iteration = 0;
};

/// Per-retained-draw sampler diagnostics (not part of the draw schema).
struct DiagnosticsRow {
  long iteration = 0;
  double log_density = 0.0;
  int depth = 0;
  int n_leapfrog = 0;
  bool divergent = false;
  double step_size = 0.0;
  double eta1 = 0.0;
  double eta2 = 0.0;
  double unitarity_phi = 0.0;
  double unitarity_psi = 0.0;
};

/// Retained draws of one chain plus run-level counters. Row r of each matrix
/// is the r-th retained draw; phi/psi are row-major flattened vec(Phi),
/// vec(Psi) and are empty when factors are not stored.
struct DrawStore {
  int j = 0, t = 0, k = 0;
  std::vector<long> iteration;
  Eigen::MatrixXd omega;   // N x K
  Eigen::VectorXd tau;     // N
  Eigen::MatrixXd lambda;  // N x K (zeros when the family has no rates)
  Eigen::MatrixXi z;       // N x K (zeros when the family has no labels)
  Eigen::MatrixXd phi;     // N x JK, column-major vec per row
  Eigen::MatrixXd psi;     // N x TK
  Eigen::MatrixXd theta_mean;  // J x T, running mean over retained draws
  std::vector<DiagnosticsRow> diagnostics;

  long n_transitions = 0;
  long n_post_warmup = 0;
  long n_divergent = 0;
  long n_divergent_post_warmup = 0;
  double elapsed_seconds = 0.0;

  Eigen::Index n_draws() const { return tau.size(); }
  bool has_factors() const { return phi.size() > 0; }
  double divergence_rate() const {
    return n_post_warmup > 0 ? static_cast<double>(n_divergent_post_warmup) /
                                   static_cast<double>(n_post_warmup)
                             : 0.0;
  }

  Eigen::VectorXd omega_mean() const { return omega.colwise().mean(); }
};

/// Near-mode start: zero-fill missing cells, truncated rank-K SVD of the
/// completed matrix, residual-variance tau, all-slab latents.
ChainState init_chain_state(const ObservedMatrix& data, int k, const PriorSpec& prior,
                            Rng& rng);

/// Runs the full per-iteration cycle (relaxation update, NUTS on theta, sign
/// alignment, z / upsilon / lambda sweeps, tau draw, imputation) and stores
/// thinned post-burn-in draws. Throws on a non-finite kernel at the start;
/// divergence rates are reported, not thrown.
DrawStore run_chain(const ObservedMatrix& data, int k, const PriorSpec& prior,
                    const SamplerConfig& cfg, std::uint64_t seed);

}  // namespace bmf
