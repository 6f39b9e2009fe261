#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "bmf/rng.hpp"

namespace bmf {

/// Target interface: returns the log density and fills the gradient.
using LogProbGrad = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct NutsConfig {
  double target_accept = 0.8;
  int max_tree_depth = 10;
  int adapt_iterations = 2000;
  double initial_step_size = 0.0;  // 0 = bracketing heuristic on first use
  std::uint64_t seed = 0;

  void validate() const;
};

struct NutsStats {
  int depth = 0;
  int n_leapfrog = 0;
  bool divergent = false;
  double accept_stat = 0.0;
  double step_size = 0.0;
  double log_density = 0.0;  // at the returned point
};

/// No-U-Turn transitions with multinomial tree sampling, an identity mass
/// matrix, and dual-averaging step-size adaptation over the first
/// adapt_iterations calls. A transition whose energy error exceeds the
/// divergence threshold is rejected to the previous point and flagged.
class NutsSampler {
 public:
  NutsSampler(NutsConfig cfg, Eigen::Index dim);

  Eigen::VectorXd transition(const Eigen::VectorXd& current, const LogProbGrad& target,
                             Rng& rng, NutsStats* stats = nullptr);

  double step_size() const { return step_size_; }
  /// Pin the step size (freeze = skip all adaptation); used by tests.
  void set_step_size(double eps, bool freeze);
  long iterations_done() const { return iteration_; }
  bool adapting() const { return !frozen_ && iteration_ < cfg_.adapt_iterations; }

  static constexpr double kDivergenceThreshold = 1000.0;

 private:
  void init_step_size(const Eigen::VectorXd& q, const LogProbGrad& target, Rng& rng);
  void adapt(double accept_prob);

  NutsConfig cfg_;
  Eigen::Index dim_;
  double step_size_ = 0.0;
  bool step_size_ready_ = false;
  bool frozen_ = false;
  long iteration_ = 0;

  // dual averaging state
  double mu_ = 0.0;
  double log_eps_bar_ = 0.0;
  double h_bar_ = 0.0;
};

}  // namespace bmf
