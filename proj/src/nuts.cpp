#include "bmf/nuts.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bmf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add_exp(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct Leaf {
  Eigen::VectorXd q;
  Eigen::VectorXd p;
  Eigen::VectorXd grad;
  double logp = 0.0;
  double joint = 0.0;  // logp - kinetic
};

struct TreeState {
  Leaf left;
  Leaf right;
  Eigen::VectorXd proposal;
  double proposal_logp = 0.0;
  double log_sum_w = kNegInf;  // log sum of exp(joint - h0) over leaves
  double sum_accept = 0.0;
  int n_leaves = 0;
  bool divergent = false;
  bool turned = false;
};

class TreeBuilder {
 public:
  TreeBuilder(const LogProbGrad& target, double eps, double h0, Rng& rng)
      : target_(target), eps_(eps), h0_(h0), rng_(rng) {}

  int n_leapfrog = 0;

  Leaf leapfrog(const Leaf& from, int direction) {
    const double e = eps_ * direction;
    Leaf out;
    out.p = from.p + 0.5 * e * from.grad;
    out.q = from.q + e * out.p;
    out.grad.resize(from.q.size());
    out.logp = target_(out.q, out.grad);
    out.p += 0.5 * e * out.grad;
    out.joint = out.logp - 0.5 * out.p.squaredNorm();
    ++n_leapfrog;
    return out;
  }

  // Builds a balanced subtree with 2^depth leaves, growing from `edge` in
  // `direction`. Weights are joint - h0; the in-subtree proposal is a uniform
  // multinomial draw over leaves.
  TreeState build(int depth, const Leaf& edge, int direction) {
    if (depth == 0) {
      TreeState s;
      Leaf leaf = leapfrog(edge, direction);
      const double w = leaf.joint - h0_;
      s.divergent = !std::isfinite(leaf.joint) || w < -NutsSampler::kDivergenceThreshold;
      s.log_sum_w = s.divergent ? kNegInf : w;
      s.sum_accept = std::isfinite(w) ? std::min(1.0, std::exp(w)) : 0.0;
      s.n_leaves = 1;
      s.proposal = leaf.q;
      s.proposal_logp = leaf.logp;
      s.left = leaf;
      s.right = std::move(leaf);
      return s;
    }

    TreeState first = build(depth - 1, edge, direction);
    if (first.divergent || first.turned) return first;

    const Leaf& outer = direction == 1 ? first.right : first.left;
    TreeState second = build(depth - 1, outer, direction);

    TreeState merged;
    merged.left = direction == 1 ? first.left : second.left;
    merged.right = direction == 1 ? second.right : first.right;
    merged.log_sum_w = log_add_exp(first.log_sum_w, second.log_sum_w);
    merged.sum_accept = first.sum_accept + second.sum_accept;
    merged.n_leaves = first.n_leaves + second.n_leaves;
    merged.divergent = second.divergent;
    merged.turned = second.turned || uturn(merged.left, merged.right);

    if (std::log(rng_.uniform_pos()) < second.log_sum_w - merged.log_sum_w) {
      merged.proposal = std::move(second.proposal);
      merged.proposal_logp = second.proposal_logp;
    } else {
      merged.proposal = std::move(first.proposal);
      merged.proposal_logp = first.proposal_logp;
    }
    return merged;
  }

  static bool uturn(const Leaf& left, const Leaf& right) {
    const Eigen::VectorXd span = right.q - left.q;
    return span.dot(left.p) < 0.0 || span.dot(right.p) < 0.0;
  }

 private:
  const LogProbGrad& target_;
  double eps_;
  double h0_;
  Rng& rng_;
};

}  // namespace

void NutsConfig::validate() const {
  if (!(target_accept > 0.0 && target_accept < 1.0)) {
    throw std::invalid_argument("NutsConfig: target_accept must lie in (0,1)");
  }
  if (max_tree_depth < 1 || max_tree_depth > 15) {
    throw std::invalid_argument("NutsConfig: max_tree_depth must lie in 1..15");
  }
  if (adapt_iterations < 0) {
    throw std::invalid_argument("NutsConfig: adapt_iterations must be >= 0");
  }
  if (initial_step_size < 0.0) {
    throw std::invalid_argument("NutsConfig: initial_step_size must be >= 0");
  }
}

NutsSampler::NutsSampler(NutsConfig cfg, Eigen::Index dim) : cfg_(cfg), dim_(dim) {
  cfg_.validate();
  if (cfg_.initial_step_size > 0.0) {
    step_size_ = cfg_.initial_step_size;
    step_size_ready_ = true;
    mu_ = std::log(10.0 * step_size_);
  }
}

void NutsSampler::set_step_size(double eps, bool freeze) {
  step_size_ = eps;
  step_size_ready_ = true;
  frozen_ = freeze;
  mu_ = eps > 0.0 ? std::log(10.0 * eps) : 0.0;
}

void NutsSampler::init_step_size(const Eigen::VectorXd& q, const LogProbGrad& target,
                                 Rng& rng) {
  // Bracketing heuristic: double or halve until the one-step acceptance
  // probability crosses 1/2.
  double eps = 1.0;
  Eigen::VectorXd grad(q.size());
  const double logp = target(q, grad);
  if (!std::isfinite(logp)) {
    throw std::runtime_error("NutsSampler: non-finite log density at the initial point");
  }
  Eigen::VectorXd p(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) p(i) = rng.normal();
  const double joint0 = logp - 0.5 * p.squaredNorm();

  auto one_step_joint = [&](double e) {
    Eigen::VectorXd p1 = p + 0.5 * e * grad;
    Eigen::VectorXd q1 = q + e * p1;
    Eigen::VectorXd g1(q.size());
    const double lp1 = target(q1, g1);
    if (!std::isfinite(lp1)) return kNegInf;
    p1 += 0.5 * e * g1;
    return lp1 - 0.5 * p1.squaredNorm();
  };

  double log_ratio = one_step_joint(eps) - joint0;
  const double dir = log_ratio > std::log(0.5) ? 1.0 : -1.0;
  for (int it = 0; it < 100; ++it) {
    if (dir * log_ratio <= -dir * std::log(2.0)) break;
    eps *= std::pow(2.0, dir);
    log_ratio = one_step_joint(eps) - joint0;
    if (!std::isfinite(log_ratio) && dir > 0.0) {
      eps *= 0.5;
      break;
    }
  }
  step_size_ = eps;
  step_size_ready_ = true;
  mu_ = std::log(10.0 * step_size_);
}

void NutsSampler::adapt(double accept_prob) {
  // Dual averaging (gamma = 0.05, t0 = 10, kappa = 0.75).
  constexpr double gamma = 0.05, t0 = 10.0, kappa = 0.75;
  const double m = static_cast<double>(iteration_);
  h_bar_ = (1.0 - 1.0 / (m + t0)) * h_bar_ + (cfg_.target_accept - accept_prob) / (m + t0);
  const double log_eps = mu_ - std::sqrt(m) / gamma * h_bar_;
  const double eta = std::pow(m, -kappa);
  log_eps_bar_ = eta * log_eps + (1.0 - eta) * log_eps_bar_;
  step_size_ = std::exp(log_eps);
  if (iteration_ >= cfg_.adapt_iterations) step_size_ = std::exp(log_eps_bar_);
}

Eigen::VectorXd NutsSampler::transition(const Eigen::VectorXd& current,
                                        const LogProbGrad& target, Rng& rng,
                                        NutsStats* stats) {
  if (current.size() != dim_) throw std::invalid_argument("NutsSampler: dimension mismatch");
  if (!step_size_ready_) init_step_size(current, target, rng);

  Leaf init;
  init.q = current;
  init.grad.resize(dim_);
  init.logp = target(current, init.grad);
  if (!std::isfinite(init.logp)) {
    throw std::runtime_error("NutsSampler: non-finite log density at the current point");
  }
  init.p.resize(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) init.p(i) = rng.normal();
  init.joint = init.logp - 0.5 * init.p.squaredNorm();
  const double h0 = init.joint;

  TreeBuilder builder(target, step_size_, h0, rng);
  Leaf left = init, right = init;
  Eigen::VectorXd sample = init.q;
  double sample_logp = init.logp;
  double log_sum_w = 0.0;  // weight of the initial point: exp(joint - h0) = 1
  double sum_accept = 0.0;
  int n_accept_states = 0;
  bool divergent = false;
  int depth = 0;

  while (depth < cfg_.max_tree_depth) {
    const int direction = rng.uniform() < 0.5 ? -1 : 1;
    TreeState tree = builder.build(depth, direction == 1 ? right : left, direction);
    sum_accept += tree.sum_accept;
    n_accept_states += tree.n_leaves;
    if (tree.divergent) {
      divergent = true;
      break;
    }
    if (!tree.turned) {
      // Biased progressive sampling toward the fresh subtree.
      if (std::log(rng.uniform_pos()) < tree.log_sum_w - log_sum_w) {
        sample = tree.proposal;
        sample_logp = tree.proposal_logp;
      }
      log_sum_w = log_add_exp(log_sum_w, tree.log_sum_w);
    } else {
      break;
    }
    if (direction == 1) {
      right = tree.right;
    } else {
      left = tree.left;
    }
    ++depth;
    if (TreeBuilder::uturn(left, right)) break;
  }

  ++iteration_;
  const double accept_stat = n_accept_states > 0 ? sum_accept / n_accept_states : 0.0;
  if (!frozen_ && cfg_.adapt_iterations > 0 && iteration_ <= cfg_.adapt_iterations) {
    adapt(accept_stat);
  }

  if (stats != nullptr) {
    stats->depth = depth;
    stats->n_leapfrog = builder.n_leapfrog;
    stats->divergent = divergent;
    stats->accept_stat = accept_stat;
    stats->step_size = step_size_;
    stats->log_density = sample_logp;
  }
  return sample;
}

}  // namespace bmf
