#include "bmf/chain.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace bmf {

void SamplerConfig::validate() const {
  if (iterations <= 0) throw std::invalid_argument("SamplerConfig: iterations must be > 0");
  if (burn_in < 0 || burn_in >= iterations) {
    throw std::invalid_argument("SamplerConfig: need 0 <= burn_in < iterations");
  }
  if (thin < 1) throw std::invalid_argument("SamplerConfig: thin must be >= 1");
  if (nu1 <= 0.0 || nu2 <= 0.0) throw std::invalid_argument("SamplerConfig: nu1, nu2 must be > 0");
  nuts.validate();
}

ChainState init_chain_state(const ObservedMatrix& data, int k, const PriorSpec& prior,
                            Rng& rng) {
  const Eigen::Index j = data.rows(), t = data.cols();
  if (k < 1 || k > max_rank(static_cast<int>(j), static_cast<int>(t))) {
    throw std::invalid_argument("init_chain_state: K must lie in 1..max_rank(J,T)");
  }

  ChainState s;
  s.y_completed = data.values;
  for (Eigen::Index c = 0; c < t; ++c) {
    for (Eigen::Index r = 0; r < j; ++r) {
      if (!data.mask(r, c)) s.y_completed(r, c) = 0.0;  // data are standardized
    }
  }

  Eigen::BDCSVD<Eigen::MatrixXd> svd(s.y_completed, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::MatrixXd phi = svd.matrixU().leftCols(k);
  const Eigen::MatrixXd psi = svd.matrixV().leftCols(k);
  const Eigen::VectorXd omega = svd.singularValues().head(k);
  s.theta = pack_theta(phi, psi, to_increments(omega));
  s.ref_signs = reference_signs(phi);

  const Eigen::MatrixXd resid = s.y_completed - phi * omega.asDiagonal() * psi.transpose();
  const double resid_var = resid.squaredNorm() / static_cast<double>(j * t);
  s.tau = 1.0 / std::max(resid_var, 1e-8);

  if (prior.family == PriorFamily::Cspe) {
    const CspeHyper& h = prior.hyper;
    SpikeSlabState& ss = s.spike_slab;
    ss.z = Eigen::VectorXi::Constant(k, k);  // all slab
    ss.upsilon.resize(k);
    for (int i = 0; i + 1 < k; ++i) ss.upsilon(i) = rng.beta(1.0, h.alpha);
    ss.upsilon(k - 1) = 1.0;
    auto [gamma, pi] = stick_breaking(ss.upsilon);
    ss.gamma = std::move(gamma);
    ss.pi = std::move(pi);
    ss.lambda = Eigen::VectorXd::Constant(k, h.kappa1 / h.kappa2);
  } else if (prior.family == PriorFamily::Sse) {
    const CspeHyper& h = prior.hyper;
    s.sse.spike = Eigen::VectorXi::Zero(k);
    s.sse.pi.resize(k);
    for (int i = 0; i < k; ++i) s.sse.pi(i) = rng.uniform();
    s.sse.lambda = Eigen::VectorXd::Constant(k, h.kappa1 / h.kappa2);
  }
  return s;
}

namespace {

Eigen::VectorXd current_rates(const ChainState& s, const PriorSpec& prior) {
  if (prior.family == PriorFamily::Cspe) return s.spike_slab.lambda;
  if (prior.family == PriorFamily::Sse) return s.sse.lambda;
  return Eigen::VectorXd();
}

}  // namespace

DrawStore run_chain(const ObservedMatrix& data, int k, const PriorSpec& prior,
                    const SamplerConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  prior.validate();
  const auto start_time = std::chrono::steady_clock::now();

  const Eigen::Index j = data.rows(), t = data.cols();
  Rng rng(seed);
  ChainState state = init_chain_state(data, k, prior, rng);
  const bool any_missing = data.n_missing() > 0;

  {
    // Fail fast if the kernel is broken at the start (eta = 0 at i = 0).
    KernelContext ctx{state.y_completed, state.tau, current_rates(state, prior),
                      0.0,               0.0,       prior,
                      k};
    if (!std::isfinite(log_kernel(state.theta, ctx))) {
      throw std::runtime_error("run_chain: non-finite kernel at initialization");
    }
  }

  NutsSampler nuts(cfg.nuts, state.theta.size());

  const long n_retained = (cfg.iterations - cfg.burn_in + cfg.thin - 1) / cfg.thin;
  DrawStore store;
  store.j = static_cast<int>(j);
  store.t = static_cast<int>(t);
  store.k = k;
  store.iteration.reserve(static_cast<std::size_t>(n_retained));
  store.omega.resize(n_retained, k);
  store.tau.resize(n_retained);
  store.lambda.resize(n_retained, k);
  store.z.resize(n_retained, k);
  if (cfg.store_factors) {
    store.phi.resize(n_retained, j * k);
    store.psi.resize(n_retained, t * k);
  }
  store.theta_mean = Eigen::MatrixXd::Zero(j, t);
  store.diagnostics.reserve(static_cast<std::size_t>(n_retained));

  long row = 0;
  for (long i = 0; i < cfg.iterations; ++i) {
    state.iteration = i;
    const double eta1 = cfg.schedule.eta(i, 1);
    const double eta2 = cfg.schedule.eta(i, 2);

    KernelContext ctx{state.y_completed, state.tau, current_rates(state, prior),
                      eta1,              eta2,      prior,
                      k};
    const LogProbGrad target = [&ctx](const Eigen::VectorXd& q, Eigen::VectorXd& grad) {
      grad = grad_log_kernel(q, ctx);
      return log_kernel(q, ctx);
    };

    NutsStats stats;
    state.theta = nuts.transition(state.theta, target, rng, &stats);
    ++store.n_transitions;
    if (stats.divergent) ++store.n_divergent;
    if (i >= cfg.nuts.adapt_iterations) {
      ++store.n_post_warmup;
      if (stats.divergent) ++store.n_divergent_post_warmup;
    }

    // Sign alignment before anything downstream sees Phi and Psi.
    align_signs_inplace(Eigen::Map<Eigen::MatrixXd>(state.theta.data(), j, k),
                        Eigen::Map<Eigen::MatrixXd>(state.theta.data() + j * k, t, k),
                        state.ref_signs);

    const ThetaView v = split_theta(state.theta, j, t, k);
    const Eigen::VectorXd omega = from_increments(v.omega_star);
    const Eigen::MatrixXd theta_mat = v.phi * omega.asDiagonal() * v.psi.transpose();

    if (prior.family == PriorFamily::Cspe) {
      const Eigen::VectorXd& w = cfg.z_weights == ZWeights::Stick ? state.spike_slab.gamma
                                                                  : state.spike_slab.pi;
      const Eigen::VectorXi z = gibbs_update_z(omega, w, prior.hyper, rng);
      gibbs_update_upsilon(z, prior.hyper.alpha, state.spike_slab, rng);
      state.spike_slab.lambda = gibbs_update_lambda(z, omega, prior.hyper, rng);
    } else if (prior.family == PriorFamily::Sse) {
      sse_update(state.sse, omega, prior.hyper, rng);
    }

    state.tau = gibbs_update_tau(state.y_completed, theta_mat, cfg.nu1, cfg.nu2, rng);
    if (any_missing) {
      impute_missing(state.y_completed, data.mask, theta_mat, state.tau, rng);
    }

    if (i >= cfg.burn_in && (i - cfg.burn_in) % cfg.thin == 0) {
      store.iteration.push_back(i);
      store.omega.row(row) = omega.transpose();
      store.tau(row) = state.tau;
      switch (prior.family) {
        case PriorFamily::Cspe:
          store.lambda.row(row) = state.spike_slab.lambda.transpose();
          store.z.row(row) = state.spike_slab.z.transpose();
          break;
        case PriorFamily::Sse:
          store.lambda.row(row) = state.sse.lambda.transpose();
          store.z.row(row) = state.sse.spike.transpose();
          break;
        case PriorFamily::Exponential:
          store.lambda.row(row).setConstant(prior.chi);
          store.z.row(row).setZero();
          break;
        default:
          store.lambda.row(row).setZero();
          store.z.row(row).setZero();
          break;
      }
      if (cfg.store_factors) {
        store.phi.row(row) = Eigen::Map<const Eigen::VectorXd>(v.phi.data(), j * k).transpose();
        store.psi.row(row) = Eigen::Map<const Eigen::VectorXd>(v.psi.data(), t * k).transpose();
      }
      store.theta_mean += (theta_mat - store.theta_mean) / static_cast<double>(row + 1);

      DiagnosticsRow d;
      d.iteration = i;
      d.log_density = stats.log_density;
      d.depth = stats.depth;
      d.n_leapfrog = stats.n_leapfrog;
      d.divergent = stats.divergent;
      d.step_size = stats.step_size;
      d.eta1 = eta1;
      d.eta2 = eta2;
      d.unitarity_phi = unitarity_violation(v.phi);
      d.unitarity_psi = unitarity_violation(v.psi);
      store.diagnostics.push_back(d);
      ++row;
    }
  }

  store.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_time).count();
  return store;
}

}  // namespace bmf
