// Throwaway numerics probe (not part of the suites).
#include <cstdio>
#include <Eigen/Dense>

#include "bmf/chain.hpp"
#include "bmf/config.hpp"
#include "bmf/dgp.hpp"

int main() {
  bmf::Scenario sc;
  sc.j = sc.t = 20;
  sc.true_rank = 3;
  sc.missing_fraction = 0.0;
  sc.replications = 1;
  sc.prior_grid = {bmf::PriorSpec::noninformative()};
  sc.sampler.iterations = 4000;
  sc.sampler.burn_in = 2000;
  sc.sampler.nuts.adapt_iterations = 2000;
  sc.sampler.schedule.eta_bar1 = 4e3;
  sc.validate();
  const bmf::DgpDraw draw = bmf::generate_dgp(sc, 11);
  const int k = sc.model_rank();
  std::printf("K = %d, dim = %d\n", k, 20 * k * 2 + k);

  for (int which = 0; which < 2; ++which) {
    bmf::PriorSpec prior = bmf::PriorSpec::noninformative();
    if (which == 1) {
      bmf::CspeHyper h;
      h.k = k;
      h.alpha = bmf::elicit_alpha(0.9, k - 1);
      prior = bmf::PriorSpec::cspe(h);
    }
    const bmf::DrawStore store = bmf::run_chain(draw.y, k, prior, sc.sampler, 99);
    double leap = 0, viol = 0;
    for (const auto& d : store.diagnostics) {
      leap += d.n_leapfrog;
      viol += d.unitarity_phi;
    }
    leap /= store.diagnostics.size();
    viol /= store.diagnostics.size();
    Eigen::VectorXd om = store.omega_mean();
    std::printf("%s: %.1f s, mean leapfrog %.1f, unit viol %.4f, div %.4f\n  omega:",
                prior.label().c_str(), store.elapsed_seconds, leap, viol,
                store.divergence_rate());
    for (int i = 0; i < k; ++i) std::printf(" %.3f", om(i));
    std::printf("\n  truth:");
    for (int i = 0; i < k; ++i) std::printf(" %.3f", i < 3 ? draw.omega0(i) : 0.0);
    std::printf("\n");
    double ae = 0;
    for (int i = 0; i < k; ++i) ae += std::abs(om(i) - (i < 3 ? draw.omega0(i) : 0.0));
    std::printf("  AE_omega = %.4f\n", ae);
  }
  return 0;
}
