// Command line front end: fit a matrix factorization, run the simulation
// benchmark, elicit the stick-breaking concentration, or re-summarize a
// stored chain.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "bmf/benchmark.hpp"
#include "bmf/config.hpp"
#include "bmf/priors.hpp"
#include "bmf/store_io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;
constexpr int kExitSamplerError = 4;

bool is_data_error(const std::string& message) {
  return message.find("load_matrix_csv") != std::string::npos ||
         message.find("standardize_rows") != std::string::npos ||
         message.find("ObservedMatrix") != std::string::npos ||
         message.find("load_draw_store") != std::string::npos ||
         message.find("summarize_store") != std::string::npos;
}

struct CommonFlags {
  std::string config_path;
  std::string data_path;
  std::string out_dir = "bmf_out";
  std::string missing_token;
  std::string z_weights;
  std::string prior_spec;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int k = -1;
};

void apply_overrides(bmf::RunConfig& cfg, const CommonFlags& flags) {
  if (!flags.data_path.empty()) cfg.data_path = flags.data_path;
  if (!flags.missing_token.empty()) cfg.csv.missing_token = flags.missing_token;
  if (flags.seed_set) cfg.seed = flags.seed;
  if (flags.k >= 0) cfg.k = flags.k;
  if (!flags.prior_spec.empty()) cfg.prior_descriptor = flags.prior_spec;
  if (!flags.z_weights.empty()) {
    if (flags.z_weights == "stick") {
      cfg.sampler.z_weights = bmf::ZWeights::Stick;
    } else if (flags.z_weights == "cumulative") {
      cfg.sampler.z_weights = bmf::ZWeights::Cumulative;
    } else {
      throw std::invalid_argument("--z-weights must be stick or cumulative");
    }
  }
}

int run_fit(const CommonFlags& flags) {
  bmf::RunConfig cfg;
  try {
    if (!flags.config_path.empty()) {
      cfg = bmf::parse_fit_config(bmf::IniFile::parse_file(flags.config_path));
    }
    apply_overrides(cfg, flags);
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    const bmf::FitResult res = bmf::fit(cfg);
    bmf::write_fit_outputs(flags.out_dir, cfg, res);
    std::cout << "fit: K = " << res.k << ", prior = " << res.prior.label() << ", "
              << res.store.n_draws() << " retained draws\n";
    std::cout << "posterior mean tau = " << res.summary.tau_mean
              << ", snr = " << res.summary.snr_mean << "\n";
    if (res.store.divergence_rate() > 0.10) {
      std::cerr << "warning: post-warmup divergence rate " << res.store.divergence_rate()
                << " exceeds 10%\n";
    }
    std::cout << "outputs written to " << flags.out_dir << "\n";
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    std::cerr << (is_data_error(msg) ? "data error: " : "sampler error: ") << msg << "\n";
    return is_data_error(msg) ? kExitDataError : kExitSamplerError;
  }
}

int run_simulate(const CommonFlags& flags) {
  bmf::SimulationPlan plan;
  try {
    if (!flags.config_path.empty()) {
      plan = bmf::parse_scenario_config(bmf::IniFile::parse_file(flags.config_path));
    }
    if (flags.seed_set) plan.seed = flags.seed;
    if (flags.k >= 0) plan.k = flags.k;
    if (!flags.z_weights.empty()) {
      plan.sampler.z_weights = flags.z_weights == "cumulative" ? bmf::ZWeights::Cumulative
                                                               : bmf::ZWeights::Stick;
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }

  try {
    const bmf::Provenance prov{bmf::config_hash(plan.canonical_string()), plan.seed};
    const std::vector<bmf::Scenario> scenarios = plan.expand();
    std::vector<bmf::BenchmarkReport> reports;
    reports.reserve(scenarios.size());
    for (const bmf::Scenario& sc : scenarios) {
      std::cout << "scenario: K*=" << sc.true_rank << " missing=" << sc.missing_fraction
                << " (" << sc.replications << " replications x " << sc.prior_grid.size()
                << " priors)\n"
                << std::flush;
      reports.push_back(bmf::run_benchmark(sc));
    }

    std::vector<const bmf::BenchmarkReport*> all;
    for (const bmf::BenchmarkReport& r : reports) all.push_back(&r);

    namespace fs = std::filesystem;
    fs::create_directories(flags.out_dir);
    auto open = [&flags, &prov](const std::string& name, bool provenance_line = true) {
      std::ofstream out(fs::path(flags.out_dir) / name);
      if (!out) throw std::runtime_error("cannot write " + name);
      if (provenance_line) {
        out << "# config_hash=" << prov.config_hash << " seed=" << prov.seed << "\n";
      }
      return out;
    };

    {
      std::ofstream out = open("report_summary.csv");
      bmf::write_summary_csv(out, all);
    }
    {
      std::ofstream out = open("report_cells.csv");
      bmf::write_cells_csv(out, all);
    }

    std::ostringstream tables_mean, tables_median;
    for (double missing : plan.missing_fractions) {
      std::vector<const bmf::BenchmarkReport*> regime;
      for (const bmf::BenchmarkReport& r : reports) {
        if (r.scenario.missing_fraction == missing) regime.push_back(&r);
      }
      tables_mean << bmf::render_metric_table(regime, false) << "\n";
      tables_median << bmf::render_metric_table(regime, true) << "\n";
    }
    const std::string timing = bmf::render_timing_table(all);
    {
      std::ofstream out = open("tables_mean.txt");
      out << tables_mean.str();
    }
    {
      std::ofstream out = open("tables_median.txt");
      out << tables_median.str();
    }
    {
      std::ofstream out = open("timing_table.txt");
      out << timing;
    }

    std::cout << "\n" << tables_mean.str() << "\n" << timing << "\n";
    std::cout << "reports written to " << flags.out_dir << "\n";

    long failed = 0, total = 0;
    for (const bmf::BenchmarkReport& r : reports) {
      for (const bmf::CellResult& c : r.cells) {
        ++total;
        if (!c.ok) {
          ++failed;
          std::cerr << "cell failed (K*=" << r.scenario.true_rank
                    << ", missing=" << r.scenario.missing_fraction << ", rep=" << c.replication
                    << ", prior=" << c.prior_label << "): " << c.error << "\n";
        }
      }
    }
    return failed == total ? kExitSamplerError : kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "sampler error: " << e.what() << "\n";
    return kExitSamplerError;
  }
}

int run_elicit(double q, int k) {
  try {
    const double alpha = bmf::elicit_alpha(q, k);
    std::printf("alpha = %.6f  (q = %g at index %d)\n", alpha, q, k);
    std::printf("%4s  %12s\n", "j", "E[pi_j]");
    for (int j = 1; j <= k + 1; ++j) {
      std::printf("%4d  %12.6f\n", j, bmf::expected_pi(alpha, j));
    }
    return kExitOk;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int run_summarize(const std::string& store_dir, const std::string& out_dir) {
  try {
    const bmf::LoadedStore loaded = bmf::load_draw_store(store_dir);
    const bmf::PosteriorSummary summary = bmf::summarize_store(loaded.store);
    bmf::Provenance prov;
    prov.config_hash = loaded.meta.value("config_hash", "");
    prov.seed = loaded.meta.value("seed", std::uint64_t{0});
    bmf::save_summary(out_dir.empty() ? store_dir : out_dir, summary, prov);
    std::cout << "summary recomputed from " << summary.n_draws << " draws\n";
    return kExitOk;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    const std::string msg = e.what();
    std::cerr << (is_data_error(msg) ? "data error: " : "sampler error: ") << msg << "\n";
    return is_data_error(msg) ? kExitDataError : kExitSamplerError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian low-rank matrix factorization with shrinkage priors"};
  app.require_subcommand(1);

  CommonFlags flags;
  double elicit_q = 0.5;
  int elicit_k = 13;
  std::string store_dir;

  CLI::App* fit_cmd = app.add_subcommand("fit", "sample the posterior of a data matrix");
  fit_cmd->add_option("--config", flags.config_path, "run configuration file");
  fit_cmd->add_option("--data", flags.data_path, "input CSV (overrides config)");
  fit_cmd->add_option("--missing-token", flags.missing_token, "missing cell marker");
  fit_cmd->add_option("--seed", flags.seed, "root seed")->each([&flags](const std::string&) {
    flags.seed_set = true;
  });
  fit_cmd->add_option("--out", flags.out_dir, "output directory");
  fit_cmd->add_option("--k", flags.k, "model rank (default: auto)");
  fit_cmd->add_option("--prior", flags.prior_spec, "prior descriptor, e.g. 'cspe q=0.9'");
  fit_cmd->add_option("--z-weights", flags.z_weights, "stick|cumulative");

  CLI::App* sim_cmd = app.add_subcommand("simulate", "run the Monte Carlo benchmark");
  sim_cmd->add_option("--config", flags.config_path, "scenario file");
  sim_cmd->add_option("--seed", flags.seed, "root seed")->each([&flags](const std::string&) {
    flags.seed_set = true;
  });
  sim_cmd->add_option("--out", flags.out_dir, "output directory");
  sim_cmd->add_option("--k", flags.k, "model rank (default: auto)");
  sim_cmd->add_option("--z-weights", flags.z_weights, "stick|cumulative");

  CLI::App* elicit_cmd =
      app.add_subcommand("elicit", "solve for the stick-breaking concentration");
  elicit_cmd->add_option("--q", elicit_q, "target spike probability in (0,1)")->required();
  elicit_cmd->add_option("--k", elicit_k, "singular value index")->required();

  CLI::App* sum_cmd = app.add_subcommand("summarize", "recompute summaries from a draw store");
  sum_cmd->add_option("--store", store_dir, "draw store directory")->required();
  sum_cmd->add_option("--out", flags.out_dir, "output directory (default: the store)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  if (fit_cmd->parsed()) return run_fit(flags);
  if (sim_cmd->parsed()) return run_simulate(flags);
  if (elicit_cmd->parsed()) return run_elicit(elicit_q, elicit_k);
  if (sum_cmd->parsed()) {
    return run_summarize(store_dir, flags.out_dir == "bmf_out" ? "" : flags.out_dir);
  }
  return kExitConfigError;
}
