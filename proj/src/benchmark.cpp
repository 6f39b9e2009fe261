#include "bmf/benchmark.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "bmf/rng.hpp"

namespace bmf {

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

CellResult run_cell(const Scenario& sc, int replication, int prior_index) {
  CellResult cell;
  cell.replication = replication;
  cell.prior_index = prior_index;
  cell.prior_label = sc.prior_grid[static_cast<std::size_t>(prior_index)].label();
  try {
    const std::uint64_t data_seed =
        derive_seed(sc.seed, {0, static_cast<std::uint64_t>(replication)});
    const std::uint64_t chain_seed =
        derive_seed(sc.seed, {1, static_cast<std::uint64_t>(replication),
                              static_cast<std::uint64_t>(prior_index)});
    const DgpDraw draw = generate_dgp(sc, data_seed);
    const int k = sc.model_rank();

    const DrawStore store = run_chain(draw.y, k, sc.prior_grid[static_cast<std::size_t>(prior_index)],
                                      sc.sampler, chain_seed);

    cell.metrics = compute_metrics(store.omega_mean(), draw.omega0, store.theta_mean,
                                   draw.theta0, &draw.y.mask);
    cell.metrics.prior_label = cell.prior_label;
    cell.seconds_per_1k =
        store.elapsed_seconds / static_cast<double>(sc.sampler.iterations) * 1000.0;
    cell.divergence_rate = store.divergence_rate();

    double viol_phi = 0.0, viol_psi = 0.0;
    for (const DiagnosticsRow& d : store.diagnostics) {
      viol_phi += d.unitarity_phi;
      viol_psi += d.unitarity_psi;
    }
    const double n = static_cast<double>(store.diagnostics.size());
    cell.mean_unitarity_phi = n > 0 ? viol_phi / n : 0.0;
    cell.mean_unitarity_psi = n > 0 ? viol_psi / n : 0.0;

    long negative = 0;
    for (Eigen::Index r = 0; r < store.omega.rows(); ++r) {
      const Eigen::VectorXd incr = to_increments(store.omega.row(r).transpose());
      if ((incr.array() < 0.0).any()) ++negative;
    }
    cell.fraction_negative_increments =
        store.omega.rows() > 0 ? static_cast<double>(negative) / store.omega.rows() : 0.0;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error = e.what();
  }
  return cell;
}

double pick(const MetricRow& m, int which) {
  switch (which) {
    case 0: return m.ae_omega;
    case 1: return m.se_omega;
    case 2: return m.ae_theta;
    case 3: return m.se_theta;
    case 4: return m.ae_theta_missing;
    default: return m.se_theta_missing;
  }
}

void assign(MetricRow& m, int which, double value) {
  switch (which) {
    case 0: m.ae_omega = value; break;
    case 1: m.se_omega = value; break;
    case 2: m.ae_theta = value; break;
    case 3: m.se_theta = value; break;
    case 4: m.ae_theta_missing = value; break;
    default: m.se_theta_missing = value; break;
  }
}

MetricRow normalize_against(const MetricRow& row, const MetricRow& base) {
  MetricRow out;
  out.prior_label = row.prior_label;
  for (int w = 0; w < 6; ++w) {
    const double b = pick(base, w);
    assign(out, w, b != 0.0 ? 100.0 * pick(row, w) / b
                            : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

}  // namespace

const CellResult& BenchmarkReport::cell(int replication, int prior_index) const {
  const int n_priors = static_cast<int>(scenario.prior_grid.size());
  return cells.at(static_cast<std::size_t>(replication * n_priors + prior_index));
}

BenchmarkReport run_benchmark(const Scenario& scenario) {
  scenario.validate();
  const int n_priors = static_cast<int>(scenario.prior_grid.size());
  const int n_cells = scenario.replications * n_priors;

  BenchmarkReport report;
  report.scenario = scenario;
  report.cells.resize(static_cast<std::size_t>(n_cells));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= n_cells) return;
      report.cells[static_cast<std::size_t>(c)] =
          run_cell(scenario, c / n_priors, c % n_priors);
    }
  };

  int n_workers = scenario.workers > 0
                      ? scenario.workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  n_workers = std::clamp(n_workers, 1, n_cells);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_workers - 1));
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (std::thread& th : pool) th.join();

  // Per-prior aggregates over complete replications.
  for (int p = 0; p < n_priors; ++p) {
    PriorAggregate agg;
    agg.label = scenario.prior_grid[static_cast<std::size_t>(p)].label();
    std::vector<double> values[6];
    double seconds = 0.0;
    for (int r = 0; r < scenario.replications; ++r) {
      const CellResult& cell = report.cell(r, p);
      if (!cell.ok) continue;
      ++agg.n_complete;
      seconds += cell.seconds_per_1k;
      for (int w = 0; w < 6; ++w) values[w].push_back(pick(cell.metrics, w));
    }
    agg.mean.prior_label = agg.median.prior_label = agg.label;
    for (int w = 0; w < 6; ++w) {
      const double sum = std::accumulate(values[w].begin(), values[w].end(), 0.0);
      assign(agg.mean, w,
             agg.n_complete > 0 ? sum / agg.n_complete
                                : std::numeric_limits<double>::quiet_NaN());
      assign(agg.median, w, median_of(values[w]));
    }
    agg.mean_seconds_per_1k =
        agg.n_complete > 0 ? seconds / agg.n_complete : std::numeric_limits<double>::quiet_NaN();
    report.priors.push_back(std::move(agg));
  }

  for (int p = 0; p < n_priors; ++p) {
    if (scenario.prior_grid[static_cast<std::size_t>(p)].family ==
        PriorFamily::Noninformative) {
      report.baseline_index = p;
      break;
    }
  }
  if (report.baseline_index >= 0) {
    const PriorAggregate& base = report.priors[static_cast<std::size_t>(report.baseline_index)];
    for (PriorAggregate& agg : report.priors) {
      agg.mean_normalized = normalize_against(agg.mean, base.mean);
      agg.median_normalized = normalize_against(agg.median, base.median);
    }
  }
  return report;
}

namespace {

void append_cell(std::ostringstream& os, double v, int width) {
  os << std::setw(width);
  if (std::isnan(v)) {
    os << "-";
  } else {
    os << std::fixed << std::setprecision(1) << v;
  }
}

}  // namespace

std::string render_metric_table(const std::vector<const BenchmarkReport*>& reports,
                                bool use_median) {
  if (reports.empty()) return "";
  std::ostringstream os;
  const int label_w = 28, col_w = 9;

  os << std::left << std::setw(label_w) << "Prior" << std::right;
  for (const BenchmarkReport* rep : reports) {
    std::ostringstream head;
    head << "K*=" << rep->scenario.true_rank << " miss=" << std::fixed << std::setprecision(0)
         << 100.0 * rep->scenario.missing_fraction << "%";
    os << std::setw(4 * col_w) << head.str();
  }
  os << "\n" << std::setw(label_w) << "";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    os << std::setw(col_w) << "w-AE" << std::setw(col_w) << "w-SE" << std::setw(col_w)
       << "Th-AE" << std::setw(col_w) << "Th-SE";
  }
  os << "\n";

  const std::size_t n_priors = reports.front()->priors.size();
  for (std::size_t p = 0; p < n_priors; ++p) {
    os << std::left << std::setw(label_w)
       << reports.front()->priors[p].label.substr(0, label_w - 1) << std::right;
    for (const BenchmarkReport* rep : reports) {
      const PriorAggregate& agg = rep->priors.at(p);
      const MetricRow& row = rep->baseline_index >= 0
                                 ? (use_median ? agg.median_normalized : agg.mean_normalized)
                                 : (use_median ? agg.median : agg.mean);
      for (int w = 0; w < 4; ++w) append_cell(os, pick(row, w), col_w);
    }
    os << "\n";
  }
  os << "Note: " << (use_median ? "median" : "mean") << " across replications"
     << (reports.front()->baseline_index >= 0
             ? ", normalized to 100 for the noninformative prior."
             : ".")
     << "\n";
  return os.str();
}

std::string render_timing_table(const std::vector<const BenchmarkReport*>& reports) {
  if (reports.empty()) return "";
  std::ostringstream os;
  const int label_w = 28, col_w = 16;
  os << std::left << std::setw(label_w) << "Prior" << std::right;
  for (const BenchmarkReport* rep : reports) {
    std::ostringstream head;
    head << "K*=" << rep->scenario.true_rank << " miss=" << std::fixed << std::setprecision(0)
         << 100.0 * rep->scenario.missing_fraction << "%";
    os << std::setw(col_w) << head.str();
  }
  os << "\n";
  const std::size_t n_priors = reports.front()->priors.size();
  for (std::size_t p = 0; p < n_priors; ++p) {
    os << std::left << std::setw(label_w)
       << reports.front()->priors[p].label.substr(0, label_w - 1) << std::right;
    for (const BenchmarkReport* rep : reports) {
      append_cell(os, rep->priors.at(p).mean_seconds_per_1k, col_w);
    }
    os << "\n";
  }
  os << "Note: mean computation time per 1,000 iterations in seconds.\n";
  return os.str();
}

namespace {

void write_stat_row(std::ostream& out, const BenchmarkReport& rep, const std::string& prior,
                    const std::string& stat, double value) {
  out << rep.scenario.j << "," << rep.scenario.t << "," << rep.scenario.true_rank << ","
      << rep.scenario.missing_fraction << "," << rep.scenario.snr << ","
      << rep.scenario.replications << "," << rep.scenario.model_rank() << ",\"" << prior
      << "\"," << stat << ",";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  out << buf << "\n";
}

}  // namespace

void write_summary_csv(std::ostream& out, const std::vector<const BenchmarkReport*>& reports) {
  out << "j,t,true_rank,missing_fraction,snr,replications,k,prior,statistic,value\n";
  static const char* names[6] = {"ae_omega", "se_omega",         "ae_theta",
                                 "se_theta", "ae_theta_missing", "se_theta_missing"};
  for (const BenchmarkReport* rep : reports) {
    for (const PriorAggregate& agg : rep->priors) {
      for (int w = 0; w < 6; ++w) {
        write_stat_row(out, *rep, agg.label, std::string(names[w]) + "_mean",
                       pick(agg.mean, w));
        write_stat_row(out, *rep, agg.label, std::string(names[w]) + "_median",
                       pick(agg.median, w));
        if (rep->baseline_index >= 0) {
          write_stat_row(out, *rep, agg.label, std::string(names[w]) + "_mean_norm",
                         pick(agg.mean_normalized, w));
          write_stat_row(out, *rep, agg.label, std::string(names[w]) + "_median_norm",
                         pick(agg.median_normalized, w));
        }
      }
      write_stat_row(out, *rep, agg.label, "seconds_per_1k_mean", agg.mean_seconds_per_1k);
      write_stat_row(out, *rep, agg.label, "n_complete", agg.n_complete);
    }
  }
}

void write_cells_csv(std::ostream& out, const std::vector<const BenchmarkReport*>& reports) {
  out << "j,t,true_rank,missing_fraction,replication,prior,ok,error,ae_omega,se_omega,"
         "ae_theta,se_theta,ae_theta_missing,se_theta_missing,seconds_per_1k,"
         "divergence_rate,mean_unitarity_phi,mean_unitarity_psi,frac_negative_increments\n";
  for (const BenchmarkReport* rep : reports) {
    for (const CellResult& cell : rep->cells) {
      out << rep->scenario.j << "," << rep->scenario.t << "," << rep->scenario.true_rank << ","
          << rep->scenario.missing_fraction << "," << cell.replication << ",\""
          << cell.prior_label << "\"," << (cell.ok ? 1 : 0) << ",\"" << cell.error << "\"";
      const double vals[] = {cell.metrics.ae_omega,
                             cell.metrics.se_omega,
                             cell.metrics.ae_theta,
                             cell.metrics.se_theta,
                             cell.metrics.ae_theta_missing,
                             cell.metrics.se_theta_missing,
                             cell.seconds_per_1k,
                             cell.divergence_rate,
                             cell.mean_unitarity_phi,
                             cell.mean_unitarity_psi,
                             cell.fraction_negative_increments};
      char buf[40];
      for (double v : vals) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << "," << buf;
      }
      out << "\n";
    }
  }
}

}  // namespace bmf
