#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bmf/dgp.hpp"
#include "bmf/metrics.hpp"

namespace bmf {

/// Outcome of one (replication, prior) cell. Failed chains are recorded and
/// skipped by the aggregates instead of aborting the run.
struct CellResult {
  int replication = 0;
  int prior_index = 0;
  std::string prior_label;
  bool ok = false;
  std::string error;
  MetricRow metrics;
  double seconds_per_1k = 0.0;
  double divergence_rate = 0.0;
  double mean_unitarity_phi = 0.0;
  double mean_unitarity_psi = 0.0;
  double fraction_negative_increments = 0.0;
};

/// Per-prior aggregates across complete replications: raw mean and median of
/// each metric plus the variants normalized so the noninformative baseline
/// reads 100.
struct PriorAggregate {
  std::string label;
  int n_complete = 0;
  MetricRow mean;
  MetricRow median;
  MetricRow mean_normalized;
  MetricRow median_normalized;
  double mean_seconds_per_1k = 0.0;
};

struct BenchmarkReport {
  Scenario scenario;
  std::vector<CellResult> cells;       // ordered by (replication, prior)
  std::vector<PriorAggregate> priors;  // ordered as scenario.prior_grid
  int baseline_index = -1;             // noninformative row, -1 when absent

  const CellResult& cell(int replication, int prior_index) const;
};

/// Runs every replication x prior cell on a bounded worker pool. Within a
/// replication all priors share the same data and mask; seeds derive from
/// (scenario seed, replication, prior index) only, so results do not depend
/// on scheduling order.
BenchmarkReport run_benchmark(const Scenario& scenario);

/// Aligned-text table of normalized metrics in the benchmark layout: one
/// column group of (omega AE, omega SE, theta AE, theta SE) per report, one
/// row per prior. Reports typically share a missing fraction and differ in
/// true rank.
std::string render_metric_table(const std::vector<const BenchmarkReport*>& reports,
                                bool use_median);

/// Seconds per 1,000 iterations, rows per prior, one column per report.
std::string render_timing_table(const std::vector<const BenchmarkReport*>& reports);

/// Long-format CSV: one row per (scenario, prior, statistic).
void write_summary_csv(std::ostream& out, const std::vector<const BenchmarkReport*>& reports);

/// Per-cell CSV with raw metrics for every replication x prior.
void write_cells_csv(std::ostream& out, const std::vector<const BenchmarkReport*>& reports);

}  // namespace bmf
