#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bmf/benchmark.hpp"
#include "bmf/chain.hpp"
#include "bmf/csv.hpp"
#include "bmf/priors.hpp"
#include "bmf/store_io.hpp"
#include "bmf/summary.hpp"

namespace bmf {

/// Sectioned key = value file. Lines starting with '#' are comments; keys
/// are case-sensitive and lowercase by convention.
class IniFile {
 public:
  IniFile() = default;
  static IniFile parse_file(const std::string& path);
  static IniFile parse_string(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get(const std::string& section, const std::string& key,
                  const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  long get_long(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;

  const std::map<std::string, std::map<std::string, std::string>>& sections() const {
    return sections_;
  }

 private:
  std::map<std::string, std::map<std::string, std::string>> sections_;
};

/// Resolved configuration of a single fit run. Defaults mirror the reference
/// protocol, so an empty sampler block reproduces it at full scale. The
/// prior is kept in descriptor form because elicitation targets depend on
/// the model rank, which may be automatic.
struct RunConfig {
  std::string data_path;
  CsvOptions csv;
  bool standardize = false;
  bool destandardize_theta = false;  // report Theta in original units as well
  int k = 0;                         // 0 = auto from max_rank
  std::string prior_descriptor = "cspe q=0.5";
  SamplerConfig sampler;
  std::uint64_t seed = 0;

  void validate() const;
  /// Canonical serialization of every resolved setting except output
  /// locations; hashed for provenance.
  std::string canonical_string() const;
};

/// Parses "family key=value ..." descriptors, e.g. "exponential chi=0.5",
/// "lomax mu1=2 mu2=20", "cspe q=0.9" (alpha elicited at k_model - 1) or
/// "cspe alpha=5.16". k_model resolves elicitation targets.
PriorSpec parse_prior_descriptor(const std::string& text, int k_model);

/// The comparison grid: noninformative; exponential chi in {1, 0.5, 0.1};
/// Lomax mu1 = 2, mu2 in {2, 5, 20}; SSE; CSPE conservative (q = 0.5) and
/// aggressive (q = 0.9) elicited at k_model - 1.
std::vector<PriorSpec> default_prior_grid(int k_model);

RunConfig parse_fit_config(const IniFile& ini);

/// Multi-scenario simulation plan: the cross product of true ranks and
/// missing fractions, sharing size, seed, sampler settings and prior grid.
struct SimulationPlan {
  int j = 30;
  int t = 30;
  double snr = 10.0;
  int replications = 80;
  std::uint64_t seed = 0;
  int k = 0;
  int workers = 0;
  std::vector<int> true_ranks = {12, 7, 3};
  std::vector<double> missing_fractions = {0.0, 0.1, 0.9};
  std::vector<std::string> prior_descriptors;  // empty = default grid
  SamplerConfig sampler;

  std::vector<Scenario> expand() const;
  std::string canonical_string() const;
};

SimulationPlan parse_scenario_config(const IniFile& ini);

/// FNV-1a over the canonical config string, printed as fixed-width hex.
std::string config_hash(const std::string& canonical);

struct FitResult {
  DrawStore store;
  PosteriorSummary summary;
  Provenance provenance;
  PriorSpec prior;     // resolved against the model rank
  int k = 0;           // resolved rank
  RowStats row_stats;  // populated when standardize was requested
  bool standardized = false;
};

/// Loads the data, runs the chain and summarizes the retained draws.
FitResult fit(const RunConfig& cfg);

/// Persists store + summary (and the back-transformed Theta mean when
/// requested) under out_dir.
void write_fit_outputs(const std::string& out_dir, const RunConfig& cfg, const FitResult& res);

}  // namespace bmf
