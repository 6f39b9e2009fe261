#include "bmf/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bmf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

IniFile IniFile::parse_string(const std::string& text) {
  IniFile ini;
  std::istringstream in(text);
  std::string line, section;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unterminated section header");
      }
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    ini.sections_[section][key] = value;
  }
  return ini;
}

IniFile IniFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str());
}

bool IniFile::has(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  return s != sections_.end() && s->second.count(key) > 0;
}

std::string IniFile::get(const std::string& section, const std::string& key,
                         const std::string& fallback) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return fallback;
  const auto k = s->second.find(key);
  return k == s->second.end() ? fallback : k->second;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw std::invalid_argument("config [" + section + "] " + key + ": not a number: " + v);
  }
  return x;
}

long IniFile::get_long(const std::string& section, const std::string& key, long fallback) const {
  const double x = get_double(section, key, static_cast<double>(fallback));
  const long l = static_cast<long>(x);
  if (static_cast<double>(l) != x) {
    throw std::invalid_argument("config [" + section + "] " + key + ": not an integer");
  }
  return l;
}

bool IniFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string v = get(section, key, "");
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config [" + section + "] " + key + ": not a boolean: " + v);
}

PriorSpec parse_prior_descriptor(const std::string& text, int k_model) {
  std::istringstream in(trim(text));
  std::string family;
  in >> family;
  std::map<std::string, double> kv;
  std::string token;
  while (in >> token) {
    const auto eq = token.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("prior descriptor \"" + text + "\": expected key=value, got " +
                                  token);
    }
    const std::string key = token.substr(0, eq);
    const std::string value = token.substr(eq + 1);
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0') {
      throw std::invalid_argument("prior descriptor \"" + text + "\": bad number for " + key);
    }
    kv[key] = x;
  }
  auto take = [&kv](const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const double v = it->second;
    kv.erase(it);
    return v;
  };
  auto finish = [&kv, &text](PriorSpec s) {
    if (!kv.empty()) {
      throw std::invalid_argument("prior descriptor \"" + text + "\": unknown key " +
                                  kv.begin()->first);
    }
    return s;
  };

  if (family == "noninformative" || family == "noninf") {
    return finish(PriorSpec::noninformative());
  }
  if (family == "exponential" || family == "exp") {
    return finish(PriorSpec::exponential(take("chi", 1.0)));
  }
  if (family == "lomax") {
    return finish(PriorSpec::lomax(take("mu1", 2.0), take("mu2", 20.0)));
  }
  if (family == "sse" || family == "cspe") {
    CspeHyper h;
    h.delta = take("delta", 10.0);
    h.kappa1 = take("kappa1", 2.0);
    h.kappa2 = take("kappa2", 20.0);
    h.k = k_model;
    if (family == "sse") return finish(PriorSpec::sse(h));
    const double q = take("q", 0.0);
    const double alpha = take("alpha", 0.0);
    if (q > 0.0 && alpha > 0.0) {
      throw std::invalid_argument("prior descriptor \"" + text + "\": give q or alpha, not both");
    }
    if (q > 0.0) {
      h.alpha = elicit_alpha(q, std::max(1, k_model - 1));
    } else if (alpha > 0.0) {
      h.alpha = alpha;
    } else {
      h.alpha = elicit_alpha(0.5, std::max(1, k_model - 1));  // conservative default
    }
    return finish(PriorSpec::cspe(h));
  }
  throw std::invalid_argument("prior descriptor \"" + text + "\": unknown family " + family);
}

std::vector<PriorSpec> default_prior_grid(int k_model) {
  std::vector<PriorSpec> grid;
  grid.push_back(PriorSpec::noninformative());
  for (double chi : {1.0, 0.5, 0.1}) grid.push_back(PriorSpec::exponential(chi));
  for (double mu2 : {2.0, 5.0, 20.0}) grid.push_back(PriorSpec::lomax(2.0, mu2));
  CspeHyper h;
  h.k = k_model;
  h.alpha = 1.0;
  grid.push_back(PriorSpec::sse(h));
  const int target = std::max(1, k_model - 1);
  h.alpha = elicit_alpha(0.5, target);
  PriorSpec conservative = PriorSpec::cspe(h);
  conservative.display = "cspe conservative";
  grid.push_back(conservative);
  h.alpha = elicit_alpha(0.9, target);
  PriorSpec aggressive = PriorSpec::cspe(h);
  aggressive.display = "cspe aggressive";
  grid.push_back(aggressive);
  return grid;
}

namespace {

SamplerConfig parse_sampler_blocks(const IniFile& ini) {
  SamplerConfig s;
  s.iterations = ini.get_long("sampler", "iterations", 12000);
  s.burn_in = ini.get_long("sampler", "burn_in", 2000);
  s.thin = ini.get_long("sampler", "thin", 1);
  s.nu1 = ini.get_double("sampler", "nu1", 1e-3);
  s.nu2 = ini.get_double("sampler", "nu2", 1e-3);
  s.store_factors = ini.get_bool("sampler", "store_factors", true);
  const std::string zw = ini.get("sampler", "z_weights", "stick");
  if (zw == "stick") {
    s.z_weights = ZWeights::Stick;
  } else if (zw == "cumulative") {
    s.z_weights = ZWeights::Cumulative;
  } else {
    throw std::invalid_argument("config [sampler] z_weights: expected stick or cumulative");
  }
  s.nuts.target_accept = ini.get_double("sampler", "target_accept", 0.8);
  s.nuts.max_tree_depth = static_cast<int>(ini.get_long("sampler", "max_tree_depth", 10));
  s.nuts.adapt_iterations = static_cast<int>(ini.get_long("sampler", "adapt_iterations", 2000));
  s.nuts.initial_step_size = ini.get_double("sampler", "initial_step_size", 0.0);
  s.schedule.eta_bar1 = ini.get_double("schedule", "eta_bar1", 1e3);
  s.schedule.eta_bar2 = ini.get_double("schedule", "eta_bar2", 1e3);
  s.schedule.a_eta = ini.get_double("schedule", "a_eta", 0.5);
  s.schedule.b_eta = ini.get_double("schedule", "b_eta", 0.1);
  return s;
}

std::string sampler_canonical(const SamplerConfig& s) {
  std::ostringstream out;
  out << "iterations=" << s.iterations << ";burn_in=" << s.burn_in << ";thin=" << s.thin
      << ";nu1=" << fmt_full(s.nu1) << ";nu2=" << fmt_full(s.nu2)
      << ";z_weights=" << (s.z_weights == ZWeights::Stick ? "stick" : "cumulative")
      << ";store_factors=" << (s.store_factors ? 1 : 0)
      << ";target_accept=" << fmt_full(s.nuts.target_accept)
      << ";max_tree_depth=" << s.nuts.max_tree_depth
      << ";adapt_iterations=" << s.nuts.adapt_iterations
      << ";initial_step_size=" << fmt_full(s.nuts.initial_step_size)
      << ";eta_bar1=" << fmt_full(s.schedule.eta_bar1)
      << ";eta_bar2=" << fmt_full(s.schedule.eta_bar2)
      << ";a_eta=" << fmt_full(s.schedule.a_eta) << ";b_eta=" << fmt_full(s.schedule.b_eta);
  return out.str();
}

std::string prior_canonical(const PriorSpec& p) {
  std::ostringstream out;
  switch (p.family) {
    case PriorFamily::Noninformative:
      out << "noninformative";
      break;
    case PriorFamily::Exponential:
      out << "exponential;chi=" << fmt_full(p.chi);
      break;
    case PriorFamily::Lomax:
      out << "lomax;mu1=" << fmt_full(p.mu1) << ";mu2=" << fmt_full(p.mu2);
      break;
    case PriorFamily::Sse:
      out << "sse;delta=" << fmt_full(p.hyper.delta) << ";kappa1=" << fmt_full(p.hyper.kappa1)
          << ";kappa2=" << fmt_full(p.hyper.kappa2);
      break;
    case PriorFamily::Cspe:
      out << "cspe;delta=" << fmt_full(p.hyper.delta) << ";kappa1=" << fmt_full(p.hyper.kappa1)
          << ";kappa2=" << fmt_full(p.hyper.kappa2) << ";alpha=" << fmt_full(p.hyper.alpha);
      break;
  }
  return out.str();
}

}  // namespace

void RunConfig::validate() const {
  if (data_path.empty()) throw std::invalid_argument("RunConfig: data path is required");
  if (prior_descriptor.empty()) throw std::invalid_argument("RunConfig: prior is required");
  sampler.validate();
  if (k < 0) throw std::invalid_argument("RunConfig: k must be >= 0");
}

std::string RunConfig::canonical_string() const {
  std::ostringstream out;
  out << "mode=fit;data=" << data_path << ";missing_token=" << csv.missing_token
      << ";header=" << (csv.header ? 1 : 0) << ";row_labels=" << (csv.row_labels ? 1 : 0)
      << ";standardize=" << (standardize ? 1 : 0) << ";k=" << k << ";seed=" << seed << ";prior{"
      << prior_descriptor << "};sampler{" << sampler_canonical(sampler) << "}";
  return out.str();
}

RunConfig parse_fit_config(const IniFile& ini) {
  RunConfig cfg;
  cfg.data_path = ini.get("data", "path", "");
  cfg.csv.missing_token = ini.get("data", "missing_token", "NA");
  cfg.csv.header = ini.get_bool("data", "header", false);
  cfg.csv.row_labels = ini.get_bool("data", "row_labels", false);
  cfg.standardize = ini.get_bool("data", "standardize", false);
  cfg.destandardize_theta = ini.get_bool("data", "destandardize_theta", false);
  cfg.k = static_cast<int>(ini.get_long("model", "k", 0));
  cfg.seed = static_cast<std::uint64_t>(ini.get_long("sampler", "seed", 0));
  cfg.prior_descriptor = ini.get("prior", "spec", cfg.prior_descriptor);
  cfg.sampler = parse_sampler_blocks(ini);
  return cfg;
}

std::vector<Scenario> SimulationPlan::expand() const {
  std::vector<Scenario> out;
  for (double missing : missing_fractions) {
    for (int rank : true_ranks) {
      Scenario sc;
      sc.j = j;
      sc.t = t;
      sc.true_rank = rank;
      sc.snr = snr;
      sc.missing_fraction = missing;
      sc.replications = replications;
      sc.seed = seed;
      sc.sampler = sampler;
      sc.k = k;
      sc.workers = workers;
      const int k_model = sc.model_rank();
      if (prior_descriptors.empty()) {
        sc.prior_grid = default_prior_grid(k_model);
      } else {
        for (const std::string& d : prior_descriptors) {
          sc.prior_grid.push_back(parse_prior_descriptor(d, k_model));
        }
      }
      out.push_back(std::move(sc));
    }
  }
  return out;
}

std::string SimulationPlan::canonical_string() const {
  std::ostringstream out;
  out << "mode=simulate;j=" << j << ";t=" << t << ";snr=" << fmt_full(snr)
      << ";replications=" << replications << ";seed=" << seed << ";k=" << k << ";ranks=";
  for (std::size_t i = 0; i < true_ranks.size(); ++i) {
    out << (i ? "," : "") << true_ranks[i];
  }
  out << ";missing=";
  for (std::size_t i = 0; i < missing_fractions.size(); ++i) {
    out << (i ? "," : "") << fmt_full(missing_fractions[i]);
  }
  out << ";priors=";
  for (std::size_t i = 0; i < prior_descriptors.size(); ++i) {
    out << (i ? "|" : "") << prior_descriptors[i];
  }
  out << ";sampler{" << sampler_canonical(sampler) << "}";
  return out.str();
}

SimulationPlan parse_scenario_config(const IniFile& ini) {
  SimulationPlan plan;
  plan.j = static_cast<int>(ini.get_long("scenario", "j", 30));
  plan.t = static_cast<int>(ini.get_long("scenario", "t", 30));
  plan.snr = ini.get_double("scenario", "snr", 10.0);
  plan.replications = static_cast<int>(ini.get_long("scenario", "replications", 80));
  plan.seed = static_cast<std::uint64_t>(ini.get_long("scenario", "seed", 0));
  plan.k = static_cast<int>(ini.get_long("scenario", "k", 0));
  plan.workers = static_cast<int>(ini.get_long("scenario", "workers", 0));

  auto parse_list = [&ini](const std::string& key, auto push) {
    const std::string text = ini.get("scenario", key, "");
    if (text.empty()) return false;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) continue;
      char* end = nullptr;
      const double v = std::strtod(t.c_str(), &end);
      if (end == t.c_str() || *end != '\0') {
        throw std::invalid_argument("config [scenario] " + key + ": bad entry " + t);
      }
      push(v);
    }
    return true;
  };

  std::vector<int> ranks;
  if (parse_list("true_ranks", [&ranks](double v) { ranks.push_back(static_cast<int>(v)); })) {
    plan.true_ranks = ranks;
  }
  std::vector<double> missing;
  if (parse_list("missing_fractions", [&missing](double v) { missing.push_back(v); })) {
    plan.missing_fractions = missing;
  }

  const std::string grid = ini.get("priors", "grid", "");
  if (!grid.empty()) {
    std::istringstream in(grid);
    std::string item;
    while (std::getline(in, item, ';')) {
      const std::string t = trim(item);
      if (!t.empty()) plan.prior_descriptors.push_back(t);
    }
  }
  plan.sampler = parse_sampler_blocks(ini);
  return plan;
}

std::string config_hash(const std::string& canonical) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

FitResult fit(const RunConfig& cfg) {
  cfg.validate();
  const LoadedMatrix loaded = load_matrix_csv(cfg.data_path, cfg.csv);

  FitResult res;
  ObservedMatrix data = loaded.data;
  if (cfg.standardize) {
    auto [standardized, stats] = standardize_rows(data);
    data = std::move(standardized);
    res.row_stats = stats;
    res.standardized = true;
  }

  res.k = cfg.k > 0 ? cfg.k
                    : max_rank(static_cast<int>(data.rows()), static_cast<int>(data.cols()));
  res.prior = parse_prior_descriptor(cfg.prior_descriptor, res.k);
  res.provenance.config_hash = config_hash(cfg.canonical_string());
  res.provenance.seed = cfg.seed;
  res.store = run_chain(data, res.k, res.prior, cfg.sampler, cfg.seed);
  res.summary = summarize_store(res.store);
  return res;
}

void write_fit_outputs(const std::string& out_dir, const RunConfig& cfg, const FitResult& res) {
  nlohmann::json extra;
  extra["prior"] = prior_canonical(res.prior);
  extra["prior_descriptor"] = cfg.prior_descriptor;
  extra["config"] = cfg.canonical_string();
  save_draw_store(out_dir, res.store, res.provenance, extra);
  save_summary(out_dir, res.summary, res.provenance);
  if (res.standardized && cfg.destandardize_theta) {
    const Eigen::MatrixXd original_units = destandardize_rows(res.summary.theta_mean,
                                                              res.row_stats);
    ObservedMatrix wrapped(original_units);
    CsvOptions opt;
    save_matrix_csv((std::filesystem::path(out_dir) / "theta_mean_original_units.csv").string(),
                    wrapped, opt);
  }
}

}  // namespace bmf
