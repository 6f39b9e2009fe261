#include "bmf/store_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace bmf {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_provenance_comment(std::ofstream& out, const Provenance& prov) {
  out << "# config_hash=" << prov.config_hash << " seed=" << prov.seed << "\n";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_double(const std::string& s, const char* what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw std::runtime_error(std::string("draw store: non-numeric ") + what + " field \"" + s +
                             "\"");
  }
  return v;
}

}  // namespace

void save_draw_store(const std::string& dir, const DrawStore& store, const Provenance& prov,
                     const nlohmann::json& extra) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  const Eigen::Index n = store.n_draws(), k = store.k;

  {
    std::ofstream out = open_out(fs::path(dir) / "draws.csv");
    write_provenance_comment(out, prov);
    out << "iter";
    for (Eigen::Index i = 1; i <= k; ++i) out << ",omega_" << i;
    out << ",tau";
    for (Eigen::Index i = 1; i <= k; ++i) out << ",lambda_" << i;
    for (Eigen::Index i = 1; i <= k; ++i) out << ",z_" << i;
    if (store.has_factors()) {
      for (Eigen::Index i = 1; i <= store.phi.cols(); ++i) out << ",phi_" << i;
      for (Eigen::Index i = 1; i <= store.psi.cols(); ++i) out << ",psi_" << i;
    }
    out << "\n";
    for (Eigen::Index r = 0; r < n; ++r) {
      out << store.iteration[static_cast<std::size_t>(r)];
      for (Eigen::Index c = 0; c < k; ++c) out << "," << fmt(store.omega(r, c));
      out << "," << fmt(store.tau(r));
      for (Eigen::Index c = 0; c < k; ++c) out << "," << fmt(store.lambda(r, c));
      for (Eigen::Index c = 0; c < k; ++c) out << "," << store.z(r, c);
      if (store.has_factors()) {
        for (Eigen::Index c = 0; c < store.phi.cols(); ++c) out << "," << fmt(store.phi(r, c));
        for (Eigen::Index c = 0; c < store.psi.cols(); ++c) out << "," << fmt(store.psi(r, c));
      }
      out << "\n";
    }
  }

  {
    std::ofstream out = open_out(fs::path(dir) / "diagnostics.csv");
    write_provenance_comment(out, prov);
    out << "iter,log_density,depth,n_leapfrog,divergent,step_size,eta1,eta2,"
           "unitarity_phi,unitarity_psi\n";
    for (const DiagnosticsRow& d : store.diagnostics) {
      out << d.iteration << "," << fmt(d.log_density) << "," << d.depth << "," << d.n_leapfrog
          << "," << (d.divergent ? 1 : 0) << "," << fmt(d.step_size) << "," << fmt(d.eta1) << ","
          << fmt(d.eta2) << "," << fmt(d.unitarity_phi) << "," << fmt(d.unitarity_psi) << "\n";
    }
  }

  {
    std::ofstream out = open_out(fs::path(dir) / "theta_mean.csv");
    write_provenance_comment(out, prov);
    for (Eigen::Index r = 0; r < store.theta_mean.rows(); ++r) {
      for (Eigen::Index c = 0; c < store.theta_mean.cols(); ++c) {
        if (c > 0) out << ",";
        out << fmt(store.theta_mean(r, c));
      }
      out << "\n";
    }
  }

  nlohmann::json meta = extra;
  meta["config_hash"] = prov.config_hash;
  meta["seed"] = prov.seed;
  meta["j"] = store.j;
  meta["t"] = store.t;
  meta["k"] = store.k;
  meta["n_draws"] = static_cast<long>(n);
  meta["store_factors"] = store.has_factors();
  meta["n_transitions"] = store.n_transitions;
  meta["n_post_warmup"] = store.n_post_warmup;
  meta["n_divergent"] = store.n_divergent;
  meta["n_divergent_post_warmup"] = store.n_divergent_post_warmup;
  meta["divergence_rate"] = store.divergence_rate();
  meta["elapsed_seconds"] = store.elapsed_seconds;

  std::ofstream out = open_out(fs::path(dir) / "meta.json");
  out << meta.dump(2) << "\n";
}

LoadedStore load_draw_store(const std::string& dir) {
  namespace fs = std::filesystem;
  LoadedStore loaded;

  {
    std::ifstream in(fs::path(dir) / "meta.json");
    if (!in) throw std::runtime_error("load_draw_store: missing meta.json in " + dir);
    try {
      in >> loaded.meta;
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error(std::string("load_draw_store: corrupt meta.json: ") + e.what());
    }
  }
  DrawStore& store = loaded.store;
  try {
    store.j = loaded.meta.at("j").get<int>();
    store.t = loaded.meta.at("t").get<int>();
    store.k = loaded.meta.at("k").get<int>();
    store.n_transitions = loaded.meta.at("n_transitions").get<long>();
    store.n_post_warmup = loaded.meta.at("n_post_warmup").get<long>();
    store.n_divergent = loaded.meta.at("n_divergent").get<long>();
    store.n_divergent_post_warmup = loaded.meta.at("n_divergent_post_warmup").get<long>();
    store.elapsed_seconds = loaded.meta.at("elapsed_seconds").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("load_draw_store: incomplete meta.json: ") + e.what());
  }
  const bool has_factors = loaded.meta.value("store_factors", false);
  const long n_expected = loaded.meta.at("n_draws").get<long>();
  const Eigen::Index k = store.k;

  std::ifstream in(fs::path(dir) / "draws.csv");
  if (!in) throw std::runtime_error("load_draw_store: missing draws.csv in " + dir);
  std::string line;
  // provenance comment, then header
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    throw std::runtime_error("load_draw_store: draws.csv lacks the provenance line");
  }
  if (!std::getline(in, line)) throw std::runtime_error("load_draw_store: draws.csv truncated");
  const std::size_t base_cols = 1 + static_cast<std::size_t>(3 * k) + 1;
  const std::size_t n_cols =
      base_cols + (has_factors ? static_cast<std::size_t>((store.j + store.t) * k) : 0);
  if (split_csv(line).size() != n_cols) {
    throw std::runtime_error("load_draw_store: draws.csv header has unexpected column count");
  }

  store.omega.resize(n_expected, k);
  store.tau.resize(n_expected);
  store.lambda.resize(n_expected, k);
  store.z.resize(n_expected, k);
  if (has_factors) {
    store.phi.resize(n_expected, store.j * k);
    store.psi.resize(n_expected, store.t * k);
  }

  long r = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (r >= n_expected) throw std::runtime_error("load_draw_store: more rows than meta.json records");
    const std::vector<std::string> f = split_csv(line);
    if (f.size() != n_cols) {
      throw std::runtime_error("load_draw_store: truncated row " + std::to_string(r + 1));
    }
    std::size_t c = 0;
    store.iteration.push_back(static_cast<long>(parse_double(f[c++], "iter")));
    for (Eigen::Index i = 0; i < k; ++i) store.omega(r, i) = parse_double(f[c++], "omega");
    store.tau(r) = parse_double(f[c++], "tau");
    for (Eigen::Index i = 0; i < k; ++i) store.lambda(r, i) = parse_double(f[c++], "lambda");
    for (Eigen::Index i = 0; i < k; ++i) {
      store.z(r, i) = static_cast<int>(parse_double(f[c++], "z"));
    }
    if (has_factors) {
      for (Eigen::Index i = 0; i < store.phi.cols(); ++i) {
        store.phi(r, i) = parse_double(f[c++], "phi");
      }
      for (Eigen::Index i = 0; i < store.psi.cols(); ++i) {
        store.psi(r, i) = parse_double(f[c++], "psi");
      }
    }
    ++r;
  }
  if (r != n_expected) {
    throw std::runtime_error("load_draw_store: expected " + std::to_string(n_expected) +
                             " rows, found " + std::to_string(r));
  }

  {
    std::ifstream tm(fs::path(dir) / "theta_mean.csv");
    if (!tm) throw std::runtime_error("load_draw_store: missing theta_mean.csv in " + dir);
    store.theta_mean.resize(store.j, store.t);
    std::getline(tm, line);  // provenance
    for (Eigen::Index rr = 0; rr < store.j; ++rr) {
      if (!std::getline(tm, line)) {
        throw std::runtime_error("load_draw_store: theta_mean.csv truncated");
      }
      const std::vector<std::string> f = split_csv(line);
      if (static_cast<Eigen::Index>(f.size()) != store.t) {
        throw std::runtime_error("load_draw_store: theta_mean.csv has a ragged row");
      }
      for (Eigen::Index cc = 0; cc < store.t; ++cc) {
        store.theta_mean(rr, cc) = parse_double(f[static_cast<std::size_t>(cc)], "theta_mean");
      }
    }
  }
  return loaded;
}

void save_summary(const std::string& dir, const PosteriorSummary& summary,
                  const Provenance& prov) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  nlohmann::json j;
  j["config_hash"] = prov.config_hash;
  j["seed"] = prov.seed;
  j["n_draws"] = summary.n_draws;
  j["tau_mean"] = summary.tau_mean;
  j["snr_mean"] = summary.snr_mean;
  auto scalar = [](const CredibleScalar& c) {
    return nlohmann::json{{"mean", c.mean}, {"lower", c.lower}, {"upper", c.upper}};
  };
  j["omega"] = nlohmann::json::array();
  for (const CredibleScalar& c : summary.omega) j["omega"].push_back(scalar(c));
  j["variance_shares"] = nlohmann::json::array();
  for (const CredibleScalar& c : summary.variance_shares) {
    j["variance_shares"].push_back(scalar(c));
  }
  j["theta_mean"] = nlohmann::json::array();
  for (Eigen::Index r = 0; r < summary.theta_mean.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < summary.theta_mean.cols(); ++c) {
      row.push_back(summary.theta_mean(r, c));
    }
    j["theta_mean"].push_back(std::move(row));
  }
  {
    std::ofstream out = open_out(fs::path(dir) / "summary.json");
    out << j.dump(2) << "\n";
  }

  {
    std::ofstream out = open_out(fs::path(dir) / "omega_summary.csv");
    write_provenance_comment(out, prov);
    out << "k,mean,lower,upper\n";
    for (std::size_t i = 0; i < summary.omega.size(); ++i) {
      const CredibleScalar& c = summary.omega[i];
      out << (i + 1) << "," << fmt(c.mean) << "," << fmt(c.lower) << "," << fmt(c.upper) << "\n";
    }
  }
  {
    std::ofstream out = open_out(fs::path(dir) / "shares_summary.csv");
    write_provenance_comment(out, prov);
    out << "component,mean,lower,upper\n";
    for (std::size_t i = 0; i < summary.variance_shares.size(); ++i) {
      const CredibleScalar& c = summary.variance_shares[i];
      const bool noise = i + 1 == summary.variance_shares.size();
      out << (noise ? std::string("noise") : "omega_" + std::to_string(i + 1)) << ","
          << fmt(c.mean) << "," << fmt(c.lower) << "," << fmt(c.upper) << "\n";
    }
  }
  {
    std::ofstream out = open_out(fs::path(dir) / "tau_inv_density.csv");
    write_provenance_comment(out, prov);
    out << "tau_inv,density\n";
    for (Eigen::Index g = 0; g < summary.tau_inv_grid.size(); ++g) {
      out << fmt(summary.tau_inv_grid(g)) << "," << fmt(summary.tau_inv_density(g)) << "\n";
    }
  }
}

}  // namespace bmf
