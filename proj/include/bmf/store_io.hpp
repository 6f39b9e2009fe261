#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "bmf/chain.hpp"
#include "bmf/summary.hpp"

namespace bmf {

/// Stamped into every output file so a result can be traced to the exact
/// configuration and root seed that produced it.
struct Provenance {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// Writes draws.csv (iteration, omega, tau, lambda, z and optionally the
/// flattened factors), diagnostics.csv, theta_mean.csv and meta.json under
/// dir. `extra` is merged into the sidecar.
void save_draw_store(const std::string& dir, const DrawStore& store, const Provenance& prov,
                     const nlohmann::json& extra = nlohmann::json::object());

struct LoadedStore {
  DrawStore store;
  nlohmann::json meta;
};

/// Inverse of save_draw_store; throws std::runtime_error on a missing,
/// truncated or inconsistent store.
LoadedStore load_draw_store(const std::string& dir);

/// Writes summary.json, omega_summary.csv, shares_summary.csv and
/// tau_inv_density.csv under dir.
void save_summary(const std::string& dir, const PosteriorSummary& summary,
                  const Provenance& prov);

}  // namespace bmf
