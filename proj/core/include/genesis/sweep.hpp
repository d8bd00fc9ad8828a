#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "genesis/config.hpp"
#include "genesis/network.hpp"
#include "genesis/ph_fit.hpp"

namespace genesis {

// One entry of a distribution menu: exponential, or log-normal with a
// variance factor (variance = factor * mean^2) fitted at the sweep's order.
struct LawSpec {
  enum class Kind { Exponential, LogNormal };
  Kind kind = Kind::Exponential;
  double variance_factor = 1.0;  // log-normal only

  std::string label() const;  // "exp", "lognormal-v1", "lognormal-v2", ...
};

struct SweepConfig {
  std::vector<LawSpec> transmission_menu;
  std::vector<LawSpec> recovery_menu;
  std::vector<double> mu_trans_grid;  // transmission means
  std::vector<double> mu_rec_grid;    // recovery means, reported as mu/lambda_max
  int fit_order = 10;                 // applies to both laws
  FitOptions fit_options;
  uint64_t seed = 0;
  int workers = 0;  // 0 = available parallelism
  bool timestamp = true;
};

// JSON config reader: {"transmission": [...], "recovery": [...],
// "mu_trans": [...], "mu_rec": [...], "fit_order": p, "seed": s, ...}.
SweepConfig sweep_config_from_json(const std::string& text);

struct SweepCell {
  std::string panel_trans;
  std::string panel_rec;
  double mu_t = 0.0;
  double mu_r = 0.0;
  double mu_r_norm = 0.0;  // mu_r / lambda_max
  double eta_a = 0.0;
  double bound_rate = 0.0;  // -eta_a
  double fit_l1_trans = 0.0;
  double fit_l1_rec = 0.0;
  std::string error;  // empty on success
};

struct SweepResult {
  std::vector<SweepCell> cells;  // panel-major, then mu_t, then mu_r
  double lambda_max = 0.0;
  std::string graph_digest;
  uint64_t seed = 0;

  // Comment header (graph hash, lambda_max, seed, canonical edges; plus a
  // timestamp line unless suppressed) followed by the fixed column set:
  // panel_trans, panel_rec, mu_t, mu_r_norm, eta_A, bound_rate,
  // fit_l1_trans, fit_l1_rec, graph_hash, seed, error.
  std::string to_csv(bool timestamp, const std::string& canonical_edges) const;
};

// Evaluates every (transmission law, recovery law, mu_t, mu_r) cell:
// resolves each law at its mean through a content-addressed fit cache,
// builds the bound matrix, records -eta. Per-cell failures land in the
// error column; the sweep continues. Deterministic for a fixed config.
SweepResult run_sweep(const Network& network, const SweepConfig& config,
                      const NumericOptions& opts = default_options());

}  // namespace genesis
