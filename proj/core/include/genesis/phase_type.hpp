#pragma once

#include <string>
#include <utility>
#include <vector>

#include "genesis/config.hpp"
#include "genesis/matrix_ops.hpp"
#include "genesis/rng.hpp"

namespace genesis {

// Absorption-time distribution of a transient CTMC: initial law `initial`
// over the transient phases, subgenerator `subgenerator`, exit rates
// `exit` = -subgenerator * 1. Immutable by convention once built; treat as
// read-only and share freely across threads.
struct PhaseType {
  Vector initial;
  Matrix subgenerator;
  Vector exit;
  std::string meta;

  Eigen::Index order() const { return initial.size(); }

  double pdf(double t, const NumericOptions& opts = default_options()) const;
  double cdf(double t, const NumericOptions& opts = default_options()) const;
  double moment(int k) const;
  double mean() const { return moment(1); }
  double variance() const;
  double sample(Rng& rng) const;
};

// Validates invariants (initial a probability vector, subgenerator Metzler
// with nonpositive row sums and invertible), derives the exit vector, and
// snaps roundoff-negative exit entries to zero. Throws std::invalid_argument.
PhaseType make_phase_type(Vector initial, Matrix subgenerator,
                          std::string meta = "",
                          const NumericOptions& opts = default_options());

PhaseType ph_exponential(double rate);
PhaseType ph_erlang(int shape, double rate);
PhaseType ph_hyperexponential(const std::vector<double>& weights,
                              const std::vector<double>& rates);
PhaseType ph_hyper_erlang(const std::vector<double>& weights,
                          const std::vector<int>& shapes,
                          const std::vector<double>& rates);

// Location/scale of the log-normal with the given mean and variance.
std::pair<double, double> lognormal_params(double mean, double variance);

std::string to_json(const PhaseType& d);
PhaseType phase_type_from_json(const std::string& text);

// Stable content hash (order, initial, subgenerator at full precision),
// 16 hex digits. Meta is excluded so provenance notes don't split caches.
std::string digest(const PhaseType& d);

}  // namespace genesis
