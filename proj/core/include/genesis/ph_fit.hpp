#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "genesis/config.hpp"
#include "genesis/phase_type.hpp"
#include "genesis/rng.hpp"

namespace genesis {

struct FitOptions {
  int max_em_iters = 500;
  double ll_gain_tol = 1e-7;     // per-sample log-likelihood gain stop
  int em_sample_count = 100000;  // samples drawn from an analytic target
  int grid_points = 2000;        // diagnostics grid on [0, grid_span * mean]
  double grid_span = 10.0;
  int candidate_count = 4;       // moment-matched structures kept for EM
};

struct FitDiagnostics {
  double l1_error = 0.0;          // trapezoid L1 distance on the grid
  double log_likelihood = 0.0;    // per-sample, at the selected fit
  int em_iterations = 0;
  std::string structure;          // branch shapes of the winner, e.g. "3+3+4"
  bool em_converged = true;
};

struct FitResult {
  PhaseType fitted;
  FitDiagnostics diagnostics;
};

// A fitting target: either an analytic density (sampled internally for EM)
// or a set of observed samples (density estimated only for diagnostics).
struct FitTarget {
  std::function<double(double)> density;  // may be empty when samples given
  std::function<double(Rng&)> sampler;    // required with a density target
  std::vector<double> samples;            // >= 1000 when used as the source
  double mean_hint = 0.0;                 // > 0 skips the moment probe
};

FitTarget lognormal_target(double mean, double variance);
FitTarget erlang_target(int shape, double rate);
FitTarget exponential_target(double rate);
FitTarget sample_target(std::vector<double> samples);

// Hyper-Erlang fit of order <= p: moment-matched structure candidates
// refined by EM on samples, winner selected by log-likelihood. The seed
// fixes both the EM sample draw and any stochastic initialization, making
// the result a pure function of (target, p, opts, seed).
FitResult ph_fit(const FitTarget& target, int p, const FitOptions& fit_opts,
                 uint64_t seed, const NumericOptions& opts = default_options());

// L1 distance between d's density and the target density on the uniform
// diagnostics grid [0, grid_span * mean], trapezoid rule.
double fit_l1_error(const PhaseType& d, const std::function<double(double)>& target_density,
                    double mean, const FitOptions& fit_opts = FitOptions(),
                    const NumericOptions& opts = default_options());

}  // namespace genesis
