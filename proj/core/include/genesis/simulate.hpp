#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "genesis/config.hpp"
#include "genesis/matrix_ops.hpp"
#include "genesis/model.hpp"
#include "genesis/rng.hpp"

namespace genesis {

enum class EventKind {
  PhaseMoveTrans,
  PhaseMoveRec,
  InfectionAttempt,  // attempt on an already-infected target: channel reset only
  Infection,
  Recovery,
};
std::string event_kind_name(EventKind k);

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Infection;
  int src = -1;  // acting node
  int dst = -1;  // attempt/infection target, -1 otherwise
  int phase_from = -1;
  int phase_to = -1;
};

struct EventLog {
  std::vector<Event> events;
  double end_time = 0.0;  // horizon or extinction time
  bool extinct = false;   // reached the all-susceptible state
  bool censored = false;  // event cap hit before extinction/horizon

  // One event per line: time kind src dst phase-from phase-to, times at 17
  // significant digits, unused fields -1.
  std::string to_text() const;
};

// Gillespie direct-method trajectory of the embedded chain. Stops at the
// horizon, at extinction, or at opts.event_cap events (censored flag).
EventLog simulate_event_driven(const GenesisModel& model, double horizon,
                               uint64_t seed,
                               const NumericOptions& opts = default_options());

// First time the all-susceptible state is reached. censored means the event
// cap fired first, with time equal to the clock at the cap.
struct ExtinctionResult {
  double time = 0.0;
  bool censored = false;
};
ExtinctionResult extinction_time(const GenesisModel& model, uint64_t seed,
                                 const NumericOptions& opts = default_options());

// Per-replica infected fraction sampled on a time grid. Replica seeds are
// derived from the master seed by counter, so row r is stable when the
// replica count changes.
struct PrevalenceTable {
  std::vector<double> grid;
  Matrix values;  // one row per replica
};

struct PrevalenceSeries {
  std::vector<double> grid;
  std::vector<double> mean;
  std::vector<double> se;
  int replicas = 0;

  std::string to_csv() const;  // header "t,mean,se,replicas"
};

PrevalenceTable prevalence_table(const GenesisModel& model, double horizon,
                                 int replicas, const std::vector<double>& grid,
                                 uint64_t seed,
                                 const NumericOptions& opts = default_options());

PrevalenceSeries reduce_prevalence(const PrevalenceTable& table);

PrevalenceSeries estimate_prevalence(const GenesisModel& model, double horizon,
                                     int replicas,
                                     const std::vector<double>& grid,
                                     uint64_t seed,
                                     const NumericOptions& opts = default_options());

struct DecayEstimate {
  double slope = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  int points_used = 0;
};

// Least-squares slope of log mean prevalence over the grid points whose
// mean lies in [band_low, band_high]; percentile bootstrap CI over replica
// resamples. Throws NumericalError when fewer than 5 points are in band.
DecayEstimate estimate_decay_rate(const PrevalenceTable& table,
                                  double band_low = 1e-3,
                                  double band_high = 0.5,
                                  uint64_t bootstrap_seed = 1,
                                  int resamples = 200);

}  // namespace genesis
