#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "doctest.h"
#include "genesis/errors.hpp"
#include "genesis/reference_sde.hpp"
#include "genesis/simulate.hpp"
#include "replay.hpp"
#include "stats.hpp"

using genesis::EventKind;
using genesis::EventLog;
using genesis::GenesisModel;
using genesis::Network;
using genesis::PhaseType;
using genesis::PrevalenceSeries;
using genesis::PrevalenceTable;

namespace {

GenesisModel exp_model(Network g, double beta, double delta,
                       std::vector<int> seeds = {0}) {
  return genesis::make_model(std::move(g), genesis::ph_exponential(beta),
                             genesis::ph_exponential(delta), std::move(seeds));
}

// Walks a log against the process rules: time strictly increases, only
// infected nodes act, infections hit susceptible targets, attempts hit
// infected ones, and the extinct flag matches the final infected set.
void validate_log(const GenesisModel& model, const EventLog& log) {
  std::set<int> infected(model.initial_infected.begin(),
                         model.initial_infected.end());
  double prev = 0.0;
  for (const genesis::Event& ev : log.events) {
    REQUIRE(ev.time > prev);
    prev = ev.time;
    REQUIRE(infected.count(ev.src) == 1);
    switch (ev.kind) {
      case EventKind::Infection:
        REQUIRE(infected.count(ev.dst) == 0);
        infected.insert(ev.dst);
        break;
      case EventKind::InfectionAttempt:
        REQUIRE(infected.count(ev.dst) == 1);
        break;
      case EventKind::Recovery:
        infected.erase(ev.src);
        break;
      case EventKind::PhaseMoveTrans:
      case EventKind::PhaseMoveRec:
        break;
    }
  }
  if (log.extinct) {
    CHECK(infected.empty());
    CHECK(log.end_time == prev);
  } else {
    CHECK_FALSE(infected.empty());
  }
}

std::vector<double> uniform_grid(double hi, int points) {
  std::vector<double> grid(static_cast<size_t>(points) + 1);
  for (int k = 0; k <= points; ++k) grid[static_cast<size_t>(k)] = hi * k / points;
  return grid;
}

}  // namespace

TEST_SUITE("simulate") {

TEST_CASE("subcritical chains always die out") {
  const GenesisModel model = exp_model(genesis::network_path(2), 0.1, 2.0);
  for (uint64_t seed = 1; seed <= 200; ++seed) {
    const EventLog log = genesis::simulate_event_driven(model, 500.0, seed);
    CHECK(log.extinct);
    CHECK_FALSE(log.censored);
    CHECK(log.end_time < 500.0);
    validate_log(model, log);
  }
}

TEST_CASE("trajectories are a pure function of the seed") {
  const GenesisModel model = genesis::make_model(
      genesis::network_complete(3), genesis::ph_erlang(2, 3.0),
      genesis::ph_hyperexponential({0.4, 0.6}, {1.0, 3.0}), {0, 1});
  const EventLog a = genesis::simulate_event_driven(model, 20.0, 7);
  const EventLog b = genesis::simulate_event_driven(model, 20.0, 7);
  CHECK(a.to_text() == b.to_text());
  const EventLog c = genesis::simulate_event_driven(model, 20.0, 8);
  CHECK(a.to_text() != c.to_text());
}

TEST_CASE("logs obey the process rules on a dense graph") {
  const GenesisModel model = genesis::make_model(
      genesis::network_complete(4), genesis::ph_erlang(2, 2.0),
      genesis::ph_erlang(2, 1.0), {0});
  for (uint64_t seed = 1; seed <= 50; ++seed)
    validate_log(model, genesis::simulate_event_driven(model, 30.0, seed));
}

TEST_CASE("extinction time matches the trajectory endpoint") {
  const GenesisModel model = exp_model(genesis::network_path(2), 0.1, 2.0);
  for (uint64_t seed = 1; seed <= 20; ++seed) {
    const EventLog log = genesis::simulate_event_driven(model, 1000.0, seed);
    REQUIRE(log.extinct);
    const genesis::ExtinctionResult ext = genesis::extinction_time(model, seed);
    CHECK_FALSE(ext.censored);
    CHECK(ext.time == log.end_time);
  }
}

TEST_CASE("prevalence starts at the seed fraction and decays to zero") {
  const GenesisModel model = exp_model(genesis::network_path(2), 0.1, 2.0);
  const PrevalenceSeries series = genesis::estimate_prevalence(
      model, 15.0, 400, uniform_grid(15.0, 30), 3);
  REQUIRE(series.grid.size() == 31);
  CHECK(series.mean[0] == 0.5);
  CHECK(series.se[0] == 0.0);
  CHECK(series.replicas == 400);
  CHECK(series.mean.back() <= 0.01);
  for (double m : series.mean) {
    CHECK(m >= 0.0);
    CHECK(m <= 1.0);
  }
  const std::string csv = series.to_csv();
  CHECK(csv.rfind("t,mean,se,replicas", 0) == 0);
}

TEST_CASE("standard error shrinks with the replica count") {
  const GenesisModel model = exp_model(genesis::network_path(2), 1.0, 1.0, {0, 1});
  const std::vector<double> grid = {1.0};
  const PrevalenceSeries small = genesis::estimate_prevalence(model, 1.5, 400, grid, 5);
  const PrevalenceSeries big = genesis::estimate_prevalence(model, 1.5, 1600, grid, 5);
  REQUIRE(small.se[0] > 0.0);
  const double ratio = big.se[0] / small.se[0];
  CHECK(ratio > 0.35);
  CHECK(ratio < 0.7);
}

TEST_CASE("decay estimate recovers the rate of independent recoveries") {
  // Negligible transmission turns prevalence into exp(-delta t) exactly.
  const GenesisModel model =
      exp_model(genesis::network_path(2), 1e-6, 1.0, {0, 1});
  const PrevalenceTable table = genesis::prevalence_table(
      model, 6.0, 10000, uniform_grid(6.0, 30), 11);
  const genesis::DecayEstimate est = genesis::estimate_decay_rate(table);
  CHECK(est.points_used >= 5);
  CHECK(est.ci_low <= est.slope);
  CHECK(est.slope <= est.ci_high);
  const double halfwidth = 0.5 * (est.ci_high - est.ci_low);
  CHECK(std::abs(est.slope - (-1.0)) <= 3.0 * halfwidth + 0.02);
}

TEST_CASE("decay estimate rejects windows with no usable points") {
  const GenesisModel model = exp_model(genesis::network_path(2), 1.0, 1.0, {0, 1});
  // Every grid point sits at prevalence ~1, above the fitting band.
  const PrevalenceTable table = genesis::prevalence_table(
      model, 1.0, 100, {0.0, 1e-4, 2e-4, 3e-4, 4e-4, 5e-4}, 13);
  CHECK_THROWS_AS(genesis::estimate_decay_rate(table), genesis::NumericalError);
}

TEST_CASE("reference simulator audits every jump without violations") {
  const GenesisModel model = genesis::make_model(
      genesis::network_complete(4), genesis::ph_erlang(2, 6.0),
      genesis::ph_erlang(2, 0.3), {0, 1, 2, 3});
  const genesis::ReferenceResult res =
      genesis::simulate_reference_sde(model, 10.0, 17);
  CHECK(res.jumps >= 1000);
  CHECK(res.violations == 0);
  CHECK(res.audit_checks == res.jumps + 1);
  validate_log(model, res.log);
}

TEST_CASE("reference and event-driven simulators agree on prevalence") {
  const GenesisModel model = genesis::make_model(
      genesis::network_path(2), genesis::ph_erlang(2, 4.0),
      genesis::ph_erlang(2, 1.0), {0});
  const std::vector<double> grid = {0.5, 1.0, 2.0};

  const int fast_reps = 10000;
  const PrevalenceSeries fast = genesis::estimate_prevalence(
      model, 2.5, fast_reps, grid, 19);

  const int ref_reps = 1500;
  std::vector<double> sum(grid.size(), 0.0), sumsq(grid.size(), 0.0);
  for (int r = 0; r < ref_reps; ++r) {
    const genesis::ReferenceResult res = genesis::simulate_reference_sde(
        model, 2.5, genesis::derive_seed(23, static_cast<uint64_t>(r)));
    const std::vector<double> traj = testsupport::prevalence_from_log(
        res.log, 2, model.initial_infected, grid);
    for (size_t k = 0; k < grid.size(); ++k) {
      sum[k] += traj[k];
      sumsq[k] += traj[k] * traj[k];
    }
  }
  for (size_t k = 0; k < grid.size(); ++k) {
    const double mean = sum[k] / ref_reps;
    const double var = (sumsq[k] - ref_reps * mean * mean) / (ref_reps - 1);
    const double se = std::sqrt(std::max(var, 0.0) / ref_reps);
    const double combined = std::sqrt(se * se + fast.se[k] * fast.se[k]);
    CHECK(std::abs(mean - fast.mean[k]) <= 3.0 * combined + 1e-12);
  }
}

TEST_CASE("attempt times along a channel renew by the transmission law") {
  auto channel_increments = [](const PhaseType& trans, double horizon,
                               uint64_t seed) {
    const GenesisModel model =
        genesis::make_model(genesis::network_path(2), trans,
                            genesis::ph_exponential(1e-9), {0});
    const EventLog log = genesis::simulate_event_driven(model, horizon, seed);
    std::vector<double> xs;
    double prev = 0.0;
    for (const genesis::Event& ev : log.events) {
      if (ev.src != 0 || ev.dst != 1) continue;
      if (ev.kind != EventKind::Infection && ev.kind != EventKind::InfectionAttempt)
        continue;
      xs.push_back(ev.time - prev);
      prev = ev.time;
    }
    return xs;
  };

  const PhaseType hyper = genesis::ph_hyperexponential({0.4, 0.6}, {2.0, 8.0});
  const std::vector<double> a = channel_increments(hyper, 2900.0, 29);
  REQUIRE(a.size() >= 10000);
  CHECK(testsupport::ks_accept_01(a, [&](double t) { return hyper.cdf(t); }));
  CHECK(std::abs(testsupport::lag1_autocorrelation(a)) <=
        3.0 / std::sqrt(static_cast<double>(a.size())));

  const PhaseType erl = genesis::ph_erlang(2, 3.0);
  const std::vector<double> b = channel_increments(erl, 7000.0, 31);
  REQUIRE(b.size() >= 10000);
  CHECK(testsupport::ks_accept_01(b, [&](double t) { return erl.cdf(t); }));
  CHECK(std::abs(testsupport::lag1_autocorrelation(b)) <=
        3.0 / std::sqrt(static_cast<double>(b.size())));
}

TEST_CASE("sole-node extinction follows the recovery law") {
  for (const PhaseType& rec :
       {genesis::ph_erlang(3, 2.0),
        genesis::ph_hyperexponential({0.3, 0.7}, {1.0, 5.0})}) {
    const GenesisModel model = genesis::make_model(
        genesis::network_path(2), genesis::ph_exponential(1e-9), rec, {0});
    std::vector<double> xs(10000);
    for (size_t r = 0; r < xs.size(); ++r)
      xs[r] = genesis::extinction_time(
                  model, genesis::derive_seed(37, static_cast<uint64_t>(r)))
                  .time;
    CHECK(testsupport::ks_accept_01(xs, [&](double t) { return rec.cdf(t); }));
  }
}

}  // TEST_SUITE
