#include "genesis/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "genesis/errors.hpp"
#include "text_util.hpp"

namespace genesis {

std::string event_kind_name(EventKind k) {
  switch (k) {
    case EventKind::PhaseMoveTrans: return "phase-move-trans";
    case EventKind::PhaseMoveRec: return "phase-move-rec";
    case EventKind::InfectionAttempt: return "infection-attempt";
    case EventKind::Infection: return "infection";
    case EventKind::Recovery: return "recovery";
  }
  return "unknown";
}

std::string EventLog::to_text() const {
  std::string out;
  char buf[128];
  for (const Event& e : events) {
    std::snprintf(buf, sizeof(buf), "%.17g %s %d %d %d %d\n", e.time,
                  event_kind_name(e.kind).c_str(), e.src, e.dst, e.phase_from,
                  e.phase_to);
    out += buf;
  }
  return out;
}

std::string PrevalenceSeries::to_csv() const {
  std::string out = "t,mean,se,replicas\n";
  char buf[160];
  for (size_t i = 0; i < grid.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%d\n", grid[i], mean[i],
                  se[i], replicas);
    out += buf;
  }
  return out;
}

namespace {

// Mutable trajectory state with incrementally maintained per-node rate
// subtotals. The active rate of an infected node is -R_ll plus -T_mm over
// its channels; susceptible nodes are silent.
class Engine {
 public:
  Engine(const GenesisModel& model, Rng& rng, const NumericOptions& opts)
      : model_(model),
        opts_(opts),
        trans_(model.transmission.subgenerator),
        rec_(model.recovery.subgenerator),
        phi_(model.transmission.initial),
        psi_(model.recovery.initial),
        b_(model.transmission.exit),
        d_(model.recovery.exit),
        n_(static_cast<int>(model.node_count())),
        p_(static_cast<int>(model.trans_order())),
        q_(static_cast<int>(model.rec_order())) {
    rec_phase_.assign(static_cast<size_t>(n_), 0);
    chan_.assign(static_cast<size_t>(n_), {});
    node_rate_.assign(static_cast<size_t>(n_), 0.0);
    for (int node : model.initial_infected) infect(node, rng);
  }

  bool active() const { return infected_ > 0; }
  double clock() const { return clock_; }
  double total_rate() const { return total_rate_; }
  uint64_t steps() const { return steps_; }
  double fraction_infected() const {
    return static_cast<double>(infected_) / n_;
  }

  // Applies one event at the given committed time.
  Event step(double time, Rng& rng) {
    clock_ = time;
    ++steps_;
    if (steps_ % 1000 == 0) audit_rates();

    int node = pick_node(rng.uniform() * total_rate_);
    // Sub-event scan in fixed order: recovery moves, recovery exit, then
    // per channel slot: transmission moves, exit. Roundoff falling off the
    // end selects the last positive-rate entry.
    double u = within_node_budget_;
    const int ell = rec_phase_[static_cast<size_t>(node)];
    double acc = 0.0;

    enum class Sub { RecMove, RecExit, TransMove, TransExit };
    Sub kind = Sub::RecExit;
    int slot = -1, to = -1;
    bool chosen = false, have_any = false;
    auto consider = [&](Sub k, int s, int t, double rate) {
      if (chosen || rate <= 0.0) return;
      have_any = true;
      kind = k;
      slot = s;
      to = t;
      acc += rate;
      if (u < acc) chosen = true;
    };

    for (int lp = 1; lp <= q_ && !chosen; ++lp)
      if (lp != ell) consider(Sub::RecMove, -1, lp, rec_(ell - 1, lp - 1));
    consider(Sub::RecExit, -1, -1, d_(ell - 1));
    const auto& nbrs = model_.network.neighbors_of(node);
    for (size_t k = 0; k < nbrs.size() && !chosen; ++k) {
      const int m = chan_[static_cast<size_t>(node)][k];
      for (int mp = 1; mp <= p_ && !chosen; ++mp)
        if (mp != m)
          consider(Sub::TransMove, static_cast<int>(k), mp, trans_(m - 1, mp - 1));
      consider(Sub::TransExit, static_cast<int>(k), -1, b_(m - 1));
    }
    if (!have_any)
      throw NumericalError("active node with no positive event rate");

    Event ev;
    ev.time = clock_;
    ev.src = node;
    switch (kind) {
      case Sub::RecMove: {
        ev.kind = EventKind::PhaseMoveRec;
        ev.phase_from = ell;
        ev.phase_to = to;
        apply_rate_delta(node, -rec_(to - 1, to - 1) + rec_(ell - 1, ell - 1));
        rec_phase_[static_cast<size_t>(node)] = to;
        break;
      }
      case Sub::RecExit: {
        ev.kind = EventKind::Recovery;
        ev.phase_from = ell;
        total_rate_ -= node_rate_[static_cast<size_t>(node)];
        node_rate_[static_cast<size_t>(node)] = 0.0;
        rec_phase_[static_cast<size_t>(node)] = 0;
        chan_[static_cast<size_t>(node)].clear();
        --infected_;
        break;
      }
      case Sub::TransMove: {
        const int j = nbrs[static_cast<size_t>(slot)];
        const int m = chan_[static_cast<size_t>(node)][static_cast<size_t>(slot)];
        ev.kind = EventKind::PhaseMoveTrans;
        ev.dst = j;
        ev.phase_from = m;
        ev.phase_to = to;
        apply_rate_delta(node, -trans_(to - 1, to - 1) + trans_(m - 1, m - 1));
        chan_[static_cast<size_t>(node)][static_cast<size_t>(slot)] = to;
        break;
      }
      case Sub::TransExit: {
        const int j = nbrs[static_cast<size_t>(slot)];
        const int m = chan_[static_cast<size_t>(node)][static_cast<size_t>(slot)];
        // Attacking channel renews first, then the target's fresh state.
        const int fresh = static_cast<int>(rng.discrete(phi_)) + 1;
        chan_[static_cast<size_t>(node)][static_cast<size_t>(slot)] = fresh;
        apply_rate_delta(node, -trans_(fresh - 1, fresh - 1) + trans_(m - 1, m - 1));
        if (rec_phase_[static_cast<size_t>(j)] > 0) {
          ev.kind = EventKind::InfectionAttempt;
          ev.dst = j;
          ev.phase_from = m;
          ev.phase_to = fresh;
        } else {
          infect(j, rng);
          ev.kind = EventKind::Infection;
          ev.dst = j;
          ev.phase_to = rec_phase_[static_cast<size_t>(j)];
        }
        break;
      }
    }
    return ev;
  }

 private:
  void infect(int node, Rng& rng) {
    rec_phase_[static_cast<size_t>(node)] = static_cast<int>(rng.discrete(psi_)) + 1;
    const auto& nbrs = model_.network.neighbors_of(node);
    auto& slots = chan_[static_cast<size_t>(node)];
    slots.resize(nbrs.size());
    for (size_t k = 0; k < nbrs.size(); ++k)
      slots[k] = static_cast<int>(rng.discrete(phi_)) + 1;
    const double subtotal = node_subtotal(node);
    node_rate_[static_cast<size_t>(node)] = subtotal;
    total_rate_ += subtotal;
    ++infected_;
  }

  double node_subtotal(int node) const {
    const int ell = rec_phase_[static_cast<size_t>(node)];
    if (ell == 0) return 0.0;
    double rate = -rec_(ell - 1, ell - 1);
    for (int m : chan_[static_cast<size_t>(node)]) rate += -trans_(m - 1, m - 1);
    return rate;
  }

  void apply_rate_delta(int node, double delta) {
    node_rate_[static_cast<size_t>(node)] += delta;
    total_rate_ += delta;
  }

  int pick_node(double u) {
    double acc = 0.0;
    int last_active = -1;
    for (int i = 0; i < n_; ++i) {
      const double rate = node_rate_[static_cast<size_t>(i)];
      if (rate <= 0.0) continue;
      last_active = i;
      acc += rate;
      if (u < acc) {
        within_node_budget_ = u - (acc - rate);
        return i;
      }
    }
    // Roundoff pushed u past the total; land on the last active node and
    // let the inner scan's fallback pick its last positive event.
    within_node_budget_ = node_rate_[static_cast<size_t>(last_active)] * 2.0;
    return last_active;
  }

  void audit_rates() {
    double total = 0.0;
    for (int i = 0; i < n_; ++i) {
      const double fresh = node_subtotal(i);
      if (std::abs(fresh - node_rate_[static_cast<size_t>(i)]) >
          1e-9 * std::max(1.0, fresh))
        throw AuditError("rate drift at node " + std::to_string(i) + ": cached " +
                         std::to_string(node_rate_[static_cast<size_t>(i)]) +
                         " vs recomputed " + std::to_string(fresh) + " at step " +
                         std::to_string(steps_));
      node_rate_[static_cast<size_t>(i)] = fresh;
      total += fresh;
    }
    if (std::abs(total - total_rate_) > 1e-9 * std::max(1.0, total))
      throw AuditError("total rate drift: cached " + std::to_string(total_rate_) +
                       " vs recomputed " + std::to_string(total) + " at step " +
                       std::to_string(steps_));
    total_rate_ = total;
  }

  const GenesisModel& model_;
  const NumericOptions& opts_;
  const Matrix& trans_;
  const Matrix& rec_;
  const Vector& phi_;
  const Vector& psi_;
  const Vector& b_;
  const Vector& d_;
  int n_, p_, q_;
  std::vector<int> rec_phase_;          // 0 = susceptible
  std::vector<std::vector<int>> chan_;  // slot-aligned with sorted neighbors
  std::vector<double> node_rate_;
  double total_rate_ = 0.0;
  double clock_ = 0.0;
  double within_node_budget_ = 0.0;
  int infected_ = 0;
  uint64_t steps_ = 0;
};

}  // namespace

EventLog simulate_event_driven(const GenesisModel& model, double horizon,
                               uint64_t seed, const NumericOptions& opts) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  Rng rng(seed);
  Engine engine(model, rng, opts);
  EventLog log;
  while (engine.active()) {
    if (engine.steps() >= opts.event_cap) {
      log.censored = true;
      log.end_time = engine.clock();
      return log;
    }
    const double next = engine.clock() + rng.exponential(engine.total_rate());
    if (next > horizon) {
      log.end_time = horizon;
      return log;
    }
    log.events.push_back(engine.step(next, rng));
  }
  log.extinct = true;
  log.end_time = engine.clock();
  return log;
}

ExtinctionResult extinction_time(const GenesisModel& model, uint64_t seed,
                                 const NumericOptions& opts) {
  Rng rng(seed);
  Engine engine(model, rng, opts);
  while (engine.active()) {
    if (engine.steps() >= opts.event_cap)
      return {engine.clock(), true};
    engine.step(engine.clock() + rng.exponential(engine.total_rate()), rng);
  }
  return {engine.clock(), false};
}

PrevalenceTable prevalence_table(const GenesisModel& model, double horizon,
                                 int replicas, const std::vector<double>& grid,
                                 uint64_t seed, const NumericOptions& opts) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (replicas < 2) throw std::invalid_argument("need at least 2 replicas");
  if (grid.empty()) throw std::invalid_argument("empty time grid");
  if (!std::is_sorted(grid.begin(), grid.end()))
    throw std::invalid_argument("time grid must be ascending");

  PrevalenceTable table;
  table.grid = grid;
  table.values = Matrix::Zero(replicas, static_cast<Eigen::Index>(grid.size()));
  for (int r = 0; r < replicas; ++r) {
    Rng rng(derive_seed(seed, static_cast<uint64_t>(r)));
    Engine engine(model, rng, opts);
    size_t gi = 0;
    while (engine.active() && engine.steps() < opts.event_cap) {
      const double next = engine.clock() + rng.exponential(engine.total_rate());
      while (gi < grid.size() && grid[gi] < next) {
        table.values(r, static_cast<Eigen::Index>(gi)) = engine.fraction_infected();
        ++gi;
      }
      if (next > horizon) break;
      engine.step(next, rng);
    }
    while (gi < grid.size()) {
      table.values(r, static_cast<Eigen::Index>(gi)) = engine.fraction_infected();
      ++gi;
    }
  }
  return table;
}

PrevalenceSeries reduce_prevalence(const PrevalenceTable& table) {
  PrevalenceSeries series;
  series.grid = table.grid;
  series.replicas = static_cast<int>(table.values.rows());
  const Eigen::Index points = table.values.cols();
  series.mean.resize(static_cast<size_t>(points));
  series.se.resize(static_cast<size_t>(points));
  for (Eigen::Index c = 0; c < points; ++c) {
    const double mean = table.values.col(c).mean();
    const double var =
        (table.values.col(c).array() - mean).square().sum() /
        (table.values.rows() - 1);
    series.mean[static_cast<size_t>(c)] = mean;
    series.se[static_cast<size_t>(c)] =
        std::sqrt(std::max(0.0, var) / table.values.rows());
  }
  return series;
}

PrevalenceSeries estimate_prevalence(const GenesisModel& model, double horizon,
                                     int replicas,
                                     const std::vector<double>& grid,
                                     uint64_t seed, const NumericOptions& opts) {
  return reduce_prevalence(
      prevalence_table(model, horizon, replicas, grid, seed, opts));
}

namespace {

// Least-squares slope of log(values) against grid over the given indices.
double log_slope(const std::vector<double>& grid, const Vector& values,
                 const std::vector<size_t>& points) {
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (size_t idx : points) {
    const double x = grid[idx];
    const double y = std::log(values(static_cast<Eigen::Index>(idx)));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double count = static_cast<double>(points.size());
  return (count * sxy - sx * sy) / (count * sxx - sx * sx);
}

}  // namespace

DecayEstimate estimate_decay_rate(const PrevalenceTable& table, double band_low,
                                  double band_high, uint64_t bootstrap_seed,
                                  int resamples) {
  const int replicas = static_cast<int>(table.values.rows());
  const Eigen::Index points = table.values.cols();
  Vector mean(points);
  for (Eigen::Index c = 0; c < points; ++c) mean(c) = table.values.col(c).mean();

  std::vector<size_t> in_band;
  for (Eigen::Index c = 0; c < points; ++c)
    if (mean(c) >= band_low && mean(c) <= band_high)
      in_band.push_back(static_cast<size_t>(c));
  if (in_band.size() < 5)
    throw NumericalError("only " + std::to_string(in_band.size()) +
                         " grid points with mean prevalence in [" +
                         std::to_string(band_low) + ", " + std::to_string(band_high) +
                         "]; need 5");

  DecayEstimate est;
  est.points_used = static_cast<int>(in_band.size());
  est.slope = log_slope(table.grid, mean, in_band);

  Rng rng(bootstrap_seed);
  std::vector<double> slopes;
  slopes.reserve(static_cast<size_t>(resamples));
  Vector resampled(points);
  for (int rep = 0; rep < resamples; ++rep) {
    resampled.setZero();
    for (int r = 0; r < replicas; ++r) {
      const int pick = static_cast<int>(rng.raw() % static_cast<uint64_t>(replicas));
      resampled += table.values.row(pick).transpose();
    }
    resampled /= replicas;
    std::vector<size_t> usable;
    for (size_t idx : in_band)
      if (resampled(static_cast<Eigen::Index>(idx)) > 0.0) usable.push_back(idx);
    if (usable.size() < 2) continue;
    slopes.push_back(log_slope(table.grid, resampled, usable));
  }
  if (slopes.empty()) {
    est.ci_low = est.ci_high = est.slope;
    return est;
  }
  std::sort(slopes.begin(), slopes.end());
  const size_t last = slopes.size() - 1;
  est.ci_low = slopes[static_cast<size_t>(std::floor(0.025 * last))];
  est.ci_high = slopes[static_cast<size_t>(std::ceil(0.975 * last))];
  return est;
}

}  // namespace genesis
