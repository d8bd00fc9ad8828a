#include "genesis/reference_sde.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "genesis/errors.hpp"

namespace genesis {

namespace {

// One Poisson counter of the jump representation. Every counter ticks at
// its constant rate forever; whether a tick changes state depends on the
// indicator it multiplies.
struct Counter {
  enum class Type { RecMove, RecExit, TransMove, TransExit };
  Type type;
  int node;
  int slot;  // channel slot for Trans*, -1 otherwise
  int from;  // phase the term is gated on, 1-based
  int to;    // target phase for moves, -1 otherwise
  double rate;
};

std::string counter_text(const Counter& c) {
  switch (c.type) {
    case Counter::Type::RecMove:
      return "recovery move node " + std::to_string(c.node) + " phase " +
             std::to_string(c.from) + "->" + std::to_string(c.to);
    case Counter::Type::RecExit:
      return "recovery exit node " + std::to_string(c.node) + " phase " +
             std::to_string(c.from);
    case Counter::Type::TransMove:
      return "transmission move node " + std::to_string(c.node) + " slot " +
             std::to_string(c.slot) + " phase " + std::to_string(c.from) + "->" +
             std::to_string(c.to);
    case Counter::Type::TransExit:
      return "transmission exit node " + std::to_string(c.node) + " slot " +
             std::to_string(c.slot) + " phase " + std::to_string(c.from);
  }
  return "?";
}

class LiteralSim {
 public:
  LiteralSim(const GenesisModel& model, Rng& rng)
      : model_(model),
        n_(static_cast<int>(model.node_count())),
        p_(static_cast<int>(model.trans_order())),
        q_(static_cast<int>(model.rec_order())) {
    const Matrix& trans = model.transmission.subgenerator;
    const Matrix& rec = model.recovery.subgenerator;
    const Vector& b = model.transmission.exit;
    const Vector& d = model.recovery.exit;

    y_.assign(static_cast<size_t>(n_), Vector::Zero(q_));
    x_.resize(static_cast<size_t>(n_));
    for (int i = 0; i < n_; ++i)
      x_[static_cast<size_t>(i)].assign(model.network.neighbors_of(i).size(),
                                        Vector::Zero(p_));

    for (int i = 0; i < n_; ++i) {
      for (int l = 1; l <= q_; ++l)
        for (int lp = 1; lp <= q_; ++lp)
          if (lp != l && rec(l - 1, lp - 1) > 0.0)
            counters_.push_back({Counter::Type::RecMove, i, -1, l, lp,
                                 rec(l - 1, lp - 1)});
      for (int l = 1; l <= q_; ++l)
        if (d(l - 1) > 0.0)
          counters_.push_back({Counter::Type::RecExit, i, -1, l, -1, d(l - 1)});
      const int deg = model.network.degree(i);
      for (int k = 0; k < deg; ++k) {
        for (int m = 1; m <= p_; ++m)
          for (int mp = 1; mp <= p_; ++mp)
            if (mp != m && trans(m - 1, mp - 1) > 0.0)
              counters_.push_back({Counter::Type::TransMove, i, k, m, mp,
                                   trans(m - 1, mp - 1)});
        for (int m = 1; m <= p_; ++m)
          if (b(m - 1) > 0.0)
            counters_.push_back({Counter::Type::TransExit, i, k, m, -1, b(m - 1)});
      }
    }
    total_rate_ = 0.0;
    for (const Counter& c : counters_) total_rate_ += c.rate;

    for (int node : model.initial_infected) infect(node, rng);
    audit(-1, "initial condition");
  }

  double total_rate() const { return total_rate_; }
  bool extinct() const {
    for (const Vector& y : y_)
      if (y.sum() != 0.0) return false;
    return true;
  }

  // Fires one counter at the committed time. Returns true and fills `ev`
  // when the jump changed state; no-ops return false. Audits afterwards.
  bool jump(double time, Rng& rng, Event& ev) {
    ++jumps_;
    const Counter& c = pick(rng.uniform() * total_rate_);
    const std::vector<int> z_before = z();

    bool changed = false;
    ev = Event{};
    ev.time = time;
    ev.src = c.node;
    int infected_target = -1;
    int recovered_node = -1;

    Vector& y = y_[static_cast<size_t>(c.node)];
    switch (c.type) {
      case Counter::Type::RecMove:
        if (y(c.from - 1) == 1.0) {
          y.setZero();
          y(c.to - 1) = 1.0;
          ev.kind = EventKind::PhaseMoveRec;
          ev.phase_from = c.from;
          ev.phase_to = c.to;
          changed = true;
        }
        break;
      case Counter::Type::RecExit:
        if (y(c.from - 1) == 1.0) {
          y.setZero();
          for (Vector& x : x_[static_cast<size_t>(c.node)]) x.setZero();
          ev.kind = EventKind::Recovery;
          ev.phase_from = c.from;
          recovered_node = c.node;
          changed = true;
        }
        break;
      case Counter::Type::TransMove: {
        Vector& x = x_[static_cast<size_t>(c.node)][static_cast<size_t>(c.slot)];
        if (x(c.from - 1) == 1.0) {
          x.setZero();
          x(c.to - 1) = 1.0;
          ev.kind = EventKind::PhaseMoveTrans;
          ev.dst = model_.network.neighbors_of(c.node)[static_cast<size_t>(c.slot)];
          ev.phase_from = c.from;
          ev.phase_to = c.to;
          changed = true;
        }
        break;
      }
      case Counter::Type::TransExit: {
        Vector& x = x_[static_cast<size_t>(c.node)][static_cast<size_t>(c.slot)];
        if (x(c.from - 1) == 1.0) {
          const int j =
              model_.network.neighbors_of(c.node)[static_cast<size_t>(c.slot)];
          const int fresh =
              static_cast<int>(rng.discrete(model_.transmission.initial)) + 1;
          x.setZero();
          x(fresh - 1) = 1.0;
          ev.dst = j;
          ev.phase_from = c.from;
          if (y_[static_cast<size_t>(j)].sum() == 0.0) {
            infect(j, rng);
            infected_target = j;
            ev.kind = EventKind::Infection;
            ev.phase_from = -1;
            ev.phase_to = active_phase(y_[static_cast<size_t>(j)]);
          } else {
            ev.kind = EventKind::InfectionAttempt;
            ev.phase_to = fresh;
          }
          changed = true;
        }
        break;
      }
    }

    audit_transition(z_before, infected_target, recovered_node, c);
    audit(static_cast<long long>(jumps_), counter_text(c));
    return changed;
  }

  long long jumps() const { return jumps_; }

 private:
  void infect(int node, Rng& rng) {
    Vector& y = y_[static_cast<size_t>(node)];
    y.setZero();
    y(rng.discrete(model_.recovery.initial)) = 1.0;
    for (Vector& x : x_[static_cast<size_t>(node)]) {
      x.setZero();
      x(rng.discrete(model_.transmission.initial)) = 1.0;
    }
  }

  const Counter& pick(double u) {
    double acc = 0.0;
    for (const Counter& c : counters_) {
      acc += c.rate;
      if (u < acc) return c;
    }
    return counters_.back();
  }

  static int active_phase(const Vector& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i)
      if (v(i) == 1.0) return static_cast<int>(i) + 1;
    return -1;
  }

  std::vector<int> z() const {
    std::vector<int> out(static_cast<size_t>(n_));
    for (int i = 0; i < n_; ++i)
      out[static_cast<size_t>(i)] = y_[static_cast<size_t>(i)].sum() != 0.0 ? 1 : 0;
    return out;
  }

  // A vector is admissible when it is exactly zero or a canonical unit.
  static bool admissible(const Vector& v) {
    int ones = 0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v(i) == 1.0)
        ++ones;
      else if (v(i) != 0.0)
        return false;
    }
    return ones <= 1;
  }

  void audit(long long jump, const std::string& context) const {
    for (int i = 0; i < n_; ++i) {
      const Vector& y = y_[static_cast<size_t>(i)];
      if (!admissible(y))
        fail(jump, context, "y at node " + std::to_string(i) + " not in {0, f_1..f_q}");
      const double ysum = y.sum();
      const auto& channels = x_[static_cast<size_t>(i)];
      for (size_t k = 0; k < channels.size(); ++k) {
        if (!admissible(channels[k]))
          fail(jump, context, "x at node " + std::to_string(i) + " slot " +
                                  std::to_string(k) + " not in {0, e_1..e_p}");
        if (channels[k].sum() != ysum)
          fail(jump, context, "channel sum mismatch at node " + std::to_string(i) +
                                  " slot " + std::to_string(k) + ": x sums to " +
                                  std::to_string(channels[k].sum()) +
                                  ", y sums to " + std::to_string(ysum));
      }
    }
  }

  // Infection/recovery characterization: z flips exactly where the fired
  // counter says it must, and nowhere else.
  void audit_transition(const std::vector<int>& before, int infected_target,
                        int recovered_node, const Counter& c) const {
    const std::vector<int> after = z();
    for (int i = 0; i < n_; ++i) {
      const int delta = after[static_cast<size_t>(i)] - before[static_cast<size_t>(i)];
      if (i == infected_target) {
        if (delta != 1)
          fail(static_cast<long long>(jumps_), counter_text(c),
               "expected infection flip 0->1 at node " + std::to_string(i));
      } else if (i == recovered_node) {
        if (delta != -1)
          fail(static_cast<long long>(jumps_), counter_text(c),
               "expected recovery flip 1->0 at node " + std::to_string(i));
      } else if (delta != 0) {
        fail(static_cast<long long>(jumps_), counter_text(c),
             "unexpected z flip at node " + std::to_string(i));
      }
    }
  }

  [[noreturn]] static void fail(long long jump, const std::string& context,
                                const std::string& what) {
    throw AuditError("audit violation at jump " + std::to_string(jump) + " (" +
                     context + "): " + what);
  }

  const GenesisModel& model_;
  int n_, p_, q_;
  std::vector<Vector> y_;
  std::vector<std::vector<Vector>> x_;
  std::vector<Counter> counters_;
  double total_rate_ = 0.0;
  long long jumps_ = 0;
};

}  // namespace

ReferenceResult simulate_reference_sde(const GenesisModel& model, double horizon,
                                       uint64_t seed, const NumericOptions& opts) {
  if (!(horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  Rng rng(seed);
  LiteralSim sim(model, rng);

  ReferenceResult result;
  double clock = 0.0;
  while (!sim.extinct()) {
    if (static_cast<uint64_t>(sim.jumps()) >= opts.event_cap) {
      result.log.censored = true;
      break;
    }
    const double next = clock + rng.exponential(sim.total_rate());
    if (next > horizon) {
      clock = horizon;
      break;
    }
    clock = next;
    Event ev;
    if (sim.jump(clock, rng, ev)) result.log.events.push_back(ev);
  }
  result.log.extinct = sim.extinct();
  result.log.end_time = clock;
  result.jumps = sim.jumps();
  result.audit_checks = sim.jumps() + 1;  // every jump plus the initial state
  result.violations = 0;
  return result;
}

}  // namespace genesis
