#include "genesis/stability.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "genesis/errors.hpp"
#include "json.hpp"

namespace genesis {

namespace {

// a * b saturated at limit + 1; avoids overflow for cap comparisons.
long long mul_capped(long long a, long long b, long long limit) {
  if (a > limit || b > limit) return limit + 1;
  if (a != 0 && b > (limit + 1) / a) return limit + 1;
  return std::min(a * b, limit + 1);
}

}  // namespace

StateSpace::StateSpace(const Network& network, int p, int q,
                       const NumericOptions& opts)
    : network_(&network), p_(p), q_(q) {
  if (p < 1 || q < 1) throw std::invalid_argument("phase orders must be >= 1");
  const Eigen::Index n = network.node_count();
  const long long cap = opts.state_cap;

  local_counts_.resize(static_cast<size_t>(n));
  long double exact_total = 1.0L;
  long long total = 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int deg = network.degree(static_cast<int>(i));
    long long channels = 1;
    for (int k = 0; k < deg; ++k) channels = mul_capped(channels, p, cap);
    const long long local = 1 + mul_capped(channels, q, cap);
    local_counts_[static_cast<size_t>(i)] = local;
    exact_total *= 1.0L + std::pow(static_cast<long double>(p), deg) * q;
    total = mul_capped(total, local, cap);
  }
  if (total > cap) {
    char value[64];
    std::snprintf(value, sizeof(value), "%.6Lg", exact_total);
    throw SizeCapError("state space has " + std::string(value) +
                       " states (product over nodes of 1 + p^degree * q), exceeds cap " +
                       std::to_string(cap));
  }
  total_ = total;

  place_value_.assign(static_cast<size_t>(n), 1);
  for (Eigen::Index i = n - 2; i >= 0; --i)
    place_value_[static_cast<size_t>(i)] =
        place_value_[static_cast<size_t>(i + 1)] * local_counts_[static_cast<size_t>(i + 1)];
}

long long StateSpace::local_index(int node, const NodeState& state) const {
  if (!state.infected()) return 0;
  const int deg = network_->degree(node);
  if (state.recovery_phase < 1 || state.recovery_phase > q_)
    throw std::invalid_argument("recovery phase out of range");
  if (static_cast<int>(state.channel_phase.size()) != deg)
    throw std::invalid_argument("channel phase count does not match degree");
  long long channels = 0;
  long long place = 1;
  for (int k = 0; k < deg; ++k) {
    const int m = state.channel_phase[static_cast<size_t>(k)];
    if (m < 1 || m > p_) throw std::invalid_argument("channel phase out of range");
    channels += static_cast<long long>(m - 1) * place;
    place *= p_;
  }
  return 1 + channels * q_ + (state.recovery_phase - 1);
}

NodeState StateSpace::local_state(int node, long long local_index) const {
  NodeState out;
  if (local_index == 0) return out;
  long long rest = local_index - 1;
  out.recovery_phase = static_cast<int>(rest % q_) + 1;
  long long channels = rest / q_;
  const int deg = network_->degree(node);
  out.channel_phase.resize(static_cast<size_t>(deg));
  for (int k = 0; k < deg; ++k) {
    out.channel_phase[static_cast<size_t>(k)] = static_cast<int>(channels % p_) + 1;
    channels /= p_;
  }
  return out;
}

long long StateSpace::encode(const std::vector<NodeState>& states) const {
  const Eigen::Index n = network_->node_count();
  if (static_cast<Eigen::Index>(states.size()) != n)
    throw std::invalid_argument("state vector length does not match node count");
  long long index = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    index += local_index(static_cast<int>(i), states[static_cast<size_t>(i)]) *
             place_value_[static_cast<size_t>(i)];
  return index;
}

std::vector<NodeState> StateSpace::decode(long long index) const {
  const Eigen::Index n = network_->node_count();
  std::vector<NodeState> out(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    const long long place = place_value_[static_cast<size_t>(i)];
    out[static_cast<size_t>(i)] = local_state(static_cast<int>(i), index / place);
    index %= place;
  }
  return out;
}

Matrix build_bound_matrix(const GenesisModel& model, const NumericOptions& opts) {
  const Eigen::Index n = model.node_count();
  const Eigen::Index p = model.trans_order();
  const Eigen::Index q = model.rec_order();
  const long long dim = static_cast<long long>(n) * p * q;
  if (dim > opts.bound_dim_cap)
    throw SizeCapError("bound matrix dimension " + std::to_string(dim) +
                       " (n*p*q) exceeds cap " + std::to_string(opts.bound_dim_cap));

  const Matrix phi_b = model.transmission.initial * model.transmission.exit.transpose();
  const Matrix psi_ones =
      model.recovery.initial * Vector::Ones(q).transpose();

  Matrix diag_block =
      kron_sum(model.transmission.subgenerator.transpose(),
               model.recovery.subgenerator.transpose()) +
      kron(phi_b, Matrix::Identity(q, q));
  Matrix coupling = kron(phi_b, psi_ones);

  return kron(Matrix::Identity(n, n), diag_block) +
         kron(model.network.adjacency(), coupling);
}

double decay_rate_bound(const GenesisModel& model, const NumericOptions& opts) {
  const Matrix bound = build_bound_matrix(model, opts);
  const double eta = bound.rows() <= opts.dense_eig_max
                         ? spectral_abscissa(bound, opts)
                         : spectral_abscissa_power(bound, opts);
  return -eta;
}

Eigen::SparseMatrix<double> build_exact_generator(const GenesisModel& model,
                                                  const NumericOptions& opts) {
  const StateSpace space(model.network, static_cast<int>(model.trans_order()),
                         static_cast<int>(model.rec_order()), opts);
  const int p = space.trans_order();
  const int q = space.rec_order();
  const Matrix& trans = model.transmission.subgenerator;
  const Matrix& rec = model.recovery.subgenerator;
  const Vector& phi = model.transmission.initial;
  const Vector& psi = model.recovery.initial;
  const Vector& b = model.transmission.exit;
  const Vector& d = model.recovery.exit;
  const long long count = space.state_count();

  std::vector<Eigen::Triplet<double>> triplets;
  auto add = [&](long long from, long long to, double rate) {
    triplets.emplace_back(static_cast<int>(from), static_cast<int>(to), rate);
    triplets.emplace_back(static_cast<int>(from), static_cast<int>(from), -rate);
  };

  // Support of the reset laws; zero-probability phases never appear.
  std::vector<int> phi_support, psi_support;
  for (int m = 1; m <= p; ++m)
    if (phi(m - 1) > 0.0) phi_support.push_back(m);
  for (int l = 1; l <= q; ++l)
    if (psi(l - 1) > 0.0) psi_support.push_back(l);

  std::vector<NodeState> states;
  for (long long s = 0; s < count; ++s) {
    states = space.decode(s);
    const Eigen::Index n = model.node_count();
    for (Eigen::Index ni = 0; ni < n; ++ni) {
      const int i = static_cast<int>(ni);
      const NodeState& node = states[static_cast<size_t>(i)];
      if (!node.infected()) continue;
      const int ell = node.recovery_phase;

      for (int lp = 1; lp <= q; ++lp) {
        if (lp == ell) continue;
        const double rate = rec(ell - 1, lp - 1);
        if (rate <= 0.0) continue;
        std::vector<NodeState> next = states;
        next[static_cast<size_t>(i)].recovery_phase = lp;
        add(s, space.encode(next), rate);
      }

      if (d(ell - 1) > 0.0) {
        std::vector<NodeState> next = states;
        next[static_cast<size_t>(i)] = NodeState{};
        add(s, space.encode(next), d(ell - 1));
      }

      const auto& nbrs = model.network.neighbors_of(i);
      for (size_t k = 0; k < nbrs.size(); ++k) {
        const int j = nbrs[k];
        const int m = node.channel_phase[k];

        for (int mp = 1; mp <= p; ++mp) {
          if (mp == m) continue;
          const double rate = trans(m - 1, mp - 1);
          if (rate <= 0.0) continue;
          std::vector<NodeState> next = states;
          next[static_cast<size_t>(i)].channel_phase[k] = mp;
          add(s, space.encode(next), rate);
        }

        const double attempt = b(m - 1);
        if (attempt <= 0.0) continue;

        if (states[static_cast<size_t>(j)].infected()) {
          // Target busy: only the attacking channel resets.
          for (int m1 : phi_support) {
            std::vector<NodeState> next = states;
            next[static_cast<size_t>(i)].channel_phase[k] = m1;
            add(s, space.encode(next), attempt * phi(m1 - 1));
          }
        } else {
          // Infection: attacking channel resets, target gets a fresh
          // recovery phase and fresh phases on all its channels.
          const int deg_j = model.network.degree(j);
          std::vector<NodeState> next = states;
          next[static_cast<size_t>(j)].channel_phase.assign(
              static_cast<size_t>(deg_j), phi_support.front());
          std::vector<size_t> digit(static_cast<size_t>(deg_j), 0);
          while (true) {
            double channel_weight = 1.0;
            for (int c = 0; c < deg_j; ++c) {
              const int phase = phi_support[digit[static_cast<size_t>(c)]];
              next[static_cast<size_t>(j)].channel_phase[static_cast<size_t>(c)] = phase;
              channel_weight *= phi(phase - 1);
            }
            for (int m1 : phi_support) {
              next[static_cast<size_t>(i)].channel_phase[k] = m1;
              for (int lp : psi_support) {
                next[static_cast<size_t>(j)].recovery_phase = lp;
                const double weight =
                    phi(m1 - 1) * psi(lp - 1) * channel_weight;
                add(s, space.encode(next), attempt * weight);
              }
            }
            int c = 0;
            for (; c < deg_j; ++c) {
              if (++digit[static_cast<size_t>(c)] < phi_support.size()) break;
              digit[static_cast<size_t>(c)] = 0;
            }
            if (c == deg_j) break;
          }
        }
      }
    }
  }

  Eigen::SparseMatrix<double> gen(static_cast<int>(count), static_cast<int>(count));
  gen.setFromTriplets(triplets.begin(), triplets.end());
  return gen;
}

double exact_decay_rate(const GenesisModel& model, const NumericOptions& opts) {
  const Eigen::SparseMatrix<double> gen = build_exact_generator(model, opts);
  const long long count = gen.rows();
  if (count - 1 > opts.exact_eig_cap)
    throw SizeCapError("transient block of dimension " + std::to_string(count - 1) +
                       " exceeds eigensolve cap " + std::to_string(opts.exact_eig_cap));
  const Matrix dense = Matrix(gen).block(1, 1, count - 1, count - 1);
  NumericOptions eig_opts = opts;
  eig_opts.dense_eig_max =
      std::max(opts.dense_eig_max, static_cast<int>(opts.exact_eig_cap));
  return -spectral_abscissa(dense, eig_opts);
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::BoundCertified: return "bound-certified";
    case Verdict::ExactCertified: return "exact-certified";
    case Verdict::ExactRefuted: return "exact-refuted";
    case Verdict::Undetermined: return "undetermined";
  }
  return "undetermined";
}

Verdict certify_stability(const GenesisModel& model, double lambda,
                          const NumericOptions& opts) {
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  bool have_bound = false;
  double bound = 0.0;
  try {
    bound = decay_rate_bound(model, opts);
    have_bound = true;
  } catch (const SizeCapError&) {
  } catch (const NumericalError&) {
  }
  if (have_bound && lambda <= bound) return Verdict::BoundCertified;

  try {
    const double exact = exact_decay_rate(model, opts);
    return lambda <= exact ? Verdict::ExactCertified : Verdict::ExactRefuted;
  } catch (const SizeCapError&) {
  } catch (const NumericalError&) {
  }
  return Verdict::Undetermined;
}

StabilityReport analyze_stability(const GenesisModel& model,
                                  std::optional<double> lambda,
                                  const NumericOptions& opts) {
  StabilityReport report;
  report.bound_dim = model.node_count() * model.trans_order() * model.rec_order();
  report.eta_a = -decay_rate_bound(model, opts);
  report.graph_digest = digest(model.network);
  report.transmission_digest = digest(model.transmission);
  report.recovery_digest = digest(model.recovery);

  try {
    const StateSpace space(model.network, static_cast<int>(model.trans_order()),
                           static_cast<int>(model.rec_order()), opts);
    report.exact_state_count = space.state_count();
    if (space.state_count() - 1 <= opts.exact_eig_cap)
      report.exact_rate = -exact_decay_rate(model, opts);
  } catch (const SizeCapError&) {
  }

  if (lambda) {
    report.lambda = lambda;
    if (*lambda <= -report.eta_a)
      report.verdict = Verdict::BoundCertified;
    else if (report.exact_rate)
      report.verdict = *lambda <= -*report.exact_rate ? Verdict::ExactCertified
                                                      : Verdict::ExactRefuted;
    else
      report.verdict = Verdict::Undetermined;
  }
  return report;
}

std::string to_json(const StabilityReport& report, const NumericOptions& opts) {
  nlohmann::json j;
  j["version"] = kVersion;
  j["bound_dim"] = report.bound_dim;
  j["eta_A"] = report.eta_a;
  j["bound_rate"] = -report.eta_a;
  j["bound_note"] = "first-order bound; higher-order refinement not applied";
  if (report.exact_state_count) j["exact_state_count"] = *report.exact_state_count;
  if (report.exact_rate) {
    j["exact_rate"] = *report.exact_rate;
    j["exact_decay_rate"] = -*report.exact_rate;
  }
  if (report.lambda) j["lambda"] = *report.lambda;
  if (report.verdict) j["verdict"] = verdict_name(*report.verdict);
  j["graph_hash"] = report.graph_digest;
  j["transmission_digest"] = report.transmission_digest;
  j["recovery_digest"] = report.recovery_digest;
  j["caps"] = {{"bound_dim", opts.bound_dim_cap},
               {"state_count", opts.state_cap},
               {"exact_eigensolve", opts.exact_eig_cap},
               {"dense_eigensolve", opts.dense_eig_max}};
  j["tolerances"] = {{"expm", opts.expm_tol},
                     {"power_iteration", opts.power_tol},
                     {"rcond_min", opts.rcond_min}};
  return j.dump(2);
}

}  // namespace genesis
