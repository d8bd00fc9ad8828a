#pragma once

#include <Eigen/SparseCore>
#include <optional>
#include <string>
#include <vector>

#include "genesis/config.hpp"
#include "genesis/matrix_ops.hpp"
#include "genesis/model.hpp"

namespace genesis {

// Per-node state in the exact chain. A susceptible node carries no phases;
// an infected node carries a recovery phase in [1, q] and one transmission
// phase in [1, p] per neighbor, aligned with Network::neighbors_of(i).
struct NodeState {
  int recovery_phase = 0;          // 0 = susceptible
  std::vector<int> channel_phase;  // empty when susceptible

  bool infected() const { return recovery_phase > 0; }
};

// Deterministic indexing of the exact chain's states.
//
// Local index at node i of degree g: susceptible = 0; infected
// (ell, m_1..m_g) = 1 + (c*q + (ell-1)) with c = sum_k (m_k - 1) * p^(k-1)
// over neighbors in ascending order (first neighbor least significant).
// Global index: mixed radix over local indices, node 0 most significant.
// Index 0 is always the absorbing all-susceptible state.
class StateSpace {
 public:
  StateSpace(const Network& network, int p, int q,
             const NumericOptions& opts = default_options());
  // The network is held by pointer; a temporary would dangle.
  StateSpace(Network&&, int, int,
             const NumericOptions& = default_options()) = delete;

  long long state_count() const { return total_; }
  long long local_count(int node) const { return local_counts_[static_cast<size_t>(node)]; }
  int trans_order() const { return p_; }
  int rec_order() const { return q_; }
  const Network& network() const { return *network_; }

  long long encode(const std::vector<NodeState>& states) const;
  std::vector<NodeState> decode(long long index) const;

  long long local_index(int node, const NodeState& state) const;
  NodeState local_state(int node, long long local_index) const;

 private:
  const Network* network_;
  int p_, q_;
  std::vector<long long> local_counts_;
  std::vector<long long> place_value_;  // product of local counts after node i
  long long total_;
};

// Bound matrix: I_n (x) (T' (+) R' + (phi b') (x) I_q) + A (x) (phi b') (x) (psi 1').
// Always Metzler; dimension n*p*q, capped by opts.bound_dim_cap.
Matrix build_bound_matrix(const GenesisModel& model,
                          const NumericOptions& opts = default_options());

// Certified decay rate: -eta(bound matrix). Positive certifies exponential
// mean stability at that rate; nonpositive certifies nothing.
double decay_rate_bound(const GenesisModel& model,
                        const NumericOptions& opts = default_options());

// Exact-chain generator over the StateSpace indexing, zero row sums,
// all-susceptible row identically zero.
Eigen::SparseMatrix<double> build_exact_generator(
    const GenesisModel& model, const NumericOptions& opts = default_options());

// -r with r the spectral abscissa of the generator's transient block
// (absorbing state's row and column removed).
double exact_decay_rate(const GenesisModel& model,
                        const NumericOptions& opts = default_options());

enum class Verdict { BoundCertified, ExactCertified, ExactRefuted, Undetermined };
std::string verdict_name(Verdict v);

// Checks lambda against the bound first, then against the exact rate when
// the exact chain fits the caps. Infeasibility folds into Undetermined.
Verdict certify_stability(const GenesisModel& model, double lambda,
                          const NumericOptions& opts = default_options());

struct StabilityReport {
  Eigen::Index bound_dim = 0;
  double eta_a = 0.0;  // spectral abscissa of the bound matrix
  std::optional<long long> exact_state_count;
  std::optional<double> exact_rate;  // transient-block abscissa r; eta_a >= r
  std::optional<double> lambda;
  std::optional<Verdict> verdict;
  std::string graph_digest;
  std::string transmission_digest;
  std::string recovery_digest;
};

// Always computes the bound (throws if over cap); attaches the exact rate
// when the state count fits the eigensolve cap; evaluates lambda if given.
StabilityReport analyze_stability(const GenesisModel& model,
                                  std::optional<double> lambda = std::nullopt,
                                  const NumericOptions& opts = default_options());

std::string to_json(const StabilityReport& report,
                    const NumericOptions& opts = default_options());

}  // namespace genesis
