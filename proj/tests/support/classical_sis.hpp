#pragma once

// Independent classical SIS oracles used to validate the exact-generator
// builder and the event-driven simulator on exponential/exponential models.
// Deliberately built from scratch: bitmask state enumeration here, plain
// std::mt19937_64 for the Gillespie runs, no genesis internals.

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

namespace testsupport {

// Generator of the classical SIS chain over bitmask states with node 0 in
// the most significant position (matching the node-major mixed-radix
// indexing of the exact state space at p = q = 1, where local susceptible
// is 0 and infected is 1). Infection rate beta per infected neighbor,
// recovery rate delta.
inline Eigen::MatrixXd classical_sis_generator(const Eigen::MatrixXd& adj,
                                               double beta, double delta) {
  const int n = static_cast<int>(adj.rows());
  const int total = 1 << n;
  Eigen::MatrixXd gen = Eigen::MatrixXd::Zero(total, total);
  const auto bit = [&](int s, int i) { return (s >> (n - 1 - i)) & 1; };
  for (int s = 0; s < total; ++s) {
    for (int i = 0; i < n; ++i) {
      if (bit(s, i)) {
        const int to = s & ~(1 << (n - 1 - i));
        gen(s, to) += delta;
        gen(s, s) -= delta;
      } else {
        double rate = 0.0;
        for (int j = 0; j < n; ++j)
          if (adj(i, j) != 0.0 && bit(s, j)) rate += beta;
        if (rate > 0.0) {
          const int to = s | (1 << (n - 1 - i));
          gen(s, to) += rate;
          gen(s, s) -= rate;
        }
      }
    }
  }
  return gen;
}

// Mean absorption time into the all-susceptible state from `initial`,
// solved from the transient block: (-Q_transient) m = 1.
inline double classical_sis_mean_extinction(const Eigen::MatrixXd& gen,
                                            int initial_state) {
  const Eigen::Index total = gen.rows();
  const Eigen::MatrixXd transient = gen.block(1, 1, total - 1, total - 1);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(total - 1);
  const Eigen::VectorXd m = (-transient).lu().solve(ones);
  return m[initial_state - 1];
}

// One classical-SIS Gillespie run reporting the infected fraction at the
// grid times. Textbook direct method on the node states, nothing shared
// with the library's engine.
inline std::vector<double> classical_sis_prevalence(
    const Eigen::MatrixXd& adj, double beta, double delta,
    const std::vector<int>& initial, double horizon,
    const std::vector<double>& grid, std::uint64_t seed) {
  const int n = static_cast<int>(adj.rows());
  std::vector<char> infected(static_cast<size_t>(n), 0);
  for (int i : initial) infected[static_cast<size_t>(i)] = 1;
  std::mt19937_64 engine(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<double> out;
  out.reserve(grid.size());
  double clock = 0.0;
  size_t gi = 0;
  const auto record_until = [&](double next) {
    while (gi < grid.size() && grid[gi] < next) {
      int count = 0;
      for (char c : infected) count += c;
      out.push_back(static_cast<double>(count) / n);
      ++gi;
    }
  };

  while (clock < horizon) {
    std::vector<double> rates(static_cast<size_t>(n), 0.0);
    double total = 0.0;
    for (int i = 0; i < n; ++i) {
      if (infected[static_cast<size_t>(i)]) {
        rates[static_cast<size_t>(i)] = delta;
      } else {
        double r = 0.0;
        for (int j = 0; j < n; ++j)
          if (adj(i, j) != 0.0 && infected[static_cast<size_t>(j)]) r += beta;
        rates[static_cast<size_t>(i)] = r;
      }
      total += rates[static_cast<size_t>(i)];
    }
    if (total <= 0.0) break;  // absorbed
    clock += -std::log(1.0 - unit(engine)) / total;
    if (clock >= horizon) break;
    record_until(clock);
    double u = unit(engine) * total;
    int pick = n - 1;
    for (int i = 0; i < n; ++i) {
      u -= rates[static_cast<size_t>(i)];
      if (u <= 0.0) {
        pick = i;
        break;
      }
    }
    infected[static_cast<size_t>(pick)] = !infected[static_cast<size_t>(pick)];
  }
  record_until(horizon + 1.0);
  while (out.size() < grid.size()) out.push_back(out.empty() ? 0.0 : out.back());
  return out;
}

}  // namespace testsupport
