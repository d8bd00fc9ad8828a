#include "genesis/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace genesis {

GenesisModel make_model(Network network, PhaseType transmission,
                        PhaseType recovery, std::vector<int> initial_infected) {
  if (initial_infected.empty())
    throw std::invalid_argument("initial infected set must be nonempty");
  std::sort(initial_infected.begin(), initial_infected.end());
  initial_infected.erase(
      std::unique(initial_infected.begin(), initial_infected.end()),
      initial_infected.end());
  const Eigen::Index n = network.node_count();
  for (int node : initial_infected)
    if (node < 0 || node >= n)
      throw std::invalid_argument("initial infected node " + std::to_string(node) +
                                  " outside [0, " + std::to_string(n) + ")");
  return GenesisModel{std::move(network), std::move(transmission),
                      std::move(recovery), std::move(initial_infected)};
}

}  // namespace genesis
