#pragma once

#include <vector>

#include "genesis/network.hpp"
#include "genesis/phase_type.hpp"

namespace genesis {

// Networked SIS process where an infected node recovers after a
// PH(recovery) time and each infected node fires independent infection
// attempts toward every neighbor with PH(transmission) inter-attempt times.
// initial_infected is carried for the simulator; analysis results do not
// depend on it.
struct GenesisModel {
  Network network;
  PhaseType transmission;
  PhaseType recovery;
  std::vector<int> initial_infected;

  Eigen::Index node_count() const { return network.node_count(); }
  Eigen::Index trans_order() const { return transmission.order(); }
  Eigen::Index rec_order() const { return recovery.order(); }
};

// Normalizes the seed set (sorted, deduplicated) and enforces that it is a
// nonempty subset of the nodes. Throws std::invalid_argument.
GenesisModel make_model(Network network, PhaseType transmission,
                        PhaseType recovery, std::vector<int> initial_infected);

}  // namespace genesis
