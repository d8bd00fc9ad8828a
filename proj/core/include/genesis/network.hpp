#pragma once

#include <string>
#include <utility>
#include <vector>

#include "genesis/config.hpp"
#include "genesis/matrix_ops.hpp"

namespace genesis {

// Undirected simple graph, dense 0-based node ids, every node has degree
// >= 1. Immutable after construction; all reads thread-safe.
class Network {
 public:
  // Edges may arrive in any order and orientation; rejects self-loops,
  // duplicates, and isolated nodes. node_count = 0 means "infer from ids".
  Network(Eigen::Index node_count, std::vector<std::pair<int, int>> edges);

  Eigen::Index node_count() const { return n_; }
  Eigen::Index edge_count() const { return static_cast<Eigen::Index>(edges_.size()); }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<std::vector<int>>& neighbors() const { return neighbors_; }
  const std::vector<int>& neighbors_of(int i) const { return neighbors_[static_cast<size_t>(i)]; }
  int degree(int i) const { return static_cast<int>(neighbors_[static_cast<size_t>(i)].size()); }
  const Matrix& adjacency() const { return adjacency_; }

  // Sorted "i j" lines, one edge per line, i < j. Stable across runs.
  std::string canonical_edge_list() const;

 private:
  Eigen::Index n_ = 0;
  std::vector<std::pair<int, int>> edges_;       // canonical order, i < j
  std::vector<std::vector<int>> neighbors_;      // each list sorted ascending
  Matrix adjacency_;
};

// Parses edge-list text: one "i j" pair per line, blank lines and '#'
// comments ignored, optional "nodes N" header fixing the node count.
// Throws ParseError carrying the offending line number.
Network network_load(const std::string& text);

Network network_path(int n);
Network network_cycle(int n);
Network network_complete(int n);
Network network_erdos_renyi(int n, double prob, uint64_t seed);
Network network_random_geometric(int n, double radius, uint64_t seed);

// Largest adjacency eigenvalue. Dense solve up to opts.dense_eig_max nodes,
// power iteration beyond.
double spectral_radius(const Network& g,
                       const NumericOptions& opts = default_options());

// FNV-1a over the canonical edge list, 16 hex digits.
std::string digest(const Network& g);

}  // namespace genesis
