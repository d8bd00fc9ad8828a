#include "genesis/network.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "genesis/errors.hpp"
#include "genesis/rng.hpp"
#include "text_util.hpp"

namespace genesis {

Network::Network(Eigen::Index node_count, std::vector<std::pair<int, int>> edges) {
  int max_id = -1;
  for (auto& [a, b] : edges) {
    if (a == b) throw std::invalid_argument("self-loop at node " + std::to_string(a));
    if (a < 0 || b < 0) throw std::invalid_argument("negative node id");
    if (a > b) std::swap(a, b);
    max_id = std::max(max_id, b);
  }
  n_ = node_count > 0 ? node_count : max_id + 1;
  if (n_ < 2) throw std::invalid_argument("need at least 2 nodes");
  if (max_id >= n_)
    throw std::invalid_argument("edge references node " + std::to_string(max_id) +
                                " beyond node count " + std::to_string(n_));

  std::sort(edges.begin(), edges.end());
  for (size_t k = 1; k < edges.size(); ++k)
    if (edges[k] == edges[k - 1])
      throw std::invalid_argument("duplicate edge " + std::to_string(edges[k].first) +
                                  " " + std::to_string(edges[k].second));

  neighbors_.assign(static_cast<size_t>(n_), {});
  adjacency_ = Matrix::Zero(n_, n_);
  for (const auto& [a, b] : edges) {
    neighbors_[static_cast<size_t>(a)].push_back(b);
    neighbors_[static_cast<size_t>(b)].push_back(a);
    adjacency_(a, b) = 1.0;
    adjacency_(b, a) = 1.0;
  }
  for (Eigen::Index i = 0; i < n_; ++i) {
    auto& list = neighbors_[static_cast<size_t>(i)];
    if (list.empty())
      throw std::invalid_argument("isolated node " + std::to_string(i));
    std::sort(list.begin(), list.end());
  }
  edges_ = std::move(edges);
}

std::string Network::canonical_edge_list() const {
  std::string out;
  for (const auto& [a, b] : edges_)
    out += std::to_string(a) + " " + std::to_string(b) + "\n";
  return out;
}

Network network_load(const std::string& text) {
  std::vector<std::pair<int, int>> edges;
  std::vector<int> edge_line;
  Eigen::Index node_count = 0;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;  // blank or comment-only
    if (first == "nodes") {
      long long n = 0;
      std::string extra;
      if (!(fields >> n) || (fields >> extra) || n < 2)
        throw ParseError(line_no, "malformed header, expected 'nodes N'");
      node_count = static_cast<Eigen::Index>(n);
      continue;
    }
    int a = 0, b = 0;
    std::string extra;
    try {
      size_t used = 0;
      a = std::stoi(first, &used);
      if (used != first.size()) throw std::invalid_argument(first);
    } catch (const std::exception&) {
      throw ParseError(line_no, "malformed edge line: '" + line + "'");
    }
    if (!(fields >> b) || (fields >> extra))
      throw ParseError(line_no, "malformed edge line: '" + line + "'");
    if (a == b) throw ParseError(line_no, "self-loop at node " + std::to_string(a));
    if (a < 0 || b < 0) throw ParseError(line_no, "negative node id");
    auto e = std::minmax(a, b);
    for (size_t k = 0; k < edges.size(); ++k)
      if (edges[k] == std::make_pair(e.first, e.second))
        throw ParseError(line_no, "duplicate edge " + std::to_string(e.first) + " " +
                                      std::to_string(e.second) + " (first at line " +
                                      std::to_string(edge_line[k]) + ")");
    edges.emplace_back(e.first, e.second);
    edge_line.push_back(line_no);
  }
  if (edges.empty()) throw ParseError(line_no, "no edges in input");
  try {
    return Network(node_count, std::move(edges));
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, e.what());
  }
}

Network network_path(int n) {
  if (n < 2) throw std::invalid_argument("path needs n >= 2");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  return Network(n, std::move(edges));
}

Network network_cycle(int n) {
  if (n < 3) throw std::invalid_argument("cycle needs n >= 3");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
  edges.emplace_back(0, n - 1);
  return Network(n, std::move(edges));
}

Network network_complete(int n) {
  if (n < 2) throw std::invalid_argument("complete graph needs n >= 2");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.emplace_back(i, j);
  return Network(n, std::move(edges));
}

Network network_erdos_renyi(int n, double prob, uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  if (!(prob > 0.0) || prob > 1.0)
    throw std::invalid_argument("edge probability must be in (0, 1]");
  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  std::vector<int> degree(static_cast<size_t>(n), 0);
  std::set<std::pair<int, int>> present;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform() < prob) {
        edges.emplace_back(i, j);
        present.insert({i, j});
        ++degree[static_cast<size_t>(i)];
        ++degree[static_cast<size_t>(j)];
      }
  // Densify: attach each isolated node to a uniformly drawn partner.
  for (int i = 0; i < n; ++i) {
    while (degree[static_cast<size_t>(i)] == 0) {
      int j = static_cast<int>(rng.raw() % static_cast<uint64_t>(n));
      if (j == i) continue;
      auto e = std::minmax(i, j);
      if (present.count({e.first, e.second})) continue;
      edges.emplace_back(e.first, e.second);
      present.insert({e.first, e.second});
      ++degree[static_cast<size_t>(i)];
      ++degree[static_cast<size_t>(j)];
    }
  }
  return Network(n, std::move(edges));
}

Network network_random_geometric(int n, double radius, uint64_t seed) {
  if (n < 2) throw std::invalid_argument("need n >= 2");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  Rng rng(seed);
  std::vector<double> x(static_cast<size_t>(n)), y(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<size_t>(i)] = rng.uniform();
    y[static_cast<size_t>(i)] = rng.uniform();
  }
  const double r2 = radius * radius;
  auto dist2 = [&](int i, int j) {
    const double dx = x[static_cast<size_t>(i)] - x[static_cast<size_t>(j)];
    const double dy = y[static_cast<size_t>(i)] - y[static_cast<size_t>(j)];
    return dx * dx + dy * dy;
  };
  std::vector<std::pair<int, int>> edges;
  std::vector<int> degree(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (dist2(i, j) <= r2) {
        edges.emplace_back(i, j);
        ++degree[static_cast<size_t>(i)];
        ++degree[static_cast<size_t>(j)];
      }
  // Densify: attach each isolated node to its nearest point, deterministic.
  for (int i = 0; i < n; ++i) {
    if (degree[static_cast<size_t>(i)] > 0) continue;
    int best = -1;
    double best_d = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      const double d = dist2(i, j);
      if (best < 0 || d < best_d) {
        best = j;
        best_d = d;
      }
    }
    auto e = std::minmax(i, best);
    if (std::find(edges.begin(), edges.end(),
                  std::make_pair(e.first, e.second)) == edges.end()) {
      edges.emplace_back(e.first, e.second);
      ++degree[static_cast<size_t>(i)];
      ++degree[static_cast<size_t>(best)];
    }
  }
  return Network(n, std::move(edges));
}

double spectral_radius(const Network& g, const NumericOptions& opts) {
  if (g.node_count() <= opts.dense_eig_max)
    return spectral_abscissa(g.adjacency(), opts);
  return spectral_abscissa_power(g.adjacency(), opts);
}

std::string digest(const Network& g) {
  return detail::hex16(detail::fnv1a(std::to_string(g.node_count()) + "\n" +
                                     g.canonical_edge_list()));
}

}  // namespace genesis
