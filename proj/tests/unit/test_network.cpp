#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "genesis/errors.hpp"
#include "genesis/network.hpp"

using genesis::Network;

TEST_SUITE("network") {

TEST_CASE("edge list text parses into sorted adjacency") {
  const Network g = genesis::network_load("0 1\n1 2\n");
  REQUIRE(g.node_count() == 3);
  REQUIRE(g.edge_count() == 2);
  CHECK(g.degree(0) == 1);
  CHECK(g.degree(1) == 2);
  CHECK(g.degree(2) == 1);
  CHECK(g.neighbors_of(1) == std::vector<int>{0, 2});
}

TEST_CASE("comments, blank lines, and reversed orientation are accepted") {
  const Network g = genesis::network_load("# triangle\n\n2 0\n0 1\n1 2\n");
  CHECK(g.node_count() == 3);
  CHECK(g.edge_count() == 3);
  CHECK(g.canonical_edge_list() == "0 1\n0 2\n1 2\n");
}

TEST_CASE("a nodes header admits declared node counts") {
  CHECK_THROWS_AS(genesis::network_load("nodes 3\n0 1\n"), genesis::ParseError);
  const Network g = genesis::network_load("nodes 3\n0 1\n1 2\n");
  CHECK(g.node_count() == 3);
}

TEST_CASE("parse errors carry the offending line number") {
  try {
    genesis::network_load("0 1\n0 1\n");  // duplicate
    FAIL("expected ParseError");
  } catch (const genesis::ParseError& e) {
    CHECK(e.line() == 2);
  }
  try {
    genesis::network_load("0 0\n");  // self-loop
    FAIL("expected ParseError");
  } catch (const genesis::ParseError& e) {
    CHECK(e.line() == 1);
  }
  try {
    genesis::network_load("0 1\n0 x\n");  // malformed token
    FAIL("expected ParseError");
  } catch (const genesis::ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("isolated nodes are rejected") {
  CHECK_THROWS_AS(Network(4, {{0, 1}, {1, 2}}), std::invalid_argument);
}

TEST_CASE("generators produce the expected shapes") {
  const Network path = genesis::network_path(2);
  CHECK(path.edge_count() == 1);
  const Network cyc = genesis::network_cycle(4);
  CHECK(cyc.edge_count() == 4);
  for (int i = 0; i < 4; ++i) CHECK(cyc.degree(i) == 2);
  const Network comp = genesis::network_complete(3);
  CHECK(comp.edge_count() == 3);
}

TEST_CASE("random generators are deterministic in the seed") {
  const Network a = genesis::network_erdos_renyi(50, 0.1, 7);
  const Network b = genesis::network_erdos_renyi(50, 0.1, 7);
  CHECK(genesis::digest(a) == genesis::digest(b));
  const Network c = genesis::network_erdos_renyi(50, 0.1, 8);
  CHECK(genesis::digest(a) != genesis::digest(c));
  const Network r1 = genesis::network_random_geometric(40, 0.3, 5);
  const Network r2 = genesis::network_random_geometric(40, 0.3, 5);
  CHECK(genesis::digest(r1) == genesis::digest(r2));
}

TEST_CASE("generated graphs never contain isolated nodes") {
  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    const Network er = genesis::network_erdos_renyi(30, 0.15, seed);
    for (int i = 0; i < er.node_count(); ++i) CHECK(er.degree(i) >= 1);
    const Network rgg = genesis::network_random_geometric(30, 0.25, seed);
    for (int i = 0; i < rgg.node_count(); ++i) CHECK(rgg.degree(i) >= 1);
  }
}

TEST_CASE("spectral radius of known graphs") {
  CHECK(genesis::spectral_radius(genesis::network_path(2)) ==
        doctest::Approx(1.0).epsilon(1e-10));
  CHECK(genesis::spectral_radius(genesis::network_complete(5)) ==
        doctest::Approx(4.0).epsilon(1e-10));
  CHECK(genesis::spectral_radius(genesis::network_cycle(4)) ==
        doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("dense and power-iteration spectral radius agree") {
  const Network g = genesis::network_erdos_renyi(30, 0.2, 1);
  const double dense = genesis::spectral_radius(g);
  genesis::NumericOptions opts;
  opts.dense_eig_max = 1;  // forces the power path
  const double power = genesis::spectral_radius(g, opts);
  CHECK(std::abs(dense - power) < 1e-9);
}

TEST_CASE("spectral radius sits between the degree bounds") {
  for (uint64_t seed : {11ull, 12ull, 13ull}) {
    const Network g = genesis::network_erdos_renyi(40, 0.12, seed);
    double total = 0.0;
    int max_deg = 0;
    for (int i = 0; i < g.node_count(); ++i) {
      total += g.degree(i);
      max_deg = std::max(max_deg, g.degree(i));
    }
    const double avg = total / static_cast<double>(g.node_count());
    const double rho = genesis::spectral_radius(g);
    CHECK(rho >= std::max(avg, std::sqrt(static_cast<double>(max_deg))) - 1e-9);
    CHECK(rho <= max_deg + 1e-9);
  }
}

TEST_CASE("adjacency matrix is symmetric zero-one") {
  const Network g = genesis::network_erdos_renyi(25, 0.2, 3);
  const genesis::Matrix& a = g.adjacency();
  for (int i = 0; i < a.rows(); ++i) {
    CHECK(a(i, i) == 0.0);
    for (int j = 0; j < a.cols(); ++j) {
      CHECK(a(i, j) == a(j, i));
      CHECK((a(i, j) == 0.0 || a(i, j) == 1.0));
    }
  }
}

TEST_CASE("canonical edge list is sorted and orientation-free") {
  const Network g = genesis::network_load("3 1\n2 0\n1 0\n");
  CHECK(g.canonical_edge_list() == "0 1\n0 2\n1 3\n");
  CHECK(genesis::digest(g) == genesis::digest(genesis::network_load("0 1\n0 2\n1 3\n")));
}

}  // TEST_SUITE
