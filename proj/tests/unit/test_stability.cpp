#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "classical_sis.hpp"
#include "doctest.h"
#include "genesis/errors.hpp"
#include "genesis/stability.hpp"

using genesis::GenesisModel;
using genesis::Matrix;
using genesis::Network;
using genesis::NodeState;
using genesis::PhaseType;
using genesis::StateSpace;
using genesis::Vector;
using genesis::Verdict;

namespace {

GenesisModel exp_model(Network g, double beta, double delta) {
  return genesis::make_model(std::move(g), genesis::ph_exponential(beta),
                             genesis::ph_exponential(delta), {0});
}

PhaseType random_ph(genesis::Rng& rng, int order) {
  if (order == 1) return genesis::ph_exponential(0.2 + 2.5 * rng.uniform());
  Matrix t(order, order);
  for (int i = 0; i < order; ++i)
    for (int j = 0; j < order; ++j) t(i, j) = i == j ? 0.0 : rng.uniform();
  for (int i = 0; i < order; ++i) t(i, i) = -(t.row(i).sum() + 0.1 + rng.uniform());
  Vector phi = Vector::Zero(order);
  double total = 0.0;
  for (int i = 0; i < order; ++i) {
    phi[i] = 0.05 + rng.uniform();
    total += phi[i];
  }
  phi /= total;
  return genesis::make_phase_type(phi, t);
}

Network random_small_graph(genesis::Rng& rng) {
  switch (rng.raw() % 4) {
    case 0: return genesis::network_path(2);
    case 1: return genesis::network_path(3);
    case 2: return genesis::network_complete(3);
    default: return genesis::network_cycle(4);
  }
}

double transient_abscissa(const Eigen::SparseMatrix<double>& gen) {
  const Eigen::Index m = gen.rows() - 1;
  const Matrix block = Matrix(gen).block(1, 1, m, m);
  const Eigen::EigenSolver<Matrix> solver(block);
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m; ++i)
    best = std::max(best, solver.eigenvalues()[i].real());
  return best;
}

}  // namespace

TEST_SUITE("stability") {

TEST_CASE("bound matrix of the exponential two-node chain") {
  const Matrix a =
      genesis::build_bound_matrix(exp_model(genesis::network_path(2), 0.5, 1.5));
  REQUIRE(a.rows() == 2);
  CHECK(a(0, 0) == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(a(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a(1, 0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(a(1, 1) == doctest::Approx(-1.5).epsilon(1e-12));
}

TEST_CASE("bound matrix dimension is nodes times both orders") {
  const GenesisModel model =
      genesis::make_model(genesis::network_path(3), genesis::ph_erlang(10, 2.0),
                          genesis::ph_erlang(10, 1.0), {0});
  const Matrix a = genesis::build_bound_matrix(model);
  CHECK(a.rows() == 300);
  CHECK(a.cols() == 300);
}

TEST_CASE("bound matrix is Metzler for arbitrary models") {
  genesis::Rng rng(101);
  for (int round = 0; round < 60; ++round) {
    const GenesisModel model = genesis::make_model(
        random_small_graph(rng), random_ph(rng, 1 + static_cast<int>(rng.raw() % 3)),
        random_ph(rng, 1 + static_cast<int>(rng.raw() % 3)), {0});
    CHECK(genesis::is_metzler(genesis::build_bound_matrix(model)));
  }
}

TEST_CASE("certified rate for exponential laws is delta minus beta rho") {
  CHECK(genesis::decay_rate_bound(exp_model(genesis::network_path(2), 0.5, 1.5)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  // Complete triangle at beta = delta = 1: rho = 2, so the bound fails.
  CHECK(genesis::decay_rate_bound(exp_model(genesis::network_complete(3), 1.0, 1.0)) ==
        doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("time rescaling scales the certified rate") {
  genesis::Rng rng(102);
  const Network g = genesis::network_cycle(4);
  const PhaseType trans = random_ph(rng, 2);
  const PhaseType rec = random_ph(rng, 3);
  const double base = genesis::decay_rate_bound(genesis::make_model(g, trans, rec, {0}));
  const double c = 2.0;
  PhaseType trans2 = trans;
  trans2.subgenerator *= c;
  trans2.exit *= c;
  PhaseType rec2 = rec;
  rec2.subgenerator *= c;
  rec2.exit *= c;
  const double scaled =
      genesis::decay_rate_bound(genesis::make_model(g, trans2, rec2, {0}));
  CHECK(scaled == doctest::Approx(c * base).epsilon(1e-9));
}

TEST_CASE("state counts follow the per-node product") {
  const Network path2 = genesis::network_path(2);
  const Network tri = genesis::network_complete(3);
  CHECK(StateSpace(path2, 1, 1).state_count() == 4);
  CHECK(StateSpace(path2, 10, 10).state_count() == 10201);
  CHECK(StateSpace(tri, 2, 1).state_count() == 125);
}

TEST_CASE("state encoding round-trips and starts at all-susceptible") {
  const Network tri = genesis::network_complete(3);
  const StateSpace space(tri, 2, 2);
  REQUIRE(space.state_count() == 9 * 9 * 9);
  const std::vector<NodeState> origin = space.decode(0);
  for (const NodeState& s : origin) CHECK_FALSE(s.infected());
  for (long long idx = 0; idx < space.state_count(); ++idx) {
    const std::vector<NodeState> states = space.decode(idx);
    CHECK(space.encode(states) == idx);
  }
  // Local invariants: infected nodes carry one channel phase per neighbor.
  const std::vector<NodeState> probe = space.decode(space.state_count() - 1);
  for (int i = 0; i < 3; ++i) {
    REQUIRE(probe[static_cast<size_t>(i)].infected());
    CHECK(probe[static_cast<size_t>(i)].channel_phase.size() == 2);
  }
}

TEST_CASE("exact generator rows are conservative") {
  const GenesisModel model =
      genesis::make_model(genesis::network_complete(3), genesis::ph_erlang(2, 2.0),
                          genesis::ph_hyperexponential({0.4, 0.6}, {1.0, 3.0}), {0});
  const Eigen::SparseMatrix<double> gen = genesis::build_exact_generator(model);
  const Matrix dense(gen);
  for (Eigen::Index i = 0; i < dense.rows(); ++i) {
    CHECK(std::abs(dense.row(i).sum()) <= 1e-12);
    for (Eigen::Index j = 0; j < dense.cols(); ++j)
      if (i != j) CHECK(dense(i, j) >= 0.0);
  }
  CHECK(dense.row(0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("exponential laws reduce the chain to memoryless dynamics") {
  // With single-phase laws the exact chain must coincide, entry by entry,
  // with the bitmask-indexed generator assembled by an independent routine.
  for (const Network& g : {genesis::network_path(2), genesis::network_complete(3)}) {
    const double beta = 0.7, delta = 1.3;
    const Matrix expected =
        testsupport::classical_sis_generator(g.adjacency(), beta, delta);
    const Matrix actual(genesis::build_exact_generator(exp_model(g, beta, delta)));
    REQUIRE(actual.rows() == expected.rows());
    CHECK((actual - expected).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("exact decay rate equals the transient-block abscissa") {
  const GenesisModel model =
      genesis::make_model(genesis::network_path(2), genesis::ph_erlang(2, 1.0),
                          genesis::ph_erlang(2, 3.0), {0});
  const double direct =
      -transient_abscissa(genesis::build_exact_generator(model));
  CHECK(genesis::exact_decay_rate(model) == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("known exact rate of the exponential two-node chain") {
  // Transient block eigenvalue -2 + (sqrt(7) - 1) / 2 for beta 0.5, delta 1.5.
  const double expected = 2.0 - 0.5 * (std::sqrt(7.0) - 1.0);
  CHECK(genesis::exact_decay_rate(exp_model(genesis::network_path(2), 0.5, 1.5)) ==
        doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the certified rate never exceeds the exact rate") {
  genesis::Rng rng(103);
  const std::vector<Network> graphs = {genesis::network_path(2),
                                       genesis::network_path(3),
                                       genesis::network_complete(3)};
  for (int round = 0; round < 25; ++round) {
    const GenesisModel model = genesis::make_model(
        graphs[rng.raw() % 3], random_ph(rng, 1 + static_cast<int>(rng.raw() % 2)),
        random_ph(rng, 1 + static_cast<int>(rng.raw() % 2)), {0});
    const double bound = genesis::decay_rate_bound(model);
    const double exact = genesis::exact_decay_rate(model);
    CHECK(bound <= exact + 1e-9);
  }
}

TEST_CASE("analysis is invariant under node relabeling") {
  genesis::Rng rng(104);
  const Network g = genesis::network_erdos_renyi(8, 0.35, 9);
  const double beta = 0.6, delta = 1.2;
  const double bound0 = genesis::decay_rate_bound(exp_model(g, beta, delta));
  const double exact0 = genesis::exact_decay_rate(exp_model(g, beta, delta));
  std::vector<int> perm(static_cast<size_t>(g.node_count()));
  std::iota(perm.begin(), perm.end(), 0);
  for (int round = 0; round < 10; ++round) {
    for (size_t i = perm.size(); i > 1; --i)
      std::swap(perm[i - 1], perm[rng.raw() % i]);
    std::vector<std::pair<int, int>> edges;
    for (const auto& [u, v] : g.edges())
      edges.emplace_back(perm[static_cast<size_t>(u)], perm[static_cast<size_t>(v)]);
    const Network relabeled(g.node_count(), std::move(edges));
    CHECK(genesis::decay_rate_bound(exp_model(relabeled, beta, delta)) ==
          doctest::Approx(bound0).epsilon(1e-9));
    CHECK(genesis::exact_decay_rate(exp_model(relabeled, beta, delta)) ==
          doctest::Approx(exact0).epsilon(1e-9));
  }
}

TEST_CASE("faster recovery speeds the exact rate") {
  double prev = -std::numeric_limits<double>::infinity();
  for (double delta : {1.0, 2.0, 4.0}) {
    const double rate =
        genesis::exact_decay_rate(exp_model(genesis::network_path(2), 0.5, delta));
    CHECK(rate > prev);
    prev = rate;
  }
}

TEST_CASE("certification verdicts") {
  const GenesisModel easy = exp_model(genesis::network_path(2), 0.5, 1.5);
  CHECK(genesis::certify_stability(easy, 0.9) == Verdict::BoundCertified);
  // Between the bound (1.0) and the exact rate (~1.177): exact must decide.
  CHECK(genesis::certify_stability(easy, 1.1) == Verdict::ExactCertified);
  CHECK(genesis::certify_stability(easy, 1.2) == Verdict::ExactRefuted);

  // Bound fails here (rho = 2, beta = delta = 1) but the chain still dies.
  const GenesisModel tight = exp_model(genesis::network_complete(3), 1.0, 1.0);
  CHECK(genesis::decay_rate_bound(tight) < 0.0);
  CHECK(genesis::certify_stability(tight, 1e-9) == Verdict::ExactCertified);

  genesis::NumericOptions capped;
  capped.exact_eig_cap = 1;
  CHECK(genesis::certify_stability(tight, 1e-9, capped) == Verdict::Undetermined);
}

TEST_CASE("analysis report carries rates, counts, and digests") {
  const GenesisModel model = exp_model(genesis::network_path(2), 0.5, 1.5);
  const genesis::StabilityReport report = genesis::analyze_stability(model, 0.9);
  CHECK(report.bound_dim == 2);
  CHECK(report.eta_a == doctest::Approx(-1.0).epsilon(1e-12));
  REQUIRE(report.exact_state_count.has_value());
  CHECK(*report.exact_state_count == 4);
  REQUIRE(report.exact_rate.has_value());
  CHECK(*report.exact_rate ==
        doctest::Approx(-2.0 + 0.5 * (std::sqrt(7.0) - 1.0)).epsilon(1e-12));
  REQUIRE(report.verdict.has_value());
  CHECK(*report.verdict == Verdict::BoundCertified);
  CHECK(report.graph_digest == genesis::digest(model.network));
  CHECK(report.transmission_digest == genesis::digest(model.transmission));

  const std::string json = genesis::to_json(report);
  for (const char* key : {"eta_A", "bound_rate", "exact_decay_rate", "verdict",
                          "graph_hash", "bound_dim"})
    CHECK(json.find(key) != std::string::npos);
  CHECK(json.find("bound-certified") != std::string::npos);
}

TEST_CASE("size caps throw with the offending dimension in the message") {
  genesis::NumericOptions opts;
  opts.bound_dim_cap = 1;
  try {
    genesis::build_bound_matrix(exp_model(genesis::network_path(2), 0.5, 1.5), opts);
    FAIL("expected SizeCapError");
  } catch (const genesis::SizeCapError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
  genesis::NumericOptions tiny;
  tiny.state_cap = 3;
  const Network path2 = genesis::network_path(2);
  try {
    StateSpace(path2, 1, 1, tiny);
    FAIL("expected SizeCapError");
  } catch (const genesis::SizeCapError& e) {
    CHECK(std::string(e.what()).find("4") != std::string::npos);
  }
}

}  // TEST_SUITE
