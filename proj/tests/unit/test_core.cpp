#include <doctest.h>

#include <random>

#include "bnlab/core.hpp"
#include "bnlab/error.hpp"
#include "oracle.hpp"

using namespace bnlab;

TEST_CASE("variable rejects bad state lists") {
  CHECK_THROWS_AS(DiscreteVariable("X", {"a"}), ContractError);
  CHECK_THROWS_AS(DiscreteVariable("X", {"a", "a"}), ContractError);
  CHECK_THROWS_AS(DiscreteVariable("", {"a", "b"}), ContractError);
  DiscreteVariable x("X", {"lo", "hi"});
  CHECK(x.state_index("hi") == 1);
  CHECK_FALSE(x.find_state("mid"));
  CHECK_THROWS_AS(x.state_index("mid"), ContractError);
}

TEST_CASE("topological order") {
  SUBCASE("chain") {
    Dag d({"A", "B", "C"}, std::vector<Arc>{{0, 1}, {1, 2}});
    CHECK(topological_order(d) == std::vector<VarId>{0, 1, 2});
  }
  SUBCASE("no arcs keeps declaration order") {
    Dag d({"C", "A", "B"});
    CHECK(topological_order(d) == std::vector<VarId>{0, 1, 2});
  }
  SUBCASE("two-cycle is rejected with the arc named") {
    std::vector<Arc> arcs{{0, 1}, {1, 0}};
    const std::vector<std::string> names{"A", "B"};
    try {
      topological_order(2, arcs, names);
      FAIL("expected a structural error");
    } catch (const StructuralError& e) {
      std::string msg = e.what();
      CHECK(msg.find("->") != std::string::npos);
    }
    CHECK_THROWS_AS(Dag({"A", "B"}, arcs), StructuralError);
  }
  SUBCASE("parents precede children on random DAGs") {
    std::mt19937_64 rng(7);
    for (int t = 0; t < 50; ++t) {
      auto net = oracle::random_network(rng, {8, 2, 3, 0.5});
      auto order = topological_order(net.dag());
      std::vector<std::size_t> pos(order.size());
      for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
      for (const auto& a : net.dag().arcs()) CHECK(pos[a.parent] < pos[a.child]);
    }
  }
}

TEST_CASE("dag mutation keeps invariants") {
  Dag d({"A", "B", "C"});
  d.add_arc(0, 1);
  d.add_arc(1, 2);
  CHECK_THROWS_AS(d.add_arc(2, 0), StructuralError);
  CHECK_THROWS_AS(d.add_arc(0, 0), StructuralError);
  CHECK_THROWS_AS(d.add_arc(0, 1), StructuralError);
  CHECK(d.has_path(0, 2));
  CHECK_FALSE(d.can_add(2, 0));
  d.reverse_arc(1, 2);
  CHECK(d.has_arc(2, 1));
  CHECK(d.arc_count() == 2);
  CHECK_THROWS_AS(Dag({"A", "B"}, std::vector<Arc>{{0, 5}}), StructuralError);
}

TEST_CASE("parent configuration index") {
  Cpt c(2, 2, {0, 1}, {2, 3}, std::vector<double>(12, 0.5));
  Assignment a{1, 2, kUnset};
  CHECK(parent_config_index(c, a) == 5);
  a = {0, 0, kUnset};
  CHECK(parent_config_index(c, a) == 0);
  Cpt root(0, 2, {}, {}, {0.5, 0.5});
  CHECK(parent_config_index(root, Assignment{kUnset}) == 0);
  CHECK_THROWS_AS(parent_config_index(c, Assignment{1, kUnset, kUnset}), ContractError);

  SUBCASE("decode inverts the index") {
    Cpt big(3, 2, {0, 1, 2}, {2, 3, 4}, std::vector<double>(48, 0.5));
    for (std::size_t j = 0; j < big.rows(); ++j) {
      auto states = big.decode(j);
      Assignment full{states[0], states[1], states[2], kUnset};
      CHECK(parent_config_index(big, full) == j);
    }
  }
}

TEST_CASE("cpt normalization rules") {
  CHECK_NOTHROW(Cpt(0, 2, {}, {}, {0.3, 0.7}));
  CHECK_THROWS_AS(Cpt(0, 2, {}, {}, {0.3, 0.6}), ContractError);
  CHECK_THROWS_AS(Cpt(0, 2, {}, {}, {1.2, -0.2}), ContractError);
  CHECK_THROWS_AS(Cpt(0, 2, {}, {}, {0.5, 0.5, 0.5}), ContractError);
  Cpt drift(0, 2, {}, {}, {0.3 + 5e-10, 0.7});
  CHECK(drift.at(0, 0) + drift.at(0, 1) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("network requires cpt parents to match the dag") {
  std::vector<DiscreteVariable> vars{{"A", {"a0", "a1"}}, {"B", {"b0", "b1"}}};
  Dag dag({"A", "B"}, std::vector<Arc>{{0, 1}});
  std::vector<Cpt> ok{Cpt(0, 2, {}, {}, {0.6, 0.4}), Cpt(1, 2, {0}, {2}, {0.5, 0.5, 0.1, 0.9})};
  CHECK_NOTHROW(BayesianNetwork(vars, dag, ok));
  std::vector<Cpt> bad{Cpt(0, 2, {}, {}, {0.6, 0.4}), Cpt(1, 2, {}, {}, {0.5, 0.5})};
  CHECK_THROWS_AS(BayesianNetwork(vars, dag, bad), ContractError);
}

TEST_CASE("joint probability") {
  auto net = oracle::build({{"A", {"a1", "a2"}, {}, {0.6, 0.4}},
                            {"B", {"b1", "b2"}, {"A"}, {0.5, 0.5, 0.2, 0.8}}});
  CHECK(joint_probability(net, {0, 0}) == doctest::Approx(0.30).epsilon(1e-15));
  auto zero = oracle::build({{"A", {"a1", "a2"}, {}, {1.0, 0.0}}});
  CHECK(joint_probability(zero, {1}) == 0.0);
  auto uni = oracle::build({{"U", {"u0", "u1"}, {}, {0.5, 0.5}}});
  CHECK(joint_probability(uni, {0}) == 0.5);
  CHECK(joint_probability(uni, {1}) == 0.5);
  CHECK_THROWS_AS(joint_probability(net, {0, kUnset}), ContractError);
}

TEST_CASE("joint sums to one and matches the oracle product") {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 40; ++t) {
    auto net = oracle::random_network(rng, {4, 3, 2, 0.6});
    std::vector<std::size_t> cards;
    for (VarId v = 0; v < net.size(); ++v) cards.push_back(net.cardinality(v));
    double total = 0.0;
    for_each_assignment(cards, [&](const Assignment& a) {
      double p = joint_probability(net, a);
      CHECK(p == doctest::Approx(oracle::product_of_cpts(net, a)).epsilon(1e-14));
      total += p;
      return true;
    });
    CHECK(std::abs(total - 1.0) < 1e-9);
  }
}

TEST_CASE("with_row replaces one row and keeps the rest") {
  auto net = oracle::build({{"A", {"a1", "a2"}, {}, {0.6, 0.4}},
                            {"B", {"b1", "b2"}, {"A"}, {0.5, 0.5, 0.2, 0.8}}});
  const double row[] = {0.9, 0.1};
  auto moved = net.with_row(1, 1, row);
  CHECK(moved.cpt(1).at(1, 0) == 0.9);
  CHECK(moved.cpt(1).at(0, 0) == 0.5);
  CHECK(net.cpt(1).at(1, 0) == 0.2);
  CHECK_FALSE(moved == net);
}
