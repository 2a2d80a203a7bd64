#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "bnlab/error.hpp"
#include "bnlab/learn.hpp"
#include "oracle.hpp"

using namespace bnlab;
using namespace bnlab::learn;
using data::Dataset;

namespace {

std::vector<DiscreteVariable> binary_vars(const std::vector<std::string>& names) {
  std::vector<DiscreteVariable> v;
  for (const auto& n : names) v.emplace_back(n, std::vector<std::string>{"0", "1"});
  return v;
}

// Hand-rolled BIC over a dataset, independent of count_stats.
double reference_bic(const Dag& dag, const Dataset& d) {
  const double n = static_cast<double>(d.rows());
  double total = 0.0;
  for (VarId v = 0; v < dag.size(); ++v) {
    const auto& ps = dag.parents(v);
    std::map<std::vector<std::uint32_t>, std::map<std::uint32_t, double>> tab;
    for (std::size_t i = 0; i < d.rows(); ++i) {
      std::vector<std::uint32_t> cfg;
      for (VarId p : ps) cfg.push_back(d.at(i, p));
      tab[cfg][d.at(i, v)] += 1.0;
    }
    for (const auto& [cfg, row] : tab) {
      double nij = 0.0;
      for (const auto& [k, c] : row) nij += c;
      for (const auto& [k, c] : row) total += c * std::log(c / nij);
    }
    double q = 1.0;
    for (VarId p : ps) q *= static_cast<double>(d.variable(p).cardinality());
    total -= q * static_cast<double>(d.variable(v).cardinality() - 1) / 2.0 * std::log(n);
  }
  return total;
}

BayesianNetwork two_node(double p_a, double b_given_a0, double b_given_a1) {
  return oracle::build({{"A", {"0", "1"}, {}, {p_a, 1 - p_a}},
                        {"B", {"0", "1"}, {"A"}, {b_given_a0, 1 - b_given_a0, b_given_a1, 1 - b_given_a1}}});
}

}  // namespace

TEST_CASE("sufficient statistics") {
  Dataset d(binary_vars({"X", "P"}), {{0, 0, 1, 1}, {0, 1, 0, 1}});
  auto s = count_stats(d, 0, std::vector<VarId>{});
  CHECK(s.counts == std::vector<std::uint64_t>{2, 2});
  auto sp = count_stats(d, 0, std::vector<VarId>{1});
  CHECK(sp.rows == 2);
  CHECK(sp.total() == 4);
  Dataset empty(binary_vars({"X", "P"}), {{}, {}});
  auto se = count_stats(empty, 0, std::vector<VarId>{1});
  CHECK(se.counts == std::vector<std::uint64_t>(4, 0));
  CHECK_THROWS_AS(count_stats(d, 5, std::vector<VarId>{}), ContractError);
  CHECK_THROWS_AS(count_stats(d, 0, std::vector<VarId>{0}), ContractError);
}

TEST_CASE("bic family") {
  SufficientStats s{0, {}, 2, 1, {2, 2}, {4}};
  CHECK(std::abs(bic_family(s, 4) - (-4 * std::log(2.0) - 0.5 * std::log(4.0))) < 1e-12);
  CHECK(std::abs(bic_family(s, 4) - (-3.465736)) < 1e-6);
  SufficientStats det{0, {}, 2, 1, {9, 0}, {9}};
  CHECK(bic_family(det, 9) == doctest::Approx(-0.5 * std::log(9.0)).epsilon(1e-14));
  SufficientStats empty_row{0, {1}, 2, 2, {3, 1, 0, 0}, {4, 0}};
  CHECK(bic_family(empty_row, 4) ==
        doctest::Approx(3 * std::log(0.75) + std::log(0.25) - 1.0 * std::log(4.0)).epsilon(1e-14));

  SUBCASE("independent parent never helps a uniform child") {
    // every 2x2 table with X balanced inside each parent row
    for (std::uint64_t a = 0; a <= 6; ++a)
      for (std::uint64_t b = 0; b <= 6; ++b) {
        std::uint64_t n = 2 * (a + b);
        if (n == 0) continue;
        SufficientStats none{0, {}, 2, 1, {a + b, a + b}, {n}};
        SufficientStats with{0, {1}, 2, 2, {a, a, b, b}, {2 * a, 2 * b}};
        CHECK(bic_family(with, n) <= bic_family(none, n));
      }
  }
}

TEST_CASE("bic score decomposes and is score equivalent") {
  auto net = two_node(0.3, 0.9, 0.2);
  auto d = forward_sample(net, 500, 4);
  Dag empty(d.names());
  Dag ab(d.names(), std::vector<Arc>{{0, 1}});
  Dag ba(d.names(), std::vector<Arc>{{1, 0}});
  CHECK(bic_score(empty, d) == bic_family(count_stats(d, 0, std::vector<VarId>{}), 500) +
                                   bic_family(count_stats(d, 1, std::vector<VarId>{}), 500));
  CHECK(std::abs(bic_score(ab, d) - bic_score(ba, d)) < 1e-9);
  CHECK(std::abs(bic_score(ab, d) - reference_bic(ab, d)) < 1e-9);

  std::mt19937_64 rng(2);
  for (int t = 0; t < 10; ++t) {
    auto rnet = oracle::random_network(rng, {5, 3, 2, 0.5});
    auto rd = forward_sample(rnet, 300, static_cast<std::uint64_t>(t));
    CHECK(std::abs(bic_score(rnet.dag(), rd) - reference_bic(rnet.dag(), rd)) < 1e-8);
  }
}

TEST_CASE("tabu search") {
  SUBCASE("recovers a strong pairwise dependency") {
    auto d = forward_sample(two_node(0.5, 0.9, 0.1), 50000, 1);
    auto g = tabu_search(d, {});
    CHECK((g.has_arc(0, 1) || g.has_arc(1, 0)));
    CHECK(bic_score(g, d) > bic_score(Dag(d.names()), d));
  }
  SUBCASE("independent noise gives the empty graph") {
    auto noise = oracle::build({{"A", {"0", "1"}, {}, {0.5, 0.5}},
                                {"B", {"0", "1", "2"}, {}, {0.3, 0.3, 0.4}},
                                {"C", {"0", "1"}, {}, {0.6, 0.4}}});
    auto d = forward_sample(noise, 10000, 3);
    auto g = tabu_search(d, {});
    CHECK(g.arc_count() == 0);
  }
  SUBCASE("no-outgoing constraint holds") {
    auto d = forward_sample(two_node(0.5, 0.9, 0.1), 5000, 1);
    LearnConfig cfg;
    cfg.constraints.no_outgoing = {0};
    auto g = tabu_search(d, cfg);
    CHECK(g.children(0).empty());
    CHECK(g.has_arc(1, 0));
  }
  SUBCASE("required and forbidden arcs") {
    auto d = forward_sample(two_node(0.5, 0.9, 0.1), 5000, 1);
    LearnConfig cfg;
    cfg.constraints.forbidden = {{0, 1}, {1, 0}};
    CHECK(tabu_search(d, cfg).arc_count() == 0);
    LearnConfig req;
    req.constraints.required = {{1, 0}};
    CHECK(tabu_search(d, req).has_arc(1, 0));
    LearnConfig clash;
    clash.constraints.required = {{0, 1}};
    clash.constraints.no_outgoing = {0};
    CHECK_THROWS_AS(tabu_search(d, clash), StructuralError);
  }
  SUBCASE("never worse than the empty graph and deterministic") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 5; ++t) {
      auto net = oracle::random_network(rng, {6, 3, 2, 0.5});
      auto d = forward_sample(net, 400, static_cast<std::uint64_t>(t));
      auto g = tabu_search(d, {});
      CHECK(bic_score(g, d) >= bic_score(Dag(d.names()), d));
      CHECK(tabu_search(d, {}) == g);
    }
  }
}

TEST_CASE("scored dag tracks moves against the reference score") {
  std::mt19937_64 rng(12);
  auto net = oracle::random_network(rng, {5, 3, 2, 0.5});
  auto d = forward_sample(net, 500, 4);
  FamilyScorer scorer(d);
  ScoredDag s(scorer, Dag(d.names()));
  CHECK(s.total() == bic_score(s.dag(), d));

  const Move add{Move::Kind::add, 0, 1};
  REQUIRE(s.legal(add));
  const auto r = s.rescore(add);
  const double before = s.total();
  s.apply(add, r);
  CHECK(s.total() == bic_score(s.dag(), d));
  CHECK(std::abs(s.total() - before - r.delta) < 1e-9);
  CHECK(s.family(0) == scorer.family(0, std::vector<VarId>{}));

  CHECK_FALSE(s.legal(add));  // already present
  CHECK_FALSE(s.legal({Move::Kind::remove, 1, 0}));
  s.apply({Move::Kind::add, 1, 2});
  CHECK_FALSE(s.legal({Move::Kind::add, 2, 0}));  // would close a cycle
  const Move rev{Move::Kind::reverse, 0, 1};
  REQUIRE(s.legal(rev));
  const auto rr = s.rescore(rev);
  const double predicted = s.total_after(rev, rr);
  s.apply(rev, rr);
  CHECK(s.dag().has_arc(1, 0));
  CHECK(predicted == s.total());
  CHECK(s.total() == bic_score(s.dag(), d));
  CHECK(std::abs(s.total() - reference_bic(s.dag(), d)) < 1e-8);
}

TEST_CASE("break cycles") {
  std::vector<std::string> nodes{"A", "B", "C"};
  SUBCASE("two-cycle keeps the stronger arc") {
    std::map<Arc, double> s{{{0, 1}, 0.9}, {{1, 0}, 0.6}};
    auto g = break_cycles(nodes, {{0, 1}, {1, 0}}, s);
    CHECK(g.has_arc(0, 1));
    CHECK(g.arc_count() == 1);
  }
  SUBCASE("acyclic input unchanged") {
    std::map<Arc, double> s{{{0, 1}, 0.1}, {{1, 2}, 0.2}};
    CHECK(break_cycles(nodes, {{0, 1}, {1, 2}}, s).arc_count() == 2);
  }
  SUBCASE("three-cycle loses only its weakest arc") {
    std::map<Arc, double> s{{{0, 1}, 0.9}, {{1, 2}, 0.8}, {{2, 0}, 0.7}};
    auto g = break_cycles(nodes, {{0, 1}, {1, 2}, {2, 0}}, s);
    CHECK(g.arc_count() == 2);
    CHECK_FALSE(g.has_arc(2, 0));
  }
  SUBCASE("protected cycle is an error") {
    std::map<Arc, double> s{{{0, 1}, 0.9}, {{1, 0}, 0.6}};
    CHECK_THROWS_AS(break_cycles(nodes, {{0, 1}, {1, 0}}, s, {{0, 1}, {1, 0}}), StructuralError);
  }
}

TEST_CASE("bootstrap consensus") {
  auto copy = oracle::build({{"A", {"0", "1"}, {}, {0.5, 0.5}},
                             {"B", {"0", "1"}, {"A"}, {1.0, 0.0, 0.0, 1.0}},
                             {"C", {"0", "1"}, {}, {0.4, 0.6}}});
  auto d = forward_sample(copy, 2000, 5);
  SUBCASE("deterministic copy pair is always found") {
    auto r = bootstrap_consensus(d, {20, 0.5}, {});
    CHECK(r.frequency(0, 1) == 1.0);
    CHECK((r.consensus.has_arc(0, 1) || r.consensus.has_arc(1, 0)));
    for (const auto& e : r.edges) {
      CHECK(e.frequency >= 0.0);
      CHECK(e.frequency <= 1.0);
    }
  }
  SUBCASE("single replicate reproduces that replicate's graph") {
    auto r = bootstrap_consensus(d, {1, 0.5}, {});
    auto w = bootstrap_weights(d.rows(), 1);
    CHECK(r.consensus == tabu_search(d, {}, w));
  }
  SUBCASE("parallel equals serial") {
    auto a = bootstrap_consensus(d, {8, 0.5}, {});
    auto b = bootstrap_consensus_serial(d, {8, 0.5}, {});
    CHECK(a.consensus == b.consensus);
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.edges.size(); ++i) CHECK(a.edges[i].a_to_b == b.edges[i].a_to_b);
  }
  SUBCASE("threshold one keeps only unanimous pairs") {
    auto r = bootstrap_consensus(d, {10, 1.0}, {});
    for (const auto& a : r.consensus.arcs()) CHECK(r.frequency(a.parent, a.child) == 1.0);
  }
  SUBCASE("no-outgoing set respected") {
    LearnConfig cfg;
    cfg.constraints.no_outgoing = {1};
    auto r = bootstrap_consensus(d, {10, 0.5}, cfg);
    CHECK(r.consensus.children(1).empty());
  }
  SUBCASE("edge table format") {
    auto r = bootstrap_consensus(d, {4, 0.5}, {});
    std::ostringstream out;
    write_edge_table(out, r);
    CHECK(out.str().rfind("parent child frequency direction_fraction\n", 0) == 0);
  }
  CHECK_THROWS_AS(bootstrap_consensus(d, {0, 0.5}, {}), ContractError);
  CHECK_THROWS_AS(bootstrap_consensus(d, {5, 0.0}, {}), ContractError);
}

TEST_CASE("dirichlet fit") {
  std::vector<DiscreteVariable> vars{{"X", {"a", "b"}}};
  Dataset d(vars, {{0, 0}});
  auto net = fit_parameters(Dag({"X"}), d, 1.0);
  CHECK(net.cpt(0).at(0, 0) == 0.75);
  CHECK(net.cpt(0).at(0, 1) == 0.25);

  std::vector<DiscreteVariable> v3{{"P", {"p", "q"}}, {"X", {"a", "b", "c"}}};
  Dataset d3(v3, {{0, 0}, {1, 2}});
  auto n3 = fit_parameters(Dag({"P", "X"}, std::vector<Arc>{{0, 1}}), d3, 1.0);
  for (StateId k = 0; k < 3; ++k) CHECK(n3.cpt(1).at(1, k) == doctest::Approx(1.0 / 3).epsilon(1e-15));

  SUBCASE("small alpha approaches empirical frequencies") {
    auto src = two_node(0.3, 0.8, 0.4);
    auto sample = forward_sample(src, 1000, 2);
    auto fit = fit_parameters(src.dag(), sample, 1e-9);
    auto stats = count_stats(sample, 1, std::vector<VarId>{0});
    for (std::size_t j = 0; j < 2; ++j)
      for (StateId k = 0; k < 2; ++k)
        CHECK(std::abs(fit.cpt(1).at(j, k) - static_cast<double>(stats.count(j, k)) /
                                                  static_cast<double>(stats.row_sums[j])) < 1e-9);
  }
  SUBCASE("strictly positive entries") {
    std::mt19937_64 rng(6);
    auto net6 = oracle::random_network(rng, {6, 3, 2, 0.6});
    auto fit = fit_parameters(net6.dag(), forward_sample(net6, 50, 1));
    for (VarId v = 0; v < fit.size(); ++v)
      for (double x : fit.cpt(v).table()) CHECK(x > 0.0);
  }
  CHECK_THROWS_AS(fit_parameters(Dag({"X"}), d, 0.0), ContractError);
}
