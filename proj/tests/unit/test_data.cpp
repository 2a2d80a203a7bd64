#include <doctest.h>

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

#include "bnlab/data.hpp"
#include "bnlab/error.hpp"

using namespace bnlab;
using namespace bnlab::data;

namespace {

RawTable csv(const std::string& text) {
  std::istringstream in(text);
  return read_delimited(in);
}

std::vector<std::size_t> bin_counts(const std::vector<StateId>& states, std::size_t k) {
  std::vector<std::size_t> c(k, 0);
  for (auto s : states) ++c[s];
  return c;
}

}  // namespace

TEST_CASE("delimited reader") {
  auto t = csv("\xEF\xBB\xBF" "id,name,flag,price\r\n1,\"Smith, J\",true,10.5\r\n2,\"say \"\"hi\"\"\",NA,\r\n");
  REQUIRE(t.columns() == std::vector<std::string>{"id", "name", "flag", "price"});
  REQUIRE(t.row_count() == 2);
  CHECK(std::get<double>(t.rows()[0][0]) == 1.0);
  CHECK(std::get<std::string>(t.rows()[0][1]) == "Smith, J");
  CHECK(std::get<bool>(t.rows()[0][2]));
  CHECK(std::get<std::string>(t.rows()[1][1]) == "say \"hi\"");
  CHECK(is_missing(t.rows()[1][2]));
  CHECK(is_missing(t.rows()[1][3]));
  CHECK_THROWS(csv("a,b\n1\n"));
  CHECK_THROWS(csv("a,a\n1,2\n"));
  std::istringstream semi("x;y\n1;2\n");
  CHECK(read_delimited(semi, ';').columns().size() == 2);
}

TEST_CASE("iqr filter") {
  const std::vector<double> col{1, 2, 3, 4, 100};
  CHECK(iqr_filter(col, 2.0) == std::vector<bool>{true, true, true, true, false});
  const std::vector<double> constant(6, 3.5);
  CHECK(iqr_filter(constant) == std::vector<bool>(6, true));
  const std::vector<double> one{5};
  CHECK(iqr_filter(one, 0.1) == std::vector<bool>{true});
  const std::vector<double> missing(3, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(iqr_filter(missing), ContractError);
  CHECK_THROWS_AS(iqr_filter(std::vector<double>{}), ContractError);

  SUBCASE("huge factor keeps everything") {
    std::mt19937_64 rng(3);
    std::lognormal_distribution<double> d(0.0, 2.0);
    std::vector<double> xs(500);
    for (auto& x : xs) x = d(rng);
    auto keep = iqr_filter(xs, 1e300);
    CHECK(std::all_of(keep.begin(), keep.end(), [](bool b) { return b; }));
  }
}

TEST_CASE("quantile bins") {
  SUBCASE("eight values into quartiles") {
    std::vector<double> xs{5, 1, 8, 3, 2, 7, 4, 6};
    auto b = quantile_bins(xs, 4, {"a", "b", "c", "d"}, "X");
    CHECK(bin_counts(b.states, 4) == std::vector<std::size_t>{2, 2, 2, 2});
    CHECK(b.edges.cuts.size() == 3);
  }
  SUBCASE("terciles of three values") {
    std::vector<double> xs{10, 20, 30};
    auto b = quantile_bins(xs, 3, {"L", "M", "H"});
    CHECK(b.states == std::vector<StateId>{0, 1, 2});
  }
  SUBCASE("too few distinct values names the column") {
    std::vector<double> xs(10, 4.0);
    try {
      quantile_bins(xs, 2, {"lo", "hi"}, "AREA");
      FAIL("expected a discretization error");
    } catch (const DiscretizationError& e) {
      CHECK(std::string(e.what()).find("AREA") != std::string::npos);
    }
  }
  SUBCASE("upper edge inclusive") {
    BinEdges e{"X", {1.0, 2.0}, {"a", "b", "c"}};
    CHECK(e.assign(1.0) == 0);
    CHECK(e.assign(1.5) == 1);
    CHECK(e.assign(2.0) == 1);
    CHECK(e.assign(2.5) == 2);
  }
  SUBCASE("distinct values with n divisible by k give equal bins") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> d;
    for (std::size_t k : {2u, 3u, 4u, 6u}) {
      std::vector<double> xs(k * 37);
      for (auto& x : xs) x = d(rng);
      std::vector<std::string> labels(k);
      for (std::size_t j = 0; j < k; ++j) labels[j] = "Q" + std::to_string(j);
      auto b = quantile_bins(xs, k, labels);
      CHECK(bin_counts(b.states, k) == std::vector<std::size_t>(k, 37));
    }
  }
}

TEST_CASE("deduplicate keeps first occurrence") {
  auto t = csv("a,b,c\n1,x,p\n1,x,q\n2,y,r\n");
  const std::vector<std::string> key{"a", "b"};
  auto d = deduplicate(t, key);
  REQUIRE(d.row_count() == 2);
  CHECK(std::get<std::string>(d.rows()[0][2]) == "p");
  const std::vector<std::string> all{"a", "b", "c"};
  CHECK(deduplicate(t, all).row_count() == 3);
  CHECK(deduplicate(t, std::vector<std::string>{}).row_count() == 3);
  auto exact = csv("a\n1\n1\n");
  CHECK(deduplicate(exact, std::vector<std::string>{"a"}).row_count() == 1);
}

TEST_CASE("neighborhood frequency ranks") {
  auto r = neighborhood_frequency_rank({{"n1", 40}, {"n2", 30}, {"n3", 20}, {"n4", 10}});
  CHECK(r["n1"] == "Most Common");
  CHECK(r["n2"] == "Frequent");
  CHECK(r["n3"] == "Less Frequent");
  CHECK(r["n4"] == "Rare");
  CHECK(neighborhood_frequency_rank({{"only", 7}})["only"] == "Most Common");
  auto eq = neighborhood_frequency_rank({{"a", 5}, {"b", 5}, {"c", 5}});
  for (const auto& [k, v] : eq) CHECK(v == "Most Common");
  CHECK_THROWS_AS(neighborhood_frequency_rank({}), ContractError);
}

TEST_CASE("encode pipeline") {
  auto t = csv(
      "id,area,pool,nb\n"
      "1,50,yes,north\n"
      "2,60,no,north\n"
      "3,,yes,south\n"
      "4,70,no,south\n"
      "4,70,no,south\n"
      "5,80,yes,north\n");
  DiscretizationSpec spec;
  spec.columns = {{"AREA", "area", RuleKind::quantile, 2, {"small", "large"}},
                  {"POOL", "pool", RuleKind::boolean},
                  {"NB", "nb", RuleKind::categorical}};
  spec.dedup_keys = {"id"};
  auto res = encode_dataset(t, spec);
  CHECK(res.report.input_rows == 6);
  CHECK(res.report.dropped_duplicates == 1);
  CHECK(res.report.dropped_missing == 1);
  CHECK(res.report.output_rows == 4);
  REQUIRE(res.dataset.rows() == 4);
  CHECK(res.dataset.variable(0).states() == std::vector<std::string>{"small", "large"});
  CHECK(res.dataset.variable(1).states() == std::vector<std::string>{"Yes", "No"});
  CHECK(res.dataset.variable(2).states() == std::vector<std::string>{"north", "south"});
  CHECK(res.encoding.edges.size() == 1);

  SUBCASE("minimal one-column pipeline") {
    auto one = csv("v\n1\n2\n3\n4\n");
    DiscretizationSpec s1;
    s1.columns = {{"V", "v", RuleKind::quantile, 2}};
    auto r = encode_dataset(one, s1);
    CHECK(r.dataset.variable(0).cardinality() == 2);
  }
  SUBCASE("deterministic") {
    auto again = encode_dataset(t, spec);
    CHECK(again.dataset == res.dataset);
    CHECK(again.encoding == res.encoding);
  }
  SUBCASE("frozen re-encoding reproduces states") {
    auto re = apply_encoding(t, spec, res.encoding);
    CHECK(re.dataset == res.dataset);
  }
  SUBCASE("row filters") {
    DiscretizationSpec f = spec;
    f.filters.push_back({"area", FilterOp::ge, Cell{60.0}});
    auto r = encode_dataset(t, f);
    REQUIRE(r.report.dropped_by_filter.size() == 1);
    CHECK(r.report.dropped_by_filter[0].second == 1);
    CHECK(r.dataset.rows() == 3);
  }
  SUBCASE("unknown column in spec") {
    DiscretizationSpec bad = spec;
    bad.columns.push_back({"X", "nope", RuleKind::categorical});
    CHECK_THROWS_AS(encode_dataset(t, bad), SchemaError);
  }
}

TEST_CASE("dataset text round trip") {
  std::vector<DiscreteVariable> vars{{"A", {"x", "y"}}, {"B", {"p", "q", "r"}}};
  Dataset d(vars, {{0, 1, 1}, {2, 0, 1}});
  std::stringstream s;
  write_dataset(s, d);
  CHECK(read_dataset(s, vars) == d);
  CHECK_THROWS_AS(Dataset(vars, {{0, 2, 1}, {2, 0, 1}}), ContractError);
}
