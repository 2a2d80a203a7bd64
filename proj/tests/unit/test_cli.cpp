#include <doctest.h>

#include <sstream>

#include "bnlab/bundle.hpp"
#include "bnlab/cli.hpp"
#include "bnlab/format.hpp"
#include "models.hpp"
#include "scratch.hpp"

using namespace bnlab;
using bnlab::api::Json;

namespace {

const std::string kFixtures = BNLAB_FIXTURE_DIR;

struct Run {
  int code;
  std::string out, err;
};

Run bnlab_cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

// Fixture spec rewritten into `dir` with absolute inputs and local outputs.
std::string local_spec(const scratch::Dir& dir, const std::function<void(Json&)>& edit = {}) {
  Json spec = Json::parse(scratch::slurp(kFixtures + "/spec.json"));
  spec["input"]["path"] = kFixtures + "/listings.csv";
  spec["geo"]["layers"] = kFixtures + "/geo.json";
  spec["scenarios"] = kFixtures + "/scenarios.json";
  if (edit) edit(spec);
  const auto path = dir.file("spec.json");
  scratch::spit(path, spec.dump(2));
  return path;
}

std::vector<std::vector<std::string>> table_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (std::size_t tab; (tab = line.find('\t', start)) != std::string::npos; start = tab + 1)
      cells.push_back(line.substr(start, tab - start));
    cells.push_back(line.substr(start));
    rows.push_back(std::move(cells));
  }
  return rows;
}

bool contains(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }

// One learned fixture model shared by the read-only command tests.
const std::string& fixture_bundle() {
  static scratch::Dir dir("fixture-model");
  static const std::string bundle = [] {
    const auto spec = local_spec(dir);
    REQUIRE(bnlab_cli({"discretize", "--spec", spec}).code == 0);
    REQUIRE(bnlab_cli({"learn", "--spec", spec}).code == 0);
    return dir.file("model.json");
  }();
  return bundle;
}

}  // namespace

TEST_CASE("cli: discretize reports every cleaning stage and is repeatable") {
  scratch::Dir dir("discretize");
  const auto spec = local_spec(dir);
  auto r = bnlab_cli({"discretize", "--spec", spec});
  REQUIRE(r.code == 0);
  for (const char* stage : {"input\t", "outside_boundary\t", "duplicates\t", "missing\t", "filter PRICE_M2 > 0\t",
                            "outliers\t", "output\t"})
    CHECK(contains(r.out, stage));
  const auto rows = table_rows(r.out);
  std::map<std::string, long> counts;
  for (const auto& row : rows) counts[row[0]] = row.size() > 1 ? std::atol(row[1].c_str()) : 0;
  long dropped = 0;
  for (const auto& [k, v] : counts)
    if (k != "stage" && k != "input" && k != "output") dropped += v;
  CHECK(counts["input"] - dropped == counts["output"]);
  CHECK(counts["duplicates"] > 0);
  CHECK(counts["outliers"] > 0);
  CHECK(counts["outside_boundary"] > 0);

  const auto first = scratch::slurp(dir.file("dataset.csv"));
  const auto enc = scratch::slurp(dir.file("encoding.json"));
  CHECK(first.rfind("AGE,AREA,HEIGHT", 0) == 0);
  REQUIRE(bnlab_cli({"discretize", "--spec", spec}).code == 0);
  CHECK(scratch::slurp(dir.file("dataset.csv")) == first);
  CHECK(scratch::slurp(dir.file("encoding.json")) == enc);
}

TEST_CASE("cli: discretize names a missing column and its rule") {
  scratch::Dir dir("missing-column");
  const auto spec = local_spec(dir, [](Json& s) { s["discretize"]["columns"][1]["source"] = "SURFACE"; });
  auto r = bnlab_cli({"discretize", "--spec", spec});
  CHECK(r.code == cli::kExitError);
  CHECK(contains(r.err, "SURFACE"));
  CHECK(contains(r.err, "rule quantile"));
  CHECK(contains(r.err, "AREA"));
}

TEST_CASE("cli: invalid spec fails before reading data") {
  scratch::Dir dir("invalid-spec");
  const auto spec = local_spec(dir, [](Json& s) {
    s["input"]["path"] = "/nonexistent/listings.csv";
    s["learn"]["bootstrap"]["threshold"] = 0;
  });
  auto r = bnlab_cli({"discretize", "--spec", spec});
  CHECK(r.code == cli::kExitError);
  CHECK(contains(r.err, "/learn/bootstrap/threshold"));
}

TEST_CASE("cli: learn is bit-reproducible and honours the no-outgoing set") {
  scratch::Dir dir("learn");
  const auto spec = local_spec(dir);
  REQUIRE(bnlab_cli({"discretize", "--spec", spec}).code == 0);
  auto first = bnlab_cli({"learn", "--spec", spec});
  REQUIRE(first.code == 0);
  const auto bundle = scratch::slurp(dir.file("model.json"));
  const auto edges = scratch::slurp(dir.file("edges.txt"));
  auto second = bnlab_cli({"learn", "--spec", spec, "--serial"});
  REQUIRE(second.code == 0);
  CHECK(scratch::slurp(dir.file("model.json")) == bundle);
  CHECK(scratch::slurp(dir.file("edges.txt")) == edges);
  CHECK(first.out == second.out);

  const auto b = api::load_bundle(dir.file("model.json"));
  const VarId price = b.network.index("PRICE");
  CHECK(b.network.dag().children(price).empty());
  CHECK_FALSE(b.network.dag().parents(price).empty());
  CHECK(b.provenance.seed == 7);
  CHECK(b.provenance.replicates == 20);
  CHECK(b.provenance.config_hash.size() == 16);
  CHECK_FALSE(b.provenance.created.has_value());
  CHECK(contains(edges, "parent child frequency direction_fraction\n"));
  CHECK(b.groups[price] == "target");
}

TEST_CASE("cli: single replicate, default threshold, rerun identical") {
  scratch::Dir dir("one-replicate");
  const auto spec = local_spec(dir, [](Json& s) {
    s["learn"]["bootstrap"] = Json{{"replicates", 1}};
  });
  REQUIRE(bnlab_cli({"discretize", "--spec", spec}).code == 0);
  REQUIRE(bnlab_cli({"learn", "--spec", spec}).code == 0);
  const auto once = scratch::slurp(dir.file("model.json"));
  REQUIRE(bnlab_cli({"learn", "--spec", spec}).code == 0);
  CHECK(scratch::slurp(dir.file("model.json")) == once);
  const auto b = api::load_bundle(dir.file("model.json"));
  CHECK(b.provenance.threshold == 0.5);
  CHECK(b.provenance.replicates == 1);
}

TEST_CASE("cli: required arcs forming a cycle fail before compute") {
  scratch::Dir dir("cycle");
  const auto spec = local_spec(dir, [](Json& s) {
    s["learn"]["constraints"]["required"] = Json::parse(R"([["AREA", "ROOMS"], ["ROOMS", "BATHS"], ["BATHS", "AREA"]])");
  });
  auto r = bnlab_cli({"learn", "--spec", spec});
  CHECK(r.code == cli::kExitError);
  CHECK(contains(r.err, "cycle"));
  CHECK_FALSE(std::filesystem::exists(dir.file("model.json")));
}

TEST_CASE("cli: timestamp only on request") {
  scratch::Dir dir("timestamp");
  const auto spec = local_spec(dir, [](Json& s) { s["learn"]["bootstrap"] = Json{{"replicates", 1}}; });
  REQUIRE(bnlab_cli({"discretize", "--spec", spec}).code == 0);
  REQUIRE(bnlab_cli({"learn", "--spec", spec, "--timestamp"}).code == 0);
  const auto created = api::load_bundle(dir.file("model.json")).provenance.created;
  REQUIRE(created.has_value());
  CHECK(created->size() == 20);
  CHECK(created->back() == 'Z');
}

TEST_CASE("cli: query without evidence is the marginal and sums to one") {
  auto r = bnlab_cli({"query", "--bundle", fixture_bundle(), "--target", "PRICE"});
  REQUIRE(r.code == 0);
  const auto rows = table_rows(r.out);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == std::vector<std::string>{"state", "probability"});
  CHECK(rows[1][0] == "Very Low");
  CHECK(rows[6][0] == "Luxury");
  double sum = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) sum += std::stod(rows[i][1]);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("cli: query output is deterministic") {
  const std::vector<std::string> args{"query", "--bundle", fixture_bundle(), "--target", "PRICE",
                                      "--evidence", "CENTRE=Very Near", "LIFT=Yes"};
  auto a = bnlab_cli(args), b = bnlab_cli(args);
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
}

TEST_CASE("cli: scan sorted by divergence") {
  auto r = bnlab_cli({"scan", "--bundle", fixture_bundle(), "--target", "PRICE"});
  REQUIRE(r.code == 0);
  const auto rows = table_rows(r.out);
  REQUIRE(rows.size() > 10);
  CHECK(rows[0][2] == "divergence");
  CHECK(rows[0].size() == 3 + 6);
  for (std::size_t i = 2; i < rows.size(); ++i) CHECK(std::stod(rows[i - 1][2]) >= std::stod(rows[i][2]));
  for (const auto& row : rows) CHECK(row[0] != "PRICE");
}

TEST_CASE("cli: seven scenarios give seven rows") {
  auto r = bnlab_cli({"scenario", "--bundle", fixture_bundle(), "--scenarios", kFixtures + "/scenarios.json"});
  REQUIRE(r.code == 0);
  const auto rows = table_rows(r.out);
  REQUIRE(rows.size() == 8);
  CHECK(rows[1][0] == "Luxury Core");
  CHECK(rows[7][0] == "Green Retreat");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    double sum = 0;
    for (std::size_t c = 1; c <= 6; ++c) sum += std::stod(rows[i][c]);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
  }
  auto j = bnlab_cli({"scenario", "--bundle", fixture_bundle(), "--scenarios", kFixtures + "/scenarios.json",
                      "--format", "json"});
  CHECK(Json::parse(j.out).at("results").size() == 7);
}

TEST_CASE("cli: mpe and sensitivity tables") {
  auto m = bnlab_cli({"mpe", "--bundle", fixture_bundle(), "--evidence", "PRICE=Luxury"});
  REQUIRE(m.code == 0);
  CHECK(contains(m.out, "PRICE\tLuxury\n"));
  CHECK(table_rows(m.out).size() == 28);

  for (const char* kind : {"mi", "sobol", "node"}) {
    auto r = bnlab_cli({"sensitivity", "--bundle", fixture_bundle(), "--kind", kind, "--target", "PRICE"});
    REQUIRE(r.code == 0);
    CHECK(table_rows(r.out).size() == 27);
  }
  auto arc = bnlab_cli({"sensitivity", "--bundle", fixture_bundle(), "--kind", "arc"});
  REQUIRE(arc.code == 0);
  CHECK(table_rows(arc.out).size() == 1 + api::load_bundle(fixture_bundle()).network.dag().arc_count());

  auto t = bnlab_cli({"sensitivity", "--bundle", fixture_bundle(), "--kind", "tornado", "--target", "PRICE",
                      "--state", "Luxury", "--top-k", "5"});
  REQUIRE(t.code == 0);
  const auto rows = table_rows(t.out);
  CHECK(rows.size() == 6);
  CHECK(rows[0] == std::vector<std::string>{"subject", "score", "theta", "low", "high", "baseline"});

  auto no_state = bnlab_cli({"sensitivity", "--bundle", fixture_bundle(), "--kind", "tornado", "--target", "PRICE"});
  CHECK(no_state.code == cli::kExitError);
}

TEST_CASE("cli: export is byte-stable and carries bundle frequencies") {
  scratch::Dir dir("export");
  REQUIRE(bnlab_cli({"export", "--bundle", fixture_bundle(), "-o", dir.file("a.dot")}).code == 0);
  REQUIRE(bnlab_cli({"export", "--bundle", fixture_bundle(), "-o", dir.file("b.dot")}).code == 0);
  CHECK(scratch::slurp(dir.file("a.dot")) == scratch::slurp(dir.file("b.dot")));

  auto j = bnlab_cli({"export", "--bundle", fixture_bundle(), "--format", "json", "--sensitivity", "PRICE"});
  REQUIRE(j.code == 0);
  const auto g = Json::parse(j.out);
  const auto b = api::load_bundle(fixture_bundle());
  CHECK(g.at("arcs").size() == b.network.dag().arc_count());
  for (const auto& arc : g.at("arcs"))
    CHECK(arc.at("strength").get<double>() ==
          b.edge_frequency(arc.at("parent").get<std::string>(), arc.at("child").get<std::string>()).value());
  for (const auto& node : g.at("nodes")) CHECK(node.contains("sensitivity") == (node.at("name") != "PRICE"));
}

TEST_CASE("cli: exit codes") {
  scratch::Dir dir("exit-codes");
  const auto lawn = dir.file("lawn.json");
  api::save_bundle(models::lawn(), lawn);

  auto ok = bnlab_cli({"query", "--bundle", lawn, "--target", "Slip", "--evidence", "Rain=yes"});
  CHECK(ok.code == cli::kExitOk);

  auto impossible = bnlab_cli({"query", "--bundle", lawn, "--target", "Slip", "--evidence", "Sprinkler=on", "Wet=no"});
  CHECK(impossible.code == cli::kExitImpossible);
  CHECK(contains(impossible.err, "culprits: Sprinkler=on"));
  CHECK(bnlab_cli({"mpe", "--bundle", lawn, "--evidence", "Sprinkler=on", "Wet=no"}).code == cli::kExitImpossible);
  CHECK(bnlab_cli({"sensitivity", "--bundle", lawn, "--kind", "tornado", "--target", "Slip", "--state", "no",
                   "--evidence", "Sprinkler=on", "Wet=no"})
            .code == cli::kExitImpossible);

  scratch::spit(dir.file("sc.json"), R"({"target": "Slip", "scenarios": [
      {"label": "dry", "evidence": {"Rain": "no"}},
      {"label": "contradiction", "evidence": {"Sprinkler": "on", "Wet": "no"}},
      {"label": "wet", "evidence": {"Wet": "yes"}}]})");
  auto sc = bnlab_cli({"scenario", "--bundle", lawn, "--scenarios", dir.file("sc.json")});
  CHECK(sc.code == cli::kExitImpossible);
  CHECK(contains(sc.err, "scenario 'contradiction' has impossible evidence; culprit: Sprinkler=on"));
  CHECK(table_rows(sc.out).size() == 3);

  auto unknown = bnlab_cli({"query", "--bundle", lawn, "--target", "Slip", "--evidence", "Rain=drizzle"});
  CHECK(unknown.code == cli::kExitError);
  CHECK(contains(unknown.err, "valid states: no, yes"));
  CHECK(bnlab_cli({"query", "--bundle", lawn}).code == cli::kExitError);
  CHECK(bnlab_cli({"frobnicate"}).code == cli::kExitError);
  CHECK(bnlab_cli({}).code == cli::kExitError);
  CHECK(bnlab_cli({"query", "--bundle", dir.file("absent.json"), "--target", "Slip"}).code == cli::kExitError);
  auto help = bnlab_cli({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(contains(help.out, "discretize"));
}
