#include <doctest.h>

#include <bit>
#include <cstring>
#include <random>
#include <sstream>

#include "bnlab/bundle.hpp"
#include "bnlab/error.hpp"
#include "bnlab/outputs.hpp"
#include "bnlab/runspec.hpp"
#include "models.hpp"
#include "oracle.hpp"
#include "scratch.hpp"

using namespace bnlab;
using namespace bnlab::api;

namespace {

std::uint64_t bits(double x) { return std::bit_cast<std::uint64_t>(x); }

Json minimal_spec() {
  return Json::parse(R"({
    "input": {"path": "data.csv"},
    "discretize": {"columns": [
      {"name": "A", "rule": "quantile", "k": 2, "labels": ["lo", "hi"]},
      {"name": "B", "rule": "boolean"},
      {"name": "C", "source": "raw_c", "rule": "categorical"}
    ]}
  })");
}

bool mentions(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

std::string schema_message(const Json& doc) {
  try {
    parse_runspec(doc, "/base");
  } catch (const SchemaError& e) {
    return e.what();
  }
  return {};
}

}  // namespace

TEST_CASE("bundle round trip reproduces every CPT entry bit for bit") {
  std::mt19937_64 rng(404);
  for (int trial = 0; trial < 40; ++trial) {
    ModelBundle b;
    b.network = oracle::random_network(rng, {7, 4, 3, 0.5, 0.1});
    // awkward values: subnormal-adjacent and long mantissas survive too
    b.provenance.config_hash = "0123456789abcdef";
    std::ostringstream out;
    save_bundle(b, out);
    std::istringstream in(out.str());
    const auto back = load_bundle(in);
    REQUIRE(back.network.size() == b.network.size());
    for (VarId v = 0; v < b.network.size(); ++v) {
      const auto& x = b.network.cpt(v).table();
      const auto& y = back.network.cpt(v).table();
      REQUIRE(x.size() == y.size());
      for (std::size_t i = 0; i < x.size(); ++i) CHECK(bits(x[i]) == bits(y[i]));
      CHECK(b.network.cpt(v).parents() == back.network.cpt(v).parents());
      CHECK(b.network.variable(v).states() == back.network.variable(v).states());
    }
    CHECK(back.network.dag().arcs() == b.network.dag().arcs());
    std::ostringstream again;
    save_bundle(back, again);
    CHECK(again.str() == out.str());
  }
}

TEST_CASE("bundle preserves unknown fields and provenance extras") {
  auto b = models::lawn();
  Json j = to_json(b);
  j["future_section"] = Json{{"kind", "calibration"}, {"values", {1, 2, 3}}};
  j["provenance"]["operator"] = "nightly";
  const auto back = bundle_from_json(j);
  CHECK(back.extra.at("future_section") == j.at("future_section"));
  CHECK(back.provenance.extra.at("operator") == "nightly");
  CHECK(to_json(back) == j);
  CHECK(back.groups == b.groups);
  CHECK(back.edge_frequency("Wet", "Sprinkler").value() == 0.7);
  CHECK_FALSE(back.edge_frequency("Rain", "Slip").has_value());
}

TEST_CASE("bundle validation names the failing field") {
  Json j = to_json(models::lawn());
  SUBCASE("schema version from the future") {
    j["schema_version"] = kBundleSchemaVersion + 1;
    CHECK_THROWS_WITH_AS(bundle_from_json(j), doctest::Contains("schema_version"), SchemaError);
  }
  SUBCASE("missing cpts") {
    j.erase("cpts");
    CHECK_THROWS_WITH_AS(bundle_from_json(j), doctest::Contains("cpts"), SchemaError);
  }
  SUBCASE("not json") {
    std::istringstream in("{ nope");
    CHECK_THROWS_AS(load_bundle(in), SchemaError);
  }
}

TEST_CASE("encoding round trip") {
  data::Encoding enc;
  enc.variables = {DiscreteVariable("A", {"lo", "hi"}), DiscreteVariable("N", data::frequency_rank_labels())};
  enc.groups = {"structural", "spatial"};
  enc.edges = {{"A", {0.1 + 0.2}, {"lo", "hi"}}};
  enc.rank_maps["N"] = {{"x", "Most Common"}, {"y", "Rare"}};
  CHECK(encoding_from_json(encoding_to_json(enc)) == enc);
  CHECK(bits(encoding_from_json(encoding_to_json(enc)).edges[0].cuts[0]) == bits(0.1 + 0.2));
}

TEST_CASE("run spec: defaults, path resolution, settings") {
  auto s = parse_runspec(minimal_spec(), "/base/dir");
  CHECK(s.input == std::filesystem::path("/base/dir/data.csv"));
  CHECK(s.delimiter == ',');
  CHECK(s.bootstrap.threshold == 0.5);
  CHECK(s.bootstrap.replicates == 2000);
  CHECK(s.alpha == 1.0);
  CHECK(s.discretize.columns.size() == 3);
  CHECK(s.discretize.columns[2].source == "raw_c");
  CHECK(s.discretize.columns[0].source == "A");
  CHECK(s.bundle_out == std::filesystem::path("/base/dir/model.json"));

  Json doc = minimal_spec();
  doc["input"]["path"] = "/abs/data.tsv";
  doc["input"]["delimiter"] = "\t";
  doc["learn"] = Json::parse(R"({"seed": 11, "max_parents": 2, "alpha": 0.5,
      "bootstrap": {"replicates": 30, "threshold": 0.7},
      "constraints": {"no_outgoing": ["C"], "forbidden": [["A", "B"]], "required": [["B", "A"]]}})");
  s = parse_runspec(doc, "/base");
  CHECK(s.input == std::filesystem::path("/abs/data.tsv"));
  CHECK(s.delimiter == '\t');
  CHECK(s.learn.seed == 11);
  CHECK(s.learn.max_parents == 2);
  CHECK(s.alpha == 0.5);
  CHECK(s.bootstrap.replicates == 30);
  CHECK(s.bootstrap.threshold == 0.7);
  CHECK(s.learn.constraints.no_outgoing == std::set<VarId>{2});
  CHECK(s.learn.constraints.forbidden == std::set<Arc>{{0, 1}});
  CHECK(s.learn.constraints.required == std::set<Arc>{{1, 0}});
}

TEST_CASE("run spec: schema violations carry the field path") {
  Json doc = minimal_spec();
  SUBCASE("unknown top-level field") {
    doc["surprise"] = 1;
    CHECK(mentions(schema_message(doc), "unknown field 'surprise'"));
  }
  SUBCASE("missing input") {
    doc.erase("input");
    CHECK(mentions(schema_message(doc), "missing required field 'input'"));
  }
  SUBCASE("bad rule enum") {
    doc["discretize"]["columns"][1]["rule"] = "fuzzy";
    CHECK(mentions(schema_message(doc), "/discretize/columns/1/rule"));
  }
  SUBCASE("k below two") {
    doc["discretize"]["columns"][0]["k"] = 1;
    CHECK(mentions(schema_message(doc), "/discretize/columns/0/k"));
  }
  SUBCASE("wrong type") {
    doc["discretize"]["iqr_factor"] = "two";
    CHECK(mentions(schema_message(doc), "/discretize/iqr_factor: expected type"));
  }
  SUBCASE("threshold above one") {
    doc["learn"] = {{"bootstrap", {{"threshold", 1.5}}}};
    CHECK(mentions(schema_message(doc), "/learn/bootstrap/threshold"));
  }
  SUBCASE("pair arity") {
    doc["learn"] = {{"constraints", {{"forbidden", {{"A"}}}}}};
    CHECK(mentions(schema_message(doc), "/learn/constraints/forbidden/0"));
  }
  SUBCASE("quantile labels count") {
    doc["discretize"]["columns"][0]["labels"] = {"a", "b", "c"};
    CHECK(mentions(schema_message(doc), "/discretize/columns/0/labels"));
  }
  SUBCASE("duplicate variable") {
    doc["discretize"]["columns"][1]["name"] = "A";
    CHECK(mentions(schema_message(doc), "duplicate variable 'A'"));
  }
  SUBCASE("constraint on unknown variable") {
    doc["learn"] = {{"constraints", {{"no_outgoing", {"PRICE"}}}}};
    CHECK(mentions(schema_message(doc), "unknown variable 'PRICE'"));
  }
  SUBCASE("every error is reported") {
    doc["surprise"] = 1;
    doc["discretize"]["columns"][1]["rule"] = "fuzzy";
    const auto msg = schema_message(doc);
    CHECK(mentions(msg, "surprise"));
    CHECK(mentions(msg, "/discretize/columns/1/rule"));
  }
}

TEST_CASE("run spec: required arcs forming a cycle fail before any compute") {
  Json doc = minimal_spec();
  doc["learn"] = Json::parse(R"({"constraints": {"required": [["A", "B"], ["B", "C"], ["C", "A"]]}})");
  CHECK_THROWS_WITH_AS(parse_runspec(doc, "."), doctest::Contains("cycle"), StructuralError);
  doc["learn"] = Json::parse(R"({"constraints": {"required": [["A", "B"]], "forbidden": [["A", "B"]]}})");
  CHECK_THROWS_AS(parse_runspec(doc, "."), SchemaError);
}

TEST_CASE("config hash tracks settings and data, not output locations") {
  const auto a = parse_runspec(minimal_spec(), "/x");
  Json doc = minimal_spec();
  doc["output"] = {{"bundle", "elsewhere.json"}};
  const auto b = parse_runspec(doc, "/y");
  CHECK(a.config_hash("d1") == b.config_hash("d1"));
  CHECK(a.config_hash("d1") != a.config_hash("d2"));
  doc["learn"] = {{"seed", 99}};
  CHECK(parse_runspec(doc, "/y").config_hash("d1") != a.config_hash("d1"));
  CHECK(a.config_hash("d1").size() == 16);
}

TEST_CASE("published schema is the compiled-in one") {
  std::ifstream in(std::string(BNLAB_SOURCE_DIR) + "/docs/runspec.schema.json");
  CHECK(Json::parse(in) == runspec_schema());
}

TEST_CASE("schema validator subset") {
  const Json schema = Json::parse(R"({"type": "object", "properties": {
      "n": {"type": "integer", "minimum": 0, "maximum": 3},
      "x": {"type": "number", "exclusiveMinimum": 0},
      "s": {"type": ["string", "null"], "minLength": 2},
      "e": {"enum": ["a", 1]}}})");
  CHECK(schema_errors(Json::parse(R"({"n": 2, "x": 0.1, "s": null, "e": 1})"), schema).empty());
  CHECK(schema_errors(Json::parse(R"({"n": 2.0})"), schema).empty());
  CHECK(schema_errors(Json::parse(R"({"n": 2.5})"), schema).size() == 1);
  CHECK(schema_errors(Json::parse(R"({"n": 4})"), schema).size() == 1);
  CHECK(schema_errors(Json::parse(R"({"x": 0})"), schema).size() == 1);
  CHECK(schema_errors(Json::parse(R"({"s": "a"})"), schema).size() == 1);
  CHECK(schema_errors(Json::parse(R"({"e": "b"})"), schema).size() == 1);
  CHECK(schema_errors(Json::parse(R"({"other": true})"), schema).empty());
}

TEST_CASE("evidence parsing accepts both shapes") {
  auto a = evidence_from_json(Json::parse(R"({"Rain": "yes", "Wet": "no"})"));
  auto b = evidence_from_json(Json::parse(R"([{"variable": "Rain", "state": "yes"}, {"variable": "Wet", "state": "no"}])"));
  CHECK(a == b);
  CHECK(evidence_from_args({"Rain=yes", "Wet=no"}) == a);
  CHECK(evidence_from_args({"STREET1=Very Near"}).front().second == "Very Near");
  CHECK_THROWS_AS(evidence_from_args({"Rain"}), ContractError);
  CHECK_THROWS_AS(evidence_from_json(Json::parse(R"([{"variable": "Rain"}])")), SchemaError);
  CHECK_THROWS_AS(evidence_from_json(Json::parse(R"({"Rain": 1})")), SchemaError);
}

TEST_CASE("scenario file") {
  const auto f = scenarios_from_json(Json::parse(R"({"target": "Slip", "scenarios": [
      {"label": "dry", "evidence": {"Rain": "no", "Sprinkler": "off"}},
      {"label": "prior"}]})"));
  CHECK(f.target == "Slip");
  REQUIRE(f.scenarios.size() == 2);
  CHECK(f.scenarios[0].evidence.size() == 2);
  CHECK(f.scenarios[1].evidence.empty());
  CHECK_THROWS_WITH_AS(scenarios_from_json(Json::parse(R"({"scenarios": [{"label": "a"}, {"label": "a"}]})")),
                       doctest::Contains("duplicate"), SchemaError);
  CHECK_THROWS_AS(scenarios_from_json(Json::parse(R"({"scenarios": [{"evidence": {}}]})")), SchemaError);

  const auto fixture = load_scenarios(std::string(BNLAB_FIXTURE_DIR) + "/scenarios.json");
  CHECK(fixture.scenarios.size() == 7);
}

TEST_CASE("graph export: groups, strengths, stable order") {
  const auto b = models::lawn();
  const auto dot = graph_dot(b);
  CHECK(dot == graph_dot(b));
  CHECK(mentions(dot, "\"Wet\" [group=\"ground\""));
  CHECK(mentions(dot, "\"Sprinkler\" -> \"Wet\" [strength=\"0.7\""));
  CHECK(mentions(dot, "\"Rain\" -> \"Wet\" [strength=\"0.9\""));
  CHECK(dot.find("\"Rain\" [") < dot.find("\"Sprinkler\" ["));
  CHECK(dot.find("\"Rain\" -> \"Wet\"") < dot.find("\"Sprinkler\" -> \"Wet\""));

  const auto j = graph_json(b);
  CHECK(j.at("arcs").size() == 3);
  for (const auto& arc : j.at("arcs")) {
    auto f = b.edge_frequency(arc.at("parent").get<std::string>(), arc.at("child").get<std::string>());
    CHECK(arc.at("strength").get<double>() == f.value());
  }
  std::map<VarId, double> sens{{0, 0.25}, {2, 0.125}};
  CHECK(mentions(graph_dot(b, &sens), "\"Rain\" [group=\"weather\", fillcolor=\"#fb8072\", sensitivity=\"0.25\"]"));
  CHECK(graph_json(b, &sens).at("nodes")[2].at("sensitivity") == 0.125);
  CHECK_FALSE(graph_json(b, &sens).at("nodes")[1].contains("sensitivity"));
}

TEST_CASE("graph export of an arc-free network lists nodes only") {
  ModelBundle b;
  b.network = oracle::build({{"A", {"x", "y"}, {}, {0.5, 0.5}}, {"B", {"x", "y"}, {}, {0.1, 0.9}}});
  const auto dot = graph_dot(b);
  CHECK_FALSE(mentions(dot, "->"));
  CHECK(mentions(dot, "\"A\" [group=\"\"]"));
  CHECK(graph_json(b).at("arcs").empty());
  CHECK(graph_json(b).at("nodes").size() == 2);
}

TEST_CASE("dot quoting") {
  ModelBundle b;
  b.network = oracle::build({{"say \"hi\"", {"x", "y"}, {}, {0.5, 0.5}}});
  CHECK(mentions(graph_dot(b), "\"say \\\"hi\\\"\""));
}

TEST_CASE("tables") {
  const auto b = models::lawn();
  const auto& net = b.network;
  const VarId slip = net.index("Slip");
  std::ostringstream out;
  write_posterior_table(out, net, infer::posterior(net, slip));
  const auto text = out.str();
  CHECK(mentions(text, "state\tprobability\n"));
  CHECK(mentions(text, "\nbadly\t"));

  std::ostringstream scan;
  write_scan_table(scan, net, infer::evidence_scan(net, slip));
  CHECK(mentions(scan.str(), "variable\tstate\tdivergence\tno\tyes\tbadly\n"));

  std::ostringstream mpe;
  write_mpe_table(mpe, net, infer::mpe(net));
  CHECK(mentions(mpe.str(), "variable\tstate\nRain\t"));

  std::ostringstream rep;
  write_report_table(rep, sensitivity::mi_report(net, slip));
  CHECK(mentions(rep.str(), "subject\tscore\n"));
}
