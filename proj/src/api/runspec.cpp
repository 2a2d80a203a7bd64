#include <fstream>
#include <sstream>

#include "bnlab/error.hpp"
#include "bnlab/format.hpp"
#include "bnlab/runspec.hpp"

namespace bnlab::api {

namespace fs = std::filesystem;

namespace {

data::Cell cell_of(const Json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_boolean()) return v.get<bool>();
  return v.get<std::string>();
}

data::FilterOp filter_op(const std::string& s) {
  static const std::map<std::string, data::FilterOp> ops{
      {"lt", data::FilterOp::lt}, {"le", data::FilterOp::le}, {"gt", data::FilterOp::gt},
      {"ge", data::FilterOp::ge}, {"eq", data::FilterOp::eq}, {"ne", data::FilterOp::ne},
      {"in", data::FilterOp::in}, {"not_in", data::FilterOp::not_in}};
  return ops.at(s);
}

data::RuleKind rule_kind(const std::string& s) {
  static const std::map<std::string, data::RuleKind> kinds{
      {"quantile", data::RuleKind::quantile},
      {"categorical", data::RuleKind::categorical},
      {"boolean", data::RuleKind::boolean},
      {"frequency_rank", data::RuleKind::frequency_rank}};
  return kinds.at(s);
}

spatial::FeatureKind feature_kind(const std::string& s) {
  if (s == "distance_to_point") return spatial::FeatureKind::distance_to_point;
  if (s == "distance_to_polyline") return spatial::FeatureKind::distance_to_polyline;
  return spatial::FeatureKind::nearest_centroid;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

std::vector<std::pair<std::string, std::string>> pairs(const Json& arr) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& p : arr) out.emplace_back(p[0].get<std::string>(), p[1].get<std::string>());
  return out;
}

// Semantic checks the schema cannot express. Paths name the offending field.
void check_columns(const RunSpec& spec) {
  std::set<std::string> names;
  for (std::size_t i = 0; i < spec.discretize.columns.size(); ++i) {
    const auto& c = spec.discretize.columns[i];
    const std::string at = "/discretize/columns/" + std::to_string(i);
    if (!names.insert(c.name).second) throw SchemaError(at + "/name: duplicate variable '" + c.name + "'");
    if (c.kind == data::RuleKind::quantile) {
      if (c.k < 2) throw SchemaError(at + "/k: quantile rule needs k >= 2");
      if (!c.labels.empty() && c.labels.size() != c.k)
        throw SchemaError(at + "/labels: expected " + std::to_string(c.k) + " labels");
    }
    if (c.kind == data::RuleKind::boolean && !c.labels.empty() && c.labels.size() != 2)
      throw SchemaError(at + "/labels: boolean rule takes exactly two labels");
  }
  for (std::size_t i = 0; i < spec.discretize.filters.size(); ++i) {
    const auto& f = spec.discretize.filters[i];
    const std::string at = "/discretize/filters/" + std::to_string(i);
    const bool set_op = f.op == data::FilterOp::in || f.op == data::FilterOp::not_in;
    if (set_op && f.values.empty()) throw SchemaError(at + "/values: required for set membership");
    if (!set_op && data::is_missing(f.value) && !f.other_column)
      throw SchemaError(at + ": needs 'value' or 'other_column'");
  }
}

}  // namespace

learn::Constraints NamedConstraints::resolve(const std::vector<std::string>& nodes) const {
  auto id = [&](const std::string& name, const std::string& where) -> VarId {
    for (VarId v = 0; v < nodes.size(); ++v)
      if (nodes[v] == name) return v;
    throw SchemaError(where + ": unknown variable '" + name + "'");
  };
  learn::Constraints c;
  for (const auto& n : no_outgoing) c.no_outgoing.insert(id(n, "/learn/constraints/no_outgoing"));
  for (const auto& [a, b] : forbidden)
    c.forbidden.insert({id(a, "/learn/constraints/forbidden"), id(b, "/learn/constraints/forbidden")});
  for (const auto& [a, b] : required) {
    VarId p = id(a, "/learn/constraints/required"), ch = id(b, "/learn/constraints/required");
    if (!c.allows(p, ch))
      throw SchemaError("/learn/constraints/required: arc " + a + " -> " + b + " is also prohibited");
    c.required.insert({p, ch});
  }
  const std::vector<Arc> req(c.required.begin(), c.required.end());
  if (auto cycle = find_cycle(nodes.size(), req); !cycle.empty()) {
    std::string msg = "required arcs form a cycle:";
    for (const auto& a : cycle) msg += " " + nodes[a.parent] + "->" + nodes[a.child];
    throw StructuralError(msg);
  }
  return c;
}

std::string RunSpec::config_hash(std::string_view data_digest) const {
  Json canon = Json::object();
  for (const char* key : {"discretize", "geo", "learn"})
    canon[key] = document.contains(key) ? document.at(key) : Json();
  return hex64(fnv1a64(data_digest, fnv1a64(canon.dump())));
}

RunSpec parse_runspec(const Json& doc, const fs::path& base_dir) {
  const auto errs = schema_errors(doc, runspec_schema());
  if (!errs.empty()) {
    std::string msg = "invalid run specification:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw SchemaError(msg);
  }
  RunSpec s;
  s.document = doc;
  s.base_dir = base_dir;

  const auto& in = doc.at("input");
  s.input = resolve(base_dir, in.at("path").get<std::string>());
  if (in.contains("delimiter")) s.delimiter = in.at("delimiter").get<std::string>()[0];

  if (doc.contains("geo")) {
    const auto& g = doc.at("geo");
    GeoSettings geo;
    geo.layers = resolve(base_dir, g.at("layers").get<std::string>());
    if (g.contains("latitude")) geo.coordinates.latitude = g.at("latitude").get<std::string>();
    if (g.contains("longitude")) geo.coordinates.longitude = g.at("longitude").get<std::string>();
    if (g.contains("boundary")) geo.boundary = g.at("boundary").get<std::string>();
    for (std::size_t i = 0; g.contains("features") && i < g.at("features").size(); ++i) {
      const auto& f = g.at("features")[i];
      spatial::FeatureSpec fs{f.at("name").get<std::string>(), feature_kind(f.at("kind").get<std::string>()),
                              f.value("layer", std::string())};
      if (fs.kind != spatial::FeatureKind::nearest_centroid && fs.layer.empty())
        throw SchemaError("/geo/features/" + std::to_string(i) + "/layer: required for distance features");
      geo.features.push_back(std::move(fs));
    }
    s.geo = std::move(geo);
  }

  const auto& d = doc.at("discretize");
  s.discretize.iqr_factor = d.value("iqr_factor", 2.0);
  if (d.contains("dedup_keys")) s.discretize.dedup_keys = d.at("dedup_keys").get<std::vector<std::string>>();
  if (d.contains("filters"))
    for (const auto& f : d.at("filters")) {
      data::RowFilter rf;
      rf.column = f.at("column").get<std::string>();
      rf.op = filter_op(f.at("op").get<std::string>());
      if (f.contains("value")) rf.value = cell_of(f.at("value"));
      if (f.contains("other_column")) rf.other_column = f.at("other_column").get<std::string>();
      if (f.contains("values"))
        for (const auto& v : f.at("values")) rf.values.push_back(cell_of(v));
      s.discretize.filters.push_back(std::move(rf));
    }
  for (const auto& c : d.at("columns")) {
    data::ColumnRule r;
    r.name = c.at("name").get<std::string>();
    r.source = c.value("source", r.name);
    r.kind = rule_kind(c.at("rule").get<std::string>());
    r.k = c.value("k", std::size_t{0});
    if (c.contains("labels")) r.labels = c.at("labels").get<std::vector<std::string>>();
    r.iqr = c.value("iqr", true);
    r.group = c.value("group", std::string());
    s.discretize.columns.push_back(std::move(r));
  }
  check_columns(s);

  if (doc.contains("learn")) {
    const auto& l = doc.at("learn");
    s.learn.seed = l.value("seed", s.learn.seed);
    s.learn.tabu_tenure = l.value("tabu_tenure", s.learn.tabu_tenure);
    s.learn.max_non_improving = l.value("max_non_improving", s.learn.max_non_improving);
    s.learn.max_parents = l.value("max_parents", s.learn.max_parents);
    s.alpha = l.value("alpha", s.alpha);
    if (l.contains("bootstrap")) {
      const auto& b = l.at("bootstrap");
      s.bootstrap.replicates = b.value("replicates", s.bootstrap.replicates);
      s.bootstrap.threshold = b.value("threshold", s.bootstrap.threshold);
    }
    if (l.contains("constraints")) {
      const auto& c = l.at("constraints");
      if (c.contains("no_outgoing")) s.constraints.no_outgoing = c.at("no_outgoing").get<std::vector<std::string>>();
      if (c.contains("forbidden")) s.constraints.forbidden = pairs(c.at("forbidden"));
      if (c.contains("required")) s.constraints.required = pairs(c.at("required"));
    }
  }
  std::vector<std::string> names;
  for (const auto& c : s.discretize.columns) names.push_back(c.name);
  s.learn.constraints = s.constraints.resolve(names);

  const Json out = doc.value("output", Json::object());
  s.dataset_out = resolve(base_dir, out.value("dataset", std::string("dataset.csv")));
  s.encoding_out = resolve(base_dir, out.value("encoding", std::string("encoding.json")));
  s.bundle_out = resolve(base_dir, out.value("bundle", std::string("model.json")));
  s.edges_out = resolve(base_dir, out.value("edges", std::string("edges.txt")));
  if (doc.contains("scenarios")) s.scenarios = resolve(base_dir, doc.at("scenarios").get<std::string>());
  return s;
}

RunSpec load_runspec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open run specification '" + path.string() + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return parse_runspec(doc, path.parent_path());
}

}  // namespace bnlab::api
