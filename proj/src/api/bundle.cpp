#include "bnlab/bundle.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "bnlab/error.hpp"

namespace bnlab::api {

namespace {

const Json& field(const Json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(where + ": missing field '" + key + "'");
  return j.at(key);
}

template <class T>
T get(const Json& j, const char* key, const std::string& where) {
  try {
    return field(j, key, where).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(where + "." + key + ": " + e.what());
  }
}

Json edges_to_json(const data::BinEdges& e) {
  return Json{{"column", e.column}, {"cuts", e.cuts}, {"labels", e.labels}};
}

data::BinEdges edges_from_json(const Json& j) {
  data::BinEdges e;
  e.column = get<std::string>(j, "column", "bin_edges");
  e.cuts = get<std::vector<double>>(j, "cuts", "bin_edges");
  e.labels = get<std::vector<std::string>>(j, "labels", "bin_edges");
  if (e.labels.size() != e.cuts.size() + 1)
    throw SchemaError("bin_edges." + e.column + ": need one more label than cut points");
  if (!std::is_sorted(e.cuts.begin(), e.cuts.end()))
    throw SchemaError("bin_edges." + e.column + ": cut points must be non-decreasing");
  return e;
}

}  // namespace

std::optional<double> ModelBundle::edge_frequency(const std::string& a, const std::string& b) const {
  for (const auto& e : edges)
    if ((e.parent == a && e.child == b) || (e.parent == b && e.child == a)) return e.frequency;
  return std::nullopt;
}

std::vector<EdgeFrequency> edge_frequencies(const learn::BootstrapResult& result) {
  std::vector<EdgeFrequency> out;
  for (const auto& t : result.edges) {
    bool forward = t.a_to_b > t.b_to_a ||
                   (t.a_to_b == t.b_to_a && result.nodes[t.a] < result.nodes[t.b]);
    EdgeFrequency e;
    e.parent = result.nodes[forward ? t.a : t.b];
    e.child = result.nodes[forward ? t.b : t.a];
    e.frequency = t.frequency;
    e.forward = forward ? t.a_to_b : t.b_to_a;
    e.backward = forward ? t.b_to_a : t.a_to_b;
    e.direction_fraction = static_cast<double>(e.forward) / static_cast<double>(t.total());
    out.push_back(std::move(e));
  }
  return out;
}

Json to_json(const ModelBundle& b) {
  const auto& net = b.network;
  Json j;
  j["schema_version"] = b.schema_version;

  Json vars = Json::array();
  for (VarId v = 0; v < net.size(); ++v) {
    Json var{{"name", net.variable(v).name()}, {"states", net.variable(v).states()}};
    if (v < b.groups.size() && !b.groups[v].empty()) var["group"] = b.groups[v];
    vars.push_back(std::move(var));
  }
  j["variables"] = std::move(vars);

  Json arcs = Json::array();
  for (const auto& a : net.dag().arcs()) arcs.push_back({net.variable(a.parent).name(), net.variable(a.child).name()});
  j["arcs"] = std::move(arcs);

  Json cpts = Json::array();
  for (VarId v = 0; v < net.size(); ++v) {
    const Cpt& c = net.cpt(v);
    Json parents = Json::array();
    for (VarId p : c.parents()) parents.push_back(net.variable(p).name());
    Json table = Json::array();
    for (std::size_t r = 0; r < c.rows(); ++r) {
      auto row = c.row(r);
      table.push_back(std::vector<double>(row.begin(), row.end()));
    }
    cpts.push_back(Json{{"variable", net.variable(v).name()}, {"parents", std::move(parents)}, {"table", std::move(table)}});
  }
  j["cpts"] = std::move(cpts);

  Json edges = Json::array();
  for (const auto& e : b.bin_edges) edges.push_back(edges_to_json(e));
  j["bin_edges"] = std::move(edges);

  Json ranks = Json::object();
  for (const auto& [col, m] : b.rank_maps) {
    Json mj = Json::object();
    for (const auto& [k, v] : m) mj[k] = v;
    ranks[col] = std::move(mj);
  }
  j["rank_maps"] = std::move(ranks);

  Json boot = Json::array();
  for (const auto& e : b.edges)
    boot.push_back(Json{{"parent", e.parent},
                        {"child", e.child},
                        {"frequency", e.frequency},
                        {"direction_fraction", e.direction_fraction},
                        {"forward", e.forward},
                        {"backward", e.backward}});
  j["bootstrap_edges"] = std::move(boot);

  const auto& p = b.provenance;
  Json prov{{"seed", p.seed},
            {"config_hash", p.config_hash},
            {"data_digest", p.data_digest},
            {"replicates", p.replicates},
            {"threshold", p.threshold}};
  if (p.created) prov["created"] = *p.created;
  for (const auto& [k, v] : p.extra.items()) prov[k] = v;
  j["provenance"] = std::move(prov);

  for (const auto& [k, v] : b.extra.items()) j[k] = v;
  return j;
}

ModelBundle bundle_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("bundle: top level must be an object");
  ModelBundle b;
  b.schema_version = get<int>(j, "schema_version", "bundle");
  if (b.schema_version > kBundleSchemaVersion || b.schema_version < 1)
    throw SchemaError("bundle: unsupported schema_version " + std::to_string(b.schema_version));

  std::vector<DiscreteVariable> vars;
  std::vector<std::string> names;
  for (const auto& v : field(j, "variables", "bundle")) {
    vars.emplace_back(get<std::string>(v, "name", "variables"), get<std::vector<std::string>>(v, "states", "variables"));
    names.push_back(vars.back().name());
    b.groups.push_back(v.contains("group") ? v.at("group").get<std::string>() : std::string());
  }
  Dag dag(names);
  auto index = [&](const std::string& n) { return dag.index(n); };
  std::vector<Arc> arcs;
  for (const auto& a : field(j, "arcs", "bundle")) {
    if (!a.is_array() || a.size() != 2) throw SchemaError("arcs: each arc is [parent, child]");
    arcs.push_back({index(a[0].get<std::string>()), index(a[1].get<std::string>())});
  }
  dag = Dag(names, arcs);

  std::vector<Cpt> cpts;
  for (const auto& c : field(j, "cpts", "bundle")) {
    VarId v = index(get<std::string>(c, "variable", "cpts"));
    std::vector<VarId> parents;
    std::vector<std::size_t> cards;
    for (const auto& p : field(c, "parents", "cpts")) {
      parents.push_back(index(p.get<std::string>()));
      cards.push_back(vars[parents.back()].cardinality());
    }
    std::vector<double> table;
    for (const auto& row : field(c, "table", "cpts")) {
      auto r = row.get<std::vector<double>>();
      table.insert(table.end(), r.begin(), r.end());
    }
    cpts.emplace_back(v, vars[v].cardinality(), std::move(parents), std::move(cards), std::move(table));
  }
  b.network = BayesianNetwork(std::move(vars), std::move(dag), std::move(cpts));

  if (j.contains("bin_edges"))
    for (const auto& e : j.at("bin_edges")) b.bin_edges.push_back(edges_from_json(e));
  if (j.contains("rank_maps"))
    for (const auto& [col, m] : j.at("rank_maps").items())
      for (const auto& [k, v] : m.items()) b.rank_maps[col][k] = v.get<std::string>();
  if (j.contains("bootstrap_edges"))
    for (const auto& e : j.at("bootstrap_edges")) {
      EdgeFrequency f;
      f.parent = get<std::string>(e, "parent", "bootstrap_edges");
      f.child = get<std::string>(e, "child", "bootstrap_edges");
      f.frequency = get<double>(e, "frequency", "bootstrap_edges");
      f.direction_fraction = get<double>(e, "direction_fraction", "bootstrap_edges");
      f.forward = get<std::size_t>(e, "forward", "bootstrap_edges");
      f.backward = get<std::size_t>(e, "backward", "bootstrap_edges");
      b.edges.push_back(std::move(f));
    }
  if (j.contains("provenance")) {
    const auto& p = j.at("provenance");
    static const char* known[] = {"seed", "config_hash", "data_digest", "replicates", "threshold", "created"};
    b.provenance.seed = get<std::uint64_t>(p, "seed", "provenance");
    b.provenance.config_hash = get<std::string>(p, "config_hash", "provenance");
    b.provenance.data_digest = p.value("data_digest", std::string());
    b.provenance.replicates = p.value("replicates", std::size_t{0});
    b.provenance.threshold = p.value("threshold", 0.5);
    if (p.contains("created")) b.provenance.created = p.at("created").get<std::string>();
    for (const auto& [k, v] : p.items())
      if (std::find_if(std::begin(known), std::end(known), [&](const char* s) { return k == s; }) == std::end(known))
        b.provenance.extra[k] = v;
  }
  static const char* top[] = {"schema_version", "variables", "arcs", "cpts", "bin_edges",
                              "rank_maps", "bootstrap_edges", "provenance"};
  for (const auto& [k, v] : j.items())
    if (std::find_if(std::begin(top), std::end(top), [&](const char* s) { return k == s; }) == std::end(top))
      b.extra[k] = v;
  return b;
}

void save_bundle(const ModelBundle& bundle, std::ostream& out) { out << to_json(bundle).dump(2) << '\n'; }

void save_bundle(const ModelBundle& bundle, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write bundle '" + path + "'");
  save_bundle(bundle, out);
}

ModelBundle load_bundle(std::istream& in) {
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bundle is not valid JSON: ") + e.what());
  }
  return bundle_from_json(j);
}

ModelBundle load_bundle(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read bundle '" + path + "'");
  return load_bundle(in);
}

Json encoding_to_json(const data::Encoding& enc) {
  Json vars = Json::array();
  for (std::size_t i = 0; i < enc.variables.size(); ++i) {
    Json v{{"name", enc.variables[i].name()}, {"states", enc.variables[i].states()}};
    if (i < enc.groups.size() && !enc.groups[i].empty()) v["group"] = enc.groups[i];
    vars.push_back(std::move(v));
  }
  Json edges = Json::array();
  for (const auto& e : enc.edges) edges.push_back(edges_to_json(e));
  Json ranks = Json::object();
  for (const auto& [col, m] : enc.rank_maps) {
    Json mj = Json::object();
    for (const auto& [k, v] : m) mj[k] = v;
    ranks[col] = std::move(mj);
  }
  return Json{{"variables", std::move(vars)}, {"bin_edges", std::move(edges)}, {"rank_maps", std::move(ranks)}};
}

data::Encoding encoding_from_json(const Json& j) {
  data::Encoding enc;
  for (const auto& v : field(j, "variables", "encoding")) {
    enc.variables.emplace_back(get<std::string>(v, "name", "encoding"),
                               get<std::vector<std::string>>(v, "states", "encoding"));
    enc.groups.push_back(v.value("group", std::string()));
  }
  for (const auto& e : field(j, "bin_edges", "encoding")) enc.edges.push_back(edges_from_json(e));
  for (const auto& [col, m] : field(j, "rank_maps", "encoding").items())
    for (const auto& [k, v] : m.items()) enc.rank_maps[col][k] = v.get<std::string>();
  return enc;
}

}  // namespace bnlab::api
