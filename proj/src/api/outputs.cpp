#include "bnlab/outputs.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

#include "bnlab/error.hpp"
#include "bnlab/format.hpp"

namespace bnlab::api {

namespace {

Json number_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

const std::string& state_name(const BayesianNetwork& net, VarId v, StateId s) {
  return net.variable(v).states().at(s);
}

Json with_hash(const ModelBundle& b) { return Json{{"config_hash", b.provenance.config_hash}}; }

std::string group_of(const ModelBundle& b, VarId v) {
  return v < b.groups.size() ? b.groups[v] : std::string();
}

std::string dot_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace

NamedEvidence evidence_from_json(const Json& j, const std::string& where) {
  NamedEvidence ev;
  if (j.is_null()) return ev;
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (!v.is_string()) throw SchemaError(where + "." + k + ": state must be a string");
      ev.emplace_back(k, v.get<std::string>());
    }
    return ev;
  }
  if (!j.is_array()) throw SchemaError(where + ": expected an object or an array");
  for (std::size_t i = 0; i < j.size(); ++i) {
    const auto& item = j[i];
    const std::string at = where + "[" + std::to_string(i) + "]";
    if (!item.is_object() || !item.contains("variable") || !item.contains("state") ||
        !item.at("variable").is_string() || !item.at("state").is_string())
      throw SchemaError(at + ": expected {\"variable\": string, \"state\": string}");
    ev.emplace_back(item.at("variable").get<std::string>(), item.at("state").get<std::string>());
  }
  return ev;
}

NamedEvidence evidence_from_args(const std::vector<std::string>& tokens) {
  NamedEvidence ev;
  for (const auto& t : tokens) {
    auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == t.size())
      throw ContractError("evidence '" + t + "' is not of the form VAR=state");
    ev.emplace_back(t.substr(0, eq), t.substr(eq + 1));
  }
  return ev;
}

Json evidence_to_json(const NamedEvidence& ev) {
  Json j = Json::object();
  for (const auto& [v, s] : ev) j[v] = s;
  return j;
}

ScenarioFile scenarios_from_json(const Json& j) {
  if (!j.is_object()) throw SchemaError("scenarios file: expected an object");
  ScenarioFile f;
  if (j.contains("target")) {
    if (!j.at("target").is_string()) throw SchemaError("target: expected a string");
    f.target = j.at("target").get<std::string>();
  }
  if (!j.contains("scenarios") || !j.at("scenarios").is_array())
    throw SchemaError("scenarios: expected an array");
  const auto& arr = j.at("scenarios");
  std::set<std::string> seen;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string at = "scenarios[" + std::to_string(i) + "]";
    const auto& s = arr[i];
    if (!s.is_object() || !s.contains("label") || !s.at("label").is_string())
      throw SchemaError(at + ".label: expected a string");
    ScenarioDef d{s.at("label").get<std::string>(),
                  evidence_from_json(s.value("evidence", Json::object()), at + ".evidence")};
    if (!seen.insert(d.label).second) throw SchemaError(at + ".label: duplicate label '" + d.label + "'");
    f.scenarios.push_back(std::move(d));
  }
  return f;
}

ScenarioFile load_scenarios(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open scenarios file '" + path.string() + "'");
  try {
    return scenarios_from_json(Json::parse(in));
  } catch (const Json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
}

Json model_payload(const ModelBundle& b) {
  const auto& net = b.network;
  Json j = with_hash(b);
  j["schema_version"] = b.schema_version;
  Json vars = Json::array();
  for (VarId v = 0; v < net.size(); ++v)
    vars.push_back({{"name", net.variable(v).name()},
                    {"states", net.variable(v).states()},
                    {"group", group_of(b, v)}});
  j["variables"] = std::move(vars);
  Json arcs = Json::array();
  for (const auto& a : net.dag().arcs()) {
    Json arc{{"parent", net.variable(a.parent).name()}, {"child", net.variable(a.child).name()}};
    if (auto f = b.edge_frequency(net.variable(a.parent).name(), net.variable(a.child).name()))
      arc["strength"] = *f;
    arcs.push_back(std::move(arc));
  }
  j["arcs"] = std::move(arcs);
  std::set<std::string> groups;
  for (VarId v = 0; v < net.size(); ++v)
    if (!group_of(b, v).empty()) groups.insert(group_of(b, v));
  j["groups"] = groups;
  return j;
}

Json posterior_payload(const ModelBundle& b, const infer::Posterior& p, const NamedEvidence& ev) {
  const auto& var = b.network.variable(p.target);
  Json j = with_hash(b);
  if (!p.label.empty()) j["label"] = p.label;
  j["target"] = var.name();
  j["evidence"] = evidence_to_json(ev);
  j["states"] = var.states();
  j["probabilities"] = p.probabilities;
  j["evidence_probability"] = p.evidence_probability;
  j["log_evidence_probability"] = p.log_evidence_probability;
  return j;
}

Json mpe_payload(const ModelBundle& b, const infer::MpeResult& r, const NamedEvidence& ev) {
  const auto& net = b.network;
  Json j = with_hash(b);
  j["evidence"] = evidence_to_json(ev);
  Json a = Json::object();
  for (VarId v = 0; v < net.size(); ++v) a[net.variable(v).name()] = state_name(net, v, r.assignment[v]);
  j["assignment"] = std::move(a);
  j["probability"] = r.probability;
  j["log_probability"] = r.log_probability;
  return j;
}

Json scan_payload(const ModelBundle& b, const infer::ScanResult& r) {
  const auto& net = b.network;
  Json j = with_hash(b);
  j["target"] = net.variable(r.target).name();
  j["states"] = net.variable(r.target).states();
  j["marginal"] = r.marginal;
  Json rows = Json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"variable", net.variable(row.variable).name()},
                    {"state", state_name(net, row.variable, row.state)},
                    {"divergence", number_or_null(row.divergence)},
                    {"probabilities", row.posterior.probabilities}});
  j["rows"] = std::move(rows);
  Json imp = Json::array();
  for (const auto& [v, s] : r.impossible)
    imp.push_back({{"variable", net.variable(v).name()}, {"state", state_name(net, v, s)}});
  j["impossible"] = std::move(imp);
  return j;
}

Json tornado_payload(const ModelBundle& b, const sensitivity::Event& event, const NamedEvidence& ev,
                     double window, const std::vector<sensitivity::OneWay>& bars) {
  const auto& net = b.network;
  Json j = with_hash(b);
  j["target"] = net.variable(event.target).name();
  j["state"] = state_name(net, event.target, event.state);
  j["evidence"] = evidence_to_json(ev);
  j["window"] = window;
  if (!bars.empty()) j["baseline"] = bars.front().baseline;
  Json arr = Json::array();
  for (const auto& w : bars)
    arr.push_back({{"parameter", sensitivity::describe(net, w.handle)},
                   {"node", net.variable(w.handle.node).name()},
                   {"row", w.handle.row},
                   {"state", state_name(net, w.handle.node, w.handle.state)},
                   {"theta", w.handle.value},
                   {"lo_theta", w.lo_theta},
                   {"hi_theta", w.hi_theta},
                   {"low", w.low},
                   {"high", w.high},
                   {"width", w.width()}});
  j["bars"] = std::move(arr);
  return j;
}

Json report_payload(const ModelBundle& b, const sensitivity::SensitivityReport& r) {
  const auto& net = b.network;
  Json j = with_hash(b);
  j["kind"] = std::string(sensitivity::to_string(r.kind));
  if (r.target) j["target"] = net.variable(*r.target).name();
  if (r.target && r.target_state) j["state"] = state_name(net, *r.target, *r.target_state);
  Json entries = Json::array();
  for (const auto& e : r.entries) {
    Json aux = Json::object();
    for (const auto& [k, v] : e.aux) aux[k] = number_or_null(v);
    entries.push_back({{"subject", e.subject}, {"score", number_or_null(e.score)}, {"aux", std::move(aux)}});
  }
  j["entries"] = std::move(entries);
  return j;
}

Json error_payload(const ModelBundle* b, const std::string& kind, const std::string& message,
                   const std::vector<std::pair<std::string, std::string>>& fields,
                   const std::vector<std::pair<std::string, std::string>>& culprits) {
  Json j = b ? with_hash(*b) : Json::object();
  Json err{{"kind", kind}, {"message", message}};
  if (!fields.empty()) {
    Json f = Json::array();
    for (const auto& [field, msg] : fields) f.push_back({{"field", field}, {"message", msg}});
    err["fields"] = std::move(f);
  }
  if (!culprits.empty()) {
    Json c = Json::array();
    for (const auto& [v, s] : culprits) c.push_back({{"variable", v}, {"state", s}});
    err["culprits"] = std::move(c);
  }
  j["error"] = std::move(err);
  return j;
}

void write_posterior_table(std::ostream& out, const BayesianNetwork& net, const infer::Posterior& p) {
  out << "# target=" << net.variable(p.target).name()
      << " log_evidence_probability=" << format_number(p.log_evidence_probability) << '\n';
  out << "state\tprobability\n";
  for (StateId s = 0; s < p.probabilities.size(); ++s)
    out << state_name(net, p.target, s) << '\t' << format_number(p.probabilities[s]) << '\n';
}

void write_mpe_table(std::ostream& out, const BayesianNetwork& net, const infer::MpeResult& r) {
  out << "# probability=" << format_number(r.probability)
      << " log_probability=" << format_number(r.log_probability) << '\n';
  out << "variable\tstate\n";
  for (VarId v = 0; v < net.size(); ++v)
    out << net.variable(v).name() << '\t' << state_name(net, v, r.assignment[v]) << '\n';
}

void write_scan_table(std::ostream& out, const BayesianNetwork& net, const infer::ScanResult& r) {
  const auto& target = net.variable(r.target);
  out << "# target=" << target.name() << " marginal=";
  for (std::size_t s = 0; s < r.marginal.size(); ++s) out << (s ? "," : "") << format_number(r.marginal[s]);
  out << '\n' << "variable\tstate\tdivergence";
  for (const auto& s : target.states()) out << '\t' << s;
  out << '\n';
  for (const auto& row : r.rows) {
    out << net.variable(row.variable).name() << '\t' << state_name(net, row.variable, row.state) << '\t'
        << format_number(row.divergence);
    for (double p : row.posterior.probabilities) out << '\t' << format_number(p);
    out << '\n';
  }
  for (const auto& [v, s] : r.impossible)
    out << "# impossible " << net.variable(v).name() << '=' << state_name(net, v, s) << '\n';
}

void write_scenario_table(std::ostream& out, const BayesianNetwork& net,
                          const std::vector<infer::Posterior>& results) {
  if (results.empty()) return;
  const auto& target = net.variable(results.front().target);
  out << "# target=" << target.name() << '\n' << "scenario";
  for (const auto& s : target.states()) out << '\t' << s;
  out << "\tp_evidence\n";
  for (const auto& p : results) {
    out << p.label;
    for (double x : p.probabilities) out << '\t' << format_number(x);
    out << '\t' << format_number(p.evidence_probability) << '\n';
  }
}

void write_report_table(std::ostream& out, const sensitivity::SensitivityReport& r) {
  out << "subject\tscore";
  if (!r.entries.empty())
    for (const auto& [k, v] : r.entries.front().aux) out << '\t' << k;
  out << '\n';
  for (const auto& e : r.entries) {
    out << e.subject << '\t' << format_number(e.score);
    for (const auto& [k, v] : e.aux) out << '\t' << format_number(v);
    out << '\n';
  }
}

std::string graph_dot(const ModelBundle& b, const std::map<VarId, double>* sensitivity) {
  static const char* palette[] = {"#8dd3c7", "#ffffb3", "#bebada", "#fb8072",
                                  "#80b1d3", "#fdb462", "#b3de69", "#fccde5"};
  const auto& net = b.network;
  std::set<std::string> groups;
  for (VarId v = 0; v < net.size(); ++v)
    if (!group_of(b, v).empty()) groups.insert(group_of(b, v));
  std::map<std::string, std::size_t> color;
  for (const auto& g : groups) color.emplace(g, color.size());

  std::ostringstream out;
  out << "digraph bnlab {\n"
      << "  graph [config_hash=" << dot_quote(b.provenance.config_hash) << "];\n"
      << "  node [shape=ellipse, style=filled, fillcolor=\"#ffffff\"];\n";
  for (VarId v = 0; v < net.size(); ++v) {
    const auto g = group_of(b, v);
    out << "  " << dot_quote(net.variable(v).name()) << " [group=" << dot_quote(g);
    if (!g.empty()) out << ", fillcolor=" << dot_quote(palette[color.at(g) % std::size(palette)]);
    if (sensitivity)
      if (auto it = sensitivity->find(v); it != sensitivity->end())
        out << ", sensitivity=" << dot_quote(format_number(it->second));
    out << "];\n";
  }
  for (const auto& a : net.dag().arcs()) {
    const auto& p = net.variable(a.parent).name();
    const auto& c = net.variable(a.child).name();
    out << "  " << dot_quote(p) << " -> " << dot_quote(c);
    if (auto f = b.edge_frequency(p, c))
      out << " [strength=" << dot_quote(format_number(*f)) << ", penwidth="
          << dot_quote(format_number(0.5 + 2.5 * *f)) << "]";
    out << ";\n";
  }
  out << "}\n";
  return out.str();
}

Json graph_json(const ModelBundle& b, const std::map<VarId, double>* sensitivity) {
  const auto& net = b.network;
  Json j = with_hash(b);
  Json nodes = Json::array();
  for (VarId v = 0; v < net.size(); ++v) {
    Json n{{"name", net.variable(v).name()}, {"group", group_of(b, v)}, {"states", net.variable(v).states()}};
    if (sensitivity)
      if (auto it = sensitivity->find(v); it != sensitivity->end()) n["sensitivity"] = it->second;
    nodes.push_back(std::move(n));
  }
  j["nodes"] = std::move(nodes);
  Json arcs = Json::array();
  for (const auto& a : net.dag().arcs()) {
    Json arc{{"parent", net.variable(a.parent).name()}, {"child", net.variable(a.child).name()}};
    if (auto f = b.edge_frequency(net.variable(a.parent).name(), net.variable(a.child).name()))
      arc["strength"] = *f;
    arcs.push_back(std::move(arc));
  }
  j["arcs"] = std::move(arcs);
  return j;
}

}  // namespace bnlab::api
