#include "bnlab/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

#include "bnlab/error.hpp"
#include "bnlab/format.hpp"
#include "bnlab/outputs.hpp"
#include "bnlab/runspec.hpp"
#include "bnlab/service.hpp"

namespace bnlab::cli {

namespace {

using api::Json;
using api::NamedEvidence;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read '" + path + "'");
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw Error("cannot write '" + path + "'");
}

// Writes to --out when given, else to the command's stdout.
struct Sink {
  std::ostream& out;
  std::string path;

  void emit(const std::string& text) const {
    if (path.empty())
      out << text;
    else
      write_file(path, text);
  }
};

std::string utc_timestamp() {
  std::time_t t;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"))
    t = static_cast<std::time_t>(std::strtoll(epoch, nullptr, 10));
  else
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

VarId variable_named(const BayesianNetwork& net, const std::string& name) {
  if (auto v = net.find(name)) return *v;
  std::string valid;
  for (VarId v = 0; v < net.size(); ++v) valid += (v ? ", " : "") + net.variable(v).name();
  throw ContractError("unknown variable '" + name + "'; valid variables: " + valid);
}

// ---------------------------------------------------------------------------

struct DiscretizeOpts {
  std::string spec, dataset, encoding;
};

int cmd_discretize(const DiscretizeOpts& o, std::ostream& out) {
  const auto spec = api::load_runspec(o.spec);
  auto table = data::read_delimited_file(spec.input.string(), spec.delimiter);
  std::size_t outside = 0;
  if (spec.geo) {
    const auto layers = spatial::load_layers(spec.geo->layers.string());
    if (spec.geo->boundary) {
      auto it = layers.polygons.find(*spec.geo->boundary);
      if (it == layers.polygons.end())
        throw SchemaError("/geo/boundary: no polygon named '" + *spec.geo->boundary + "' in layers");
      auto mask = spatial::inside_boundary(table, it->second, spec.geo->coordinates);
      outside = static_cast<std::size_t>(std::count(mask.begin(), mask.end(), false));
      table = table.select(mask);
    }
    spatial::add_features(table, spec.geo->features, layers, spec.geo->coordinates);
  }
  for (std::size_t i = 0; i < spec.discretize.columns.size(); ++i) {
    const auto& c = spec.discretize.columns[i];
    if (!table.find(c.source))
      throw SchemaError("/discretize/columns/" + std::to_string(i) + " (variable '" + c.name + "', rule " +
                        spec.document.at("discretize").at("columns")[i].at("rule").get<std::string>() +
                        "): column '" + c.source + "' not found in input");
  }
  auto result = data::encode_dataset(table, spec.discretize);

  std::ostringstream ds;
  data::write_dataset(ds, result.dataset);
  const std::string dataset_path = o.dataset.empty() ? spec.dataset_out.string() : o.dataset;
  const std::string encoding_path = o.encoding.empty() ? spec.encoding_out.string() : o.encoding;
  write_file(dataset_path, ds.str());
  write_file(encoding_path, api::encoding_to_json(result.encoding).dump(2) + "\n");

  const auto& r = result.report;
  out << "# cleaning report\n"
      << "stage\trows\n"
      << "input\t" << r.input_rows + outside << '\n';
  if (spec.geo && spec.geo->boundary) out << "outside_boundary\t" << outside << '\n';
  out << "duplicates\t" << r.dropped_duplicates << '\n' << "missing\t" << r.dropped_missing << '\n';
  for (const auto& [what, n] : r.dropped_by_filter) out << "filter " << what << '\t' << n << '\n';
  out << "outliers\t" << r.dropped_outliers << '\n'
      << "output\t" << r.output_rows << '\n'
      << "# dataset_digest=" << hex64(fnv1a64(ds.str())) << '\n';
  return kExitOk;
}

struct LearnOpts {
  std::string spec, dataset, encoding, bundle, edges;
  bool timestamp = false;
  bool serial = false;
};

int cmd_learn(const LearnOpts& o, std::ostream& out) {
  const auto spec = api::load_runspec(o.spec);
  const std::string dataset_path = o.dataset.empty() ? spec.dataset_out.string() : o.dataset;
  const std::string encoding_path = o.encoding.empty() ? spec.encoding_out.string() : o.encoding;
  const auto encoding = api::encoding_from_json(Json::parse(read_file(encoding_path)));
  const std::string text = read_file(dataset_path);
  std::istringstream in(text);
  const auto dataset = data::read_dataset(in, encoding.variables);

  auto config = spec.learn;
  config.constraints = spec.constraints.resolve(dataset.names());
  auto boot = o.serial ? learn::bootstrap_consensus_serial(dataset, spec.bootstrap, config)
                       : learn::bootstrap_consensus(dataset, spec.bootstrap, config);

  api::ModelBundle b;
  b.network = learn::fit_parameters(boot.consensus, dataset, spec.alpha);
  for (const auto& v : dataset.variables()) {
    auto it = std::find_if(encoding.variables.begin(), encoding.variables.end(),
                           [&](const DiscreteVariable& e) { return e.name() == v.name(); });
    b.groups.push_back(encoding.groups.at(static_cast<std::size_t>(it - encoding.variables.begin())));
  }
  b.bin_edges = encoding.edges;
  b.rank_maps = encoding.rank_maps;
  b.edges = api::edge_frequencies(boot);
  b.provenance.seed = config.seed;
  b.provenance.data_digest = hex64(fnv1a64(text));
  b.provenance.config_hash = spec.config_hash(b.provenance.data_digest);
  b.provenance.replicates = boot.replicates;
  b.provenance.threshold = boot.threshold;
  if (o.timestamp || std::getenv("SOURCE_DATE_EPOCH")) b.provenance.created = utc_timestamp();

  const std::string bundle_path = o.bundle.empty() ? spec.bundle_out.string() : o.bundle;
  const std::string edges_path = o.edges.empty() ? spec.edges_out.string() : o.edges;
  std::ostringstream bs, es;
  api::save_bundle(b, bs);
  learn::write_edge_table(es, boot);
  write_file(bundle_path, bs.str());
  write_file(edges_path, es.str());
  out << "# config_hash=" << b.provenance.config_hash << " replicates=" << boot.replicates
      << " arcs=" << boot.consensus.arc_count() << '\n';
  for (const auto& a : boot.consensus.arcs())
    out << boot.nodes[a.parent] << " -> " << boot.nodes[a.child] << '\t'
        << format_number(boot.frequency(a.parent, a.child)) << '\n';
  return kExitOk;
}

struct QueryOpts {
  std::string bundle, target, format = "tsv", out, scenarios, kind, state, export_format = "dot";
  std::vector<std::string> evidence;
  std::size_t top_k = 10;
  double window = sensitivity::kDefaultWindow;
  std::string sensitivity_target;
  std::string host = "127.0.0.1";
  int port = 8080;
};

struct Loaded {
  api::ModelBundle bundle;
  NamedEvidence named;
  infer::Evidence ev;
};

Loaded load(const QueryOpts& o) {
  Loaded l{api::load_bundle(o.bundle), api::evidence_from_args(o.evidence), {}};
  for (const auto& [v, s] : l.named) variable_named(l.bundle.network, v);
  l.ev = infer::Evidence(l.bundle.network, l.named);
  return l;
}

int cmd_query(const QueryOpts& o, std::ostream& out) {
  auto l = load(o);
  const auto& net = l.bundle.network;
  VarId t = variable_named(net, o.target);
  auto p = infer::scenario(net, t, l.ev);
  std::ostringstream s;
  if (o.format == "json")
    s << api::posterior_payload(l.bundle, p, l.named).dump(2) << '\n';
  else
    api::write_posterior_table(s, net, p);
  Sink{out, o.out}.emit(s.str());
  return kExitOk;
}

int cmd_mpe(const QueryOpts& o, std::ostream& out) {
  auto l = load(o);
  const auto& net = l.bundle.network;
  infer::MpeResult r;
  try {
    r = infer::mpe(net, l.ev);
  } catch (const ImpossibleEvidence& e) {
    throw ImpossibleEvidence(e.what(), infer::impossible_culprits(net, l.ev));
  }
  std::ostringstream s;
  if (o.format == "json")
    s << api::mpe_payload(l.bundle, r, l.named).dump(2) << '\n';
  else
    api::write_mpe_table(s, net, r);
  Sink{out, o.out}.emit(s.str());
  return kExitOk;
}

int cmd_scan(const QueryOpts& o, std::ostream& out) {
  auto l = load(o);
  const auto& net = l.bundle.network;
  auto r = infer::evidence_scan(net, variable_named(net, o.target));
  std::ostringstream s;
  if (o.format == "json")
    s << api::scan_payload(l.bundle, r).dump(2) << '\n';
  else
    api::write_scan_table(s, net, r);
  Sink{out, o.out}.emit(s.str());
  return kExitOk;
}

int cmd_scenario(const QueryOpts& o, std::ostream& out, std::ostream& err) {
  auto l = load(o);
  const auto& net = l.bundle.network;
  const auto file = api::load_scenarios(o.scenarios);
  const std::string target = !o.target.empty() ? o.target : file.target.value_or("");
  if (target.empty()) throw ContractError("scenario: no target given on the command line or in the file");
  const VarId t = variable_named(net, target);

  std::vector<infer::Posterior> results;
  Json payloads = Json::array();
  int code = kExitOk;
  for (const auto& def : file.scenarios) {
    for (const auto& [v, s] : def.evidence) variable_named(net, v);
    infer::Evidence ev(net, def.evidence);
    try {
      results.push_back(infer::scenario(net, t, ev, def.label));
      payloads.push_back(api::posterior_payload(l.bundle, results.back(), def.evidence));
    } catch (const ImpossibleEvidence& e) {
      err << "error: " << e.what() << '\n';
      code = kExitImpossible;
    }
  }
  std::ostringstream s;
  if (o.format == "json")
    s << Json{{"config_hash", l.bundle.provenance.config_hash}, {"target", target}, {"results", payloads}}.dump(2)
      << '\n';
  else
    api::write_scenario_table(s, net, results);
  Sink{out, o.out}.emit(s.str());
  return code;
}

int cmd_sensitivity(const QueryOpts& o, std::ostream& out) {
  auto l = load(o);
  const auto& net = l.bundle.network;
  sensitivity::SensitivityReport r;
  if (o.kind == "arc") {
    r = sensitivity::arc_report(net);
  } else {
    if (o.target.empty()) throw ContractError("--target is required for --kind " + o.kind);
    VarId t = variable_named(net, o.target);
    try {
      if (o.kind == "mi") {
        r = sensitivity::mi_report(net, t, l.ev);
      } else if (o.kind == "sobol") {
        r = sensitivity::sobol_report(net, t, l.ev);
      } else if (o.kind == "node") {
        r = sensitivity::node_color_report(net, t, l.ev, o.window);
      } else {
        if (o.state.empty()) throw ContractError("--state is required for --kind tornado");
        sensitivity::Event event{t, net.variable(t).state_index(o.state)};
        r = sensitivity::tornado_report(net, event, l.ev, o.top_k, o.window);
      }
    } catch (const ImpossibleEvidence& e) {
      throw ImpossibleEvidence(e.what(), infer::impossible_culprits(net, l.ev));
    }
  }
  std::ostringstream s;
  if (o.format == "json")
    s << api::report_payload(l.bundle, r).dump(2) << '\n';
  else
    api::write_report_table(s, r);
  Sink{out, o.out}.emit(s.str());
  return kExitOk;
}

int cmd_export(const QueryOpts& o, std::ostream& out) {
  const auto b = api::load_bundle(o.bundle);
  std::map<VarId, double> scores;
  const std::map<VarId, double>* sens = nullptr;
  if (!o.sensitivity_target.empty()) {
    scores = sensitivity::node_sensitivity(b.network, variable_named(b.network, o.sensitivity_target), {},
                                           o.window);
    sens = &scores;
  }
  Sink{out, o.out}.emit(o.export_format == "json" ? api::graph_json(b, sens).dump(2) + "\n"
                                                  : api::graph_dot(b, sens));
  return kExitOk;
}

int cmd_serve(const QueryOpts& o, std::ostream& out, std::ostream& err) {
  api::InferenceService service(api::load_bundle(o.bundle));
  api::HttpServer server(service);
  const int port = server.bind(o.host, o.port);
  if (port < 0) {
    err << "error: cannot bind " << o.host << ':' << o.port << '\n';
    return kExitError;
  }
  out << "serving " << o.bundle << " on http://" << o.host << ':' << port
      << " config_hash=" << service.bundle().provenance.config_hash << std::endl;
  return server.listen() ? kExitOk : kExitError;
}

void add_evidence(CLI::App* cmd, QueryOpts& o) {
  cmd->add_option("-e,--evidence", o.evidence, "Observations as VAR=state");
}

void add_format(CLI::App* cmd, QueryOpts& o) {
  cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"tsv", "json"}));
  cmd->add_option("-o,--out", o.out, "Write to this file instead of standard output");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Discrete Bayesian-network analysis: discretize, learn, query, explain, serve.", "bnlab"};
  app.require_subcommand(1);

  DiscretizeOpts d;
  auto* disc = app.add_subcommand("discretize", "Clean and encode the input table");
  disc->add_option("--spec", d.spec, "Run specification (JSON)")->required();
  disc->add_option("--dataset", d.dataset, "Override output.dataset");
  disc->add_option("--encoding", d.encoding, "Override output.encoding");

  LearnOpts lo;
  auto* lrn = app.add_subcommand("learn", "Bootstrap structure learning and parameter fit");
  lrn->add_option("--spec", lo.spec, "Run specification (JSON)")->required();
  lrn->add_option("--dataset", lo.dataset, "Override output.dataset");
  lrn->add_option("--encoding", lo.encoding, "Override output.encoding");
  lrn->add_option("--bundle", lo.bundle, "Override output.bundle");
  lrn->add_option("--edges", lo.edges, "Override output.edges");
  lrn->add_flag("--timestamp", lo.timestamp, "Record the creation time in the bundle");
  lrn->add_flag("--serial", lo.serial, "Run replicates on one thread");

  QueryOpts q;
  auto* qry = app.add_subcommand("query", "Posterior of a target given evidence");
  qry->add_option("--bundle", q.bundle)->required();
  qry->add_option("--target", q.target)->required();
  add_evidence(qry, q);
  add_format(qry, q);

  auto* mp = app.add_subcommand("mpe", "Most probable explanation");
  mp->add_option("--bundle", q.bundle)->required();
  add_evidence(mp, q);
  add_format(mp, q);

  auto* scn = app.add_subcommand("scan", "Single-observation evidence scan against a target");
  scn->add_option("--bundle", q.bundle)->required();
  scn->add_option("--target", q.target)->required();
  add_format(scn, q);

  auto* sc = app.add_subcommand("scenario", "Posteriors for every scenario in a file");
  sc->add_option("--bundle", q.bundle)->required();
  sc->add_option("--scenarios", q.scenarios, "Scenario file (JSON)")->required();
  sc->add_option("--target", q.target, "Overrides the file's target");
  add_format(sc, q);

  auto* sens = app.add_subcommand("sensitivity", "Sensitivity reports");
  sens->add_option("--bundle", q.bundle)->required();
  sens->add_option("--kind", q.kind)->required()->check(CLI::IsMember({"mi", "sobol", "arc", "tornado", "node"}));
  sens->add_option("--target", q.target);
  sens->add_option("--state", q.state, "Target state (tornado)");
  sens->add_option("--top-k", q.top_k, "Bars kept by tornado (0 = all)");
  sens->add_option("--window", q.window, "Relative parameter window")->check(CLI::Range(1e-6, 1.0));
  add_evidence(sens, q);
  add_format(sens, q);

  auto* exp = app.add_subcommand("export", "Graph export");
  exp->add_option("--bundle", q.bundle)->required();
  exp->add_option("--format", q.export_format)->check(CLI::IsMember({"dot", "json"}));
  exp->add_option("--sensitivity", q.sensitivity_target, "Annotate nodes with sensitivity to this target");
  exp->add_option("--window", q.window, "Relative parameter window")->check(CLI::Range(1e-6, 1.0));
  exp->add_option("-o,--out", q.out, "Write to this file instead of standard output");

  auto* srv = app.add_subcommand("serve", "HTTP inference service");
  srv->add_option("--bundle", q.bundle)->required();
  srv->add_option("--host", q.host);
  srv->add_option("--port", q.port)->check(CLI::Range(0, 65535));

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (disc->parsed()) return cmd_discretize(d, out);
    if (lrn->parsed()) return cmd_learn(lo, out);
    if (qry->parsed()) return cmd_query(q, out);
    if (mp->parsed()) return cmd_mpe(q, out);
    if (scn->parsed()) return cmd_scan(q, out);
    if (sc->parsed()) return cmd_scenario(q, out, err);
    if (sens->parsed()) return cmd_sensitivity(q, out);
    if (exp->parsed()) return cmd_export(q, out);
    return cmd_serve(q, out, err);
  } catch (const ImpossibleEvidence& e) {
    err << "error: " << e.what() << '\n';
    if (!e.culprits().empty()) {
      err << "culprits:";
      for (const auto& [v, s] : e.culprits()) err << ' ' << v << '=' << s;
      err << '\n';
    }
    return kExitImpossible;
  } catch (const Json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
}

}  // namespace bnlab::cli
