#pragma once

// Shared presentation layer for the command line and the HTTP service: both
// parse evidence and scenarios with the same functions and build results from
// the same payload builders, so a query answered by either prints the same
// digits.
//
// Tables are tab-separated with a header row; numbers use shortest
// round-trip decimals. Lines starting with '#' carry metadata.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bnlab/bundle.hpp"
#include "bnlab/infer.hpp"
#include "bnlab/sensitivity.hpp"

namespace bnlab::api {

using NamedEvidence = std::vector<std::pair<std::string, std::string>>;

/// Evidence as {"VAR": "state", ...} or [{"variable": .., "state": ..}, ...].
/// Shape errors are SchemaError prefixed with `where`.
NamedEvidence evidence_from_json(const Json& j, const std::string& where = "evidence");
/// "VAR=state" tokens from the command line.
NamedEvidence evidence_from_args(const std::vector<std::string>& tokens);
Json evidence_to_json(const NamedEvidence& ev);

struct ScenarioDef {
  std::string label;
  NamedEvidence evidence;
};

/// {"target": "PRICE", "scenarios": [{"label": "..", "evidence": {..}}, ...]}
struct ScenarioFile {
  std::optional<std::string> target;
  std::vector<ScenarioDef> scenarios;
};

ScenarioFile scenarios_from_json(const Json& j);
ScenarioFile load_scenarios(const std::filesystem::path& path);

// JSON payloads. Every payload carries "config_hash".

Json model_payload(const ModelBundle& b);
Json posterior_payload(const ModelBundle& b, const infer::Posterior& p, const NamedEvidence& ev);
Json mpe_payload(const ModelBundle& b, const infer::MpeResult& r, const NamedEvidence& ev);
/// Infinite divergences (disjoint supports) are written as null.
Json scan_payload(const ModelBundle& b, const infer::ScanResult& r);
Json tornado_payload(const ModelBundle& b, const sensitivity::Event& event, const NamedEvidence& ev,
                     double window, const std::vector<sensitivity::OneWay>& bars);
Json report_payload(const ModelBundle& b, const sensitivity::SensitivityReport& r);
Json error_payload(const ModelBundle* b, const std::string& kind, const std::string& message,
                   const std::vector<std::pair<std::string, std::string>>& fields = {},
                   const std::vector<std::pair<std::string, std::string>>& culprits = {});

// Tables.

/// state probability
void write_posterior_table(std::ostream& out, const BayesianNetwork& net, const infer::Posterior& p);
/// variable state
void write_mpe_table(std::ostream& out, const BayesianNetwork& net, const infer::MpeResult& r);
/// variable state divergence P(target=s1) ... P(target=sk)
void write_scan_table(std::ostream& out, const BayesianNetwork& net, const infer::ScanResult& r);
/// scenario P(target=s1) ... P(target=sk) p_evidence
void write_scenario_table(std::ostream& out, const BayesianNetwork& net,
                          const std::vector<infer::Posterior>& results);
/// subject score aux...
void write_report_table(std::ostream& out, const sensitivity::SensitivityReport& r);

// Graph exports: nodes in declaration order, arcs by (parent, child) index.
// Node attribute "group"; arc attribute "strength" = bootstrap frequency when
// the pair was observed; optional node attribute "sensitivity".

std::string graph_dot(const ModelBundle& b, const std::map<VarId, double>* sensitivity = nullptr);
Json graph_json(const ModelBundle& b, const std::map<VarId, double>* sensitivity = nullptr);

}  // namespace bnlab::api
