#include <algorithm>

#include "bnlab/sensitivity.hpp"

namespace bnlab::sensitivity {

std::string_view to_string(ReportKind k) {
  switch (k) {
    case ReportKind::mi: return "mi";
    case ReportKind::sobol: return "sobol";
    case ReportKind::arc_diameter: return "arc_diameter";
    case ReportKind::tornado: return "tornado";
    case ReportKind::node_color: return "node_color";
  }
  return "unknown";
}

namespace {

// Highest score first; equal scores keep insertion (declaration) order.
void rank(SensitivityReport& r) {
  std::stable_sort(r.entries.begin(), r.entries.end(),
                   [](const ReportEntry& a, const ReportEntry& b) { return a.score > b.score; });
}

}  // namespace

SensitivityReport mi_report(const BayesianNetwork& net, VarId target, const Evidence& ev) {
  SensitivityReport r{ReportKind::mi, target, std::nullopt, {}};
  for (VarId v = 0; v < net.size(); ++v)
    if (v != target && !ev.contains(v))
      r.entries.push_back({net.variable(v).name(), mutual_information(net, v, target, ev), {}});
  rank(r);
  return r;
}

SensitivityReport sobol_report(const BayesianNetwork& net, VarId target, const Evidence& ev) {
  SensitivityReport r{ReportKind::sobol, target, std::nullopt, {}};
  const auto& states = net.variable(target).states();
  for (VarId v = 0; v < net.size(); ++v) {
    if (v == target || ev.contains(v)) continue;
    const VarId xs[] = {v};
    auto s = sobol(net, xs, target, ev);
    ReportEntry e{net.variable(v).name(), s.aggregate, {}};
    for (std::size_t t = 0; t < states.size(); ++t) e.aux.emplace_back(states[t], s.per_state[t]);
    r.entries.push_back(std::move(e));
  }
  rank(r);
  return r;
}

SensitivityReport arc_report(const BayesianNetwork& net) {
  SensitivityReport r{ReportKind::arc_diameter, std::nullopt, std::nullopt, {}};
  for (const auto& a : net.dag().arcs())
    r.entries.push_back(
        {net.variable(a.parent).name() + " -> " + net.variable(a.child).name(), arc_diameter(net, a), {}});
  rank(r);
  return r;
}

SensitivityReport tornado_report(const BayesianNetwork& net, Event event, const Evidence& ev,
                                 std::size_t top_k, double window) {
  SensitivityReport r{ReportKind::tornado, event.target, event.state, {}};
  for (const auto& s : tornado(net, event, ev, top_k, window))
    r.entries.push_back({describe(net, s.handle),
                         s.width(),
                         {{"theta", s.handle.value},
                          {"low", s.low},
                          {"high", s.high},
                          {"baseline", s.baseline}}});
  return r;
}

SensitivityReport node_color_report(const BayesianNetwork& net, VarId target, const Evidence& ev,
                                    double window) {
  SensitivityReport r{ReportKind::node_color, target, std::nullopt, {}};
  for (const auto& [v, score] : node_sensitivity(net, target, ev, window))
    r.entries.push_back({net.variable(v).name(), score, {}});
  rank(r);
  return r;
}

}  // namespace bnlab::sensitivity
