#pragma once

// Influence measures over a fitted network. Every quantity is computed from
// exact joints produced by the inference engine, in nats.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "bnlab/core.hpp"
#include "bnlab/infer.hpp"

namespace bnlab::sensitivity {

using infer::Evidence;

double mutual_information(const BayesianNetwork& net, VarId x, VarId target, const Evidence& ev = {});

struct SobolIndex {
  double aggregate = 0.0;         // variance-weighted over target states
  std::vector<double> per_state;  // S_t; 0 for states with P(t) in {0, 1}
};

/// First-order index of the joint configuration of `xs` for a categorical
/// target. Throws ContractError when the target marginal is a point mass.
SobolIndex sobol(const BayesianNetwork& net, std::span<const VarId> xs, VarId target,
                 const Evidence& ev = {});
double sobol_index(const BayesianNetwork& net, VarId x, VarId target, const Evidence& ev = {});

/// Worst case over co-parent configurations of the largest TV distance
/// between child rows that differ only in the parent's state.
double arc_diameter(const BayesianNetwork& net, Arc arc);

struct ParameterHandle {
  VarId node = 0;
  std::size_t row = 0;
  StateId state = 0;
  double value = 0.0;

  auto operator<=>(const ParameterHandle& o) const {
    return std::tie(node, row, state) <=> std::tie(o.node, o.row, o.state);
  }
  bool operator==(const ParameterHandle& o) const {
    return node == o.node && row == o.row && state == o.state;
  }
};

ParameterHandle make_handle(const BayesianNetwork& net, VarId node, std::size_t row, StateId state);

/// Copy of `net` with the handle's entry set to theta and its row siblings
/// covaried proportionally (uniformly when the entry was 1).
BayesianNetwork perturbed(const BayesianNetwork& net, const ParameterHandle& h, double theta);

struct Event {
  VarId target = 0;
  StateId state = 0;
};

/// P(event | ev)(theta) = (a theta + b) / (c theta + d), scaled so that the
/// larger of the two boundary denominators is 1.
struct OneWay {
  ParameterHandle handle;
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0;
  double baseline = 0.0;
  double lo_theta = 0.0, hi_theta = 0.0;
  double low = 0.0, high = 0.0;

  double operator()(double theta) const;
  double width() const { return high - low; }
};

inline constexpr double kDefaultWindow = 0.10;

OneWay one_way_sensitivity(const BayesianNetwork& net, const ParameterHandle& h, Event event,
                           const Evidence& ev = {}, double window = kDefaultWindow);

/// Every CPT entry of every non-target node, widest first, ties by handle.
/// Runs the sweeps concurrently; tornado_serial is the reference.
std::vector<OneWay> tornado(const BayesianNetwork& net, Event event, const Evidence& ev, std::size_t top_k,
                            double window = kDefaultWindow);
std::vector<OneWay> tornado_serial(const BayesianNetwork& net, Event event, const Evidence& ev,
                                   std::size_t top_k, double window = kDefaultWindow);

/// Max tornado width per node over its handles and all target states. The
/// target itself is absent from the map.
std::map<VarId, double> node_sensitivity(const BayesianNetwork& net, VarId target, const Evidence& ev = {},
                                         double window = kDefaultWindow);

enum class ReportKind { mi, sobol, arc_diameter, tornado, node_color };
std::string_view to_string(ReportKind k);

struct ReportEntry {
  std::string subject;
  double score = 0.0;
  std::vector<std::pair<std::string, double>> aux;
};

struct SensitivityReport {
  ReportKind kind = ReportKind::mi;
  std::optional<VarId> target;
  std::optional<StateId> target_state;
  std::vector<ReportEntry> entries;  // ranked, highest score first
};

SensitivityReport mi_report(const BayesianNetwork& net, VarId target, const Evidence& ev = {});
SensitivityReport sobol_report(const BayesianNetwork& net, VarId target, const Evidence& ev = {});
SensitivityReport arc_report(const BayesianNetwork& net);
SensitivityReport tornado_report(const BayesianNetwork& net, Event event, const Evidence& ev,
                                 std::size_t top_k, double window = kDefaultWindow);
SensitivityReport node_color_report(const BayesianNetwork& net, VarId target, const Evidence& ev = {},
                                    double window = kDefaultWindow);

/// "node[parent=state,...]=state" for report subjects.
std::string describe(const BayesianNetwork& net, const ParameterHandle& h);

}  // namespace bnlab::sensitivity
