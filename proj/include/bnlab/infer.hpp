#pragma once

// Exact inference by variable elimination. Evidence reduces the CPT factors
// before elimination; elimination order is greedy min-fill with ties broken by
// variable name. Each intermediate factor is rescaled to sum 1 and the scale is
// tracked in log space, so P(evidence) is reported without underflow.

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bnlab/core.hpp"

namespace bnlab::infer {

/// Observed states keyed by variable. Ordered by VarId.
class Evidence {
 public:
  Evidence() = default;
  Evidence(const BayesianNetwork& net,
           const std::vector<std::pair<std::string, std::string>>& named);

  /// Throws ContractError on unknown variable/state or a repeated variable.
  void set(const BayesianNetwork& net, VarId v, StateId s);
  void set(const BayesianNetwork& net, std::string_view variable, std::string_view state);
  void erase(VarId v) { items_.erase(v); }

  bool contains(VarId v) const { return items_.count(v) != 0; }
  std::optional<StateId> get(VarId v) const;
  bool empty() const noexcept { return items_.empty(); }
  std::size_t size() const noexcept { return items_.size(); }
  const std::map<VarId, StateId>& items() const noexcept { return items_; }

  std::vector<std::pair<std::string, std::string>> named(const BayesianNetwork& net) const;

 private:
  std::map<VarId, StateId> items_;
};

/// Table over a scope; values indexed with the first scope variable most significant.
class Factor {
 public:
  Factor() = default;
  Factor(std::vector<VarId> scope, std::vector<std::size_t> cards, std::vector<double> values);

  static Factor from_cpt(const Cpt& cpt);
  static Factor scalar(double value) { return Factor({}, {}, {value}); }

  const std::vector<VarId>& scope() const noexcept { return scope_; }
  const std::vector<std::size_t>& cards() const noexcept { return cards_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& values() noexcept { return values_; }
  bool contains(VarId v) const;
  double sum() const;

  /// Slice with v fixed to s (v removed from the scope). No-op when v is absent.
  Factor reduce(VarId v, StateId s) const;
  Factor sum_out(VarId v) const;
  Factor max_out(VarId v) const;
  /// Reorders the scope; `order` must be a permutation of scope().
  Factor permuted(const std::vector<VarId>& order) const;

  friend Factor operator*(const Factor& a, const Factor& b);

 private:
  std::size_t position(VarId v) const;

  std::vector<VarId> scope_;
  std::vector<std::size_t> cards_;
  std::vector<double> values_;
};

struct Posterior {
  VarId target = 0;
  std::vector<double> probabilities;
  double evidence_probability = 1.0;      // P(ev), may underflow to 0 for huge evidence sets
  double log_evidence_probability = 0.0;  // ln P(ev)
  std::string label;                      // scenario name, empty otherwise
};

/// Unnormalized joint over `keep` (in the given order) with evidence applied:
/// true value = factor * exp(log_scale). Throws ImpossibleEvidence when P(ev) = 0.
struct ScaledFactor {
  Factor factor;
  double log_scale = 0.0;
};
ScaledFactor joint_marginal(const BayesianNetwork& net, std::span<const VarId> keep,
                            const Evidence& ev);

/// ln P(ev); throws ImpossibleEvidence when P(ev) = 0.
double log_evidence_probability(const BayesianNetwork& net, const Evidence& ev);
bool evidence_possible(const BayesianNetwork& net, const Evidence& ev);

/// Elimination order used for the given query (exposed for tests and tooling).
std::vector<VarId> min_fill_order(const BayesianNetwork& net, std::span<const VarId> eliminate,
                                  std::span<const std::vector<VarId>> factor_scopes);

Posterior posterior(const BayesianNetwork& net, VarId target, const Evidence& ev = {});

struct MpeResult {
  Assignment assignment;  // every variable, evidence included
  double probability = 0.0;
  double log_probability = 0.0;
};

/// Max-product elimination with argmax traceback over all unobserved
/// variables. Ties go to the lowest state index.
MpeResult mpe(const BayesianNetwork& net, const Evidence& ev = {});

/// KL(p || q) + KL(q || p), natural log. +inf when the supports differ.
double symmetrized_kl(std::span<const double> p, std::span<const double> q);

struct ScanRow {
  VarId variable = 0;
  StateId state = 0;
  Posterior posterior;
  double divergence = 0.0;
};

struct ScanResult {
  VarId target = 0;
  std::vector<double> marginal;
  std::vector<ScanRow> rows;  // sorted by divergence desc, then (variable, state)
  std::vector<std::pair<VarId, StateId>> impossible;
};

/// Single-observation evidence propagation for every non-target (variable,
/// state), ranked by symmetrized KL from the target's marginal. The per-pair
/// queries run concurrently (OpenMP); evidence_scan_serial is the reference.
ScanResult evidence_scan(const BayesianNetwork& net, VarId target);
ScanResult evidence_scan_serial(const BayesianNetwork& net, VarId target);

/// posterior() under a named multi-variable profile. On impossible evidence
/// the thrown ImpossibleEvidence carries a greedy one-out culprit list.
Posterior scenario(const BayesianNetwork& net, VarId target, const Evidence& ev,
                   std::string label = {});

/// Greedy one-out diagnostic: evidence items whose removal restores P(ev) > 0.
std::vector<std::pair<std::string, std::string>> impossible_culprits(const BayesianNetwork& net,
                                                                     const Evidence& ev);

}  // namespace bnlab::infer
