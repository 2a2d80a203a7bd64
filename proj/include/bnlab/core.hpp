#pragma once

// Domain types for discrete Bayesian networks: variables, DAGs, CPTs and the
// fitted network, plus the joint factorization P(x) = prod_i P(x_i | pa(x_i)).
//
// Variables are addressed by position (VarId) in the network's declaration
// order. CPT rows use a fixed layout: the FIRST listed parent is the most
// significant digit of the row index, the last parent varies fastest.

#include <compare>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bnlab/error.hpp"

namespace bnlab {

using VarId = std::size_t;
using StateId = std::size_t;

inline constexpr StateId kUnset = std::numeric_limits<StateId>::max();

/// Complete or partial assignment indexed by VarId; kUnset marks unassigned.
using Assignment = std::vector<StateId>;

struct Arc {
  VarId parent = 0;
  VarId child = 0;
  auto operator<=>(const Arc&) const = default;
};

class DiscreteVariable {
 public:
  DiscreteVariable(std::string name, std::vector<std::string> states);

  const std::string& name() const noexcept { return name_; }
  const std::vector<std::string>& states() const noexcept { return states_; }
  std::size_t cardinality() const noexcept { return states_.size(); }

  std::optional<StateId> find_state(std::string_view label) const;
  /// Throws ContractError listing the valid labels when `label` is unknown.
  StateId state_index(std::string_view label) const;

  bool operator==(const DiscreteVariable&) const = default;

 private:
  std::string name_;
  std::vector<std::string> states_;
};

/// Topological order of an arbitrary digraph over nodes [0, n). Ties go to the
/// lowest index so the order is deterministic. Throws StructuralError naming
/// one arc on a cycle.
std::vector<VarId> topological_order(std::size_t n, std::span<const Arc> arcs,
                                     std::span<const std::string> names = {});

/// One directed cycle of the digraph (as a list of arcs), or empty if acyclic.
std::vector<Arc> find_cycle(std::size_t n, std::span<const Arc> arcs);

class Dag {
 public:
  Dag() = default;
  explicit Dag(std::vector<std::string> nodes);
  /// Validates the arc set: declared endpoints, no self-arcs, no duplicates, acyclic.
  Dag(std::vector<std::string> nodes, std::span<const Arc> arcs);

  std::size_t size() const noexcept { return nodes_.size(); }
  const std::vector<std::string>& nodes() const noexcept { return nodes_; }
  const std::string& name(VarId v) const { return nodes_.at(v); }
  std::optional<VarId> find(std::string_view name) const;
  VarId index(std::string_view name) const;

  bool has_arc(VarId parent, VarId child) const;
  bool has_path(VarId from, VarId to) const;
  /// True when the arc is new, not a self-arc and keeps the graph acyclic.
  bool can_add(VarId parent, VarId child) const;

  void add_arc(VarId parent, VarId child);
  void remove_arc(VarId parent, VarId child);
  void reverse_arc(VarId parent, VarId child);

  /// Parents of v in ascending VarId order.
  const std::vector<VarId>& parents(VarId v) const { return parents_.at(v); }
  const std::vector<VarId>& children(VarId v) const { return children_.at(v); }
  /// All arcs sorted by (parent, child).
  std::vector<Arc> arcs() const;
  std::size_t arc_count() const noexcept { return arc_count_; }

  bool operator==(const Dag& other) const {
    return nodes_ == other.nodes_ && parents_ == other.parents_;
  }

 private:
  void check_node(VarId v) const;

  std::vector<std::string> nodes_;
  std::unordered_map<std::string, VarId> lookup_;
  std::vector<std::vector<VarId>> parents_;
  std::vector<std::vector<VarId>> children_;
  std::size_t arc_count_ = 0;
};

std::vector<VarId> topological_order(const Dag& dag);

/// Conditional probability table: q rows (parent configurations) by r columns.
class Cpt {
 public:
  /// Rows must sum to 1 within 1e-12; drift up to 1e-9 is renormalized with a
  /// warning on std::clog; anything larger is rejected.
  Cpt(VarId variable, std::size_t cardinality, std::vector<VarId> parents,
      std::vector<std::size_t> parent_cardinalities, std::vector<double> table);

  VarId variable() const noexcept { return variable_; }
  std::size_t cardinality() const noexcept { return cardinality_; }
  const std::vector<VarId>& parents() const noexcept { return parents_; }
  const std::vector<std::size_t>& parent_cardinalities() const noexcept { return parent_cards_; }
  /// strides()[p] is the row-index weight of parents()[p].
  const std::vector<std::size_t>& strides() const noexcept { return strides_; }
  std::size_t rows() const noexcept { return rows_; }

  std::span<const double> row(std::size_t j) const;
  double at(std::size_t row, StateId state) const { return table_[row * cardinality_ + state]; }
  /// Row-major table, q * r entries.
  const std::vector<double>& table() const noexcept { return table_; }

  /// Parent states for a row index (inverse of parent_config_index).
  std::vector<StateId> decode(std::size_t row) const;

  bool operator==(const Cpt&) const = default;

 private:
  VarId variable_;
  std::size_t cardinality_;
  std::vector<VarId> parents_;
  std::vector<std::size_t> parent_cards_;
  std::vector<std::size_t> strides_;
  std::size_t rows_;
  std::vector<double> table_;
};

/// Row index of the parent configuration found in `assignment`.
/// Throws ContractError when a parent is unassigned or out of range.
std::size_t parent_config_index(const Cpt& cpt, const Assignment& assignment);

class BayesianNetwork {
 public:
  /// `cpts` may come in any order; exactly one per variable, and each CPT's
  /// parent set must equal the DAG parent set of its variable.
  BayesianNetwork() = default;
  BayesianNetwork(std::vector<DiscreteVariable> variables, Dag dag, std::vector<Cpt> cpts);

  std::size_t size() const noexcept { return variables_.size(); }
  const std::vector<DiscreteVariable>& variables() const noexcept { return variables_; }
  const DiscreteVariable& variable(VarId v) const { return variables_.at(v); }
  const Dag& dag() const noexcept { return dag_; }
  const Cpt& cpt(VarId v) const { return cpts_.at(v); }
  std::size_t cardinality(VarId v) const { return variables_.at(v).cardinality(); }

  std::optional<VarId> find(std::string_view name) const { return dag_.find(name); }
  /// Throws ContractError for unknown names.
  VarId index(std::string_view name) const;

  /// Copy with one CPT row replaced (used by parameter sensitivity).
  BayesianNetwork with_row(VarId v, std::size_t row, std::span<const double> values) const;

  bool operator==(const BayesianNetwork& other) const {
    return variables_ == other.variables_ && dag_ == other.dag_ && cpts_ == other.cpts_;
  }

 private:
  std::vector<DiscreteVariable> variables_;
  Dag dag_;
  std::vector<Cpt> cpts_;
};

/// Product of the CPT entries selected by a complete assignment.
double joint_probability(const BayesianNetwork& net, const Assignment& assignment);

/// Enumerates every complete assignment in odometer order (last variable fastest).
/// `visit` returns false to stop early.
template <class Visit>
void for_each_assignment(std::span<const std::size_t> cards, Visit&& visit) {
  Assignment a(cards.size(), 0);
  for (auto c : cards)
    if (c == 0) return;
  while (true) {
    if (!visit(static_cast<const Assignment&>(a))) return;
    std::size_t i = cards.size();
    while (i > 0) {
      --i;
      if (++a[i] < cards[i]) break;
      a[i] = 0;
      if (i == 0) return;
    }
    if (cards.empty()) return;
  }
}

}  // namespace bnlab
