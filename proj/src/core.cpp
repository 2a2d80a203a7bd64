#include "bnlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <queue>
#include <set>
#include <sstream>

namespace bnlab {

namespace {

std::string arc_label(const Arc& a, std::span<const std::string> names) {
  std::ostringstream os;
  if (a.parent < names.size() && a.child < names.size())
    os << names[a.parent] << " -> " << names[a.child];
  else
    os << a.parent << " -> " << a.child;
  return os.str();
}

std::string join(const std::vector<std::string>& xs) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += xs[i];
  }
  return out;
}

}  // namespace

DiscreteVariable::DiscreteVariable(std::string name, std::vector<std::string> states)
    : name_(std::move(name)), states_(std::move(states)) {
  if (name_.empty()) throw ContractError("variable name must not be empty");
  if (states_.size() < 2)
    throw ContractError("variable '" + name_ + "' needs at least two states");
  std::set<std::string_view> seen;
  for (const auto& s : states_)
    if (!seen.insert(s).second)
      throw ContractError("variable '" + name_ + "' has duplicate state '" + s + "'");
}

std::optional<StateId> DiscreteVariable::find_state(std::string_view label) const {
  auto it = std::find(states_.begin(), states_.end(), label);
  if (it == states_.end()) return std::nullopt;
  return static_cast<StateId>(it - states_.begin());
}

StateId DiscreteVariable::state_index(std::string_view label) const {
  if (auto s = find_state(label)) return *s;
  throw ContractError("unknown state '" + std::string(label) + "' for variable '" + name_ +
                      "'; valid states: " + join(states_));
}

std::vector<Arc> find_cycle(std::size_t n, std::span<const Arc> arcs) {
  std::vector<std::vector<VarId>> out(n);
  for (const auto& a : arcs) out.at(a.parent).push_back(a.child);
  for (auto& o : out) std::sort(o.begin(), o.end());

  enum : char { White, Grey, Black };
  std::vector<char> colour(n, White);
  std::vector<VarId> via(n, 0);
  for (VarId root = 0; root < n; ++root) {
    if (colour[root] != White) continue;
    // iterative DFS: (node, next child position)
    std::vector<std::pair<VarId, std::size_t>> stack{{root, 0}};
    colour[root] = Grey;
    while (!stack.empty()) {
      auto& [v, pos] = stack.back();
      if (pos == out[v].size()) {
        colour[v] = Black;
        stack.pop_back();
        continue;
      }
      VarId w = out[v][pos++];
      if (colour[w] == Grey) {
        std::vector<Arc> cycle{{v, w}};
        for (VarId u = v; u != w; u = via[u]) cycle.push_back({via[u], u});
        // w -> ... -> v -> w
        std::reverse(cycle.begin(), cycle.end());
        return cycle;
      }
      if (colour[w] == White) {
        colour[w] = Grey;
        via[w] = v;
        stack.emplace_back(w, 0);
      }
    }
  }
  return {};
}

std::vector<VarId> topological_order(std::size_t n, std::span<const Arc> arcs,
                                     std::span<const std::string> names) {
  std::vector<std::vector<VarId>> out(n);
  std::vector<std::size_t> indegree(n, 0);
  for (const auto& a : arcs) {
    if (a.parent >= n || a.child >= n)
      throw StructuralError("arc endpoint out of range: " + arc_label(a, names));
    out[a.parent].push_back(a.child);
    ++indegree[a.child];
  }
  std::priority_queue<VarId, std::vector<VarId>, std::greater<>> ready;
  for (VarId v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<VarId> order;
  order.reserve(n);
  while (!ready.empty()) {
    VarId v = ready.top();
    ready.pop();
    order.push_back(v);
    for (VarId w : out[v])
      if (--indegree[w] == 0) ready.push(w);
  }
  if (order.size() != n) {
    auto cycle = find_cycle(n, arcs);
    throw StructuralError("cycle detected through arc " + arc_label(cycle.front(), names));
  }
  return order;
}

Dag::Dag(std::vector<std::string> nodes) : nodes_(std::move(nodes)) {
  parents_.resize(nodes_.size());
  children_.resize(nodes_.size());
  for (VarId v = 0; v < nodes_.size(); ++v)
    if (!lookup_.emplace(nodes_[v], v).second)
      throw StructuralError("duplicate node '" + nodes_[v] + "'");
}

Dag::Dag(std::vector<std::string> nodes, std::span<const Arc> arcs) : Dag(std::move(nodes)) {
  std::set<Arc> seen;
  for (const auto& a : arcs) {
    check_node(a.parent);
    check_node(a.child);
    if (a.parent == a.child) throw StructuralError("self-arc on '" + nodes_[a.parent] + "'");
    if (!seen.insert(a).second)
      throw StructuralError("duplicate arc " + arc_label(a, nodes_));
  }
  topological_order(nodes_.size(), arcs, nodes_);
  for (const auto& a : seen) {
    parents_[a.child].push_back(a.parent);
    children_[a.parent].push_back(a.child);
  }
  for (auto& p : parents_) std::sort(p.begin(), p.end());
  for (auto& c : children_) std::sort(c.begin(), c.end());
  arc_count_ = seen.size();
}

void Dag::check_node(VarId v) const {
  if (v >= nodes_.size()) throw StructuralError("arc endpoint is not a declared node");
}

std::optional<VarId> Dag::find(std::string_view name) const {
  auto it = lookup_.find(std::string(name));
  if (it == lookup_.end()) return std::nullopt;
  return it->second;
}

VarId Dag::index(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw ContractError("unknown variable '" + std::string(name) + "'");
}

bool Dag::has_arc(VarId parent, VarId child) const {
  const auto& p = parents_.at(child);
  return std::binary_search(p.begin(), p.end(), parent);
}

bool Dag::has_path(VarId from, VarId to) const {
  if (from == to) return true;
  std::vector<char> seen(nodes_.size(), 0);
  std::vector<VarId> stack{from};
  seen[from] = 1;
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    for (VarId w : children_[v]) {
      if (w == to) return true;
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return false;
}

bool Dag::can_add(VarId parent, VarId child) const {
  check_node(parent);
  check_node(child);
  return parent != child && !has_arc(parent, child) && !has_path(child, parent);
}

void Dag::add_arc(VarId parent, VarId child) {
  check_node(parent);
  check_node(child);
  Arc a{parent, child};
  if (parent == child) throw StructuralError("self-arc on '" + nodes_[parent] + "'");
  if (has_arc(parent, child)) throw StructuralError("duplicate arc " + arc_label(a, nodes_));
  if (has_path(child, parent)) throw StructuralError("arc " + arc_label(a, nodes_) + " creates a cycle");
  auto& p = parents_[child];
  p.insert(std::upper_bound(p.begin(), p.end(), parent), parent);
  auto& c = children_[parent];
  c.insert(std::upper_bound(c.begin(), c.end(), child), child);
  ++arc_count_;
}

void Dag::remove_arc(VarId parent, VarId child) {
  if (!has_arc(parent, child))
    throw StructuralError("no arc " + arc_label({parent, child}, nodes_));
  auto& p = parents_[child];
  p.erase(std::lower_bound(p.begin(), p.end(), parent));
  auto& c = children_[parent];
  c.erase(std::lower_bound(c.begin(), c.end(), child));
  --arc_count_;
}

void Dag::reverse_arc(VarId parent, VarId child) {
  remove_arc(parent, child);
  try {
    add_arc(child, parent);
  } catch (...) {
    add_arc(parent, child);
    throw;
  }
}

std::vector<Arc> Dag::arcs() const {
  std::vector<Arc> out;
  out.reserve(arc_count_);
  for (VarId p = 0; p < children_.size(); ++p)
    for (VarId c : children_[p]) out.push_back({p, c});
  return out;
}

std::vector<VarId> topological_order(const Dag& dag) {
  auto arcs = dag.arcs();
  return topological_order(dag.size(), arcs, dag.nodes());
}

Cpt::Cpt(VarId variable, std::size_t cardinality, std::vector<VarId> parents,
         std::vector<std::size_t> parent_cardinalities, std::vector<double> table)
    : variable_(variable),
      cardinality_(cardinality),
      parents_(std::move(parents)),
      parent_cards_(std::move(parent_cardinalities)),
      table_(std::move(table)) {
  if (cardinality_ < 1) throw ContractError("CPT cardinality must be positive");
  if (parents_.size() != parent_cards_.size())
    throw ContractError("CPT parent list and cardinality list differ in length");
  std::set<VarId> unique(parents_.begin(), parents_.end());
  if (unique.size() != parents_.size()) throw ContractError("CPT has a repeated parent");
  if (unique.count(variable_)) throw ContractError("CPT variable listed as its own parent");

  strides_.assign(parents_.size(), 1);
  rows_ = 1;
  for (std::size_t p = parents_.size(); p-- > 0;) {
    if (parent_cards_[p] == 0) throw ContractError("CPT parent cardinality must be positive");
    strides_[p] = rows_;
    rows_ *= parent_cards_[p];
  }
  if (table_.size() != rows_ * cardinality_)
    throw ContractError("CPT table has " + std::to_string(table_.size()) + " entries, expected " +
                        std::to_string(rows_ * cardinality_));

  for (std::size_t j = 0; j < rows_; ++j) {
    double* r = table_.data() + j * cardinality_;
    double sum = 0.0;
    for (std::size_t k = 0; k < cardinality_; ++k) {
      if (!std::isfinite(r[k]) || r[k] < 0.0 || r[k] > 1.0)
        throw ContractError("CPT entry outside [0, 1] in row " + std::to_string(j));
      sum += r[k];
    }
    double drift = std::abs(sum - 1.0);
    if (drift <= 1e-12) continue;
    if (drift > 1e-9)
      throw ContractError("CPT row " + std::to_string(j) + " sums to " + std::to_string(sum));
    std::clog << "warning: renormalizing CPT row " << j << " of variable " << variable_
              << " (drift " << drift << ")\n";
    for (std::size_t k = 0; k < cardinality_; ++k) r[k] /= sum;
  }
}

std::span<const double> Cpt::row(std::size_t j) const {
  if (j >= rows_) throw ContractError("CPT row index out of range");
  return {table_.data() + j * cardinality_, cardinality_};
}

std::vector<StateId> Cpt::decode(std::size_t row) const {
  if (row >= rows_) throw ContractError("CPT row index out of range");
  std::vector<StateId> states(parents_.size());
  for (std::size_t p = 0; p < parents_.size(); ++p) {
    states[p] = row / strides_[p];
    row %= strides_[p];
  }
  return states;
}

std::size_t parent_config_index(const Cpt& cpt, const Assignment& assignment) {
  std::size_t index = 0;
  const auto& parents = cpt.parents();
  for (std::size_t p = 0; p < parents.size(); ++p) {
    VarId v = parents[p];
    if (v >= assignment.size() || assignment[v] == kUnset)
      throw ContractError("assignment is missing parent " + std::to_string(v));
    if (assignment[v] >= cpt.parent_cardinalities()[p])
      throw ContractError("parent state out of range for parent " + std::to_string(v));
    index += assignment[v] * cpt.strides()[p];
  }
  return index;
}

BayesianNetwork::BayesianNetwork(std::vector<DiscreteVariable> variables, Dag dag,
                                 std::vector<Cpt> cpts)
    : variables_(std::move(variables)), dag_(std::move(dag)) {
  const std::size_t n = variables_.size();
  if (dag_.size() != n) throw ContractError("DAG and variable list differ in size");
  for (VarId v = 0; v < n; ++v)
    if (dag_.name(v) != variables_[v].name())
      throw ContractError("DAG node '" + dag_.name(v) + "' does not match variable '" +
                          variables_[v].name() + "'");
  if (cpts.size() != n) throw ContractError("need exactly one CPT per variable");

  std::vector<std::optional<Cpt>> slots(n);
  for (auto& c : cpts) {
    VarId v = c.variable();
    if (v >= n) throw ContractError("CPT for unknown variable");
    if (slots[v]) throw ContractError("two CPTs for variable '" + variables_[v].name() + "'");
    if (c.cardinality() != variables_[v].cardinality())
      throw ContractError("CPT cardinality mismatch for '" + variables_[v].name() + "'");
    std::vector<VarId> sorted = c.parents();
    std::sort(sorted.begin(), sorted.end());
    if (sorted != dag_.parents(v))
      throw ContractError("CPT parents of '" + variables_[v].name() + "' differ from the DAG");
    for (std::size_t p = 0; p < c.parents().size(); ++p)
      if (c.parent_cardinalities()[p] != variables_[c.parents()[p]].cardinality())
        throw ContractError("CPT parent cardinality mismatch for '" + variables_[v].name() + "'");
    slots[v] = std::move(c);
  }
  cpts_.reserve(n);
  for (auto& s : slots) cpts_.push_back(std::move(*s));
}

VarId BayesianNetwork::index(std::string_view name) const { return dag_.index(name); }

BayesianNetwork BayesianNetwork::with_row(VarId v, std::size_t row,
                                          std::span<const double> values) const {
  const Cpt& old = cpt(v);
  if (values.size() != old.cardinality()) throw ContractError("replacement row has wrong size");
  std::vector<double> table = old.table();
  std::copy(values.begin(), values.end(), table.begin() + row * old.cardinality());
  std::vector<Cpt> cpts = cpts_;
  cpts[v] = Cpt(v, old.cardinality(), old.parents(), old.parent_cardinalities(), std::move(table));
  return BayesianNetwork(variables_, dag_, std::move(cpts));
}

double joint_probability(const BayesianNetwork& net, const Assignment& assignment) {
  if (assignment.size() != net.size())
    throw ContractError("joint_probability needs a complete assignment");
  double p = 1.0;
  for (VarId v = 0; v < net.size(); ++v) {
    if (assignment[v] == kUnset || assignment[v] >= net.cardinality(v))
      throw ContractError("assignment is missing variable '" + net.variable(v).name() + "'");
    const Cpt& c = net.cpt(v);
    p *= c.at(parent_config_index(c, assignment), assignment[v]);
  }
  return p;
}

}  // namespace bnlab
