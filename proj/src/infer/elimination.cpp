#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "bnlab/infer.hpp"

namespace bnlab::infer {

Evidence::Evidence(const BayesianNetwork& net,
                   const std::vector<std::pair<std::string, std::string>>& named) {
  for (const auto& [var, state] : named) set(net, var, state);
}

void Evidence::set(const BayesianNetwork& net, VarId v, StateId s) {
  if (v >= net.size()) throw ContractError("evidence on unknown variable");
  if (s >= net.cardinality(v))
    throw ContractError("evidence state out of range for '" + net.variable(v).name() + "'");
  if (!items_.emplace(v, s).second)
    throw ContractError("variable '" + net.variable(v).name() + "' observed twice");
}

void Evidence::set(const BayesianNetwork& net, std::string_view variable, std::string_view state) {
  VarId v = net.index(variable);
  set(net, v, net.variable(v).state_index(state));
}

std::optional<StateId> Evidence::get(VarId v) const {
  auto it = items_.find(v);
  if (it == items_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, std::string>> Evidence::named(const BayesianNetwork& net) const {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& [v, s] : items_) out.emplace_back(net.variable(v).name(), net.variable(v).states()[s]);
  return out;
}

std::vector<VarId> min_fill_order(const BayesianNetwork& net, std::span<const VarId> eliminate,
                                  std::span<const std::vector<VarId>> factor_scopes) {
  std::map<VarId, std::set<VarId>> adj;
  for (VarId v : eliminate) adj[v];
  for (const auto& scope : factor_scopes)
    for (VarId a : scope)
      for (VarId b : scope)
        if (a != b) adj[a].insert(b);

  std::set<VarId> remaining(eliminate.begin(), eliminate.end());
  std::vector<VarId> order;
  order.reserve(remaining.size());
  while (!remaining.empty()) {
    VarId best = *remaining.begin();
    std::size_t best_fill = std::numeric_limits<std::size_t>::max();
    for (VarId v : remaining) {
      const auto& nb = adj[v];
      std::size_t fill = 0;
      for (auto i = nb.begin(); i != nb.end(); ++i)
        for (auto j = std::next(i); j != nb.end(); ++j)
          if (!adj[*i].count(*j)) ++fill;
      if (fill < best_fill ||
          (fill == best_fill && net.variable(v).name() < net.variable(best).name())) {
        best = v;
        best_fill = fill;
      }
    }
    const auto nb = adj[best];
    for (VarId a : nb) {
      adj[a].erase(best);
      for (VarId b : nb)
        if (a != b) adj[a].insert(b);
    }
    adj.erase(best);
    remaining.erase(best);
    order.push_back(best);
  }
  return order;
}

namespace {

[[noreturn]] void impossible() { throw ImpossibleEvidence("evidence has probability zero under the model"); }

struct Pool {
  std::vector<Factor> factors;
  double log_scale = 0.0;
};

// Reduced CPT factors of `nodes`; constant factors fold into the log scale.
Pool reduced_factors(const BayesianNetwork& net, const std::vector<char>& nodes, const Evidence& ev) {
  Pool pool;
  for (VarId v = 0; v < net.size(); ++v) {
    if (!nodes[v]) continue;
    Factor f = Factor::from_cpt(net.cpt(v));
    for (const auto& [u, s] : ev.items())
      if (f.contains(u)) f = f.reduce(u, s);
    if (f.scope().empty()) {
      if (f.values()[0] == 0.0) impossible();
      pool.log_scale += std::log(f.values()[0]);
    } else {
      pool.factors.push_back(std::move(f));
    }
  }
  return pool;
}

// Multiplies and removes every factor that mentions v.
Factor take_product(std::vector<Factor>& factors, VarId v) {
  Factor prod = Factor::scalar(1.0);
  std::vector<Factor> rest;
  for (auto& f : factors) {
    if (f.contains(v))
      prod = prod * f;
    else
      rest.push_back(std::move(f));
  }
  factors = std::move(rest);
  return prod;
}

double normalize(Factor& f, bool by_max) {
  double z = 0.0;
  for (double x : f.values()) z = by_max ? std::max(z, x) : z + x;
  if (z == 0.0) impossible();
  for (double& x : f.values()) x /= z;
  return std::log(z);
}

std::vector<std::vector<VarId>> scopes(const std::vector<Factor>& factors) {
  std::vector<std::vector<VarId>> out;
  for (const auto& f : factors) out.push_back(f.scope());
  return out;
}

// Ancestors of the query and evidence variables; everything else is barren
// for a sum-product query and sums out to 1.
std::vector<char> relevant_nodes(const BayesianNetwork& net, std::span<const VarId> keep,
                                 const Evidence& ev) {
  std::vector<char> mark(net.size(), 0);
  std::vector<VarId> stack(keep.begin(), keep.end());
  for (const auto& [v, s] : ev.items()) stack.push_back(v);
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    if (mark[v]) continue;
    mark[v] = 1;
    for (VarId p : net.dag().parents(v)) stack.push_back(p);
  }
  return mark;
}

}  // namespace

ScaledFactor joint_marginal(const BayesianNetwork& net, std::span<const VarId> keep, const Evidence& ev) {
  for (VarId v : keep) {
    if (v >= net.size()) throw ContractError("query on unknown variable");
    if (ev.contains(v))
      throw ContractError("query variable '" + net.variable(v).name() + "' is also observed");
  }
  const auto nodes = relevant_nodes(net, keep, ev);
  Pool pool = reduced_factors(net, nodes, ev);

  std::vector<VarId> eliminate;
  for (VarId v = 0; v < net.size(); ++v)
    if (nodes[v] && !ev.contains(v) && std::find(keep.begin(), keep.end(), v) == keep.end())
      eliminate.push_back(v);
  const auto sc = scopes(pool.factors);
  for (VarId v : min_fill_order(net, eliminate, sc)) {
    Factor f = take_product(pool.factors, v).sum_out(v);
    pool.log_scale += normalize(f, false);
    pool.factors.push_back(std::move(f));
  }

  Factor joint = Factor::scalar(1.0);
  for (const auto& f : pool.factors) joint = joint * f;
  pool.log_scale += normalize(joint, false);
  std::vector<VarId> order(keep.begin(), keep.end());
  return {joint.permuted(order), pool.log_scale};
}

double log_evidence_probability(const BayesianNetwork& net, const Evidence& ev) {
  return joint_marginal(net, {}, ev).log_scale;
}

bool evidence_possible(const BayesianNetwork& net, const Evidence& ev) {
  try {
    log_evidence_probability(net, ev);
    return true;
  } catch (const ImpossibleEvidence&) {
    return false;
  }
}

Posterior posterior(const BayesianNetwork& net, VarId target, const Evidence& ev) {
  const VarId keep[] = {target};
  auto joint = joint_marginal(net, keep, ev);
  Posterior p;
  p.target = target;
  p.probabilities = joint.factor.values();
  p.log_evidence_probability = joint.log_scale;
  p.evidence_probability = std::exp(joint.log_scale);
  return p;
}

MpeResult mpe(const BayesianNetwork& net, const Evidence& ev) {
  std::vector<char> all(net.size(), 1);
  Pool pool = reduced_factors(net, all, ev);
  std::vector<VarId> eliminate;
  for (VarId v = 0; v < net.size(); ++v)
    if (!ev.contains(v)) eliminate.push_back(v);
  const auto sc = scopes(pool.factors);
  const auto order = min_fill_order(net, eliminate, sc);

  std::vector<std::pair<VarId, Factor>> trace;
  trace.reserve(order.size());
  for (VarId v : order) {
    Factor prod = take_product(pool.factors, v);
    Factor f = prod.max_out(v);
    normalize(f, true);
    trace.emplace_back(v, std::move(prod));
    pool.factors.push_back(std::move(f));
  }
  for (const auto& f : pool.factors)
    if (f.values()[0] == 0.0) impossible();

  MpeResult out;
  out.assignment.assign(net.size(), kUnset);
  for (const auto& [v, s] : ev.items()) out.assignment[v] = s;
  for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
    const auto& [v, f] = *it;
    Factor g = f;
    for (VarId u : f.scope())
      if (u != v) g = g.reduce(u, out.assignment[u]);
    const auto& vals = g.values();
    out.assignment[v] = static_cast<StateId>(std::max_element(vals.begin(), vals.end()) - vals.begin());
  }
  out.log_probability = 0.0;
  for (VarId v = 0; v < net.size(); ++v) {
    const Cpt& c = net.cpt(v);
    out.log_probability += std::log(c.at(parent_config_index(c, out.assignment), out.assignment[v]));
  }
  out.probability = joint_probability(net, out.assignment);
  if (out.probability == 0.0 && !std::isfinite(out.log_probability)) impossible();
  return out;
}

double symmetrized_kl(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ContractError("symmetrized_kl: distributions differ in support size");
  double d = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] < 0.0 || q[i] < 0.0) throw ContractError("symmetrized_kl: negative probability");
    if (p[i] == 0.0 && q[i] == 0.0) continue;
    if (p[i] == 0.0 || q[i] == 0.0) return std::numeric_limits<double>::infinity();
    d += p[i] * std::log(p[i] / q[i]) + q[i] * std::log(q[i] / p[i]);
  }
  return std::max(d, 0.0);
}

std::vector<std::pair<std::string, std::string>> impossible_culprits(const BayesianNetwork& net,
                                                                     const Evidence& ev) {
  std::vector<std::pair<std::string, std::string>> culprits;
  Evidence current = ev;
  while (!current.empty() && !evidence_possible(net, current)) {
    std::optional<VarId> found;
    for (const auto& [v, s] : current.items()) {
      Evidence trial = current;
      trial.erase(v);
      if (evidence_possible(net, trial)) {
        found = v;
        break;
      }
    }
    VarId drop = found ? *found : current.items().begin()->first;
    culprits.emplace_back(net.variable(drop).name(),
                          net.variable(drop).states()[*current.get(drop)]);
    current.erase(drop);
    if (found) break;
  }
  return culprits;
}

Posterior scenario(const BayesianNetwork& net, VarId target, const Evidence& ev, std::string label) {
  try {
    Posterior p = posterior(net, target, ev);
    p.label = std::move(label);
    return p;
  } catch (const ImpossibleEvidence&) {
    auto culprits = impossible_culprits(net, ev);
    std::string msg = "scenario '" + label + "' has impossible evidence";
    if (!culprits.empty()) {
      msg += "; culprit:";
      for (const auto& [v, s] : culprits) msg += " " + v + "=" + s;
    }
    throw ImpossibleEvidence(msg, std::move(culprits));
  }
}

}  // namespace bnlab::infer
