#include <algorithm>
#include <cmath>

#include "bnlab/sensitivity.hpp"

namespace bnlab::sensitivity {

namespace {

void check_pair(const BayesianNetwork& net, VarId x, VarId target) {
  if (x >= net.size() || target >= net.size()) throw ContractError("variable out of range");
  if (x == target) throw ContractError("influence of a variable on itself is undefined");
}

// Normalized joint over (x, target) as a row-major rx * rt table.
std::vector<double> pair_joint(const BayesianNetwork& net, std::span<const VarId> xs, VarId target,
                               const Evidence& ev) {
  std::vector<VarId> keep(xs.begin(), xs.end());
  keep.push_back(target);
  return infer::joint_marginal(net, keep, ev).factor.values();
}

}  // namespace

double mutual_information(const BayesianNetwork& net, VarId x, VarId target, const Evidence& ev) {
  check_pair(net, x, target);
  const VarId xs[] = {x};
  const auto joint = pair_joint(net, xs, target, ev);
  const std::size_t rx = net.cardinality(x), rt = net.cardinality(target);
  std::vector<double> px(rx, 0.0), pt(rt, 0.0);
  for (std::size_t i = 0; i < rx; ++i)
    for (std::size_t t = 0; t < rt; ++t) {
      px[i] += joint[i * rt + t];
      pt[t] += joint[i * rt + t];
    }
  double mi = 0.0;
  for (std::size_t i = 0; i < rx; ++i)
    for (std::size_t t = 0; t < rt; ++t) {
      const double p = joint[i * rt + t];
      if (p > 0.0) mi += p * std::log(p / (px[i] * pt[t]));
    }
  return std::max(mi, 0.0);
}

SobolIndex sobol(const BayesianNetwork& net, std::span<const VarId> xs, VarId target, const Evidence& ev) {
  if (xs.empty()) throw ContractError("sobol needs at least one input variable");
  for (VarId x : xs) check_pair(net, x, target);
  const auto joint = pair_joint(net, xs, target, ev);
  const std::size_t rt = net.cardinality(target);
  const std::size_t configs = joint.size() / rt;

  std::vector<double> pt(rt, 0.0), px(configs, 0.0);
  for (std::size_t i = 0; i < configs; ++i)
    for (std::size_t t = 0; t < rt; ++t) {
      px[i] += joint[i * rt + t];
      pt[t] += joint[i * rt + t];
    }
  double total = 0.0;
  for (double p : pt) total += p * (1.0 - p);
  if (total < 1e-15) throw ContractError("sobol index undefined for a degenerate target");

  SobolIndex out;
  out.per_state.assign(rt, 0.0);
  double explained = 0.0;
  for (std::size_t t = 0; t < rt; ++t) {
    double var = 0.0;
    for (std::size_t i = 0; i < configs; ++i) {
      if (px[i] == 0.0) continue;
      const double dev = joint[i * rt + t] / px[i] - pt[t];
      var += px[i] * dev * dev;
    }
    const double v_t = pt[t] * (1.0 - pt[t]);
    if (v_t > 0.0) out.per_state[t] = std::clamp(var / v_t, 0.0, 1.0);
    explained += var;
  }
  out.aggregate = std::clamp(explained / total, 0.0, 1.0);
  return out;
}

double sobol_index(const BayesianNetwork& net, VarId x, VarId target, const Evidence& ev) {
  const VarId xs[] = {x};
  return sobol(net, xs, target, ev).aggregate;
}

double arc_diameter(const BayesianNetwork& net, Arc arc) {
  if (!net.dag().has_arc(arc.parent, arc.child)) throw ContractError("arc_diameter: arc not in the DAG");
  const Cpt& cpt = net.cpt(arc.child);
  const auto& parents = cpt.parents();
  const std::size_t pos =
      static_cast<std::size_t>(std::find(parents.begin(), parents.end(), arc.parent) - parents.begin());
  const std::size_t stride = cpt.strides()[pos];
  const std::size_t rp = cpt.parent_cardinalities()[pos];
  const std::size_t r = cpt.cardinality();

  double best = 0.0;
  for (std::size_t row = 0; row < cpt.rows(); ++row) {
    if ((row / stride) % rp != 0) continue;  // visit each co-parent configuration once
    for (std::size_t s1 = 0; s1 < rp; ++s1)
      for (std::size_t s2 = s1 + 1; s2 < rp; ++s2) {
        auto p = cpt.row(row + s1 * stride);
        auto q = cpt.row(row + s2 * stride);
        double l1 = 0.0;
        for (std::size_t k = 0; k < r; ++k) l1 += std::abs(p[k] - q[k]);
        best = std::max(best, l1 / 2.0);
      }
  }
  return std::min(best, 1.0);
}

}  // namespace bnlab::sensitivity
