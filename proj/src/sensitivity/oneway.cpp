#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>

#include "bnlab/format.hpp"
#include "bnlab/sensitivity.hpp"

namespace bnlab::sensitivity {

ParameterHandle make_handle(const BayesianNetwork& net, VarId node, std::size_t row, StateId state) {
  if (node >= net.size()) throw ContractError("parameter handle names an unknown node");
  const Cpt& c = net.cpt(node);
  if (row >= c.rows()) throw ContractError("parameter handle row out of range");
  if (state >= c.cardinality()) throw ContractError("parameter handle state out of range");
  return {node, row, state, c.at(row, state)};
}

BayesianNetwork perturbed(const BayesianNetwork& net, const ParameterHandle& h, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw ContractError("perturbed parameter must lie in [0, 1]");
  const Cpt& c = net.cpt(h.node);
  auto row = c.row(h.row);
  const double theta0 = row[h.state];
  std::vector<double> values(row.begin(), row.end());
  const double others = static_cast<double>(values.size() - 1);
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k == h.state)
      values[k] = theta;
    else if (theta0 < 1.0)
      values[k] = std::min(1.0, row[k] * (1.0 - theta) / (1.0 - theta0));
    else
      values[k] = (1.0 - theta) / others;
  }
  return net.with_row(h.node, h.row, values);
}

namespace {

double log_prob(const BayesianNetwork& net, const Evidence& ev) {
  try {
    return infer::log_evidence_probability(net, ev);
  } catch (const ImpossibleEvidence&) {
    return -std::numeric_limits<double>::infinity();
  }
}

double scaled(double log_value, double log_ref) {
  return std::isinf(log_value) ? 0.0 : std::exp(log_value - log_ref);
}

}  // namespace

double OneWay::operator()(double theta) const {
  const double num = a * theta + b, den = c * theta + d;
  if (den != 0.0) return num / den;
  // numerator and denominator are affine, share this root, so the ratio tends to a / c
  return c != 0.0 ? a / c : std::numeric_limits<double>::quiet_NaN();
}

OneWay one_way_sensitivity(const BayesianNetwork& net, const ParameterHandle& handle, Event event,
                           const Evidence& ev, double window) {
  if (!(window >= 0.0)) throw ContractError("sensitivity window must be non-negative");
  const ParameterHandle h = make_handle(net, handle.node, handle.row, handle.state);
  if (event.target >= net.size() || event.state >= net.cardinality(event.target))
    throw ContractError("sensitivity event out of range");
  if (ev.contains(event.target)) throw ContractError("sensitivity event target is also observed");

  Evidence joint_ev = ev;
  joint_ev.set(net, event.target, event.state);

  // N and D are affine in theta; their values at 0 and 1 pin them down.
  double log_n[2], log_d[2];
  for (int end = 0; end < 2; ++end) {
    const auto moved = perturbed(net, h, static_cast<double>(end));
    log_d[end] = log_prob(moved, ev);
    log_n[end] = log_prob(moved, joint_ev);
  }
  const double ref = std::max(log_d[0], log_d[1]);
  if (std::isinf(ref)) throw ImpossibleEvidence("evidence is impossible for every value of the parameter");

  OneWay out;
  out.handle = h;
  const double n0 = scaled(log_n[0], ref), n1 = scaled(log_n[1], ref);
  const double d0 = scaled(log_d[0], ref), d1 = scaled(log_d[1], ref);
  out.a = n1 - n0;
  out.b = n0;
  out.c = d1 - d0;
  out.d = d0;

  // the third evaluation: the unperturbed network itself
  try {
    out.baseline = infer::posterior(net, event.target, ev).probabilities[event.state];
  } catch (const ImpossibleEvidence&) {
    out.baseline = out(h.value);
  }

  out.lo_theta = std::max(0.0, h.value * (1.0 - window));
  out.hi_theta = std::min(1.0, h.value * (1.0 + window));
  const double f_lo = out(out.lo_theta), f_hi = out(out.hi_theta);
  // a ratio of affine functions is monotone wherever the denominator keeps its sign
  out.low = std::min(f_lo, f_hi);
  out.high = std::max(f_lo, f_hi);
  return out;
}

namespace {

std::vector<ParameterHandle> all_handles(const BayesianNetwork& net, VarId target) {
  std::vector<ParameterHandle> hs;
  for (VarId v = 0; v < net.size(); ++v) {
    if (v == target) continue;
    const Cpt& c = net.cpt(v);
    for (std::size_t j = 0; j < c.rows(); ++j)
      for (StateId s = 0; s < c.cardinality(); ++s) hs.push_back({v, j, s, c.at(j, s)});
  }
  return hs;
}

std::vector<OneWay> rank(std::vector<OneWay> sweeps, std::size_t top_k) {
  std::stable_sort(sweeps.begin(), sweeps.end(),
                   [](const OneWay& x, const OneWay& y) { return x.width() > y.width(); });
  if (sweeps.size() > top_k) sweeps.resize(top_k);
  return sweeps;
}

void check_tornado(const BayesianNetwork& net, Event event, std::size_t top_k) {
  if (top_k < 1) throw ContractError("tornado needs top_k >= 1");
  if (event.target >= net.size()) throw ContractError("tornado target out of range");
}

}  // namespace

std::vector<OneWay> tornado_serial(const BayesianNetwork& net, Event event, const Evidence& ev,
                                   std::size_t top_k, double window) {
  check_tornado(net, event, top_k);
  const auto hs = all_handles(net, event.target);
  std::vector<OneWay> sweeps;
  sweeps.reserve(hs.size());
  for (const auto& h : hs) sweeps.push_back(one_way_sensitivity(net, h, event, ev, window));
  return rank(std::move(sweeps), top_k);
}

std::vector<OneWay> tornado(const BayesianNetwork& net, Event event, const Evidence& ev, std::size_t top_k,
                            double window) {
  check_tornado(net, event, top_k);
  const auto hs = all_handles(net, event.target);
  std::vector<OneWay> sweeps(hs.size());
  std::vector<std::exception_ptr> errors(hs.size());
  const auto n = static_cast<std::int64_t>(hs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      sweeps[k] = one_way_sensitivity(net, hs[k], event, ev, window);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return rank(std::move(sweeps), top_k);
}

std::map<VarId, double> node_sensitivity(const BayesianNetwork& net, VarId target, const Evidence& ev,
                                         double window) {
  if (target >= net.size()) throw ContractError("node_sensitivity target out of range");
  std::map<VarId, double> score;
  for (VarId v = 0; v < net.size(); ++v)
    if (v != target) score[v] = 0.0;
  const std::size_t all = std::numeric_limits<std::size_t>::max();
  for (StateId t = 0; t < net.cardinality(target); ++t)
    for (const auto& s : tornado(net, {target, t}, ev, all, window))
      score[s.handle.node] = std::max(score[s.handle.node], s.width());
  return score;
}

std::string describe(const BayesianNetwork& net, const ParameterHandle& h) {
  const Cpt& c = net.cpt(h.node);
  std::string out = net.variable(h.node).name();
  if (!c.parents().empty()) {
    out += '[';
    const auto states = c.decode(h.row);
    for (std::size_t p = 0; p < states.size(); ++p) {
      if (p) out += ',';
      const auto& pv = net.variable(c.parents()[p]);
      out += pv.name() + "=" + pv.states()[states[p]];
    }
    out += ']';
  }
  return out + "=" + net.variable(h.node).states()[h.state];
}

}  // namespace bnlab::sensitivity
