#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>

#include "bnlab/infer.hpp"

namespace bnlab::infer {

namespace {

std::vector<std::pair<VarId, StateId>> scan_pairs(const BayesianNetwork& net, VarId target) {
  if (target >= net.size()) throw ContractError("scan target out of range");
  std::vector<std::pair<VarId, StateId>> pairs;
  for (VarId v = 0; v < net.size(); ++v) {
    if (v == target) continue;
    for (StateId s = 0; s < net.cardinality(v); ++s) pairs.emplace_back(v, s);
  }
  return pairs;
}

std::optional<ScanRow> scan_one(const BayesianNetwork& net, VarId target,
                                const std::vector<double>& marginal, VarId v, StateId s) {
  Evidence ev;
  ev.set(net, v, s);
  try {
    ScanRow row{v, s, posterior(net, target, ev), 0.0};
    row.divergence = symmetrized_kl(row.posterior.probabilities, marginal);
    return row;
  } catch (const ImpossibleEvidence&) {
    return std::nullopt;
  }
}

ScanResult assemble(VarId target, std::vector<double> marginal,
                    const std::vector<std::pair<VarId, StateId>>& pairs,
                    std::vector<std::optional<ScanRow>>& rows) {
  ScanResult out;
  out.target = target;
  out.marginal = std::move(marginal);
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (rows[i])
      out.rows.push_back(std::move(*rows[i]));
    else
      out.impossible.push_back(pairs[i]);
  }
  // rows are already in (variable, state) order, so a stable sort settles ties
  std::stable_sort(out.rows.begin(), out.rows.end(),
                   [](const ScanRow& a, const ScanRow& b) { return a.divergence > b.divergence; });
  return out;
}

}  // namespace

ScanResult evidence_scan_serial(const BayesianNetwork& net, VarId target) {
  const auto pairs = scan_pairs(net, target);
  auto marginal = posterior(net, target).probabilities;
  std::vector<std::optional<ScanRow>> rows(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i)
    rows[i] = scan_one(net, target, marginal, pairs[i].first, pairs[i].second);
  return assemble(target, std::move(marginal), pairs, rows);
}

ScanResult evidence_scan(const BayesianNetwork& net, VarId target) {
  const auto pairs = scan_pairs(net, target);
  auto marginal = posterior(net, target).probabilities;
  std::vector<std::optional<ScanRow>> rows(pairs.size());
  std::vector<std::exception_ptr> errors(pairs.size());
  const auto n = static_cast<std::int64_t>(pairs.size());
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t i = 0; i < n; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      rows[k] = scan_one(net, target, marginal, pairs[k].first, pairs[k].second);
    } catch (...) {
      errors[k] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return assemble(target, std::move(marginal), pairs, rows);
}

}  // namespace bnlab::infer
