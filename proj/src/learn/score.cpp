#include <algorithm>
#include <cmath>

#include "bnlab/learn.hpp"

namespace bnlab::learn {

std::uint64_t SufficientStats::total() const {
  std::uint64_t t = 0;
  for (auto s : row_sums) t += s;
  return t;
}

SufficientStats count_stats(const Dataset& data, VarId variable, std::span<const VarId> parents,
                            RowWeights weights) {
  if (variable >= data.cols()) throw ContractError("count_stats: unknown variable column");
  for (VarId p : parents) {
    if (p >= data.cols()) throw ContractError("count_stats: unknown parent column");
    if (p == variable) throw ContractError("count_stats: variable listed among its parents");
  }
  if (!weights.empty() && weights.size() != data.rows())
    throw ContractError("count_stats: weight vector length differs from row count");

  SufficientStats s;
  s.variable = variable;
  s.parents.assign(parents.begin(), parents.end());
  s.cardinality = data.variable(variable).cardinality();
  std::vector<std::size_t> strides(parents.size(), 1);
  for (std::size_t p = parents.size(); p-- > 0;) {
    strides[p] = s.rows;
    s.rows *= data.variable(parents[p]).cardinality();
  }
  s.counts.assign(s.rows * s.cardinality, 0);
  s.row_sums.assign(s.rows, 0);

  const auto child = data.column(variable);
  std::vector<std::span<const Dataset::Code>> cols;
  for (VarId p : parents) cols.push_back(data.column(p));
  for (std::size_t i = 0; i < data.rows(); ++i) {
    const std::uint64_t w = weights.empty() ? 1 : weights[i];
    if (w == 0) continue;
    std::size_t j = 0;
    for (std::size_t p = 0; p < cols.size(); ++p) j += cols[p][i] * strides[p];
    s.counts[j * s.cardinality + child[i]] += w;
    s.row_sums[j] += w;
  }
  return s;
}

double bic_family(const SufficientStats& stats, std::uint64_t n) {
  if (n == 0) throw ContractError("bic_family needs a positive sample size");
  double loglik = 0.0;
  for (std::size_t j = 0; j < stats.rows; ++j) {
    const double nij = static_cast<double>(stats.row_sums[j]);
    if (stats.row_sums[j] == 0) continue;
    for (std::size_t k = 0; k < stats.cardinality; ++k) {
      const auto nijk = stats.count(j, k);
      if (nijk == 0) continue;
      const double c = static_cast<double>(nijk);
      loglik += c * std::log(c / nij);
    }
  }
  const double free_params =
      static_cast<double>(stats.rows) * static_cast<double>(stats.cardinality - 1);
  return loglik - free_params / 2.0 * std::log(static_cast<double>(n));
}

namespace {

std::uint64_t total_weight(const Dataset& data, RowWeights weights) {
  if (weights.empty()) return data.rows();
  std::uint64_t n = 0;
  for (auto w : weights) n += w;
  return n;
}

}  // namespace

double bic_score(const Dag& dag, const Dataset& data, RowWeights weights) {
  if (dag.size() != data.cols()) throw ContractError("bic_score: DAG and dataset differ in size");
  const auto n = total_weight(data, weights);
  double total = 0.0;
  for (VarId v = 0; v < dag.size(); ++v)
    total += bic_family(count_stats(data, v, dag.parents(v), weights), n);
  return total;
}

FamilyScorer::FamilyScorer(const Dataset& data, RowWeights weights)
    : data_(data), weights_(weights), n_(total_weight(data, weights)) {
  if (n_ == 0) throw ContractError("structure learning needs a non-empty dataset");
}

double FamilyScorer::family(VarId v, std::span<const VarId> parents) {
  std::vector<VarId> sorted(parents.begin(), parents.end());
  std::sort(sorted.begin(), sorted.end());
  auto key = std::pair{v, std::move(sorted)};
  if (auto it = cache_.find(key); it != cache_.end()) return it->second;
  double score = bic_family(count_stats(data_, v, key.second, weights_), n_);
  cache_.emplace(std::move(key), score);
  return score;
}

}  // namespace bnlab::learn
