#include <algorithm>
#include <array>
#include <functional>
#include <numeric>

#include "bnlab/infer.hpp"

namespace bnlab::infer {

namespace {

std::vector<std::size_t> strides_of(const std::vector<std::size_t>& cards) {
  std::vector<std::size_t> s(cards.size(), 1);
  std::size_t acc = 1;
  for (std::size_t i = cards.size(); i-- > 0;) {
    s[i] = acc;
    acc *= cards[i];
  }
  return s;
}

std::size_t volume(const std::vector<std::size_t>& cards) {
  std::size_t v = 1;
  for (auto c : cards) v *= c;
  return v;
}

// Walks every index of `cards` (last digit fastest) while keeping linear
// offsets into other tables whose per-digit strides are given.
template <std::size_t K, class Body>
void odometer(const std::vector<std::size_t>& cards,
              const std::array<std::vector<std::size_t>, K>& strides,
              std::array<std::size_t, K> offsets, Body&& body) {
  const std::size_t total = volume(cards);
  const std::size_t d = cards.size();
  std::vector<std::size_t> idx(d, 0);
  for (std::size_t i = 0; i < total; ++i) {
    body(i, offsets);
    for (std::size_t k = d; k-- > 0;) {
      ++idx[k];
      for (std::size_t t = 0; t < K; ++t) offsets[t] += strides[t][k];
      if (idx[k] < cards[k]) break;
      for (std::size_t t = 0; t < K; ++t) offsets[t] -= strides[t][k] * cards[k];
      idx[k] = 0;
    }
  }
}

}  // namespace

Factor::Factor(std::vector<VarId> scope, std::vector<std::size_t> cards, std::vector<double> values)
    : scope_(std::move(scope)), cards_(std::move(cards)), values_(std::move(values)) {
  if (scope_.size() != cards_.size()) throw ContractError("factor scope and cardinalities differ");
  if (values_.size() != volume(cards_)) throw ContractError("factor value count mismatch");
}

Factor Factor::from_cpt(const Cpt& cpt) {
  // CPT layout is (parents..., child) with the child fastest, which is exactly
  // the factor layout for scope = parents followed by the child.
  std::vector<VarId> scope = cpt.parents();
  scope.push_back(cpt.variable());
  std::vector<std::size_t> cards = cpt.parent_cardinalities();
  cards.push_back(cpt.cardinality());
  return Factor(std::move(scope), std::move(cards), cpt.table());
}

bool Factor::contains(VarId v) const {
  return std::find(scope_.begin(), scope_.end(), v) != scope_.end();
}

std::size_t Factor::position(VarId v) const {
  return static_cast<std::size_t>(std::find(scope_.begin(), scope_.end(), v) - scope_.begin());
}

double Factor::sum() const {
  double s = 0.0;
  for (double x : values_) s += x;
  return s;
}

Factor Factor::reduce(VarId v, StateId s) const {
  const std::size_t pos = position(v);
  if (pos == scope_.size()) return *this;
  if (s >= cards_[pos]) throw ContractError("evidence state out of range");
  const auto src = strides_of(cards_);
  std::vector<VarId> scope;
  std::vector<std::size_t> cards, read;
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    if (i == pos) continue;
    scope.push_back(scope_[i]);
    cards.push_back(cards_[i]);
    read.push_back(src[i]);
  }
  std::vector<double> out(volume(cards));
  odometer<1>(cards, {read}, {s * src[pos]},
              [&](std::size_t i, const std::array<std::size_t, 1>& off) { out[i] = values_[off[0]]; });
  return Factor(std::move(scope), std::move(cards), std::move(out));
}

namespace {

template <class Combine>
Factor marginalize(const std::vector<VarId>& scope_in, const std::vector<std::size_t>& cards_in,
                   const std::vector<double>& values, std::size_t pos, double init, Combine&& combine) {
  std::vector<VarId> scope;
  std::vector<std::size_t> cards;
  for (std::size_t i = 0; i < scope_in.size(); ++i) {
    if (i == pos) continue;
    scope.push_back(scope_in[i]);
    cards.push_back(cards_in[i]);
  }
  const auto dst = strides_of(cards);
  std::vector<std::size_t> write(scope_in.size(), 0);
  for (std::size_t i = 0, j = 0; i < scope_in.size(); ++i)
    if (i != pos) write[i] = dst[j++];
  std::vector<double> out(volume(cards), init);
  odometer<1>(cards_in, {write}, {0},
              [&](std::size_t i, const std::array<std::size_t, 1>& off) {
                out[off[0]] = combine(out[off[0]], values[i]);
              });
  return Factor(std::move(scope), std::move(cards), std::move(out));
}

}  // namespace

Factor Factor::sum_out(VarId v) const {
  const std::size_t pos = position(v);
  if (pos == scope_.size()) return *this;
  return marginalize(scope_, cards_, values_, pos, 0.0, std::plus<>{});
}

Factor Factor::max_out(VarId v) const {
  const std::size_t pos = position(v);
  if (pos == scope_.size()) return *this;
  return marginalize(scope_, cards_, values_, pos, 0.0,
                     [](double a, double b) { return std::max(a, b); });
}

Factor Factor::permuted(const std::vector<VarId>& order) const {
  if (order.size() != scope_.size()) throw ContractError("permutation has wrong size");
  const auto src = strides_of(cards_);
  std::vector<std::size_t> cards, read;
  for (VarId v : order) {
    std::size_t pos = position(v);
    if (pos == scope_.size()) throw ContractError("permutation names a variable outside the scope");
    cards.push_back(cards_[pos]);
    read.push_back(src[pos]);
  }
  std::vector<double> out(values_.size());
  odometer<1>(cards, {read}, {0},
              [&](std::size_t i, const std::array<std::size_t, 1>& off) { out[i] = values_[off[0]]; });
  return Factor(order, std::move(cards), std::move(out));
}

Factor operator*(const Factor& a, const Factor& b) {
  std::vector<VarId> scope = a.scope_;
  std::vector<std::size_t> cards = a.cards_;
  for (std::size_t i = 0; i < b.scope_.size(); ++i)
    if (!a.contains(b.scope_[i])) {
      scope.push_back(b.scope_[i]);
      cards.push_back(b.cards_[i]);
    }
  const auto sa = strides_of(a.cards_);
  const auto sb = strides_of(b.cards_);
  std::vector<std::size_t> ra(scope.size(), 0), rb(scope.size(), 0);
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (std::size_t p = a.position(scope[i]); p < a.scope_.size()) ra[i] = sa[p];
    if (std::size_t p = b.position(scope[i]); p < b.scope_.size()) rb[i] = sb[p];
  }
  std::vector<double> out(volume(cards));
  odometer<2>(cards, {ra, rb}, {0, 0}, [&](std::size_t i, const std::array<std::size_t, 2>& off) {
    out[i] = a.values_[off[0]] * b.values_[off[1]];
  });
  return Factor(std::move(scope), std::move(cards), std::move(out));
}

}  // namespace bnlab::infer
