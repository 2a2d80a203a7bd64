#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <optional>

#include "bnlab/learn.hpp"

namespace bnlab::learn {

namespace {

Move undo_of(const Move& m) {
  switch (m.kind) {
    case Move::Kind::add: return {Move::Kind::remove, m.parent, m.child};
    case Move::Kind::remove: return {Move::Kind::add, m.parent, m.child};
    case Move::Kind::reverse: return {Move::Kind::reverse, m.child, m.parent};
  }
  return m;
}

// Empty graph plus the required arcs, validated against the other constraints.
Dag required_dag(const Dataset& data, const LearnConfig& config) {
  Dag dag(data.names());
  const std::size_t n = data.cols();
  const auto& c = config.constraints;
  for (const auto& a : c.required) {
    if (a.parent >= n || a.child >= n) throw ContractError("required arc names an unknown node");
    if (!c.allows(a.parent, a.child))
      throw StructuralError("required arc " + dag.name(a.parent) + " -> " + dag.name(a.child) +
                            " conflicts with a forbidden or no-outgoing constraint");
    if (!dag.can_add(a.parent, a.child))
      throw StructuralError("required arc " + dag.name(a.parent) + " -> " + dag.name(a.child) +
                            " creates a cycle among required arcs");
    dag.add_arc(a.parent, a.child);
  }
  return dag;
}

class Search {
 public:
  Search(const Dataset& data, const LearnConfig& config, RowWeights weights)
      : config_(config), scorer_(data, weights), state_(scorer_, required_dag(data, config)) {
    order_.resize(data.cols());
    std::iota(order_.begin(), order_.end(), VarId{0});
    std::sort(order_.begin(), order_.end(),
              [&](VarId a, VarId b) { return state_.dag().name(a) < state_.dag().name(b); });
  }

  Dag run() {
    double best = state_.total();
    Dag best_dag = state_.dag();
    std::deque<Move> tabu;
    std::size_t stall = 0;

    while (stall < config_.max_non_improving) {
      auto cand = best_move(tabu, best);
      if (!cand) break;
      state_.apply(cand->move, cand->score);
      const double current = state_.total();
      tabu.push_back(undo_of(cand->move));
      while (tabu.size() > config_.tabu_tenure) tabu.pop_front();
      if (current > best + 1e-9 * std::max(1.0, std::abs(best))) {
        best = current;
        best_dag = state_.dag();
        stall = 0;
      } else {
        ++stall;
      }
    }
    return best_dag;
  }

 private:
  struct Candidate {
    Move move;
    ScoredDag::Rescore score;
  };

  bool parents_full(VarId v) const {
    return config_.max_parents != 0 && state_.dag().parents(v).size() >= config_.max_parents;
  }

  std::optional<Candidate> best_move(const std::deque<Move>& tabu, double best) {
    std::optional<Candidate> chosen;
    auto consider = [&](const Move& m) {
      Candidate c{m, state_.rescore(m)};
      bool is_tabu = std::find(tabu.begin(), tabu.end(), m) != tabu.end();
      if (is_tabu && !(state_.total_after(m, c.score) > best)) return;  // aspiration
      if (!chosen || c.score.delta > chosen->score.delta) chosen = c;
    };
    const auto& cons = config_.constraints;
    const Dag& dag = state_.dag();

    for (VarId p : order_)
      for (VarId c : order_) {
        if (p == c || dag.has_arc(p, c) || dag.has_arc(c, p)) continue;
        if (!cons.allows(p, c) || parents_full(c) || dag.has_path(c, p)) continue;
        consider({Move::Kind::add, p, c});
      }
    for (VarId p : order_)
      for (VarId c : order_) {
        if (p == c || !dag.has_arc(p, c) || cons.required.count({p, c})) continue;
        consider({Move::Kind::remove, p, c});
      }
    for (VarId p : order_)
      for (VarId c : order_) {
        if (p == c || !dag.has_arc(p, c) || cons.required.count({p, c})) continue;
        if (!cons.allows(c, p) || parents_full(p)) continue;
        const Move m{Move::Kind::reverse, p, c};
        if (!state_.legal(m)) continue;
        consider(m);
      }
    return chosen;
  }

  const LearnConfig& config_;
  FamilyScorer scorer_;
  ScoredDag state_;
  std::vector<VarId> order_;
};

}  // namespace

Dag tabu_search(const Dataset& data, const LearnConfig& config, RowWeights weights) {
  if (data.rows() == 0) throw ContractError("tabu_search needs a non-empty dataset");
  if (config.tabu_tenure < 1) throw ContractError("tabu tenure must be at least 1");
  return Search(data, config, weights).run();
}

}  // namespace bnlab::learn
