#include <algorithm>

#include "bnlab/learn.hpp"

namespace bnlab::learn {

namespace {

std::vector<VarId> with(std::vector<VarId> parents, VarId extra) {
  parents.insert(std::upper_bound(parents.begin(), parents.end(), extra), extra);
  return parents;
}

std::vector<VarId> without(std::vector<VarId> parents, VarId gone) {
  parents.erase(std::find(parents.begin(), parents.end(), gone));
  return parents;
}

}  // namespace

ScoredDag::ScoredDag(FamilyScorer& scorer, Dag dag) : scorer_(&scorer), dag_(std::move(dag)) {
  family_.resize(dag_.size());
  for (VarId v = 0; v < dag_.size(); ++v) family_[v] = scorer_->family(v, dag_.parents(v));
}

double ScoredDag::total() const {
  double s = 0.0;
  for (double f : family_) s += f;
  return s;
}

bool ScoredDag::legal(const Move& m) const {
  if (m.parent == m.child || m.parent >= dag_.size() || m.child >= dag_.size()) return false;
  switch (m.kind) {
    case Move::Kind::add:
      return !dag_.has_arc(m.parent, m.child) && !dag_.has_arc(m.child, m.parent) &&
             !dag_.has_path(m.child, m.parent);
    case Move::Kind::remove:
      return dag_.has_arc(m.parent, m.child);
    case Move::Kind::reverse: {
      if (!dag_.has_arc(m.parent, m.child)) return false;
      Dag trial = dag_;
      trial.remove_arc(m.parent, m.child);
      return !trial.has_path(m.parent, m.child);
    }
  }
  return false;
}

ScoredDag::Rescore ScoredDag::rescore(const Move& m) {
  Rescore r;
  switch (m.kind) {
    case Move::Kind::add:
      r.child = scorer_->family(m.child, with(dag_.parents(m.child), m.parent));
      r.delta = r.child - family_[m.child];
      break;
    case Move::Kind::remove:
      r.child = scorer_->family(m.child, without(dag_.parents(m.child), m.parent));
      r.delta = r.child - family_[m.child];
      break;
    case Move::Kind::reverse:
      r.child = scorer_->family(m.child, without(dag_.parents(m.child), m.parent));
      r.parent = scorer_->family(m.parent, with(dag_.parents(m.parent), m.child));
      r.delta = (r.child - family_[m.child]) + (r.parent - family_[m.parent]);
      break;
  }
  return r;
}

double ScoredDag::total_after(const Move& m, const Rescore& r) const {
  double s = 0.0;
  for (VarId v = 0; v < family_.size(); ++v) {
    if (v == m.child)
      s += r.child;
    else if (m.kind == Move::Kind::reverse && v == m.parent)
      s += r.parent;
    else
      s += family_[v];
  }
  return s;
}

void ScoredDag::apply(const Move& m, const Rescore& r) {
  switch (m.kind) {
    case Move::Kind::add: dag_.add_arc(m.parent, m.child); break;
    case Move::Kind::remove: dag_.remove_arc(m.parent, m.child); break;
    case Move::Kind::reverse:
      dag_.reverse_arc(m.parent, m.child);
      family_[m.parent] = r.parent;
      break;
  }
  family_[m.child] = r.child;
}

}  // namespace bnlab::learn
