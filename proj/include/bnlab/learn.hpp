#pragma once

// Score-based structure learning for discrete networks: decomposable BIC,
// Tabu search over single-arc moves, bootstrap consensus with cycle breaking,
// and Dirichlet-smoothed parameter fitting.

#include <cstdint>
#include <map>
#include <random>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "bnlab/core.hpp"
#include "bnlab/data.hpp"

namespace bnlab::learn {

using data::Dataset;

/// Optional per-row multiplicities (bootstrap resamples). Empty = every row once.
using RowWeights = std::span<const std::uint32_t>;

struct SufficientStats {
  VarId variable = 0;
  std::vector<VarId> parents;          // in the order used for row indexing
  std::size_t cardinality = 0;         // r
  std::size_t rows = 1;                // q
  std::vector<std::uint64_t> counts;   // q * r, row-major
  std::vector<std::uint64_t> row_sums; // q

  std::uint64_t count(std::size_t row, StateId state) const { return counts[row * cardinality + state]; }
  std::uint64_t total() const;
};

SufficientStats count_stats(const Dataset& data, VarId variable, std::span<const VarId> parents,
                            RowWeights weights = {});

/// sum_jk N_ijk ln(N_ijk / N_ij) - q (r - 1) / 2 * ln N. Empty rows add nothing
/// to the likelihood but still count toward q.
double bic_family(const SufficientStats& stats, std::uint64_t n);

/// Sum of family scores in node order.
double bic_score(const Dag& dag, const Dataset& data, RowWeights weights = {});

struct Constraints {
  std::set<Arc> forbidden;
  std::set<Arc> required;
  std::set<VarId> no_outgoing;  // nodes that may not be parents

  bool allows(VarId parent, VarId child) const {
    return !forbidden.count({parent, child}) && !no_outgoing.count(parent);
  }
};

struct LearnConfig {
  std::size_t tabu_tenure = 10;
  std::size_t max_non_improving = 100;
  std::size_t max_parents = 0;  // 0 = unlimited
  Constraints constraints;
  std::uint64_t seed = 1;
};

/// Memoizes family scores and keeps the per-node score vector of a DAG so that
/// a single-arc move is rescored by touching only the changed families.
class FamilyScorer {
 public:
  FamilyScorer(const Dataset& data, RowWeights weights = {});

  double family(VarId v, std::span<const VarId> parents);
  std::uint64_t sample_size() const noexcept { return n_; }

 private:
  const Dataset& data_;
  RowWeights weights_;
  std::uint64_t n_;
  std::map<std::pair<VarId, std::vector<VarId>>, double> cache_;
};

struct Move {
  enum class Kind { add = 0, remove = 1, reverse = 2 };
  Kind kind;
  VarId parent;
  VarId child;
  bool operator==(const Move&) const = default;
};

/// A DAG with its cached per-family BIC scores. A single-arc move rescores
/// only the families it touches; total() re-sums the cached scores in node
/// order, which is exactly how bic_score() sums, so the two agree bit for bit.
class ScoredDag {
 public:
  ScoredDag(FamilyScorer& scorer, Dag dag);

  const Dag& dag() const noexcept { return dag_; }
  double family(VarId v) const { return family_.at(v); }
  double total() const;

  /// Acyclicity and arc presence only; constraints are the caller's concern.
  bool legal(const Move& m) const;

  struct Rescore {
    double child = 0.0;   // new family score of m.child
    double parent = 0.0;  // new family score of m.parent (reverse only)
    double delta = 0.0;   // change in total
  };
  /// Scores after `m` without applying it. Requires legal(m).
  Rescore rescore(const Move& m);
  /// Total after `m` without applying it, summed as total() would.
  double total_after(const Move& m, const Rescore& r) const;
  void apply(const Move& m, const Rescore& r);
  void apply(const Move& m) { apply(m, rescore(m)); }

 private:
  FamilyScorer* scorer_;
  Dag dag_;
  std::vector<double> family_;
};

/// Tabu search from the empty graph (plus required arcs). Each iteration
/// applies the best non-tabu legal move even when it lowers the score; a move
/// is tabu when it undoes one of the last `tabu_tenure` moves, unless it beats
/// the best score seen. Stops after `max_non_improving` consecutive moves
/// without a new best and returns the best DAG visited. Ties are resolved by
/// (move kind, parent name, child name).
Dag tabu_search(const Dataset& data, const LearnConfig& config, RowWeights weights = {});

struct EdgeTally {
  VarId a = 0;  // a < b
  VarId b = 0;
  std::size_t a_to_b = 0;
  std::size_t b_to_a = 0;
  double frequency = 0.0;  // (a_to_b + b_to_a) / replicates

  std::size_t total() const { return a_to_b + b_to_a; }
};

struct BootstrapResult {
  std::vector<std::string> nodes;
  std::size_t replicates = 0;
  double threshold = 0.5;
  std::vector<EdgeTally> edges;  // every pair seen at least once, sorted by (a, b)
  Dag consensus;

  /// Undirected frequency of the pair {u, v}, 0 if never seen.
  double frequency(VarId u, VarId v) const;
};

struct BootstrapConfig {
  std::size_t replicates = 2000;
  double threshold = 0.5;
};

/// Row multiplicities of replicate `index` (seed = base seed + index).
std::vector<std::uint32_t> bootstrap_weights(std::size_t rows, std::uint64_t seed);

/// Replicates run concurrently (OpenMP); tallies merge in replicate order, so
/// the result is identical to bootstrap_consensus_serial.
BootstrapResult bootstrap_consensus(const Dataset& data, const BootstrapConfig& boot,
                                    const LearnConfig& config);
BootstrapResult bootstrap_consensus_serial(const Dataset& data, const BootstrapConfig& boot,
                                           const LearnConfig& config);

/// Consensus graph from tallies: keeps pairs with frequency >= threshold,
/// orients each by majority (ties: lexicographically smaller name as parent),
/// then removes cycles.
Dag consensus_from_tallies(const std::vector<std::string>& nodes, std::span<const EdgeTally> edges,
                           std::size_t replicates, double threshold, const Constraints& constraints);

/// While a directed cycle exists, deletes its weakest arc (ties: lexicographic
/// by (parent name, child name)). Arcs in `keep` are never deleted; a cycle made
/// only of such arcs is a StructuralError.
Dag break_cycles(const std::vector<std::string>& nodes, std::vector<Arc> arcs,
                 const std::map<Arc, double>& strength, const std::set<Arc>& keep = {});

/// (N_ijk + alpha) / (N_ij + r alpha) for every family of `dag`; CPT parents in
/// ascending VarId order.
BayesianNetwork fit_parameters(const Dag& dag, const Dataset& data, double alpha = 1.0);

/// Ancestral sampling, deterministic for a given seed.
Dataset forward_sample(const BayesianNetwork& net, std::size_t rows, std::uint64_t seed);

/// Edge-frequency table, one "parent child frequency direction_fraction" line
/// per observed pair (majority orientation).
void write_edge_table(std::ostream& out, const BootstrapResult& result);

/// Uniform double in [0, 1) from 53 random bits (platform independent).
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, n) by rejection (platform independent).
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

}  // namespace bnlab::learn
