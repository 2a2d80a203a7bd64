#include <algorithm>
#include <cmath>
#include <exception>
#include <ostream>

#include "bnlab/format.hpp"
#include "bnlab/learn.hpp"

namespace bnlab::learn {

namespace {

void check_boot(const BootstrapConfig& boot) {
  if (boot.replicates < 1) throw ContractError("bootstrap needs at least one replicate");
  if (!(boot.threshold > 0.0 && boot.threshold <= 1.0))
    throw ContractError("bootstrap threshold must lie in (0, 1]");
}

Dag run_replicate(const Dataset& data, const LearnConfig& config, std::size_t index) {
  auto w = bootstrap_weights(data.rows(), config.seed + index);
  return tabu_search(data, config, w);
}

BootstrapResult merge(const Dataset& data, const std::vector<Dag>& dags, const BootstrapConfig& boot,
                      const LearnConfig& config) {
  const std::size_t n = data.cols();
  std::vector<std::size_t> forward(n * n, 0);  // forward[a * n + b] counts a -> b
  for (const auto& d : dags)
    for (const auto& a : d.arcs()) ++forward[a.parent * n + a.child];

  BootstrapResult out;
  out.nodes = data.names();
  out.replicates = dags.size();
  out.threshold = boot.threshold;
  for (VarId a = 0; a < n; ++a)
    for (VarId b = a + 1; b < n; ++b) {
      EdgeTally t{a, b, forward[a * n + b], forward[b * n + a], 0.0};
      if (t.total() == 0) continue;
      t.frequency = static_cast<double>(t.total()) / static_cast<double>(dags.size());
      out.edges.push_back(t);
    }
  out.consensus = consensus_from_tallies(out.nodes, out.edges, out.replicates, out.threshold,
                                         config.constraints);
  return out;
}

Arc majority(const EdgeTally& t, const std::vector<std::string>& nodes) {
  if (t.a_to_b > t.b_to_a) return {t.a, t.b};
  if (t.b_to_a > t.a_to_b) return {t.b, t.a};
  return nodes[t.a] < nodes[t.b] ? Arc{t.a, t.b} : Arc{t.b, t.a};
}

}  // namespace

double BootstrapResult::frequency(VarId u, VarId v) const {
  VarId a = std::min(u, v), b = std::max(u, v);
  auto it = std::lower_bound(edges.begin(), edges.end(), std::pair{a, b},
                             [](const EdgeTally& t, const std::pair<VarId, VarId>& k) {
                               return std::pair{t.a, t.b} < k;
                             });
  if (it == edges.end() || it->a != a || it->b != b) return 0.0;
  return it->frequency;
}

std::vector<std::uint32_t> bootstrap_weights(std::size_t rows, std::uint64_t seed) {
  std::vector<std::uint32_t> w(rows, 0);
  if (rows == 0) return w;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < rows; ++i) ++w[uniform_below(rng, rows)];
  return w;
}

BootstrapResult bootstrap_consensus_serial(const Dataset& data, const BootstrapConfig& boot,
                                           const LearnConfig& config) {
  check_boot(boot);
  std::vector<Dag> dags;
  dags.reserve(boot.replicates);
  for (std::size_t r = 0; r < boot.replicates; ++r) dags.push_back(run_replicate(data, config, r));
  return merge(data, dags, boot, config);
}

BootstrapResult bootstrap_consensus(const Dataset& data, const BootstrapConfig& boot,
                                    const LearnConfig& config) {
  check_boot(boot);
  const auto reps = static_cast<std::int64_t>(boot.replicates);
  std::vector<Dag> dags(boot.replicates);
  std::vector<std::exception_ptr> errors(boot.replicates);
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t r = 0; r < reps; ++r) {
    try {
      dags[static_cast<std::size_t>(r)] = run_replicate(data, config, static_cast<std::size_t>(r));
    } catch (...) {
      errors[static_cast<std::size_t>(r)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return merge(data, dags, boot, config);
}

Dag consensus_from_tallies(const std::vector<std::string>& nodes, std::span<const EdgeTally> edges,
                           std::size_t replicates, double threshold, const Constraints& constraints) {
  std::vector<Arc> arcs;
  std::map<Arc, double> strength;
  for (const auto& t : edges) {
    // count / B >= threshold, with slack for threshold * B landing just above an integer
    if (static_cast<double>(t.total()) < threshold * static_cast<double>(replicates) - 1e-9) continue;
    Arc a = majority(t, nodes);
    if (!constraints.allows(a.parent, a.child)) {
      Arc flipped{a.child, a.parent};
      if (!constraints.allows(flipped.parent, flipped.child)) continue;
      a = flipped;
    }
    arcs.push_back(a);
    strength[a] = t.frequency;
  }
  for (const auto& r : constraints.required)
    if (!strength.count(r)) {
      arcs.push_back(r);
      strength[r] = 1.0;
    }
  return break_cycles(nodes, std::move(arcs), strength, constraints.required);
}

Dag break_cycles(const std::vector<std::string>& nodes, std::vector<Arc> arcs,
                 const std::map<Arc, double>& strength, const std::set<Arc>& keep) {
  for (const auto& a : arcs)
    if (!strength.count(a))
      throw ContractError("break_cycles: no strength for arc " + nodes.at(a.parent) + " -> " +
                          nodes.at(a.child));
  while (true) {
    auto cycle = find_cycle(nodes.size(), arcs);
    if (cycle.empty()) break;
    const Arc* weakest = nullptr;
    for (const auto& a : cycle) {
      if (keep.count(a)) continue;
      if (!weakest) {
        weakest = &a;
        continue;
      }
      double sa = strength.at(a), sw = strength.at(*weakest);
      bool better = sa < sw || (sa == sw && std::pair{nodes[a.parent], nodes[a.child]} <
                                                std::pair{nodes[weakest->parent], nodes[weakest->child]});
      if (better) weakest = &a;
    }
    if (!weakest) throw StructuralError("cycle made only of required arcs");
    Arc gone = *weakest;
    arcs.erase(std::find(arcs.begin(), arcs.end(), gone));
  }
  return Dag(nodes, arcs);
}

void write_edge_table(std::ostream& out, const BootstrapResult& result) {
  out << "parent child frequency direction_fraction\n";
  for (const auto& t : result.edges) {
    Arc a = majority(t, result.nodes);
    std::size_t along = a.parent == t.a ? t.a_to_b : t.b_to_a;
    out << result.nodes[a.parent] << ' ' << result.nodes[a.child] << ' ' << format_number(t.frequency)
        << ' ' << format_number(static_cast<double>(along) / static_cast<double>(t.total())) << '\n';
  }
}

}  // namespace bnlab::learn
