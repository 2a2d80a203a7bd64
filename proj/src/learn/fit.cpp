#include "bnlab/learn.hpp"

namespace bnlab::learn {

BayesianNetwork fit_parameters(const Dag& dag, const Dataset& data, double alpha) {
  if (!(alpha > 0.0)) throw ContractError("Dirichlet alpha must be positive");
  if (dag.nodes() != data.names()) throw ContractError("fit_parameters: DAG nodes differ from dataset columns");

  std::vector<Cpt> cpts;
  cpts.reserve(dag.size());
  for (VarId v = 0; v < dag.size(); ++v) {
    const auto& parents = dag.parents(v);
    auto stats = count_stats(data, v, parents);
    const std::size_t r = stats.cardinality;
    std::vector<double> table(stats.rows * r);
    for (std::size_t j = 0; j < stats.rows; ++j) {
      const double denom = static_cast<double>(stats.row_sums[j]) + static_cast<double>(r) * alpha;
      for (std::size_t k = 0; k < r; ++k)
        table[j * r + k] = (static_cast<double>(stats.count(j, k)) + alpha) / denom;
    }
    std::vector<std::size_t> cards;
    for (VarId p : parents) cards.push_back(data.variable(p).cardinality());
    cpts.emplace_back(v, r, parents, std::move(cards), std::move(table));
  }
  return BayesianNetwork(data.variables(), dag, std::move(cpts));
}

Dataset forward_sample(const BayesianNetwork& net, std::size_t rows, std::uint64_t seed) {
  const auto order = topological_order(net.dag());
  std::mt19937_64 rng(seed);
  std::vector<std::vector<Dataset::Code>> cols(net.size(), std::vector<Dataset::Code>(rows));
  Assignment a(net.size(), kUnset);
  for (std::size_t i = 0; i < rows; ++i) {
    for (VarId v : order) {
      const Cpt& c = net.cpt(v);
      auto row = c.row(parent_config_index(c, a));
      const double u = unit_uniform(rng);
      double cum = 0.0;
      StateId pick = kUnset;
      for (StateId k = 0; k < row.size(); ++k) {
        if (row[k] > 0.0) pick = k;  // tracks the last positive state for round-off at the top
        cum += row[k];
        if (u < cum && row[k] > 0.0) {
          pick = k;
          break;
        }
      }
      a[v] = pick;
      cols[v][i] = static_cast<Dataset::Code>(pick);
    }
  }
  return Dataset(net.variables(), std::move(cols));
}

}  // namespace bnlab::learn
