#pragma once

// Tabular ingestion and discretization: raw listings in, fully categorical
// Dataset out. Quantiles use linear interpolation at position (n - 1) * q of
// the sorted sample throughout.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bnlab/core.hpp"

namespace bnlab::data {

using Cell = std::variant<std::monostate, double, bool, std::string>;

inline bool is_missing(const Cell& c) { return std::holds_alternative<std::monostate>(c); }
std::optional<double> as_number(const Cell& c);
std::string as_text(const Cell& c);

/// Parses one field: empty / NA / NaN -> missing, true/false -> bool,
/// numbers -> double, everything else -> text.
Cell parse_cell(std::string_view field);

class RawTable {
 public:
  RawTable() = default;
  RawTable(std::vector<std::string> columns, std::vector<std::vector<Cell>> rows);

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<Cell>>& rows() const noexcept { return rows_; }
  std::size_t row_count() const noexcept { return rows_.size(); }

  std::optional<std::size_t> find(std::string_view column) const;
  std::size_t index(std::string_view column) const;

  /// Numeric view of a column; NaN for missing or non-numeric cells.
  std::vector<double> numeric_column(std::string_view column) const;

  void add_column(std::string name, std::vector<Cell> values);
  /// Keeps rows where mask[i] is true.
  RawTable select(const std::vector<bool>& mask) const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
};

RawTable read_delimited(std::istream& in, char delimiter = ',');
RawTable read_delimited_file(const std::string& path, char delimiter = ',');

// ---------------------------------------------------------------------------

enum class RuleKind { quantile, categorical, boolean, frequency_rank };

struct ColumnRule {
  std::string name;    // variable name in the Dataset
  std::string source;  // raw column (defaults to name)
  RuleKind kind = RuleKind::categorical;
  std::size_t k = 0;                // quantile bins
  std::vector<std::string> labels;  // quantile labels / boolean {yes, no} / categorical states
  bool iqr = true;                  // quantile columns only
  std::string group;                // free-form, carried into exports
};

enum class FilterOp { lt, le, gt, ge, eq, ne, in, not_in };

/// Declarative row predicate. Compares `column` against `value`, against
/// another column (`other_column`), or against a set (`values`, for in/not_in).
struct RowFilter {
  std::string column;
  FilterOp op = FilterOp::eq;
  Cell value;
  std::optional<std::string> other_column;
  std::vector<Cell> values;

  bool keep(const RawTable& table, const std::vector<Cell>& row) const;
  std::string describe() const;
};

struct DiscretizationSpec {
  std::vector<ColumnRule> columns;
  double iqr_factor = 2.0;
  std::vector<std::string> dedup_keys;
  std::vector<RowFilter> filters;
};

struct BinEdges {
  std::string column;
  std::vector<double> cuts;  // k - 1 interior cut points, non-decreasing
  std::vector<std::string> labels;

  /// First bin whose upper cut is >= x; values above every cut go to the last bin.
  StateId assign(double x) const;
  bool operator==(const BinEdges&) const = default;
};

class Dataset {
 public:
  using Code = std::uint32_t;

  Dataset() = default;
  /// Column-major storage; every column has the same length and every code is
  /// a valid state index of its variable.
  Dataset(std::vector<DiscreteVariable> variables, std::vector<std::vector<Code>> columns);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return variables_.size(); }
  const std::vector<DiscreteVariable>& variables() const noexcept { return variables_; }
  const DiscreteVariable& variable(VarId v) const { return variables_.at(v); }
  std::span<const Code> column(VarId v) const { return columns_.at(v); }
  Code at(std::size_t row, VarId v) const { return columns_[v][row]; }
  std::optional<VarId> find(std::string_view name) const;
  VarId index(std::string_view name) const;
  std::vector<std::string> names() const;

  bool operator==(const Dataset&) const = default;

 private:
  std::vector<DiscreteVariable> variables_;
  std::vector<std::vector<Code>> columns_;
  std::size_t rows_ = 0;
};

/// Header of state labels, one row per observation.
void write_dataset(std::ostream& out, const Dataset& data, char delimiter = ',');
/// Reads labels back using the given variables' state lists (column order by header).
Dataset read_dataset(std::istream& in, const std::vector<DiscreteVariable>& variables,
                     char delimiter = ',');

// ---------------------------------------------------------------------------

/// Linear-interpolation quantile on an already sorted sample.
double sorted_quantile(std::span<const double> sorted, double q);

/// Keep-mask for Q1 - factor*IQR <= x <= Q3 + factor*IQR. NaN entries are
/// ignored for the quartiles and dropped by the mask.
std::vector<bool> iqr_filter(std::span<const double> column, double factor = 2.0);

struct BinnedColumn {
  BinEdges edges;
  std::vector<StateId> states;
};

/// Equal-frequency bins at the j/k quantiles. Throws DiscretizationError when
/// the column has fewer than k distinct values.
BinnedColumn quantile_bins(std::span<const double> column, std::size_t k,
                           std::vector<std::string> labels, std::string column_name = {});

/// Keeps the first occurrence of each key tuple. An empty key list is a no-op
/// (with a warning on std::clog).
RawTable deduplicate(const RawTable& table, std::span<const std::string> key_columns);

inline const std::vector<std::string>& frequency_rank_labels() {
  static const std::vector<std::string> labels{"Most Common", "Frequent", "Less Frequent", "Rare"};
  return labels;
}

/// Four-level rank of each label by how many listings share it. Cut points are
/// the 25/50/75% quantiles of the listing-level count distribution (each
/// listing carries its neighborhood's count); count >= Q3 is "Most Common",
/// >= median "Frequent", >= Q1 "Less Frequent", else "Rare".
std::map<std::string, std::string> neighborhood_frequency_rank(
    const std::map<std::string, std::size_t>& counts);

// ---------------------------------------------------------------------------

struct CleaningReport {
  std::size_t input_rows = 0;
  std::size_t dropped_duplicates = 0;
  std::size_t dropped_missing = 0;
  std::vector<std::pair<std::string, std::size_t>> dropped_by_filter;
  std::size_t dropped_outliers = 0;
  std::size_t output_rows = 0;
};

/// Everything needed to encode new data exactly like the training data.
struct Encoding {
  std::vector<DiscreteVariable> variables;
  std::vector<std::string> groups;  // parallel to variables
  std::vector<BinEdges> edges;      // one per quantile column
  std::map<std::string, std::map<std::string, std::string>> rank_maps;  // frequency_rank columns

  bool operator==(const Encoding&) const = default;
};

struct EncodeResult {
  Dataset dataset;
  Encoding encoding;
  CleaningReport report;
};

/// dedup -> drop rows with missing cells in used columns -> row filters ->
/// IQR filter on quantile columns -> binning.
EncodeResult encode_dataset(const RawTable& table, const DiscretizationSpec& spec);

/// Same pipeline with frozen bins, states and ranks; the IQR stage is skipped
/// because outlier bounds belong to the training sample.
EncodeResult apply_encoding(const RawTable& table, const DiscretizationSpec& spec,
                            const Encoding& encoding);

}  // namespace bnlab::data
