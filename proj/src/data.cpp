#include "bnlab/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "bnlab/format.hpp"

namespace bnlab::data {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

// Splits one logical record; quoted fields may contain delimiters, doubled
// quotes and newlines.
bool read_record(std::istream& in, char delim, std::vector<std::string>& fields,
                 std::vector<bool>& quoted) {
  fields.clear();
  quoted.clear();
  std::string field;
  bool in_quotes = false, was_quoted = false, any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"' && trim(field).empty()) {
      field.clear();
      in_quotes = was_quoted = true;
    } else if (c == delim) {
      fields.push_back(std::move(field));
      quoted.push_back(was_quoted);
      field.clear();
      was_quoted = false;
    } else if (c == '\n') {
      break;
    } else {
      field += c;
    }
  }
  if (!any) return false;
  fields.push_back(std::move(field));
  quoted.push_back(was_quoted);
  return true;
}

std::optional<bool> as_boolean(const Cell& c, const std::vector<std::string>& labels) {
  if (auto b = std::get_if<bool>(&c)) return *b;
  if (auto d = std::get_if<double>(&c)) {
    if (*d == 1.0) return true;
    if (*d == 0.0) return false;
    return std::nullopt;
  }
  if (auto s = std::get_if<std::string>(&c)) {
    if (labels.size() == 2) {
      if (*s == labels[0]) return true;
      if (*s == labels[1]) return false;
    }
    auto l = lower(*s);
    if (l == "yes" || l == "y" || l == "true" || l == "t") return true;
    if (l == "no" || l == "n" || l == "false" || l == "f") return false;
  }
  return std::nullopt;
}

const std::string& source_of(const ColumnRule& r) { return r.source.empty() ? r.name : r.source; }

std::vector<std::string> boolean_labels(const ColumnRule& r) {
  if (!r.labels.empty()) return r.labels;
  return {"Yes", "No"};
}

void validate_spec(const RawTable& table, const DiscretizationSpec& spec) {
  if (spec.columns.empty()) throw SchemaError("discretization spec has no columns");
  if (!(spec.iqr_factor > 0)) throw SchemaError("iqr factor must be positive");
  std::set<std::string> names;
  for (const auto& r : spec.columns) {
    if (!names.insert(r.name).second) throw SchemaError("column '" + r.name + "' listed twice");
    if (!table.find(source_of(r)))
      throw SchemaError("column '" + source_of(r) + "' (rule for '" + r.name +
                        "') not found in input");
    if (r.kind == RuleKind::quantile) {
      if (r.k < 2) throw SchemaError("column '" + r.name + "': quantile rule needs k >= 2");
      if (!r.labels.empty() && r.labels.size() != r.k)
        throw SchemaError("column '" + r.name + "': quantile rule has " +
                          std::to_string(r.labels.size()) + " labels for k = " +
                          std::to_string(r.k));
    }
    if (r.kind == RuleKind::boolean && !r.labels.empty() && r.labels.size() != 2)
      throw SchemaError("column '" + r.name + "': boolean rule needs exactly two labels");
  }
  for (const auto& k : spec.dedup_keys)
    if (!table.find(k)) throw SchemaError("dedup key column '" + k + "' not found in input");
  for (const auto& f : spec.filters) {
    if (!table.find(f.column)) throw SchemaError("filter column '" + f.column + "' not found in input");
    if (f.other_column && !table.find(*f.other_column))
      throw SchemaError("filter column '" + *f.other_column + "' not found in input");
  }
}

std::vector<std::string> quantile_labels(const ColumnRule& r) {
  if (!r.labels.empty()) return r.labels;
  std::vector<std::string> out;
  for (std::size_t j = 1; j <= r.k; ++j) out.push_back("Q" + std::to_string(j));
  return out;
}

struct Stage {
  RawTable table;
  CleaningReport report;
};

Stage clean(const RawTable& input, const DiscretizationSpec& spec) {
  Stage s;
  s.report.input_rows = input.row_count();
  if (spec.dedup_keys.empty()) {
    s.table = input;
  } else {
    s.table = deduplicate(input, spec.dedup_keys);
  }
  s.report.dropped_duplicates = input.row_count() - s.table.row_count();

  {
    std::vector<bool> keep(s.table.row_count(), true);
    for (const auto& r : spec.columns) {
      std::size_t c = s.table.index(source_of(r));
      auto labels = boolean_labels(r);
      for (std::size_t i = 0; i < keep.size(); ++i) {
        const Cell& cell = s.table.rows()[i][c];
        bool ok = !is_missing(cell);
        if (ok && r.kind == RuleKind::quantile) ok = as_number(cell).has_value();
        if (ok && r.kind == RuleKind::boolean) ok = as_boolean(cell, labels).has_value();
        if (!ok) keep[i] = false;
      }
    }
    auto before = s.table.row_count();
    s.table = s.table.select(keep);
    s.report.dropped_missing = before - s.table.row_count();
  }

  for (const auto& f : spec.filters) {
    std::vector<bool> keep(s.table.row_count());
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = f.keep(s.table, s.table.rows()[i]);
    auto before = s.table.row_count();
    s.table = s.table.select(keep);
    s.report.dropped_by_filter.emplace_back(f.describe(), before - s.table.row_count());
  }
  return s;
}

Dataset build_dataset(const RawTable& table, const DiscretizationSpec& spec, Encoding& enc,
                      bool frozen) {
  const std::size_t n = table.row_count();
  std::vector<DiscreteVariable> vars;
  std::vector<std::vector<Dataset::Code>> cols;
  std::vector<BinEdges> edges;

  for (std::size_t ci = 0; ci < spec.columns.size(); ++ci) {
    const ColumnRule& r = spec.columns[ci];
    const std::size_t src = table.index(source_of(r));
    std::vector<Dataset::Code> codes(n);
    switch (r.kind) {
      case RuleKind::quantile: {
        auto values = table.numeric_column(source_of(r));
        if (frozen) {
          auto it = std::find_if(enc.edges.begin(), enc.edges.end(),
                                 [&](const BinEdges& e) { return e.column == r.name; });
          if (it == enc.edges.end())
            throw DiscretizationError("no saved bin edges for column '" + r.name + "'");
          for (std::size_t i = 0; i < n; ++i) codes[i] = static_cast<Dataset::Code>(it->assign(values[i]));
          vars.emplace_back(r.name, it->labels);
        } else {
          auto binned = quantile_bins(values, r.k, quantile_labels(r), r.name);
          for (std::size_t i = 0; i < n; ++i) codes[i] = static_cast<Dataset::Code>(binned.states[i]);
          vars.emplace_back(r.name, binned.edges.labels);
          edges.push_back(std::move(binned.edges));
        }
        break;
      }
      case RuleKind::categorical: {
        std::vector<std::string> text(n);
        for (std::size_t i = 0; i < n; ++i) text[i] = as_text(table.rows()[i][src]);
        std::vector<std::string> states;
        if (frozen) {
          states = enc.variables.at(ci).states();
        } else if (!r.labels.empty()) {
          states = r.labels;
        } else {
          std::set<std::string> distinct(text.begin(), text.end());
          states.assign(distinct.begin(), distinct.end());
        }
        if (states.size() < 2)
          throw DiscretizationError("column '" + r.name + "' has fewer than two categories");
        DiscreteVariable var(r.name, states);
        for (std::size_t i = 0; i < n; ++i) {
          auto s = var.find_state(text[i]);
          if (!s)
            throw DiscretizationError("column '" + r.name + "': value '" + text[i] +
                                      "' is not a declared category");
          codes[i] = static_cast<Dataset::Code>(*s);
        }
        vars.push_back(std::move(var));
        break;
      }
      case RuleKind::boolean: {
        auto labels = boolean_labels(r);
        for (std::size_t i = 0; i < n; ++i)
          codes[i] = *as_boolean(table.rows()[i][src], labels) ? 0 : 1;
        vars.emplace_back(r.name, labels);
        break;
      }
      case RuleKind::frequency_rank: {
        std::map<std::string, std::string> ranks;
        if (frozen) {
          ranks = enc.rank_maps.at(r.name);
        } else {
          std::map<std::string, std::size_t> counts;
          for (std::size_t i = 0; i < n; ++i) ++counts[as_text(table.rows()[i][src])];
          if (!counts.empty()) ranks = neighborhood_frequency_rank(counts);
          enc.rank_maps[r.name] = ranks;
        }
        DiscreteVariable var(r.name, frequency_rank_labels());
        for (std::size_t i = 0; i < n; ++i) {
          auto it = ranks.find(as_text(table.rows()[i][src]));
          // neighborhoods unseen in training share the bottom rank
          codes[i] = static_cast<Dataset::Code>(
              it == ranks.end() ? 3 : var.state_index(it->second));
        }
        vars.push_back(std::move(var));
        break;
      }
    }
    cols.push_back(std::move(codes));
  }
  if (!frozen) {
    enc.variables = vars;
    enc.edges = std::move(edges);
    enc.groups.clear();
    for (const auto& r : spec.columns) enc.groups.push_back(r.group);
  }
  return Dataset(std::move(vars), std::move(cols));
}

}  // namespace

std::optional<double> as_number(const Cell& c) {
  if (auto d = std::get_if<double>(&c)) return *d;
  if (auto b = std::get_if<bool>(&c)) return *b ? 1.0 : 0.0;
  return std::nullopt;
}

std::string as_text(const Cell& c) {
  if (auto s = std::get_if<std::string>(&c)) return *s;
  if (auto d = std::get_if<double>(&c)) return format_number(*d);
  if (auto b = std::get_if<bool>(&c)) return *b ? "true" : "false";
  return {};
}

Cell parse_cell(std::string_view field) {
  auto f = trim(field);
  if (f.empty()) return std::monostate{};
  auto l = lower(f);
  if (l == "na" || l == "n/a" || l == "nan" || l == "null" || l == "none") return std::monostate{};
  if (l == "true") return true;
  if (l == "false") return false;
  double value = 0.0;
  const char* first = f.data();
  const char* last = f.data() + f.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec == std::errc() && ptr == last && std::isfinite(value)) return value;
  return std::string(f);
}

RawTable::RawTable(std::vector<std::string> columns, std::vector<std::vector<Cell>> rows)
    : columns_(std::move(columns)), rows_(std::move(rows)) {
  std::set<std::string> seen;
  for (const auto& c : columns_)
    if (!seen.insert(c).second) throw ContractError("duplicate column name '" + c + "'");
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (rows_[i].size() != columns_.size())
      throw ContractError("row " + std::to_string(i + 1) + " has " + std::to_string(rows_[i].size()) +
                          " cells, expected " + std::to_string(columns_.size()));
}

std::optional<std::size_t> RawTable::find(std::string_view column) const {
  auto it = std::find(columns_.begin(), columns_.end(), column);
  if (it == columns_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns_.begin());
}

std::size_t RawTable::index(std::string_view column) const {
  if (auto c = find(column)) return *c;
  throw ContractError("unknown column '" + std::string(column) + "'");
}

std::vector<double> RawTable::numeric_column(std::string_view column) const {
  std::size_t c = index(column);
  std::vector<double> out(rows_.size());
  for (std::size_t i = 0; i < rows_.size(); ++i)
    out[i] = as_number(rows_[i][c]).value_or(std::numeric_limits<double>::quiet_NaN());
  return out;
}

void RawTable::add_column(std::string name, std::vector<Cell> values) {
  if (find(name)) throw ContractError("duplicate column name '" + name + "'");
  if (values.size() != rows_.size()) throw ContractError("new column '" + name + "' has wrong length");
  columns_.push_back(std::move(name));
  for (std::size_t i = 0; i < rows_.size(); ++i) rows_[i].push_back(std::move(values[i]));
}

RawTable RawTable::select(const std::vector<bool>& mask) const {
  if (mask.size() != rows_.size()) throw ContractError("row mask has wrong length");
  RawTable out;
  out.columns_ = columns_;
  for (std::size_t i = 0; i < rows_.size(); ++i)
    if (mask[i]) out.rows_.push_back(rows_[i]);
  return out;
}

RawTable read_delimited(std::istream& in, char delimiter) {
  std::vector<std::string> fields;
  std::vector<bool> quoted;
  if (!read_record(in, delimiter, fields, quoted)) throw ContractError("input has no header row");
  std::vector<std::string> header;
  for (auto& f : fields) header.emplace_back(trim(f));
  if (!header.empty() && header[0].starts_with("\xEF\xBB\xBF")) header[0].erase(0, 3);
  std::vector<std::vector<Cell>> rows;
  while (read_record(in, delimiter, fields, quoted)) {
    if (fields.size() == 1 && trim(fields[0]).empty() && !quoted[0]) continue;
    std::vector<Cell> row;
    row.reserve(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i)
      row.push_back(quoted[i] && !fields[i].empty() ? Cell(fields[i]) : parse_cell(fields[i]));
    rows.push_back(std::move(row));
  }
  return RawTable(std::move(header), std::move(rows));
}

RawTable read_delimited_file(const std::string& path, char delimiter) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_delimited(in, delimiter);
}

bool RowFilter::keep(const RawTable& table, const std::vector<Cell>& row) const {
  const Cell& lhs = row[table.index(column)];
  if (op == FilterOp::in || op == FilterOp::not_in) {
    bool found = std::any_of(values.begin(), values.end(), [&](const Cell& v) {
      auto a = as_number(lhs), b = as_number(v);
      if (a && b) return *a == *b;
      return as_text(lhs) == as_text(v);
    });
    return op == FilterOp::in ? found : !found;
  }
  const Cell& rhs = other_column ? row[table.index(*other_column)] : value;
  if (is_missing(lhs) || is_missing(rhs)) return false;
  auto a = as_number(lhs), b = as_number(rhs);
  if (a && b) {
    switch (op) {
      case FilterOp::lt: return *a < *b;
      case FilterOp::le: return *a <= *b;
      case FilterOp::gt: return *a > *b;
      case FilterOp::ge: return *a >= *b;
      case FilterOp::eq: return *a == *b;
      case FilterOp::ne: return *a != *b;
      default: break;
    }
  }
  auto sa = as_text(lhs), sb = as_text(rhs);
  switch (op) {
    case FilterOp::eq: return sa == sb;
    case FilterOp::ne: return sa != sb;
    default: return false;  // ordered comparison on non-numbers
  }
}

std::string RowFilter::describe() const {
  static const char* names[] = {"<", "<=", ">", ">=", "==", "!=", "in", "not in"};
  std::string out = column + " " + names[static_cast<int>(op)] + " ";
  if (op == FilterOp::in || op == FilterOp::not_in) {
    out += "{";
    for (std::size_t i = 0; i < values.size(); ++i) out += (i ? "," : "") + as_text(values[i]);
    return out + "}";
  }
  return out + (other_column ? *other_column : as_text(value));
}

StateId BinEdges::assign(double x) const {
  auto it = std::lower_bound(cuts.begin(), cuts.end(), x);
  return static_cast<StateId>(it - cuts.begin());
}

Dataset::Dataset(std::vector<DiscreteVariable> variables, std::vector<std::vector<Code>> columns)
    : variables_(std::move(variables)), columns_(std::move(columns)) {
  if (columns_.size() != variables_.size()) throw ContractError("dataset column count mismatch");
  std::set<std::string> names;
  for (const auto& v : variables_)
    if (!names.insert(v.name()).second) throw ContractError("duplicate dataset variable '" + v.name() + "'");
  rows_ = columns_.empty() ? 0 : columns_[0].size();
  for (std::size_t c = 0; c < columns_.size(); ++c) {
    if (columns_[c].size() != rows_) throw ContractError("dataset columns differ in length");
    const auto card = variables_[c].cardinality();
    for (auto code : columns_[c])
      if (code >= card)
        throw ContractError("invalid state code in column '" + variables_[c].name() + "'");
  }
}

std::optional<VarId> Dataset::find(std::string_view name) const {
  for (VarId v = 0; v < variables_.size(); ++v)
    if (variables_[v].name() == name) return v;
  return std::nullopt;
}

VarId Dataset::index(std::string_view name) const {
  if (auto v = find(name)) return *v;
  throw ContractError("unknown dataset column '" + std::string(name) + "'");
}

std::vector<std::string> Dataset::names() const {
  std::vector<std::string> out;
  for (const auto& v : variables_) out.push_back(v.name());
  return out;
}

void write_dataset(std::ostream& out, const Dataset& data, char delimiter) {
  auto field = [&](const std::string& s) {
    bool quote = s.find_first_of(std::string{delimiter, '"', '\n'}) != std::string::npos;
    if (!quote) return s;
    std::string q = "\"";
    for (char c : s) q += (c == '"') ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  };
  for (VarId v = 0; v < data.cols(); ++v) out << (v ? std::string(1, delimiter) : "") << field(data.variable(v).name());
  out << '\n';
  for (std::size_t i = 0; i < data.rows(); ++i) {
    for (VarId v = 0; v < data.cols(); ++v)
      out << (v ? std::string(1, delimiter) : "") << field(data.variable(v).states()[data.at(i, v)]);
    out << '\n';
  }
}

Dataset read_dataset(std::istream& in, const std::vector<DiscreteVariable>& variables, char delimiter) {
  std::vector<std::string> fields;
  std::vector<bool> quoted;
  if (!read_record(in, delimiter, fields, quoted)) throw ContractError("dataset has no header row");
  std::vector<std::size_t> var_of_field;
  std::vector<bool> covered(variables.size(), false);
  for (auto& f : fields) {
    auto name = std::string(trim(f));
    auto it = std::find_if(variables.begin(), variables.end(),
                           [&](const DiscreteVariable& v) { return v.name() == name; });
    if (it == variables.end()) throw ContractError("dataset column '" + name + "' is not a known variable");
    var_of_field.push_back(static_cast<std::size_t>(it - variables.begin()));
    covered[var_of_field.back()] = true;
  }
  for (std::size_t v = 0; v < variables.size(); ++v)
    if (!covered[v]) throw ContractError("dataset is missing column '" + variables[v].name() + "'");
  std::vector<std::vector<Dataset::Code>> cols(variables.size());
  std::size_t line = 1;
  while (read_record(in, delimiter, fields, quoted)) {
    ++line;
    if (fields.size() == 1 && trim(fields[0]).empty()) continue;
    if (fields.size() != var_of_field.size())
      throw ContractError("dataset line " + std::to_string(line) + " has wrong field count");
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto& var = variables[var_of_field[i]];
      cols[var_of_field[i]].push_back(static_cast<Dataset::Code>(var.state_index(trim(fields[i]))));
    }
  }
  return Dataset(variables, std::move(cols));
}

double sorted_quantile(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw ContractError("quantile of an empty sample");
  double pos = (static_cast<double>(sorted.size()) - 1.0) * q;
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = std::min(lo + 1, sorted.size() - 1);
  double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || lo == hi) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<bool> iqr_filter(std::span<const double> column, double factor) {
  if (column.empty()) throw ContractError("iqr_filter on an empty column");
  if (!(factor > 0)) throw ContractError("iqr_filter factor must be positive");
  std::vector<double> sorted;
  for (double x : column)
    if (!std::isnan(x)) sorted.push_back(x);
  if (sorted.empty()) throw ContractError("iqr_filter on an all-missing column");
  std::sort(sorted.begin(), sorted.end());
  const double q1 = sorted_quantile(sorted, 0.25);
  const double q3 = sorted_quantile(sorted, 0.75);
  const double iqr = q3 - q1;
  const double lo = q1 - factor * iqr, hi = q3 + factor * iqr;
  std::vector<bool> keep(column.size());
  for (std::size_t i = 0; i < column.size(); ++i) keep[i] = column[i] >= lo && column[i] <= hi;
  return keep;
}

BinnedColumn quantile_bins(std::span<const double> column, std::size_t k,
                           std::vector<std::string> labels, std::string column_name) {
  if (k < 2) throw ContractError("quantile_bins needs k >= 2");
  if (labels.size() != k) throw ContractError("quantile_bins needs one label per bin");
  std::vector<double> sorted(column.begin(), column.end());
  for (double x : sorted)
    if (std::isnan(x)) throw ContractError("quantile_bins: column '" + column_name + "' has missing values");
  std::sort(sorted.begin(), sorted.end());
  std::size_t distinct = sorted.empty() ? 0 : 1;
  for (std::size_t i = 1; i < sorted.size(); ++i) distinct += sorted[i] != sorted[i - 1];
  if (distinct < k)
    throw DiscretizationError("column '" + column_name + "' has " + std::to_string(distinct) +
                              " distinct values, fewer than the " + std::to_string(k) +
                              " bins requested");
  BinnedColumn out;
  out.edges.column = std::move(column_name);
  out.edges.labels = std::move(labels);
  for (std::size_t j = 1; j < k; ++j)
    out.edges.cuts.push_back(sorted_quantile(sorted, static_cast<double>(j) / static_cast<double>(k)));
  out.states.reserve(column.size());
  for (double x : column) out.states.push_back(out.edges.assign(x));
  return out;
}

RawTable deduplicate(const RawTable& table, std::span<const std::string> key_columns) {
  if (key_columns.empty()) {
    std::clog << "warning: deduplicate called with no key columns; table unchanged\n";
    return table;
  }
  std::vector<std::size_t> keys;
  for (const auto& k : key_columns) keys.push_back(table.index(k));
  std::set<std::vector<std::string>> seen;
  std::vector<bool> keep(table.row_count(), false);
  for (std::size_t i = 0; i < table.row_count(); ++i) {
    std::vector<std::string> key;
    key.reserve(keys.size());
    for (auto c : keys) {
      const Cell& cell = table.rows()[i][c];
      // type tag keeps "1" (text) and 1 (number) apart
      key.push_back(std::to_string(cell.index()) + ":" + as_text(cell));
    }
    keep[i] = seen.insert(std::move(key)).second;
  }
  return table.select(keep);
}

std::map<std::string, std::string> neighborhood_frequency_rank(
    const std::map<std::string, std::size_t>& counts) {
  if (counts.empty()) throw ContractError("neighborhood_frequency_rank needs at least one label");
  // listing-level distribution of counts, ascending: value c repeated c times
  std::vector<std::pair<std::size_t, std::size_t>> runs;  // (count, multiplicity)
  for (const auto& [label, c] : counts) runs.emplace_back(c, c);
  std::sort(runs.begin(), runs.end());
  std::size_t total = 0;
  for (const auto& r : runs) total += r.second;

  auto value_at = [&](std::size_t pos) {
    std::size_t acc = 0;
    for (const auto& [c, m] : runs) {
      acc += m;
      if (pos < acc) return static_cast<double>(c);
    }
    return static_cast<double>(runs.back().first);
  };
  auto quantile = [&](double q) {
    if (total == 0) return 0.0;
    double pos = (static_cast<double>(total) - 1.0) * q;
    auto lo = static_cast<std::size_t>(std::floor(pos));
    double frac = pos - static_cast<double>(lo);
    double a = value_at(lo);
    if (frac == 0.0) return a;
    double b = value_at(std::min(lo + 1, total - 1));
    return a + frac * (b - a);
  };
  const double q1 = quantile(0.25), q2 = quantile(0.5), q3 = quantile(0.75);
  const auto& labels = frequency_rank_labels();
  std::map<std::string, std::string> out;
  for (const auto& [label, c] : counts) {
    double x = static_cast<double>(c);
    out[label] = x >= q3 ? labels[0] : x >= q2 ? labels[1] : x >= q1 ? labels[2] : labels[3];
  }
  return out;
}

EncodeResult encode_dataset(const RawTable& table, const DiscretizationSpec& spec) {
  validate_spec(table, spec);
  Stage s = clean(table, spec);

  std::vector<bool> keep(s.table.row_count(), true);
  for (const auto& r : spec.columns) {
    if (r.kind != RuleKind::quantile || !r.iqr || s.table.row_count() == 0) continue;
    auto mask = iqr_filter(s.table.numeric_column(source_of(r)), spec.iqr_factor);
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = keep[i] && mask[i];
  }
  auto before = s.table.row_count();
  s.table = s.table.select(keep);
  s.report.dropped_outliers = before - s.table.row_count();
  s.report.output_rows = s.table.row_count();

  EncodeResult out;
  out.dataset = build_dataset(s.table, spec, out.encoding, false);
  out.report = s.report;
  return out;
}

EncodeResult apply_encoding(const RawTable& table, const DiscretizationSpec& spec,
                            const Encoding& encoding) {
  validate_spec(table, spec);
  if (encoding.variables.size() != spec.columns.size())
    throw SchemaError("saved encoding does not match the column specs");
  Stage s = clean(table, spec);
  s.report.output_rows = s.table.row_count();
  EncodeResult out;
  out.encoding = encoding;
  out.dataset = build_dataset(s.table, spec, out.encoding, true);
  out.report = s.report;
  return out;
}

}  // namespace bnlab::data
