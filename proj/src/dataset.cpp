#include "prime/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "prime/errors.hpp"
#include "prime/keyvalue.hpp"

namespace prime {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

}  // namespace

void ModelStructure::validate(std::size_t n_columns) const {
  if (n_columns == 0) throw Error(ErrorCode::StructureMismatch, "no covariate columns");
  if (n_columns > 64) {
    throw Error(ErrorCode::StructureMismatch, "at most 64 covariate columns are supported");
  }
  std::vector<int> seen(n_columns, 0);
  for (auto idx : {&nonlinear, &linear}) {
    for (std::size_t c : *idx) {
      if (c >= n_columns) {
        throw Error(ErrorCode::StructureMismatch, "column index " + std::to_string(c) + " out of range");
      }
      if (seen[c]++) {
        throw Error(ErrorCode::StructureMismatch, "column " + std::to_string(c) + " declared twice");
      }
    }
  }
  for (std::size_t c = 0; c < n_columns; ++c) {
    if (!seen[c]) {
      throw Error(ErrorCode::StructureMismatch, "column " + std::to_string(c) + " has no role");
    }
  }
}

ObservationTable make_table(Vector y, Matrix x, Mask mask, ModelStructure structure,
                            std::vector<std::string> column_names) {
  if (y.size() < 1) throw Error(ErrorCode::InsufficientData, "table has no rows");
  if (x.rows() != y.size() || mask.rows() != x.rows() || mask.cols() != x.cols()) {
    throw Error(ErrorCode::LengthMismatch, "y, x and mask dimensions disagree");
  }
  structure.validate(static_cast<std::size_t>(x.cols()));
  if (column_names.empty()) {
    for (Eigen::Index j = 0; j < x.cols(); ++j) column_names.push_back("x" + std::to_string(j + 1));
  }
  if (column_names.size() != static_cast<std::size_t>(x.cols())) {
    throw Error(ErrorCode::LengthMismatch, "column name count disagrees with x");
  }
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y(i))) {
      throw Error(ErrorCode::MissingResponse, "response of unit " + std::to_string(i) + " is not finite");
    }
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      if (!mask(i, j)) {
        x(i, j) = kNaN;
      } else if (!std::isfinite(x(i, j))) {
        throw Error(ErrorCode::MalformedCsv, "observed cell (" + std::to_string(i) + ", " +
                                                 column_names[j] + ") is not finite");
      }
    }
  }
  ObservationTable t;
  t.y = std::move(y);
  t.x = std::move(x);
  t.mask = std::move(mask);
  t.structure = std::move(structure);
  t.column_names = std::move(column_names);
  return t;
}

ObservationTable make_complete_table(Vector y, Matrix x, ModelStructure structure) {
  Mask mask = Mask::Constant(x.rows(), x.cols(), true);
  return make_table(std::move(y), std::move(x), std::move(mask), std::move(structure));
}

ObservationTable with_structure(const ObservationTable& table, ModelStructure structure) {
  structure.validate(table.columns());
  ObservationTable out = table;
  out.structure = std::move(structure);
  return out;
}

ObservationTable select_rows(const ObservationTable& table, const std::vector<std::size_t>& rows) {
  ObservationTable out;
  const auto n = static_cast<Eigen::Index>(rows.size());
  out.y.resize(n);
  out.x.resize(n, table.x.cols());
  out.mask.resize(n, table.x.cols());
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto src = static_cast<Eigen::Index>(rows[r]);
    out.y(r) = table.y(src);
    out.x.row(r) = table.x.row(src);
    out.mask.row(r) = table.mask.row(src);
  }
  out.structure = table.structure;
  out.column_names = table.column_names;
  out.response_name = table.response_name;
  return out;
}

// ---------------------------------------------------------------------------

std::vector<std::uint64_t> PatternIndex::distinct_patterns() const {
  std::vector<std::uint64_t> out;
  for (const auto& u : units) {
    if (std::find(out.begin(), out.end(), u.observed_bits) == out.end()) out.push_back(u.observed_bits);
  }
  return out;
}

std::size_t PatternIndex::min_m() const {
  std::size_t m = columns;
  for (const auto& u : units) m = std::min(m, u.m());
  return m;
}

PatternIndex build_pattern_index(const ObservationTable& table) {
  PatternIndex index;
  index.columns = table.columns();
  index.units.resize(table.n());
  std::vector<bool> is_nonlinear(table.columns(), false);
  for (std::size_t c : table.structure.nonlinear) is_nonlinear[c] = true;

  for (std::size_t i = 0; i < table.n(); ++i) {
    UnitPattern& u = index.units[i];
    for (std::size_t j : table.structure.nonlinear) {
      (table.observed(i, j) ? u.observed_nonlinear : u.missing_nonlinear).push_back(j);
    }
    for (std::size_t j : table.structure.linear) {
      (table.observed(i, j) ? u.observed_linear : u.missing_linear).push_back(j);
    }
    for (std::size_t j = 0; j < table.columns(); ++j) {
      if (table.observed(i, j)) {
        u.observed.push_back(j);
        u.observed_bits |= std::uint64_t{1} << j;
      }
    }
  }
  return index;
}

// ---------------------------------------------------------------------------

NormalizationMap::NormalizationMap(std::vector<ColumnRange> ranges) : ranges_(std::move(ranges)) {
  for (const auto& r : ranges_) {
    if (!(r.min < r.max)) {
      throw Error(ErrorCode::DegenerateColumn,
                  "normalization range of column " + std::to_string(r.column) + " is empty");
    }
  }
}

bool NormalizationMap::maps(std::size_t column) const {
  return std::any_of(ranges_.begin(), ranges_.end(),
                     [column](const ColumnRange& r) { return r.column == column; });
}

const ColumnRange& NormalizationMap::range_for(std::size_t column) const {
  for (const auto& r : ranges_) {
    if (r.column == column) return r;
  }
  throw Error(ErrorCode::UnknownColumn, "column " + std::to_string(column) + " is not normalized");
}

double NormalizationMap::apply(std::size_t column, double value) const {
  const auto& r = range_for(column);
  return std::clamp((value - r.min) / (r.max - r.min), 0.0, 1.0);
}

double NormalizationMap::inverse(std::size_t column, double unit_value) const {
  const auto& r = range_for(column);
  return r.min + unit_value * (r.max - r.min);
}

Matrix NormalizationMap::apply_rows(const Matrix& rows) const {
  Matrix out = rows;
  for (const auto& r : ranges_) {
    const auto c = static_cast<Eigen::Index>(r.column);
    for (Eigen::Index i = 0; i < out.rows(); ++i) out(i, c) = apply(r.column, out(i, c));
  }
  return out;
}

std::pair<ObservationTable, NormalizationMap> minmax_normalize(const ObservationTable& table) {
  ObservationTable out = table;
  std::vector<ColumnRange> ranges;
  for (std::size_t j : table.structure.nonlinear) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < table.n(); ++i) {
      if (!table.observed(i, j)) continue;
      lo = std::min(lo, table.x(i, j));
      hi = std::max(hi, table.x(i, j));
    }
    if (!(lo < hi)) {
      throw Error(ErrorCode::DegenerateColumn,
                  "nonlinear column '" + table.column_names[j] + "' has fewer than 2 distinct observed values");
    }
    ranges.push_back({j, lo, hi});
  }
  NormalizationMap map(std::move(ranges));
  for (const auto& r : map.ranges()) {
    for (std::size_t i = 0; i < table.n(); ++i) {
      if (table.observed(i, r.column)) out.x(i, r.column) = map.apply(r.column, table.x(i, r.column));
    }
  }
  return {std::move(out), std::move(map)};
}

CompleteCases complete_case_subset(const ObservationTable& table) {
  CompleteCases cc;
  for (std::size_t i = 0; i < table.n(); ++i) {
    if (table.mask.row(i).all()) cc.rows.push_back(i);
  }
  return cc;
}

// ---------------------------------------------------------------------------

ModelStructure StructureDecl::model_structure() const {
  ModelStructure s;
  for (std::size_t k = 0; k < nonlinear.size(); ++k) s.nonlinear.push_back(k);
  for (std::size_t k = 0; k < linear.size(); ++k) s.linear.push_back(nonlinear.size() + k);
  return s;
}

std::vector<std::string> StructureDecl::covariates() const {
  std::vector<std::string> out = nonlinear;
  out.insert(out.end(), linear.begin(), linear.end());
  return out;
}

StructureDecl load_structure(const std::string& path) {
  const auto kv = KeyValueFile::load(path);
  const auto unknown = kv.unknown_keys({"response", "nonlinear", "linear"});
  if (!unknown.empty()) {
    throw Error(ErrorCode::InvalidConfig, "unknown structure key '" + unknown.front() + "' in " + path);
  }
  StructureDecl decl;
  decl.response = kv.require("response");
  decl.nonlinear = split_list(kv.get("nonlinear").value_or(""));
  decl.linear = split_list(kv.get("linear").value_or(""));
  if (decl.nonlinear.empty() && decl.linear.empty()) {
    throw Error(ErrorCode::StructureMismatch, "structure declares no covariates");
  }
  return decl;
}

void write_structure(const StructureDecl& decl, std::ostream& out) {
  auto join = [](const std::vector<std::string>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + v[k];
    return s;
  };
  out << "response = " << decl.response << '\n'
      << "nonlinear = " << join(decl.nonlinear) << '\n'
      << "linear = " << join(decl.linear) << '\n';
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"' && k + 1 < line.size() && line[k + 1] == '"') {
        cell += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        cell += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(trim(cell));
      cell.clear();
    } else if (ch != '\r') {
      cell += ch;
    }
  }
  cells.push_back(trim(cell));
  return cells;
}

namespace {

bool next_record(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (!t.empty() && t.front() != '#') return true;
  }
  return false;
}

}  // namespace

CsvLoad load_csv(std::istream& in, const StructureDecl& decl, const CsvOptions& options) {
  std::string line;
  if (!next_record(in, line)) throw Error(ErrorCode::MalformedCsv, "empty file, header row expected");
  const auto header = split_csv_line(line);
  auto find_col = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error(ErrorCode::StructureMismatch, "column '" + name + "' not found in header");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t response_col = find_col(decl.response);
  const auto names = decl.covariates();
  std::vector<std::size_t> cols;
  for (const auto& name : names) cols.push_back(find_col(name));

  std::vector<double> ys;
  std::vector<std::vector<double>> xs;
  std::vector<std::vector<bool>> ms;
  std::size_t dropped = 0;
  std::size_t record = 0;
  auto is_missing = [&](const std::string& cell) { return cell.empty() || cell == options.missing_token; };
  auto parse_cell = [&](const std::string& cell, std::size_t row, const std::string& col) {
    double v = 0.0;
    try {
      v = parse_double(cell);
    } catch (const Error&) {
      throw Error(ErrorCode::MalformedCsv,
                  "row " + std::to_string(row) + ", column '" + col + "': cannot parse '" + cell + "'");
    }
    if (!std::isfinite(v)) {
      throw Error(ErrorCode::MalformedCsv,
                  "row " + std::to_string(row) + ", column '" + col + "': non-finite value");
    }
    return v;
  };

  while (next_record(in, line)) {
    ++record;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv, "row " + std::to_string(record) + " has " +
                                               std::to_string(cells.size()) + " cells, header has " +
                                               std::to_string(header.size()));
    }
    if (is_missing(cells[response_col])) {
      if (options.drop_missing_response) {
        ++dropped;
        continue;
      }
      throw Error(ErrorCode::MissingResponse, "row " + std::to_string(record) + ": response '" +
                                                  decl.response + "' is missing");
    }
    ys.push_back(parse_cell(cells[response_col], record, decl.response));
    std::vector<double> xr(cols.size(), kNaN);
    std::vector<bool> mr(cols.size(), false);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto& cell = cells[cols[k]];
      if (is_missing(cell)) continue;
      xr[k] = parse_cell(cell, record, names[k]);
      mr[k] = true;
    }
    xs.push_back(std::move(xr));
    ms.push_back(std::move(mr));
  }

  const auto n = static_cast<Eigen::Index>(ys.size());
  const auto c = static_cast<Eigen::Index>(cols.size());
  if (n == 0) throw Error(ErrorCode::InsufficientData, "no data rows");
  Vector y(n);
  Matrix x(n, c);
  Mask mask(n, c);
  for (Eigen::Index i = 0; i < n; ++i) {
    y(i) = ys[i];
    for (Eigen::Index j = 0; j < c; ++j) {
      x(i, j) = xs[i][j];
      mask(i, j) = ms[i][j];
    }
  }
  CsvLoad out{make_table(std::move(y), std::move(x), std::move(mask), decl.model_structure(), names),
              dropped};
  out.table.response_name = decl.response;
  return out;
}

CsvLoad load_csv(const std::string& path, const StructureDecl& decl, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedCsv, "cannot open '" + path + "'");
  return load_csv(in, decl, options);
}

std::vector<std::string> read_csv_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::MalformedCsv, "cannot open '" + path + "'");
  std::string line;
  if (!next_record(in, line)) throw Error(ErrorCode::MalformedCsv, "empty file '" + path + "'");
  return split_csv_line(line);
}

void write_csv(const ObservationTable& table, std::ostream& out, const std::string& missing_token) {
  out << table.response_name;
  for (const auto& name : table.column_names) out << ',' << name;
  out << '\n';
  for (std::size_t i = 0; i < table.n(); ++i) {
    out << format_double(table.y(i));
    for (std::size_t j = 0; j < table.columns(); ++j) {
      out << ',' << (table.observed(i, j) ? format_double(table.x(i, j)) : missing_token);
    }
    out << '\n';
  }
}

}  // namespace prime
