#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace prime {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Which covariate columns enter through smooth functions and which enter
/// linearly. Indices refer to columns of ObservationTable::x.
struct ModelStructure {
  std::vector<std::size_t> nonlinear;
  std::vector<std::size_t> linear;

  std::size_t p() const { return nonlinear.size(); }
  std::size_t q() const { return linear.size(); }

  /// Throws StructureMismatch unless the two index sets are disjoint and
  /// together cover 0..n_columns-1 exactly.
  void validate(std::size_t n_columns) const;

  bool operator==(const ModelStructure&) const = default;
};

/// Response, covariates and observation mask (true = observed). Cells with
/// mask false hold NaN and are never read as values.
struct ObservationTable {
  Vector y;
  Matrix x;
  Mask mask;
  ModelStructure structure;
  std::vector<std::string> column_names;
  std::string response_name = "y";

  std::size_t n() const { return static_cast<std::size_t>(y.size()); }
  std::size_t columns() const { return static_cast<std::size_t>(x.cols()); }
  bool observed(std::size_t i, std::size_t j) const { return mask(i, j); }
};

/// Validates the ObservationTable invariants and fills NaN into unobserved
/// cells. Column names default to x1..x{p+q}.
ObservationTable make_table(Vector y, Matrix x, Mask mask, ModelStructure structure,
                            std::vector<std::string> column_names = {});

/// Fully observed table.
ObservationTable make_complete_table(Vector y, Matrix x, ModelStructure structure);

/// Same table with a different model structure. Normalization and fitting
/// always go through the table's own structure.
ObservationTable with_structure(const ObservationTable& table, ModelStructure structure);

/// Rows `rows` of the table, in the given order (duplicates allowed).
ObservationTable select_rows(const ObservationTable& table, const std::vector<std::size_t>& rows);

// ---------------------------------------------------------------------------
// Missingness patterns

struct UnitPattern {
  std::vector<std::size_t> observed_nonlinear;  // A_i
  std::vector<std::size_t> observed_linear;     // B_i
  std::vector<std::size_t> missing_nonlinear;   // complement of A_i
  std::vector<std::size_t> missing_linear;      // complement of B_i
  std::vector<std::size_t> observed;            // C_i, ascending column order
  std::uint64_t observed_bits = 0;

  std::size_t m() const { return observed.size(); }
  bool complete() const { return missing_nonlinear.empty() && missing_linear.empty(); }
};

struct PatternIndex {
  std::vector<UnitPattern> units;
  std::size_t columns = 0;

  /// Distinct observed-column sets, in first-appearance order.
  std::vector<std::uint64_t> distinct_patterns() const;
  std::size_t min_m() const;
};

PatternIndex build_pattern_index(const ObservationTable& table);

// ---------------------------------------------------------------------------
// Min-max normalization of nonlinear columns

struct ColumnRange {
  std::size_t column = 0;
  double min = 0.0;
  double max = 1.0;
  bool operator==(const ColumnRange&) const = default;
};

class NormalizationMap {
 public:
  NormalizationMap() = default;
  explicit NormalizationMap(std::vector<ColumnRange> ranges);

  const std::vector<ColumnRange>& ranges() const { return ranges_; }
  const ColumnRange& range_for(std::size_t column) const;
  bool maps(std::size_t column) const;

  /// (value - min) / (max - min), clamped to [0, 1].
  double apply(std::size_t column, double value) const;
  double inverse(std::size_t column, double unit_value) const;

  /// Normalizes the mapped columns of a complete row-major covariate matrix.
  Matrix apply_rows(const Matrix& rows) const;

  bool operator==(const NormalizationMap&) const = default;

 private:
  std::vector<ColumnRange> ranges_;
};

/// Normalizes the observed entries of every nonlinear column to [0, 1] using
/// its observed range. Throws DegenerateColumn for a constant column.
std::pair<ObservationTable, NormalizationMap> minmax_normalize(const ObservationTable& table);

// ---------------------------------------------------------------------------
// Complete cases

struct CompleteCases {
  std::vector<std::size_t> rows;
  std::size_t n0() const { return rows.size(); }
};

CompleteCases complete_case_subset(const ObservationTable& table);

// ---------------------------------------------------------------------------
// CSV ingestion

/// Column roles declared in a sidecar structure file:
///
///     response  = y
///     nonlinear = age, bmi
///     linear    = glucose, pressure
///
/// The table's covariate columns follow declaration order, nonlinear first.
struct StructureDecl {
  std::string response;
  std::vector<std::string> nonlinear;
  std::vector<std::string> linear;

  ModelStructure model_structure() const;
  std::vector<std::string> covariates() const;
};

StructureDecl load_structure(const std::string& path);
void write_structure(const StructureDecl& decl, std::ostream& out);

struct CsvOptions {
  std::string missing_token = "NA";
  /// Drop rows whose response is missing instead of failing.
  bool drop_missing_response = false;
};

struct CsvLoad {
  ObservationTable table;
  std::size_t dropped_rows = 0;
};

CsvLoad load_csv(std::istream& in, const StructureDecl& decl, const CsvOptions& options = {});
CsvLoad load_csv(const std::string& path, const StructureDecl& decl, const CsvOptions& options = {});

/// Header names of a CSV file.
std::vector<std::string> read_csv_header(const std::string& path);

void write_csv(const ObservationTable& table, std::ostream& out,
               const std::string& missing_token = "NA");

/// Splits one CSV record. Surrounding double quotes are stripped.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace prime
