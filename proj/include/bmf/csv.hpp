#pragma once

#include <string>
#include <vector>

#include "bmf/model.hpp"

namespace bmf {

struct CsvOptions {
  std::string missing_token = "NA";
  bool header = false;      // first row holds column labels
  bool row_labels = false;  // first field of each row is a label
};

struct LoadedMatrix {
  ObservedMatrix data;
  std::vector<std::string> col_labels;
  std::vector<std::string> row_labels;
};

/// Rectangular comma-delimited matrix; a cell equal to the missing token (or
/// empty) is masked out. Throws std::runtime_error on ragged rows, rejected
/// all-missing input or a non-numeric observed cell.
LoadedMatrix load_matrix_csv(const std::string& path, const CsvOptions& options = {});

/// Writes with enough digits that a save/load round trip is bit-exact.
void save_matrix_csv(const std::string& path, const ObservedMatrix& data,
                     const CsvOptions& options = {},
                     const std::vector<std::string>& col_labels = {},
                     const std::vector<std::string>& row_labels = {});

/// Per-row location/scale of the observed entries (sample variance). Enables
/// mapping estimates back to original units.
struct RowStats {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;
};

/// Rescale every row to observed-entry mean zero and unit sample variance.
/// Masked cells are carried through the same affine map. Throws for rows
/// with fewer than two observed entries or zero variance.
std::pair<ObservedMatrix, RowStats> standardize_rows(const ObservedMatrix& data);

/// Inverse of standardize_rows on a full matrix of estimates.
Eigen::MatrixXd destandardize_rows(const Eigen::MatrixXd& theta, const RowStats& stats);

}  // namespace bmf
