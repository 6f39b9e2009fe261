#include "bmf/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bmf {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

}  // namespace

LoadedMatrix load_matrix_csv(const std::string& path, const CsvOptions& options) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_matrix_csv: cannot open " + path);

  LoadedMatrix out;
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (first && options.header) {
      if (options.row_labels) fields.erase(fields.begin());
      out.col_labels = std::move(fields);
      first = false;
      continue;
    }
    first = false;
    if (options.row_labels) {
      if (fields.empty()) throw std::runtime_error("load_matrix_csv: empty labeled row");
      out.row_labels.push_back(fields.front());
      fields.erase(fields.begin());
    }
    rows.push_back(std::move(fields));
  }
  if (rows.empty()) throw std::runtime_error("load_matrix_csv: no data rows in " + path);

  const std::size_t t = rows.front().size();
  Eigen::MatrixXd values(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(t));
  Mask mask(values.rows(), values.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != t) {
      throw std::runtime_error("load_matrix_csv: ragged row " + std::to_string(r + 1) +
                               " (expected " + std::to_string(t) + " fields, got " +
                               std::to_string(rows[r].size()) + ")");
    }
    for (std::size_t c = 0; c < t; ++c) {
      const std::string& field = rows[r][c];
      const Eigen::Index jr = static_cast<Eigen::Index>(r), tc = static_cast<Eigen::Index>(c);
      if (field.empty() || field == options.missing_token) {
        values(jr, tc) = 0.0;
        mask(jr, tc) = false;
        continue;
      }
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (end == field.c_str() || *end != '\0') {
        throw std::runtime_error("load_matrix_csv: non-numeric cell \"" + field + "\" at row " +
                                 std::to_string(r + 1) + ", column " + std::to_string(c + 1));
      }
      values(jr, tc) = v;
      mask(jr, tc) = true;
    }
  }

  try {
    out.data = ObservedMatrix(std::move(values), std::move(mask));
  } catch (const std::invalid_argument& e) {
    throw std::runtime_error(std::string("load_matrix_csv: ") + e.what());
  }
  return out;
}

void save_matrix_csv(const std::string& path, const ObservedMatrix& data,
                     const CsvOptions& options, const std::vector<std::string>& col_labels,
                     const std::vector<std::string>& row_labels) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_matrix_csv: cannot open " + path + " for writing");
  char buf[40];

  if (options.header) {
    if (options.row_labels) out << ",";
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (c > 0) out << ",";
      out << (c < static_cast<Eigen::Index>(col_labels.size())
                  ? col_labels[static_cast<std::size_t>(c)]
                  : "c" + std::to_string(c + 1));
    }
    out << "\n";
  }
  for (Eigen::Index r = 0; r < data.rows(); ++r) {
    if (options.row_labels) {
      out << (r < static_cast<Eigen::Index>(row_labels.size())
                  ? row_labels[static_cast<std::size_t>(r)]
                  : "r" + std::to_string(r + 1))
          << ",";
    }
    for (Eigen::Index c = 0; c < data.cols(); ++c) {
      if (c > 0) out << ",";
      if (data.mask(r, c)) {
        std::snprintf(buf, sizeof buf, "%.17g", data.values(r, c));
        out << buf;
      } else {
        out << options.missing_token;
      }
    }
    out << "\n";
  }
}

std::pair<ObservedMatrix, RowStats> standardize_rows(const ObservedMatrix& data) {
  const Eigen::Index j = data.rows(), t = data.cols();
  RowStats stats;
  stats.mean.resize(j);
  stats.sd.resize(j);
  Eigen::MatrixXd values = data.values;

  for (Eigen::Index r = 0; r < j; ++r) {
    double sum = 0.0;
    long n = 0;
    for (Eigen::Index c = 0; c < t; ++c) {
      if (data.mask(r, c)) {
        sum += data.values(r, c);
        ++n;
      }
    }
    if (n < 2) {
      throw std::runtime_error("standardize_rows: row " + std::to_string(r + 1) +
                               " has fewer than two observed entries");
    }
    const double mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (Eigen::Index c = 0; c < t; ++c) {
      if (data.mask(r, c)) {
        const double d = data.values(r, c) - mean;
        ss += d * d;
      }
    }
    const double var = ss / static_cast<double>(n - 1);
    if (var <= 0.0) {
      throw std::runtime_error("standardize_rows: row " + std::to_string(r + 1) +
                               " is constant over its observed entries");
    }
    stats.mean(r) = mean;
    stats.sd(r) = std::sqrt(var);
    for (Eigen::Index c = 0; c < t; ++c) {
      values(r, c) = (values(r, c) - mean) / stats.sd(r);
    }
  }
  return {ObservedMatrix(std::move(values), data.mask), stats};
}

Eigen::MatrixXd destandardize_rows(const Eigen::MatrixXd& theta, const RowStats& stats) {
  if (theta.rows() != stats.mean.size()) {
    throw std::invalid_argument("destandardize_rows: row count mismatch");
  }
  Eigen::MatrixXd out = theta;
  for (Eigen::Index r = 0; r < out.rows(); ++r) {
    out.row(r) = out.row(r) * stats.sd(r);
    out.row(r).array() += stats.mean(r);
  }
  return out;
}

}  // namespace bmf
