#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <string>
#include <utility>
#include <vector>

#include "relid/errors.hpp"

namespace relid {

namespace detail {

inline void require_grade(double g, const char* context) {
  // NaN fails both comparisons and is rejected too.
  if (!(g >= 0.0 && g <= 1.0)) {
    throw InputError(std::string(context) + ": membership grade " +
                     std::to_string(g) + " outside [0, 1]");
  }
}

}  // namespace detail

/// Membership grades of one crisp value over an ordered family of linguistic
/// labels. Grades are validated to lie in [0, 1] on construction; values
/// outside the range are rejected rather than clamped.
class GradeVector {
 public:
  explicit GradeVector(std::vector<double> grades) : grades_(std::move(grades)) {
    for (double g : grades_) detail::require_grade(g, "GradeVector");
  }

  GradeVector(std::initializer_list<double> grades)
      : GradeVector(std::vector<double>(grades)) {}

  static GradeVector zeros(std::size_t n) {
    return GradeVector(std::vector<double>(n, 0.0));
  }
  static GradeVector ones(std::size_t n) {
    return GradeVector(std::vector<double>(n, 1.0));
  }

  std::size_t size() const { return grades_.size(); }
  double operator[](std::size_t i) const { return grades_[i]; }
  const std::vector<double>& grades() const { return grades_; }

  double max_grade() const {
    double m = 0.0;
    for (double g : grades_) m = std::max(m, g);
    return m;
  }
  double sum() const {
    double s = 0.0;
    for (double g : grades_) s += g;
    return s;
  }

  bool operator==(const GradeVector& other) const = default;

 private:
  std::vector<double> grades_;
};

/// Dense row-major matrix of possibility values in [0, 1] linking input
/// conditions (rows) to output conclusions (columns). Entry (i, j) is the
/// strength of the rule "IF input set i THEN output set j".
class RelationalMatrix {
 public:
  RelationalMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) {
      throw DimensionError("RelationalMatrix: dimensions must be positive");
    }
  }

  explicit RelationalMatrix(const std::vector<std::vector<double>>& rows) {
    if (rows.empty() || rows.front().empty()) {
      throw DimensionError("RelationalMatrix: dimensions must be positive");
    }
    rows_ = rows.size();
    cols_ = rows.front().size();
    entries_.reserve(rows_ * cols_);
    for (const auto& row : rows) {
      if (row.size() != cols_) {
        throw DimensionError("RelationalMatrix: ragged row lengths");
      }
      for (double v : row) {
        detail::require_grade(v, "RelationalMatrix");
        entries_.push_back(v);
      }
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double at(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }
  double& at(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }

  const std::vector<double>& entries() const { return entries_; }

  bool same_shape(const RelationalMatrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  bool operator==(const RelationalMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

/// Triangular norm used when forming a Cartesian product.
enum class TNorm { Min, Product };

inline GradeVector fuzzy_union(const GradeVector& a, const GradeVector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("fuzzy_union: vector lengths differ");
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::max(a[i], b[i]);
  return GradeVector(std::move(out));
}

inline GradeVector fuzzy_intersection(const GradeVector& a, const GradeVector& b) {
  if (a.size() != b.size()) {
    throw DimensionError("fuzzy_intersection: vector lengths differ");
  }
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = std::min(a[i], b[i]);
  return GradeVector(std::move(out));
}

inline GradeVector fuzzy_complement(const GradeVector& a) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = 1.0 - a[i];
  return GradeVector(std::move(out));
}

/// Pairwise product of two grade vectors: entry (i, j) combines x_i with y_j
/// under the chosen t-norm. The identification loop always uses Min.
inline RelationalMatrix cartesian_product(const GradeVector& x, const GradeVector& y,
                                          TNorm norm = TNorm::Min) {
  if (x.size() == 0 || y.size() == 0) {
    throw DimensionError("cartesian_product: empty operand");
  }
  RelationalMatrix r(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = 0; j < y.size(); ++j) {
      r.at(i, j) = norm == TNorm::Min ? std::min(x[i], y[j]) : x[i] * y[j];
    }
  }
  return r;
}

/// Max-min composition: output grade j is the max over i of min(x_i, r_ij).
inline GradeVector max_min_compose(const GradeVector& x, const RelationalMatrix& r) {
  if (x.size() != r.rows()) {
    throw DimensionError("max_min_compose: vector length does not match matrix rows");
  }
  std::vector<double> out(r.cols(), 0.0);
  for (std::size_t j = 0; j < r.cols(); ++j) {
    double best = 0.0;
    for (std::size_t i = 0; i < r.rows(); ++i) {
      best = std::max(best, std::min(x[i], r.at(i, j)));
    }
    out[j] = best;
  }
  return GradeVector(std::move(out));
}

inline RelationalMatrix relation_union(const RelationalMatrix& a, const RelationalMatrix& b) {
  if (!a.same_shape(b)) {
    throw DimensionError("relation_union: matrix dimensions differ");
  }
  RelationalMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out.at(i, j) = std::max(a.at(i, j), b.at(i, j));
    }
  }
  return out;
}

/// One matrix entry read as a linguistic rule with its possibility degree.
struct RuleRecord {
  std::string in_label;
  std::string out_label;
  double possibility = 0.0;

  bool operator==(const RuleRecord&) const = default;
};

/// Reads the relational matrix as IF-THEN rules, keeping entries at or above
/// the threshold, strongest first. Ties break by (row, column) position.
inline std::vector<RuleRecord> explain_rules(const RelationalMatrix& r,
                                             const std::vector<std::string>& in_labels,
                                             const std::vector<std::string>& out_labels,
                                             double threshold) {
  if (in_labels.size() != r.rows() || out_labels.size() != r.cols()) {
    throw DimensionError("explain_rules: label counts do not match matrix dimensions");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw ConfigError("explain_rules: threshold outside [0, 1]");
  }
  struct Indexed {
    std::size_t i, j;
    double p;
  };
  std::vector<Indexed> kept;
  for (std::size_t i = 0; i < r.rows(); ++i) {
    for (std::size_t j = 0; j < r.cols(); ++j) {
      if (r.at(i, j) >= threshold) kept.push_back({i, j, r.at(i, j)});
    }
  }
  std::sort(kept.begin(), kept.end(), [](const Indexed& a, const Indexed& b) {
    if (a.p != b.p) return a.p > b.p;
    if (a.i != b.i) return a.i < b.i;
    return a.j < b.j;
  });
  std::vector<RuleRecord> out;
  out.reserve(kept.size());
  for (const auto& k : kept) {
    out.push_back({in_labels[k.i], out_labels[k.j], k.p});
  }
  return out;
}

}  // namespace relid
