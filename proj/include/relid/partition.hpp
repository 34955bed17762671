#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "relid/errors.hpp"
#include "relid/fuzzy_algebra.hpp"

namespace relid {

/// Default linguistic labels for an odd set count: the classic
/// NB NM NS ZE PS PM PB family for seven sets, shorter families for
/// five and three, numbered offsets otherwise.
inline std::vector<std::string> default_labels(std::size_t n_sets) {
  if (n_sets == 7) return {"NB", "NM", "NS", "ZE", "PS", "PM", "PB"};
  if (n_sets == 5) return {"NB", "NS", "ZE", "PS", "PB"};
  if (n_sets == 3) return {"NB", "ZE", "PB"};
  std::vector<std::string> labels(n_sets);
  const std::size_t mid = n_sets / 2;
  for (std::size_t i = 0; i < n_sets; ++i) {
    if (i < mid) {
      labels[i] = "N" + std::to_string(mid - i);
    } else if (i == mid) {
      labels[i] = "ZE";
    } else {
      labels[i] = "P" + std::to_string(i - mid);
    }
  }
  return labels;
}

/// Triangular membership family over one symmetric universe of discourse.
///
/// Triangle apexes sit on a uniform grid over [-limit, +limit] with 50%
/// overlap, so interior grades always sum to one; the outermost sets are
/// shoulder-shaped. Each set carries a gravity center used as its weight in
/// defuzzification. Gravity centers start at the apexes and are moved by the
/// on-line adjustment; the triangles themselves stay on the grid. The
/// universe half-width can grow (never shrink) as values approach its edge.
///
/// All operations are const and return new partitions.
class FuzzyPartition {
 public:
  /// Uniform partition with centers at the apexes.
  static FuzzyPartition uniform(std::size_t n_sets, double init_limit) {
    if (n_sets < 3 || n_sets % 2 == 0) {
      throw ConfigError("FuzzyPartition: set count must be odd and at least 3");
    }
    if (!(init_limit > 0.0) || !std::isfinite(init_limit)) {
      throw ConfigError("FuzzyPartition: initial limit must be positive and finite");
    }
    FuzzyPartition p;
    p.init_limit_ = init_limit;
    p.current_limit_ = init_limit;
    p.peaks_.resize(n_sets);
    const double step = 2.0 * init_limit / static_cast<double>(n_sets - 1);
    for (std::size_t i = 0; i < n_sets; ++i) {
      p.peaks_[i] = -init_limit + static_cast<double>(i) * step;
    }
    // Pin the endpoints so peaks[0] and peaks[n-1] equal the limits exactly.
    p.peaks_.front() = -init_limit;
    p.peaks_.back() = init_limit;
    p.centers_ = p.peaks_;
    return p;
  }

  /// Rebuilds a partition from stored state (snapshot restore). Invariants
  /// are re-checked.
  static FuzzyPartition from_parts(double init_limit, double current_limit,
                                   std::vector<double> peaks, std::vector<double> centers) {
    if (peaks.size() < 3 || peaks.size() % 2 == 0 || peaks.size() != centers.size()) {
      throw ConfigError("FuzzyPartition: invalid stored set count");
    }
    if (!(init_limit > 0.0) || !(current_limit >= init_limit)) {
      throw ConfigError("FuzzyPartition: invalid stored universe limits");
    }
    for (std::size_t i = 1; i < peaks.size(); ++i) {
      if (!(peaks[i] > peaks[i - 1]) || !(centers[i] > centers[i - 1])) {
        throw ConfigError("FuzzyPartition: stored peaks/centers not strictly increasing");
      }
    }
    const double slack = 1e-9 * current_limit;
    if (std::abs(peaks.front() + current_limit) > slack ||
        std::abs(peaks.back() - current_limit) > slack ||
        centers.front() < -current_limit - slack ||
        centers.back() > current_limit + slack) {
      throw ConfigError("FuzzyPartition: stored peaks/centers outside universe");
    }
    peaks.front() = -current_limit;
    peaks.back() = current_limit;
    FuzzyPartition p;
    p.init_limit_ = init_limit;
    p.current_limit_ = current_limit;
    p.peaks_ = std::move(peaks);
    p.centers_ = std::move(centers);
    return p;
  }

  std::size_t n_sets() const { return peaks_.size(); }
  double init_limit() const { return init_limit_; }
  double current_limit() const { return current_limit_; }
  const std::vector<double>& peaks() const { return peaks_; }
  const std::vector<double>& centers() const { return centers_; }

  /// Triangular membership evaluation. The value is clamped to the current
  /// universe first, so out-of-range inputs land fully on a boundary set.
  /// Non-finite inputs yield an all-zero vector.
  GradeVector fuzzify(double x) const {
    const std::size_t n = n_sets();
    std::vector<double> g(n, 0.0);
    if (!std::isfinite(x)) return GradeVector(std::move(g));
    const double xc = std::clamp(x, -current_limit_, current_limit_);
    if (xc <= peaks_.front()) {
      g.front() = 1.0;
      return GradeVector(std::move(g));
    }
    if (xc >= peaks_.back()) {
      g.back() = 1.0;
      return GradeVector(std::move(g));
    }
    // Locate the apex interval [peaks[k], peaks[k+1]] containing xc.
    std::size_t k = 0;
    while (k + 2 < n && xc >= peaks_[k + 1]) ++k;
    const double span = peaks_[k + 1] - peaks_[k];
    g[k] = (peaks_[k + 1] - xc) / span;
    g[k + 1] = (xc - peaks_[k]) / span;
    return GradeVector(std::move(g));
  }

  /// Normalized center-of-gravity: sum(y_i * CG_i) / sum(y_i). When the
  /// grades carry no mass (sum below 1e-9) the caller-supplied fallback is
  /// returned instead.
  double defuzzify(const GradeVector& y, double fallback) const {
    if (y.size() != n_sets()) {
      throw DimensionError("defuzzify: grade count does not match partition");
    }
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      num += y[i] * centers_[i];
      den += y[i];
    }
    if (den < kDegenerateMass) return fallback;
    return num / den;
  }

  /// Moves each gravity center by alpha * error_integral * y_hat_i, then
  /// restores strict ordering (minimum separation 1e-6 of the half-width)
  /// and containment in the universe.
  FuzzyPartition adjust_centers(double error_integral, const GradeVector& y_hat,
                                double alpha) const {
    if (!(alpha > 0.0)) {
      throw ConfigError("adjust_centers: alpha must be positive");
    }
    if (y_hat.size() != n_sets()) {
      throw DimensionError("adjust_centers: grade count does not match partition");
    }
    FuzzyPartition p = *this;
    const std::size_t n = p.centers_.size();
    for (std::size_t i = 0; i < n; ++i) {
      p.centers_[i] += alpha * error_integral * y_hat[i];
    }
    const double limit = p.current_limit_;
    const double delta = 1e-6 * limit;
    for (double& c : p.centers_) c = std::clamp(c, -limit, limit);
    for (std::size_t i = 1; i < n; ++i) {
      p.centers_[i] = std::max(p.centers_[i], p.centers_[i - 1] + delta);
    }
    p.centers_.back() = std::min(p.centers_.back(), limit);
    for (std::size_t i = n - 1; i-- > 0;) {
      p.centers_[i] = std::min(p.centers_[i], p.centers_[i + 1] - delta);
    }
    return p;
  }

  /// Universe expansion: the candidate half-width init * (1 + beta*|value|/init)
  /// widens the universe when the value approaches or passes its edge. Limits
  /// ratchet (never shrink); peaks and centers scale with the limit.
  FuzzyPartition expand(double value, double beta) const {
    if (!(beta >= 0.0)) {
      throw ConfigError("expand: beta must be non-negative");
    }
    const double candidate =
        init_limit_ * (1.0 + beta * std::abs(value) / init_limit_);
    if (!(candidate > current_limit_)) return *this;  // NaN falls through to no-op
    FuzzyPartition p = *this;
    const double ratio = candidate / current_limit_;
    for (double& v : p.peaks_) v *= ratio;
    for (double& v : p.centers_) v *= ratio;
    p.peaks_.front() = -candidate;
    p.peaks_.back() = candidate;
    p.current_limit_ = candidate;
    return p;
  }

  /// Human-readable state record: one line per set plus the limits.
  std::string describe() const {
    std::ostringstream os;
    const auto labels = default_labels(n_sets());
    os << "universe half-width: " << current_limit_ << " (initial " << init_limit_ << ")\n";
    for (std::size_t i = 0; i < n_sets(); ++i) {
      os << labels[i] << ": peak " << peaks_[i] << ", center " << centers_[i] << "\n";
    }
    return os.str();
  }

  bool operator==(const FuzzyPartition&) const = default;

  static constexpr double kDegenerateMass = 1e-9;

 private:
  FuzzyPartition() = default;

  double init_limit_ = 0.0;
  double current_limit_ = 0.0;
  std::vector<double> peaks_;
  std::vector<double> centers_;
};

}  // namespace relid
