#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <span>

#include "relid/errors.hpp"
#include "relid/series.hpp"

namespace relid {

/// Prediction-error summary of one run: overall RMSE, RMSE over four
/// consecutive index quarters, and the worst single error.
struct Metrics {
  std::size_t samples = 0;
  double rmse = 0.0;
  std::array<double, 4> quarter_rmse{};
  double max_abs_error = 0.0;
};

inline Metrics compute_metrics(std::span<const TraceRow> trace) {
  if (trace.empty()) throw InputError("compute_metrics: empty trace");
  Metrics m;
  m.samples = trace.size();
  double total = 0.0;
  for (const TraceRow& r : trace) {
    total += r.e * r.e;
    m.max_abs_error = std::max(m.max_abs_error, std::abs(r.e));
  }
  m.rmse = std::sqrt(total / static_cast<double>(trace.size()));
  for (std::size_t q = 0; q < 4; ++q) {
    const std::size_t lo = q * trace.size() / 4;
    const std::size_t hi = (q + 1) * trace.size() / 4;
    if (hi == lo) continue;  // tiny traces leave some quarters empty
    double sum = 0.0;
    for (std::size_t i = lo; i < hi; ++i) sum += trace[i].e * trace[i].e;
    m.quarter_rmse[q] = std::sqrt(sum / static_cast<double>(hi - lo));
  }
  return m;
}

}  // namespace relid
