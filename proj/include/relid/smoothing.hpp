#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "relid/errors.hpp"
#include "relid/fuzzy_algebra.hpp"

namespace relid {

namespace detail {

inline double blend(double accum, double sample, double gamma) {
  return (1.0 - gamma) * accum + gamma * sample;
}

inline RelationalMatrix blend(const RelationalMatrix& accum, const RelationalMatrix& sample,
                              double gamma) {
  if (!accum.same_shape(sample)) {
    throw DimensionError("smooth: sample shape does not match filter state");
  }
  RelationalMatrix out(accum.rows(), accum.cols());
  for (std::size_t i = 0; i < accum.rows(); ++i) {
    for (std::size_t j = 0; j < accum.cols(); ++j) {
      out.at(i, j) = blend(accum.at(i, j), sample.at(i, j), gamma);
    }
  }
  return out;
}

}  // namespace detail

/// Order-n exponential smoothing: a cascade of n first-order geometric
/// filters with rate gamma, each stage smoothing the previous stage's
/// current output. All stages initialize to the first sample, so there is
/// no startup transient. Works on scalars and, entrywise, on relational
/// matrices.
template <class T>
class ExponentialSmoother {
 public:
  ExponentialSmoother(double gamma, int order) : gamma_(gamma), order_(order) {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
      throw ConfigError("ExponentialSmoother: gamma must be in (0, 1]");
    }
    if (order < 1) {
      throw ConfigError("ExponentialSmoother: order must be at least 1");
    }
  }

  /// Restores a smoother mid-stream (snapshot resume).
  ExponentialSmoother(double gamma, int order, std::vector<T> stages)
      : ExponentialSmoother(gamma, order) {
    if (!stages.empty() && stages.size() != static_cast<std::size_t>(order)) {
      throw ConfigError("ExponentialSmoother: stored stage count does not match order");
    }
    stages_ = std::move(stages);
  }

  /// Feeds one sample through the cascade and returns the final stage.
  T update(const T& sample) {
    if (stages_.empty()) {
      stages_.assign(static_cast<std::size_t>(order_), sample);
      return sample;
    }
    T carry = sample;
    for (T& stage : stages_) {
      stage = detail::blend(stage, carry, gamma_);
      carry = stage;
    }
    return stages_.back();
  }

  double gamma() const { return gamma_; }
  int order() const { return order_; }
  bool initialized() const { return !stages_.empty(); }
  const std::vector<T>& stages() const { return stages_; }

 private:
  double gamma_;
  int order_;
  std::vector<T> stages_;  // empty until the first sample
};

/// Closed-form convolution evaluation of first-order exponential smoothing:
///   (1-g)^(t+1) * y(0) + sum_{i=0..t} g * (1-g)^(t-i) * y(i)
/// Equals the recursive filter initialized at y(0). Kept as an independent
/// reference for the recursive implementation.
inline double convolution_reference(std::span<const double> series, double gamma,
                                    std::size_t t) {
  if (t >= series.size()) {
    throw std::out_of_range("convolution_reference: index past end of series");
  }
  const double keep = 1.0 - gamma;
  double acc = std::pow(keep, static_cast<double>(t + 1)) * series[0];
  for (std::size_t i = 0; i <= t; ++i) {
    acc += gamma * std::pow(keep, static_cast<double>(t - i)) * series[i];
  }
  return acc;
}

}  // namespace relid
