#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "relid/errors.hpp"
#include "relid/fuzzy_algebra.hpp"
#include "relid/partition.hpp"
#include "relid/smoothing.hpp"

namespace relid {

/// Parameters of the on-line relational identifier.
///
/// alpha drives the gravity-center adjustment, beta the universe expansion,
/// gamma and filter_order the relational-matrix smoothing. Large alpha can
/// make the predicted signal oscillate (the adjustment outruns the output
/// dynamics); very small alpha lets the prediction error grow. Neither
/// regime is rejected here.
struct IdentifierConfig {
  double alpha = 2.3;           ///< gravity-center adjustment rate
  double beta = 0.82;           ///< universe expansion fraction
  double gamma = 0.01;          ///< filter rate in (0, 1]
  int filter_order = 1;         ///< smoothing cascade depth, 1 or 2
  int n_sets = 7;               ///< fuzzy sets per universe, odd
  double u_init_limit = 10.0;   ///< initial input universe half-width (A)
  double y_init_limit = 10.0;   ///< initial output universe half-width (rad/s)
  double dt = 1e-3;             ///< sampling period (s)
  double integral_clamp = 0.0;  ///< error-integral bound; 0 selects the default

  /// Anti-windup bound on the error integral. The default keeps a single
  /// center step within an order of magnitude of the output universe.
  double resolved_integral_clamp() const {
    return integral_clamp > 0.0 ? integral_clamp : 10.0 * y_init_limit / alpha;
  }

  void validate() const {
    if (!(alpha > 0.0)) throw ConfigError("IdentifierConfig: alpha must be positive");
    if (!(beta >= 0.0)) throw ConfigError("IdentifierConfig: beta must be non-negative");
    if (!(gamma > 0.0 && gamma <= 1.0)) {
      throw ConfigError("IdentifierConfig: gamma must be in (0, 1]");
    }
    if (filter_order != 1 && filter_order != 2) {
      throw ConfigError("IdentifierConfig: filter order must be 1 or 2");
    }
    if (n_sets < 3 || n_sets % 2 == 0) {
      throw ConfigError("IdentifierConfig: set count must be odd and at least 3");
    }
    if (!(u_init_limit > 0.0) || !(y_init_limit > 0.0)) {
      throw ConfigError("IdentifierConfig: universe limits must be positive");
    }
    if (!(dt > 0.0)) throw ConfigError("IdentifierConfig: sampling period must be positive");
    if (integral_clamp < 0.0) {
      throw ConfigError("IdentifierConfig: integral clamp must be non-negative");
    }
  }

  bool operator==(const IdentifierConfig&) const = default;
};

/// One-step-ahead prediction: the fuzzy output vector and its crisp value.
struct Prediction {
  GradeVector grades;
  double value = 0.0;
};

/// Outcome of one full identification cycle.
struct StepResult {
  double y_hat = 0.0;  ///< prediction made before the measured output was seen
  double error = 0.0;  ///< measured minus predicted
};

/// Frozen view of the identifier for serialization and rule explanation.
struct ModelSnapshot {
  IdentifierConfig config;
  RelationalMatrix relation{1, 1};
  FuzzyPartition input_partition = FuzzyPartition::uniform(3, 1.0);
  FuzzyPartition output_partition = FuzzyPartition::uniform(3, 1.0);
  double error_integral = 0.0;
  std::uint64_t sample_count = 0;
  std::vector<RelationalMatrix> filter_stages;  ///< empty before the first sample
  double last_measured_y = 0.0;
};

/// On-line fuzzy relational identifier.
///
/// Each cycle predicts the next output by max-min composition of the
/// fuzzified input with the relational matrix, then folds the measured
/// input-output pair back into the model: the prediction error feeds an
/// integral that shifts the output gravity centers, both universes expand
/// toward the observed magnitudes, the pair's Cartesian product is united
/// into the matrix, and the matrix is exponentially smoothed entrywise.
///
/// The identifier is a self-contained value; stepping is strictly
/// sequential per instance.
class Identifier {
 public:
  explicit Identifier(IdentifierConfig cfg)
      : cfg_(cfg),
        r_(checked_sets(cfg), static_cast<std::size_t>(cfg.n_sets)),
        input_part_(FuzzyPartition::uniform(static_cast<std::size_t>(cfg.n_sets), cfg.u_init_limit)),
        output_part_(FuzzyPartition::uniform(static_cast<std::size_t>(cfg.n_sets), cfg.y_init_limit)),
        smoother_(cfg.gamma, cfg.filter_order) {}

  /// One-step-ahead prediction for the upcoming input. The fuzzy result is
  /// cached so the following update can drive the gravity-center adjustment.
  /// With no usable grades (empty model) the crisp value falls back to the
  /// last measured output.
  Prediction predict(double u_next) {
    const GradeVector x = input_part_.fuzzify(u_next);
    GradeVector y_hat = max_min_compose(x, r_);
    const double value = output_part_.defuzzify(y_hat, last_measured_y_);
    last_prediction_ = Prediction{y_hat, value};
    return *last_prediction_;
  }

  /// Folds a measured pair into the model and returns the prediction error.
  /// Runs the full cycle: error integral, gravity-center adjustment,
  /// universe expansion, relational union, matrix filtering. Non-finite
  /// samples are rejected with the state untouched.
  double update(double u, double y_measured) {
    if (!std::isfinite(u) || !std::isfinite(y_measured)) {
      throw InputError("Identifier::update: non-finite sample");
    }
    const Prediction pred = last_prediction_.has_value()
                                ? *last_prediction_
                                : Prediction{GradeVector::zeros(r_.cols()), last_measured_y_};

    const double e = y_measured - pred.value;
    const double clamp = cfg_.resolved_integral_clamp();
    error_integral_ = std::clamp(error_integral_ + e * cfg_.dt, -clamp, clamp);

    output_part_ = output_part_.adjust_centers(error_integral_, pred.grades, cfg_.alpha);

    input_part_ = input_part_.expand(u, cfg_.beta);
    output_part_ = output_part_.expand(y_measured, cfg_.beta);

    const GradeVector x = input_part_.fuzzify(u);
    const GradeVector y = output_part_.fuzzify(y_measured);
    r_ = smoother_.update(relation_union(cartesian_product(x, y, TNorm::Min), r_));

    last_measured_y_ = y_measured;
    ++sample_count_;
    last_prediction_.reset();
    return e;
  }

  /// Predict-then-update over one sample pair. Returns the prediction made
  /// before the measured output was seen, together with its error.
  StepResult step(double u_next, double y_next) {
    const Prediction pred = predict(u_next);
    const double e = update(u_next, y_next);
    return StepResult{pred.value, e};
  }

  ModelSnapshot snapshot() const {
    ModelSnapshot s;
    s.config = cfg_;
    s.relation = r_;
    s.input_partition = input_part_;
    s.output_partition = output_part_;
    s.error_integral = error_integral_;
    s.sample_count = sample_count_;
    s.filter_stages = smoother_.stages();
    s.last_measured_y = last_measured_y_;
    return s;
  }

  /// Rebuilds an identifier from a snapshot taken between steps. The cached
  /// prediction is not part of the snapshot, so resume before a predict.
  static Identifier restore(const ModelSnapshot& s) {
    Identifier id(s.config);
    const auto n = static_cast<std::size_t>(s.config.n_sets);
    if (s.relation.rows() != n || s.relation.cols() != n ||
        s.input_partition.n_sets() != n || s.output_partition.n_sets() != n) {
      throw ConfigError("Identifier::restore: snapshot dimensions do not match config");
    }
    for (const auto& stage : s.filter_stages) {
      if (stage.rows() != n || stage.cols() != n) {
        throw ConfigError("Identifier::restore: filter stage dimensions do not match config");
      }
    }
    id.r_ = s.relation;
    id.input_part_ = s.input_partition;
    id.output_part_ = s.output_partition;
    id.error_integral_ = std::clamp(s.error_integral, -s.config.resolved_integral_clamp(),
                                    s.config.resolved_integral_clamp());
    id.sample_count_ = s.sample_count;
    id.smoother_ = ExponentialSmoother<RelationalMatrix>(s.config.gamma, s.config.filter_order,
                                                         s.filter_stages);
    id.last_measured_y_ = s.last_measured_y;
    return id;
  }

  const IdentifierConfig& config() const { return cfg_; }
  const RelationalMatrix& relation() const { return r_; }
  const FuzzyPartition& input_partition() const { return input_part_; }
  const FuzzyPartition& output_partition() const { return output_part_; }
  double error_integral() const { return error_integral_; }
  std::uint64_t sample_count() const { return sample_count_; }
  const std::optional<Prediction>& last_prediction() const { return last_prediction_; }

 private:
  static std::size_t checked_sets(const IdentifierConfig& cfg) {
    cfg.validate();
    return static_cast<std::size_t>(cfg.n_sets);
  }

  IdentifierConfig cfg_;
  RelationalMatrix r_;
  FuzzyPartition input_part_;
  FuzzyPartition output_part_;
  double error_integral_ = 0.0;
  ExponentialSmoother<RelationalMatrix> smoother_;
  std::optional<Prediction> last_prediction_;
  double last_measured_y_ = 0.0;
  std::uint64_t sample_count_ = 0;
};

}  // namespace relid
