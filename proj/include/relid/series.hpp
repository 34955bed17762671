#pragma once

namespace relid {

/// One sampled input-output pair of the plant: time, stator-current
/// reference, rotor speed.
struct Sample {
  double t = 0.0;
  double u = 0.0;
  double y = 0.0;

  bool operator==(const Sample&) const = default;
};

/// One identification cycle as logged to a trace file.
struct TraceRow {
  double t = 0.0;
  double u = 0.0;      ///< input fed to the identifier
  double y = 0.0;      ///< measured output
  double y_hat = 0.0;  ///< one-step-ahead prediction
  double e = 0.0;      ///< y - y_hat

  bool operator==(const TraceRow&) const = default;
};

}  // namespace relid
