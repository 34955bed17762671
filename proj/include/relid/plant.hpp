#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "relid/errors.hpp"
#include "relid/series.hpp"

namespace relid {

/// Electrical and mechanical constants of the permanent-magnet machine.
/// Defaults are the modeled 250 V drive.
struct MotorParams {
  double r_stator = 0.9;     ///< stator resistance (ohm)
  double l_d = 0.0051;       ///< d-axis inductance (H)
  double l_q = 0.0056;       ///< q-axis inductance (H)
  double phi_f = 0.5;        ///< rotor flux (Wb)
  double inertia = 0.025;    ///< rotor inertia (kg m^2)
  double u_max = 250.0;      ///< voltage limit (V)
  double load_torque = 0.0;  ///< load torque (N m), any finite value

  void validate() const {
    if (!(r_stator > 0.0 && l_d > 0.0 && l_q > 0.0 && phi_f > 0.0 && inertia > 0.0 &&
          u_max > 0.0) ||
        !std::isfinite(load_torque)) {
      throw ConfigError("MotorParams: machine constants must be positive");
    }
  }
};

/// Rotor-frame machine state. theta is kept wrapped to [0, 2*pi).
struct MotorState {
  double i_d = 0.0;    ///< d-axis stator current (A)
  double i_q = 0.0;    ///< q-axis stator current (A)
  double omega = 0.0;  ///< angular speed (rad/s)
  double theta = 0.0;  ///< rotor position (rad)

  bool finite() const {
    return std::isfinite(i_d) && std::isfinite(i_q) && std::isfinite(omega) &&
           std::isfinite(theta);
  }
};

inline double wrap_angle(double theta) {
  const double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(theta, two_pi);
  if (w < 0.0) w += two_pi;
  return w;
}

/// Continuous dq dynamics of the machine for given stator voltages.
///
/// The q-axis row uses the standard cross-coupling sign (-omega*L_d*i_d),
/// consistent with the torque row.
inline MotorState motor_derivatives(const MotorState& s, double u_d, double u_q,
                                    const MotorParams& p) {
  MotorState d;
  d.i_d = (u_d + s.omega * p.l_q * s.i_q - p.r_stator * s.i_d) / p.l_d;
  d.i_q = (u_q - s.omega * p.l_d * s.i_d - p.r_stator * s.i_q - s.omega * p.phi_f) / p.l_q;
  d.omega = (((p.l_d - p.l_q) * s.i_d + p.phi_f) * s.i_q - p.load_torque) / p.inertia;
  d.theta = s.omega;
  return d;
}

/// Classical fourth-order Runge-Kutta step of the full dq model with the
/// stator voltages held over the step.
inline MotorState integrate_step(const MotorState& s, double u_d, double u_q,
                                 const MotorParams& p, double dt) {
  if (!(dt > 0.0)) throw ConfigError("integrate_step: dt must be positive");
  auto advance = [&](const MotorState& base, const MotorState& k, double h) {
    return MotorState{base.i_d + h * k.i_d, base.i_q + h * k.i_q, base.omega + h * k.omega,
                      base.theta + h * k.theta};
  };
  const MotorState k1 = motor_derivatives(s, u_d, u_q, p);
  const MotorState k2 = motor_derivatives(advance(s, k1, dt / 2.0), u_d, u_q, p);
  const MotorState k3 = motor_derivatives(advance(s, k2, dt / 2.0), u_d, u_q, p);
  const MotorState k4 = motor_derivatives(advance(s, k3, dt), u_d, u_q, p);
  MotorState out;
  out.i_d = s.i_d + dt / 6.0 * (k1.i_d + 2.0 * k2.i_d + 2.0 * k3.i_d + k4.i_d);
  out.i_q = s.i_q + dt / 6.0 * (k1.i_q + 2.0 * k2.i_q + 2.0 * k3.i_q + k4.i_q);
  out.omega = s.omega + dt / 6.0 * (k1.omega + 2.0 * k2.omega + 2.0 * k3.omega + k4.omega);
  out.theta = s.theta + dt / 6.0 * (k1.theta + 2.0 * k2.theta + 2.0 * k3.theta + k4.theta);
  if (!out.finite()) {
    throw DivergenceError("integrate_step: state became non-finite (dt too large)");
  }
  out.theta = wrap_angle(out.theta);
  return out;
}

/// Deterministic time function used for current references, speed
/// references and load profiles.
class Schedule {
 public:
  static Schedule constant(double value) {
    Schedule s;
    s.kind_ = Kind::Constant;
    s.a_ = value;
    return s;
  }

  /// amplitude * sin(2*pi*frequency*t + phase)
  static Schedule sinusoid(double amplitude, double frequency_hz, double phase = 0.0) {
    if (!(frequency_hz > 0.0)) throw ConfigError("Schedule: frequency must be positive");
    Schedule s;
    s.kind_ = Kind::Sinusoid;
    s.a_ = amplitude;
    s.b_ = frequency_hz;
    s.c_ = phase;
    return s;
  }

  /// Piecewise-constant sequence of (time, value) knots; holds the value of
  /// the latest knot at or before t.
  static Schedule steps(std::vector<std::pair<double, double>> knots) {
    if (knots.empty()) throw ConfigError("Schedule: step sequence needs at least one knot");
    for (std::size_t i = 1; i < knots.size(); ++i) {
      if (!(knots[i].first > knots[i - 1].first)) {
        throw ConfigError("Schedule: step knot times must be strictly increasing");
      }
    }
    Schedule s;
    s.kind_ = Kind::Steps;
    s.knots_ = std::move(knots);
    return s;
  }

  double operator()(double t) const {
    switch (kind_) {
      case Kind::Constant:
        return a_;
      case Kind::Sinusoid:
        return a_ * std::sin(2.0 * std::numbers::pi * b_ * t + c_);
      case Kind::Steps: {
        double v = knots_.front().second;
        for (const auto& [kt, kv] : knots_) {
          if (kt <= t) v = kv;
          else break;
        }
        return v;
      }
    }
    return 0.0;
  }

 private:
  enum class Kind { Constant, Sinusoid, Steps };

  Schedule() = default;

  Kind kind_ = Kind::Constant;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
  std::vector<std::pair<double, double>> knots_;
};

/// How the current-controlled inverter is represented.
///
/// IdealCurrent treats the current loop as instantaneous (i_d = 0,
/// i_q = reference) and integrates only the mechanical rows; FullDq closes
/// a proportional current loop over all four rows with the voltage
/// saturated at the machine limit.
enum class MotorModel { IdealCurrent, FullDq };

struct SimOptions {
  double dt = 1e-4;          ///< integration step (s)
  double duration = 1.0;     ///< simulated span (s)
  int output_stride = 1;     ///< emit every k-th step
  MotorModel model = MotorModel::IdealCurrent;
  double current_kp = 1000.0;  ///< proportional gain of the FullDq current loop (V/A)

  void validate() const {
    if (!(dt > 0.0)) throw ConfigError("SimOptions: dt must be positive");
    if (!(duration > 0.0)) throw ConfigError("SimOptions: duration must be positive");
    if (output_stride < 1) throw ConfigError("SimOptions: output stride must be at least 1");
    if (!(current_kp > 0.0)) throw ConfigError("SimOptions: current gain must be positive");
  }
};

namespace detail {

inline double clamp_sym(double v, double limit) { return std::clamp(v, -limit, limit); }

/// RK4 over the mechanical rows only, with i_d = 0 and i_q following the
/// reference exactly; the speed derivative is then a pure function of time.
struct MechState {
  double omega = 0.0;
  double theta = 0.0;
};

inline MechState ideal_mech_step(const MechState& s, double t, double dt,
                                 const Schedule& iq_ref, const Schedule& load,
                                 const MotorParams& p) {
  auto f = [&](double tau) { return (p.phi_f * iq_ref(tau) - load(tau)) / p.inertia; };
  const double k1w = f(t);
  const double k2w = f(t + dt / 2.0);
  const double k3w = k2w;
  const double k4w = f(t + dt);
  const double k1t = s.omega;
  const double k2t = s.omega + dt / 2.0 * k1w;
  const double k3t = s.omega + dt / 2.0 * k2w;
  const double k4t = s.omega + dt * k3w;
  MechState out;
  out.omega = s.omega + dt / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
  out.theta = s.theta + dt / 6.0 * (k1t + 2.0 * k2t + 2.0 * k3t + k4t);
  return out;
}

}  // namespace detail

/// Simulates the drive for a given current-reference schedule and returns
/// the sampled (t, i_q_ref, omega) trajectory, including the initial point.
inline std::vector<Sample> simulate(const Schedule& iq_ref, const Schedule& load,
                                    const MotorParams& params, const SimOptions& opt) {
  params.validate();
  opt.validate();
  const auto n_steps = static_cast<long long>(std::llround(opt.duration / opt.dt));
  if (n_steps < 1) throw ConfigError("simulate: duration shorter than one step");

  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n_steps / opt.output_stride) + 2);

  MotorState s;
  out.push_back({0.0, iq_ref(0.0), s.omega});
  for (long long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * opt.dt;
    if (opt.model == MotorModel::IdealCurrent) {
      const detail::MechState next =
          detail::ideal_mech_step({s.omega, s.theta}, t, opt.dt, iq_ref, load, params);
      if (!std::isfinite(next.omega) || !std::isfinite(next.theta)) {
        throw DivergenceError("simulate: speed became non-finite at t=" + std::to_string(t));
      }
      s.omega = next.omega;
      s.theta = wrap_angle(next.theta);
      s.i_q = iq_ref(t + opt.dt);
    } else {
      MotorParams p = params;
      p.load_torque = load(t);
      const double u_q = detail::clamp_sym(opt.current_kp * (iq_ref(t) - s.i_q), params.u_max);
      const double u_d = detail::clamp_sym(-opt.current_kp * s.i_d, params.u_max);
      s = integrate_step(s, u_d, u_q, p, opt.dt);
    }
    if ((k + 1) % opt.output_stride == 0) {
      const double te = static_cast<double>(k + 1) * opt.dt;
      out.push_back({te, iq_ref(te), s.omega});
    }
  }
  return out;
}

/// Closed-loop variant: a proportional speed controller generates the
/// current reference (clamped to a current limit) and the FullDq model runs
/// underneath. The emitted u column is the generated reference, which is
/// what the identifier sees as its input.
inline std::vector<Sample> simulate_speed_controlled(const Schedule& omega_ref,
                                                     double speed_kp, double iq_limit,
                                                     const Schedule& load,
                                                     const MotorParams& params,
                                                     const SimOptions& opt) {
  params.validate();
  opt.validate();
  if (!(speed_kp > 0.0) || !(iq_limit > 0.0)) {
    throw ConfigError("simulate_speed_controlled: controller gains must be positive");
  }
  const auto n_steps = static_cast<long long>(std::llround(opt.duration / opt.dt));
  if (n_steps < 1) throw ConfigError("simulate_speed_controlled: duration shorter than one step");

  std::vector<Sample> out;
  out.reserve(static_cast<std::size_t>(n_steps / opt.output_stride) + 2);

  MotorState s;
  auto reference = [&](double t, const MotorState& st) {
    return detail::clamp_sym(speed_kp * (omega_ref(t) - st.omega), iq_limit);
  };
  out.push_back({0.0, reference(0.0, s), s.omega});
  for (long long k = 0; k < n_steps; ++k) {
    const double t = static_cast<double>(k) * opt.dt;
    const double iq_ref = reference(t, s);
    MotorParams p = params;
    p.load_torque = load(t);
    const double u_q = detail::clamp_sym(opt.current_kp * (iq_ref - s.i_q), params.u_max);
    const double u_d = detail::clamp_sym(-opt.current_kp * s.i_d, params.u_max);
    s = integrate_step(s, u_d, u_q, p, opt.dt);
    if ((k + 1) % opt.output_stride == 0) {
      const double te = static_cast<double>(k + 1) * opt.dt;
      out.push_back({te, reference(te, s), s.omega});
    }
  }
  return out;
}

namespace detail {

/// Uniform double in [0, 1) built from the generator's raw bits, so the
/// stream does not depend on the standard library's distribution
/// implementation.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace detail

/// Adds seeded uniform noise in [-fraction*nominal, +fraction*nominal].
inline std::vector<double> add_noise(std::vector<double> series, double fraction,
                                     double nominal, std::uint64_t seed) {
  if (!(fraction >= 0.0)) throw ConfigError("add_noise: fraction must be non-negative");
  if (fraction == 0.0) return series;
  std::mt19937_64 rng(seed);
  const double span = fraction * std::abs(nominal);
  for (double& v : series) {
    v += (2.0 * detail::uniform01(rng) - 1.0) * span;
  }
  return series;
}

}  // namespace relid
