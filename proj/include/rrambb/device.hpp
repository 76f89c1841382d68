#pragma once

// Behavioral model of one analog RRAM cell.
//
// Update law: a pulse moves the conductance by step * (1 + N(0, sigma_c2c))
// in the direction of its polarity, clipped to [g_min, g_max]. Reads return
// g * (1 + N(0, sigma_read)) and never disturb the state. After a
// programming operation completes, a residual relaxation
// g *= (1 + N(0, sigma_prog)) is applied.
//
// Closed-loop (verify) programming alternates read and pulse. When the read
// shows the cell less than one step away, the programmer scales the pulse to
// the remaining distance, so a noiseless cell lands exactly on target after
// ceil(|dg| / step) pulses. Pulses toward a boundary conductance are always
// full steps and saturate at the boundary.
//
// `fast_forward` collapses runs of pulses whose outcome is fixed (the cell is
// far from target, so every read in the run is certain to fall outside the
// tolerance band and every pulse is full size) into one aggregated Gaussian
// update. The sum of k i.i.d. pulse increments is exactly
// N(k step, k (sigma_c2c step)^2), so the end state matches stepwise
// simulation in distribution; pulse and read counts are exact.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "rrambb/error.hpp"
#include "rrambb/random.hpp"

namespace rrambb {

enum class Polarity { potentiation, depression };

struct PulseShape {
  double amplitude = 0.0;  // V, signed
  double width = 0.0;      // s
};

struct DeviceParams {
  double g_min = 10e-6;   // S
  double g_max = 100e-6;  // S
  int n_states = 256;
  double step_override = 0.0;  // S; when > 0 replaces (g_max - g_min) / n_states
  PulseShape potentiation{0.8, 10e-9};
  PulseShape depression{-0.9, 10e-9};
  double read_voltage = 0.15;  // V
  double read_width = 10e-9;   // s
  double sigma_c2c = 0.02;
  double sigma_prog = 0.0;
  double sigma_read = 0.005;
  bool fast_forward = true;

  double mean_step() const { return step_override > 0.0 ? step_override : (g_max - g_min) / n_states; }
  double range() const { return g_max - g_min; }

  void validate() const {
    require(g_min > 0.0 && g_min < g_max, ErrorKind::InvalidArgument, "device requires 0 < g_min < g_max");
    require(n_states >= 2, ErrorKind::InvalidArgument, "device requires n_states >= 2");
    require(sigma_c2c >= 0.0 && sigma_prog >= 0.0 && sigma_read >= 0.0, ErrorKind::InvalidArgument,
            "device noise parameters must be non-negative");
    require(potentiation.width > 0.0 && depression.width > 0.0 && read_width > 0.0, ErrorKind::InvalidArgument,
            "pulse widths must be positive");
    require(step_override >= 0.0, ErrorKind::InvalidArgument, "step override must be non-negative");
  }
};

struct DeviceState {
  double conductance = 0.0;  // S
};

struct ProgramReport {
  std::uint64_t pulses_applied = 0;
  std::uint64_t verify_reads = 0;
  bool converged = true;
  double final_error = 0.0;                                          // (g - target) / target, true device value
  double verified_error = std::numeric_limits<double>::quiet_NaN();  // as seen by the last verify read
  double write_energy = 0.0;                                         // J
  double read_energy = 0.0;                                          // J

  /// Time this cell keeps its row busy.
  double latency(const DeviceParams& p) const {
    // Potentiation and depression widths are equal for every preset; use the
    // longer one so mixed pulse trains are never under-counted.
    const double w = std::max(p.potentiation.width, p.depression.width);
    return static_cast<double>(pulses_applied) * w + static_cast<double>(verify_reads) * p.read_width;
  }
};

struct ProgramResult {
  DeviceState state;
  ProgramReport report;
};

inline double clip_conductance(double g, const DeviceParams& p) { return std::clamp(g, p.g_min, p.g_max); }

inline const PulseShape& pulse_shape(Polarity polarity, const DeviceParams& p) {
  return polarity == Polarity::potentiation ? p.potentiation : p.depression;
}

namespace detail {

// One pulse whose nominal size is `magnitude` siemens.
inline double pulse_update(double g, Polarity polarity, double magnitude, const DeviceParams& p, RandomStream& rng) {
  const double noise = p.sigma_c2c > 0.0 ? p.sigma_c2c * rng.normal() : 0.0;
  const double dir = polarity == Polarity::potentiation ? 1.0 : -1.0;
  return clip_conductance(g + dir * magnitude * (1.0 + noise), p);
}

inline double pulse_energy(double g, Polarity polarity, const DeviceParams& p) {
  const auto& s = pulse_shape(polarity, p);
  return s.amplitude * s.amplitude * g * s.width;
}

inline double read_energy(double g, const DeviceParams& p) {
  return p.read_voltage * p.read_voltage * g * p.read_width;
}

inline Polarity toward(double from, double to) { return to >= from ? Polarity::potentiation : Polarity::depression; }

// Distance from g to the boundary the walk is moving away from.
inline double room_behind(double g, Polarity polarity, const DeviceParams& p) {
  return polarity == Polarity::potentiation ? g - p.g_min : p.g_max - g;
}

// Aggregates k full-size pulses. Per-pulse energies are integrated along the
// straight line between start and end conductance.
inline double aggregate_pulses(double g, Polarity polarity, std::uint64_t k, const DeviceParams& p, RandomStream& rng,
                               ProgramReport& report, bool with_reads) {
  const double step = p.mean_step();
  const double kd = static_cast<double>(k);
  const double dir = polarity == Polarity::potentiation ? 1.0 : -1.0;
  const double noise = p.sigma_c2c > 0.0 ? p.sigma_c2c * std::sqrt(kd) * rng.normal() : 0.0;
  const double g_end = clip_conductance(g + dir * step * (kd + noise), p);
  const double g_sum = kd * g + (g_end - g) * (kd - 1.0) / 2.0;
  const auto& s = pulse_shape(polarity, p);
  report.pulses_applied += k;
  report.write_energy += s.amplitude * s.amplitude * s.width * g_sum;
  if (with_reads) {
    report.verify_reads += k;
    report.read_energy += p.read_voltage * p.read_voltage * p.read_width * g_sum;
  }
  return g_end;
}

// Largest k with k*step + 8*sigma*step*sqrt(k) <= room.
inline std::uint64_t safe_run_length(double room, const DeviceParams& p) {
  const double step = p.mean_step();
  if (room <= 0.0) return 0;
  const double b = 8.0 * p.sigma_c2c;
  const double s = (-b + std::sqrt(b * b + 4.0 * room / step)) / 2.0;
  return s <= 0.0 ? 0 : static_cast<std::uint64_t>(std::floor(s * s));
}

inline double behind_guard(const DeviceParams& p) {
  return 10.0 * p.sigma_c2c * std::max(1.0, p.sigma_c2c) * p.mean_step();
}

inline void relax(double& g, const DeviceParams& p, RandomStream& rng) {
  if (p.sigma_prog > 0.0) g = clip_conductance(g * (1.0 + p.sigma_prog * rng.normal()), p);
}

inline void check_target(double target, const DeviceParams& p) {
  if (!(target >= p.g_min && target <= p.g_max))
    fail(ErrorKind::InvalidArgument, "target conductance " + std::to_string(target) + " outside [g_min, g_max]");
}

}  // namespace detail

inline DeviceState apply_pulse(DeviceState state, Polarity polarity, const DeviceParams& params, RandomStream& rng) {
  return {detail::pulse_update(state.conductance, polarity, params.mean_step(), params, rng)};
}

inline double read_conductance(const DeviceState& state, const DeviceParams& params, RandomStream& rng) {
  if (params.sigma_read == 0.0) return state.conductance;
  return state.conductance * (1.0 + params.sigma_read * rng.normal());
}

/// Identity: state retention is treated as ideal.
inline DeviceState apply_retention(DeviceState state, double /*elapsed_s*/, const DeviceParams& /*params*/) {
  return state;
}

/// Open-loop write: round((target - g) / step) pulses, no reads.
inline ProgramResult program_without_verify(DeviceState state, double target, const DeviceParams& params,
                                            RandomStream& rng) {
  detail::check_target(target, params);
  ProgramReport report;
  double g = state.conductance;
  const double step = params.mean_step();
  const auto polarity = detail::toward(g, target);
  const double wanted = std::round(std::abs(target - g) / step);
  std::uint64_t remaining = static_cast<std::uint64_t>(wanted);

  auto one = [&] {
    report.write_energy += detail::pulse_energy(g, polarity, params);
    g = detail::pulse_update(g, polarity, step, params, rng);
    ++report.pulses_applied;
    --remaining;
  };

  if (params.fast_forward && params.sigma_c2c > 0.0) {
    while (remaining > 0 && detail::room_behind(g, polarity, params) < detail::behind_guard(params)) one();
    const double kd = static_cast<double>(remaining);
    const auto tail = static_cast<std::uint64_t>(std::ceil(10.0 * params.sigma_c2c * std::sqrt(kd))) + 2;
    if (remaining > tail + 1) {
      const std::uint64_t k = remaining - tail;
      g = detail::aggregate_pulses(g, polarity, k, params, rng, report, false);
      remaining -= k;
    }
  }
  while (remaining > 0) one();

  detail::relax(g, params, rng);
  report.converged = true;
  report.final_error = (g - target) / target;
  return {{g}, report};
}

/// Closed-loop write against an absolute conductance tolerance (siemens).
inline ProgramResult program_with_verify_abs(DeviceState state, double target, double abs_tolerance,
                                             std::uint64_t max_pulses, const DeviceParams& params, RandomStream& rng) {
  detail::check_target(target, params);
  require(abs_tolerance > 0.0, ErrorKind::InvalidArgument, "verify tolerance must be positive");
  require(max_pulses >= 1, ErrorKind::InvalidArgument, "max_pulses must be at least 1");

  ProgramReport report;
  report.converged = false;
  double g = state.conductance;
  const double step = params.mean_step();
  const bool saturating = target <= params.g_min || target >= params.g_max;

  while (true) {
    if (params.fast_forward && report.pulses_applied < max_pulses) {
      const auto polarity = detail::toward(g, target);
      const double guard = step + abs_tolerance + 8.0 * params.sigma_read * std::max(g, target);
      const double room = std::abs(target - g) - guard;
      if (detail::room_behind(g, polarity, params) >= detail::behind_guard(params)) {
        std::uint64_t k = detail::safe_run_length(room, params);
        k = std::min(k, max_pulses - report.pulses_applied);
        if (k >= 2) {
          g = detail::aggregate_pulses(g, polarity, k, params, rng, report, true);
          continue;
        }
      }
    }

    const double r = read_conductance({g}, params, rng);
    ++report.verify_reads;
    report.read_energy += detail::read_energy(g, params);
    report.verified_error = (r - target) / target;
    // A boundary target cannot be overshot, so its check is one-sided.
    const double miss = target <= params.g_min   ? r - target
                        : target >= params.g_max ? target - r
                                                 : std::abs(r - target);
    if (miss <= abs_tolerance) {
      report.converged = true;
      break;
    }
    if (report.pulses_applied >= max_pulses) break;

    const auto polarity = saturating ? (target <= params.g_min ? Polarity::depression : Polarity::potentiation)
                                     : detail::toward(r, target);
    const double magnitude = saturating ? step : std::min(step, std::abs(target - r));
    report.write_energy += detail::pulse_energy(g, polarity, params);
    g = detail::pulse_update(g, polarity, magnitude, params, rng);
    ++report.pulses_applied;
  }

  detail::relax(g, params, rng);
  report.final_error = (g - target) / target;
  return {{g}, report};
}

/// Closed-loop write with a tolerance relative to the target. A report with
/// converged == false means the pulse budget ran out (stuck or slow cell);
/// the returned state is where the cell was left.
inline ProgramResult program_with_verify(DeviceState state, double target, double tolerance, std::uint64_t max_pulses,
                                         const DeviceParams& params, RandomStream& rng) {
  require(tolerance > 0.0, ErrorKind::InvalidArgument, "verify tolerance must be positive");
  return program_with_verify_abs(state, target, tolerance * target, max_pulses, params, rng);
}

}  // namespace rrambb
