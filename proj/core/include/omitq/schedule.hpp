// Piecewise-linear drive envelopes.
#pragma once

#include <vector>

#include "omitq/errors.hpp"

namespace omitq {

// Envelope for one drive: (time, multiplier) knots, linear interpolation,
// constant extrapolation at both ends. Times are in units of 1/Ω and the
// multiplier lies in [0, 1].
//
// The knots describe either the drive amplitude directly or the drive
// power; a power envelope multiplies the amplitude by sqrt(value).
class DriveSchedule {
 public:
  enum class Ramp { Amplitude, Power };

  struct Knot {
    double time;
    double level;
  };

  // Constant envelope (default: full drive).
  explicit DriveSchedule(double level = 1.0);
  DriveSchedule(std::vector<Knot> knots, Ramp mode);

  static DriveSchedule constant(double level) { return DriveSchedule(level); }

  // Fig.-3-style pulse: power ramps linearly 0 -> 1 over t_switch, holds for
  // t_hold, then ramps 1 -> 0 over t_switch again; zero before t=0.
  static DriveSchedule linear_power_pulse(double t_switch, double t_hold);

  // Interpolated knot value (amplitude or power depending on mode).
  double value(double t) const;
  // Multiplier applied to the drive amplitude.
  double amplitude(double t) const;

  bool is_constant() const;
  Ramp mode() const { return mode_; }
  const std::vector<Knot>& knots() const { return knots_; }

 private:
  std::vector<Knot> knots_;
  Ramp mode_ = Ramp::Amplitude;
};

}  // namespace omitq
