#include "omitq/schedule.hpp"

#include <cmath>
#include <string>

namespace omitq {

DriveSchedule::DriveSchedule(double level) {
  if (level < 0.0 || level > 1.0) {
    throw InvalidArgumentError("DriveSchedule: multiplier must lie in [0, 1]");
  }
  knots_ = {{0.0, level}};
}

DriveSchedule::DriveSchedule(std::vector<Knot> knots, Ramp mode)
    : knots_(std::move(knots)), mode_(mode) {
  if (knots_.empty()) {
    throw InvalidArgumentError("DriveSchedule: need at least one knot");
  }
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    if (knots_[i].level < 0.0 || knots_[i].level > 1.0) {
      throw InvalidArgumentError(
          "DriveSchedule: multiplier must lie in [0, 1] at knot " +
          std::to_string(i));
    }
    if (i > 0 && knots_[i].time <= knots_[i - 1].time) {
      throw InvalidArgumentError(
          "DriveSchedule: knot times must be strictly increasing");
    }
  }
}

DriveSchedule DriveSchedule::linear_power_pulse(double t_switch,
                                                double t_hold) {
  if (t_switch <= 0.0 || t_hold <= 0.0) {
    throw InvalidArgumentError(
        "linear_power_pulse: t_switch and t_hold must be > 0");
  }
  return DriveSchedule({{0.0, 0.0},
                        {t_switch, 1.0},
                        {t_switch + t_hold, 1.0},
                        {2.0 * t_switch + t_hold, 0.0}},
                       Ramp::Power);
}

double DriveSchedule::value(double t) const {
  if (t <= knots_.front().time) return knots_.front().level;
  if (t >= knots_.back().time) return knots_.back().level;
  // Knot lists are short; linear scan beats bookkeeping.
  for (std::size_t i = 1; i < knots_.size(); ++i) {
    if (t <= knots_[i].time) {
      const auto& lo = knots_[i - 1];
      const auto& hi = knots_[i];
      const double w = (t - lo.time) / (hi.time - lo.time);
      return lo.level + w * (hi.level - lo.level);
    }
  }
  return knots_.back().level;
}

double DriveSchedule::amplitude(double t) const {
  const double v = value(t);
  return mode_ == Ramp::Power ? std::sqrt(v) : v;
}

bool DriveSchedule::is_constant() const {
  for (const auto& k : knots_) {
    if (k.level != knots_.front().level) return false;
  }
  return true;
}

}  // namespace omitq
