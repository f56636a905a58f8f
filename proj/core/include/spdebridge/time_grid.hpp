#pragma once

#include <stdexcept>

namespace spdebridge {

/// Uniform time grid on [0, T] with N steps. The last node is T exactly, not
/// an accumulated sum.
class TimeGrid {
 public:
  TimeGrid(double horizon, int num_steps) : horizon_(horizon), num_steps_(num_steps) {
    if (!(horizon > 0.0)) throw std::invalid_argument("time grid horizon must be positive");
    if (num_steps < 1) throw std::invalid_argument("time grid needs at least one step");
    dt_ = horizon_ / num_steps_;
  }

  double horizon() const noexcept { return horizon_; }
  int num_steps() const noexcept { return num_steps_; }
  double dt() const noexcept { return dt_; }

  double node(int n) const noexcept { return n == num_steps_ ? horizon_ : n * dt_; }

 private:
  double horizon_;
  int num_steps_;
  double dt_;
};

}  // namespace spdebridge
