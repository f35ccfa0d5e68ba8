#include "simnet/stream_window.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace simnet {

bool ObservationFrame::is_missing(int sensor) const {
  return std::find(missing.begin(), missing.end(), sensor) != missing.end();
}

std::optional<ObservationFrame> VectorFrameSource::next() {
  if (pos_ >= frames_.size()) return std::nullopt;
  return frames_[pos_++];
}

WindowBank::WindowBank(int n_sensors, int window_len) : n_(n_sensors), w_(window_len) {
  if (n_ < 1) throw std::invalid_argument("WindowBank: need at least one sensor");
  if (w_ < 1) throw std::invalid_argument("WindowBank: window length must be >= 1");
  buf_.assign(static_cast<std::size_t>(n_) * w_, 0.0);
  fill_.assign(static_cast<std::size_t>(n_), 0);
  head_.assign(static_cast<std::size_t>(n_), 0);
}

int WindowBank::check_sensor(int sensor) const {
  if (sensor < 0 || sensor >= n_)
    throw std::out_of_range("WindowBank: sensor index " + std::to_string(sensor) +
                            " out of range [0, " + std::to_string(n_) + ")");
  return sensor;
}

void WindowBank::push(const ObservationFrame& frame) {
  if (static_cast<int>(frame.values.size()) != n_)
    throw std::invalid_argument("WindowBank: frame has " + std::to_string(frame.values.size()) +
                                " values, expected " + std::to_string(n_));
  if (!started_) {
    if (frame.t != 1)
      throw SequencingError("WindowBank: first frame must have t = 1, got t = " +
                            std::to_string(frame.t));
  } else if (frame.t != t_ + 1) {
    throw SequencingError("WindowBank: expected t = " + std::to_string(t_ + 1) + ", got t = " +
                          std::to_string(frame.t));
  }
  for (int i = 0; i < n_; ++i) {
    if (frame.is_missing(i)) continue;
    const double v = frame.values[i];
    if (!std::isfinite(v))
      throw std::invalid_argument("WindowBank: non-finite reading for sensor " +
                                  std::to_string(i) + " at t = " + std::to_string(frame.t));
    buf_[static_cast<std::size_t>(i) * w_ + head_[i]] = v;
    head_[i] = (head_[i] + 1) % w_;
    if (fill_[i] < w_) ++fill_[i];
  }
  t_ = frame.t;
  started_ = true;
}

std::optional<std::vector<double>> WindowBank::window(int sensor, long t) const {
  check_sensor(sensor);
  if (t != t_)
    throw std::invalid_argument("WindowBank: window() queried at t = " + std::to_string(t) +
                                " but current tick is " + std::to_string(t_));
  if (fill_[sensor] < w_) return std::nullopt;
  std::vector<double> out(static_cast<std::size_t>(w_));
  window_into(sensor, out);
  return out;
}

bool WindowBank::window_into(int sensor, std::span<double> out) const {
  check_sensor(sensor);
  assert(static_cast<int>(out.size()) == w_);
  if (fill_[sensor] < w_) return false;
  const double* row = buf_.data() + static_cast<std::size_t>(sensor) * w_;
  const int start = head_[sensor];  // oldest slot once full
  for (int k = 0; k < w_; ++k) out[k] = row[(start + k) % w_];
  return true;
}

int WindowBank::fill(int sensor) const { return fill_[check_sensor(sensor)]; }

bool WindowBank::complete(int sensor) const { return fill_[check_sensor(sensor)] == w_; }

}  // namespace simnet
