#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace simnet {

// Out-of-order, duplicate, or gapped ticks.
struct SequencingError : std::runtime_error {
  explicit SequencingError(const std::string& what) : std::runtime_error(what) {}
};

/// One time-tick of raw sensor readings. `values[i]` is meaningful only when
/// sensor i is not listed in `missing`.
struct ObservationFrame {
  long t = 0;
  std::vector<double> values;
  std::vector<int> missing;

  bool is_missing(int sensor) const;
};

/// Anything that yields frames in tick order: CSV readers, simulators.
class FrameSource {
 public:
  virtual ~FrameSource() = default;
  virtual std::optional<ObservationFrame> next() = 0;
};

class VectorFrameSource final : public FrameSource {
 public:
  explicit VectorFrameSource(std::vector<ObservationFrame> frames)
      : frames_(std::move(frames)) {}
  std::optional<ObservationFrame> next() override;

 private:
  std::vector<ObservationFrame> frames_;
  std::size_t pos_ = 0;
};

/// Per-sensor ring buffers of the last w readings. A missing reading freezes
/// that sensor's buffer: no push, fill unchanged, so its window simply lags
/// until data resumes. Storage is n*w regardless of stream length.
class WindowBank {
 public:
  WindowBank(int n_sensors, int window_len);

  // Ticks must start at 1 and advance by exactly 1 per frame.
  void push(const ObservationFrame& frame);

  /// The w most recent readings of `sensor` in time order, or nullopt while
  /// the buffer holds fewer than w readings. `t` must be the current tick.
  std::optional<std::vector<double>> window(int sensor, long t) const;

  /// Copies the window into `out` (size w); false while incomplete.
  bool window_into(int sensor, std::span<double> out) const;

  int fill(int sensor) const;
  bool complete(int sensor) const;
  long current_tick() const { return t_; }
  bool empty() const { return !started_; }
  int sensor_count() const { return n_; }
  int window_length() const { return w_; }

 private:
  int check_sensor(int sensor) const;

  int n_ = 0;
  int w_ = 0;
  long t_ = 0;
  bool started_ = false;
  std::vector<double> buf_;  // n_ rows of w_ slots
  std::vector<int> fill_;
  std::vector<int> head_;  // next write slot per sensor
};

}  // namespace simnet
