#pragma once

#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <string>

#include "simnet/detector.hpp"
#include "simnet/stream_window.hpp"

namespace simnet {

// Shortest round-trip decimal form; byte-stable across reruns.
std::string format_double(double v);

/// Streaming reader for the `t,s1,...,sN` format: one row per tick, empty
/// cell = missing reading. Parsing is strict; non-numeric cells and row
/// shape mismatches are errors.
class CsvFrameReader final : public FrameSource {
 public:
  explicit CsvFrameReader(const std::filesystem::path& file);
  explicit CsvFrameReader(std::istream& in);

  int sensor_count() const { return n_; }
  std::optional<ObservationFrame> next() override;

 private:
  void read_header();

  std::unique_ptr<std::ifstream> owned_;
  std::istream* in_ = nullptr;
  int n_ = 0;
  long line_ = 0;
};

void write_stream_csv(std::ostream& out, FrameSource& source, int n_sensors);

void write_trace_csv(std::ostream& out, const std::vector<RhoTraceEntry>& trace);

}  // namespace simnet
