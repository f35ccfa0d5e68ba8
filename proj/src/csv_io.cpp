#include "simnet/csv_io.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace simnet {

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  cells.push_back(cur);
  return cells;
}

double parse_cell_double(const std::string& cell, long line, std::size_t col) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw std::runtime_error("stream csv: non-numeric cell '" + cell + "' at line " +
                             std::to_string(line) + ", column " + std::to_string(col + 1));
  return v;
}

long parse_cell_long(const std::string& cell, long line) {
  long v = 0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last)
    throw std::runtime_error("stream csv: bad tick '" + cell + "' at line " +
                             std::to_string(line));
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, ptr);
}

CsvFrameReader::CsvFrameReader(const std::filesystem::path& file)
    : owned_(std::make_unique<std::ifstream>(file)), in_(owned_.get()) {
  if (!*owned_) throw std::runtime_error("stream csv: cannot open " + file.string());
  read_header();
}

CsvFrameReader::CsvFrameReader(std::istream& in) : in_(&in) { read_header(); }

void CsvFrameReader::read_header() {
  std::string line;
  if (!std::getline(*in_, line)) throw std::runtime_error("stream csv: missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  ++line_;
  const auto cells = split_csv(line);
  if (cells.empty() || cells[0] != "t")
    throw std::runtime_error("stream csv: header must start with column 't'");
  n_ = static_cast<int>(cells.size()) - 1;
  if (n_ < 1) throw std::runtime_error("stream csv: header has no sensor columns");
  for (int i = 1; i <= n_; ++i) {
    const std::string expected = "s" + std::to_string(i);
    if (cells[static_cast<std::size_t>(i)] != expected)
      throw std::runtime_error("stream csv: header column " + std::to_string(i + 1) +
                               " must be '" + expected + "', got '" +
                               cells[static_cast<std::size_t>(i)] + "'");
  }
}

std::optional<ObservationFrame> CsvFrameReader::next() {
  std::string line;
  for (;;) {
    if (!std::getline(*in_, line)) return std::nullopt;
    ++line_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) break;
  }
  const auto cells = split_csv(line);
  if (static_cast<int>(cells.size()) != n_ + 1)
    throw std::runtime_error("stream csv: line " + std::to_string(line_) + " has " +
                             std::to_string(cells.size()) + " cells, expected " +
                             std::to_string(n_ + 1));
  ObservationFrame frame;
  frame.t = parse_cell_long(cells[0], line_);
  frame.values.resize(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    const std::string& cell = cells[static_cast<std::size_t>(i) + 1];
    if (cell.empty()) {
      frame.values[static_cast<std::size_t>(i)] = std::numeric_limits<double>::quiet_NaN();
      frame.missing.push_back(i);
    } else {
      frame.values[static_cast<std::size_t>(i)] =
          parse_cell_double(cell, line_, static_cast<std::size_t>(i) + 1);
    }
  }
  return frame;
}

void write_stream_csv(std::ostream& out, FrameSource& source, int n_sensors) {
  out << "t";
  for (int i = 1; i <= n_sensors; ++i) out << ",s" << i;
  out << "\n";
  while (auto frame = source.next()) {
    out << frame->t;
    for (int i = 0; i < n_sensors; ++i) {
      out << ',';
      if (!frame->is_missing(i)) out << format_double(frame->values[static_cast<std::size_t>(i)]);
    }
    out << "\n";
  }
}

void write_trace_csv(std::ostream& out, const std::vector<RhoTraceEntry>& trace) {
  out << "t,node,rho\n";
  for (const auto& entry : trace)
    out << entry.t << ',' << entry.node << ',' << format_double(entry.rho) << "\n";
}

}  // namespace simnet
