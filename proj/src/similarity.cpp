#include "simnet/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace simnet {

namespace {

void check_pair(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size())
    throw std::invalid_argument("similarity: window lengths differ (" + std::to_string(x.size()) +
                                " vs " + std::to_string(y.size()) + ")");
  if (x.size() < 2) throw std::invalid_argument("similarity: window length must be >= 2");
}

}  // namespace

MeasureKind measure_kind_from_string(const std::string& name) {
  if (name == "pearson") return MeasureKind::pearson;
  if (name == "inner_product") return MeasureKind::inner_product;
  if (name == "neg_euclidean") return MeasureKind::neg_euclidean;
  throw std::invalid_argument("unknown similarity measure: " + name);
}

std::string to_string(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::pearson: return "pearson";
    case MeasureKind::inner_product: return "inner_product";
    case MeasureKind::neg_euclidean: return "neg_euclidean";
  }
  throw std::logic_error("unreachable measure kind");
}

bool standardize_into(std::span<const double> x, std::span<double> u) {
  const std::size_t w = x.size();
  if (w < 2) throw std::invalid_argument("standardize: window length must be >= 2");
  if (u.size() != w) throw std::invalid_argument("standardize: output size mismatch");
  double sum = 0.0;
  for (double v : x) sum += v;
  const double m = sum / static_cast<double>(w);
  double ss = 0.0;
  for (std::size_t k = 0; k < w; ++k) {
    const double d = x[k] - m;
    u[k] = d;
    ss += d * d;
  }
  const double norm = std::sqrt(ss);
  if (norm == 0.0) {
    std::fill(u.begin(), u.end(), 0.0);
    return false;
  }
  for (std::size_t k = 0; k < w; ++k) u[k] /= norm;
  return true;
}

StandardizedWindow standardize(std::span<const double> x) {
  StandardizedWindow out;
  out.u.resize(x.size());
  out.degenerate = !standardize_into(x, out.u);
  return out;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  const std::size_t w = x.size();
  double sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < w; ++k) {
    sx += x[k];
    sy += y[k];
  }
  const double mx = sx / static_cast<double>(w);
  const double my = sy / static_cast<double>(w);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < w; ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return std::nullopt;
  const double r = sxy / std::sqrt(sxx * syy);
  return std::clamp(r, -1.0, 1.0);
}

double inner_product(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

double neg_euclidean(std::span<const double> x, std::span<const double> y) {
  check_pair(x, y);
  double ss = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    ss += d * d;
  }
  return -std::sqrt(ss);
}

std::optional<double> measure(MeasureKind kind, std::span<const double> x,
                              std::span<const double> y) {
  switch (kind) {
    case MeasureKind::pearson: return pearson(x, y);
    case MeasureKind::inner_product: return inner_product(x, y);
    case MeasureKind::neg_euclidean: return neg_euclidean(x, y);
  }
  throw std::logic_error("unreachable measure kind");
}

}  // namespace simnet
