#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace simnet {

enum class MeasureKind { pearson, inner_product, neg_euclidean };

MeasureKind measure_kind_from_string(const std::string& name);
std::string to_string(MeasureKind kind);

/// Mean-centered, unit-norm copy of a window. `degenerate` marks windows with
/// zero variance, whose direction is undefined (u is all zeros then).
struct StandardizedWindow {
  std::vector<double> u;
  bool degenerate = false;
};

StandardizedWindow standardize(std::span<const double> x);

// Writes the centered unit vector of x into u; returns false (and zeroes u)
// when x has zero variance. x.size() == u.size() >= 2.
bool standardize_into(std::span<const double> x, std::span<double> u);

/// Pearson correlation in [-1, 1], clamped after the dot product since
/// rounding can overshoot by ~1e-16. nullopt when either input has zero
/// variance.
std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

double inner_product(std::span<const double> x, std::span<const double> y);

// Negated Euclidean distance, so that larger always means more similar.
double neg_euclidean(std::span<const double> x, std::span<const double> y);

/// Dispatch over the measure kinds. nullopt only for degenerate Pearson.
std::optional<double> measure(MeasureKind kind, std::span<const double> x,
                              std::span<const double> y);

}  // namespace simnet
