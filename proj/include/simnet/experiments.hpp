#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "simnet/datagen.hpp"
#include "simnet/detector.hpp"

// Reproducible experiment workflows. Each run_* function embeds the fully
// resolved configuration (including the seed) in its report, and its output
// is bit-identical for any worker count: every replica draws from a derived
// seed and aggregation happens in replica order.

namespace simnet {

struct CalibrationExperiment {
  FrameModelSpec model;  // null model
  DetectorSettings settings;
  double target_arl = 0.0;
  int replicas = 0;
  long horizon = -1;  // -1 = 20 * target
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> revalidate_seed;
  int revalidate_replicas = -1;  // -1 = replicas
};
nlohmann::ordered_json run_calibration(const CalibrationExperiment& exp, int parallel);
CalibrationExperiment calibration_from_json(const nlohmann::json& j);

struct EddSweepExperiment {
  TrendModelSpec base;  // slope_anomalous is replaced per row
  DetectorSettings settings;
  double b = 0.0;
  std::vector<double> slopes;
  long kappa = 0;
  int replicas = 0;
  long horizon = 0;
  std::uint64_t seed = 0;
};
nlohmann::ordered_json run_edd_sweep(const EddSweepExperiment& exp, int parallel);
EddSweepExperiment edd_sweep_from_json(const nlohmann::json& j);

/// Fraction of replicas whose alarm lands in (kappa, kappa + window_ticks].
struct DetectionRateExperiment {
  CovarianceModelSpec model;  // kappa set
  DetectorSettings settings;
  double b = 0.0;
  long window_ticks = 0;
  int replicas = 0;
  long horizon = 0;
  std::uint64_t seed = 0;
};
nlohmann::ordered_json run_detection_rate(const DetectionRateExperiment& exp, int parallel);

/// Pools post-change scores and measures how much of the normal-normal and
/// anomalous-normal mass sits on the wrong side of zero.
struct SimilaritySplitExperiment {
  CovarianceModelSpec model;  // kappa set
  int w = 0;
  int replicas = 0;
  long from_tick = 0;  // inclusive; should be >= kappa + w for pure windows
  long to_tick = 0;    // inclusive
  std::uint64_t seed = 0;
};
nlohmann::ordered_json run_similarity_split(const SimilaritySplitExperiment& exp, int parallel);

/// Per-tick alarm rate of the threshold rule on directly sampled score
/// networks (ticks are i.i.d., so the range splits freely across workers).
struct TickRateExperiment {
  DirectSimilaritySpec model;  // horizon = number of ticks
  double b = 0.0;
  std::uint64_t seed = 0;
};
nlohmann::ordered_json run_tick_rate(const TickRateExperiment& exp, int parallel);

/// Planted two-block instances: how often spectral + refinement attains the
/// enumerated optimum and recovers the planted set exactly.
struct IsolationBatchExperiment {
  int n = 0;
  std::vector<int> planted;
  double mu_in = 0.0;
  double mu_cross = 0.0;
  double sigma = 0.0;
  int instances = 0;
  std::uint64_t seed = 0;
};
nlohmann::ordered_json run_isolation_batch(const IsolationBatchExperiment& exp, int parallel);

// Detector settings <-> JSON ({"w", "kind", "edge_mask"}).
nlohmann::ordered_json settings_to_json(const DetectorSettings& settings);
DetectorSettings settings_from_json(const nlohmann::json& j);

}  // namespace simnet
