#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "simnet/datagen.hpp"
#include "simnet/snapshot.hpp"

namespace simnet {

struct DetectorSettings {
  int w = 0;
  MeasureKind kind = MeasureKind::pearson;
  std::optional<EdgeMask> edge_mask;  // absent = complete graph

  void validate() const;
};

/// Running state of the stopping rule. A node is active at a tick when its
/// window is complete and its neighborhood is nonempty; inactive nodes carry
/// NaN in `rho` and are excluded from the alarm maximum.
struct DetectorState {
  double b = 0.0;
  long t = 0;  // last stepped tick; 0 before the first step
  std::vector<double> rho;
  bool alarmed = false;
  std::optional<long> alarm_time;
  std::optional<int> argmax_node;
};

/// Negative average similarity of `node` over its neighborhood; nullopt when
/// the neighborhood is empty (the node is skipped by step()).
std::optional<double> node_statistic(const SimilaritySnapshot& snap, int node);

/// Advances one tick. Alarms when the maximum statistic over active nodes
/// strictly exceeds b; ties at exactly b do not alarm. Argmax ties resolve to
/// the smallest node index.
void step(DetectorState& state, const SimilaritySnapshot& snap);

struct RhoTraceEntry {
  long t = 0;
  int node = 0;
  double rho = 0.0;
};

struct DetectionResult {
  std::optional<long> alarm_time;
  std::optional<int> argmax_node;
  long last_tick = 0;  // horizon actually consumed
  std::vector<RhoTraceEntry> trace;

  bool censored() const { return !alarm_time.has_value(); }
};

/// Pushes frames into a window bank, builds a snapshot per tick once two
/// windows are complete, and runs the stopping rule until alarm or stream
/// exhaustion. max_ticks < 0 means "until the stream ends".
DetectionResult run_detection(FrameSource& source, const DetectorSettings& settings, double b,
                              long max_ticks = -1, bool record_trace = false);

struct RunMetrics {
  std::optional<double> arl;
  std::optional<double> arl_se;
  std::optional<double> edd;
  std::optional<double> edd_se;
  int replicas = 0;
  int alarmed = 0;
  int censored = 0;
  int false_alarms = 0;
  std::uint64_t seed = 0;
  double b = 0.0;

  nlohmann::ordered_json to_json() const;
};

/// Mean stopping time over seeded replicas of a null model. Censored runs
/// contribute the horizon, which biases the estimate downward; the censoring
/// count is always reported.
RunMetrics estimate_arl(const FrameModelSpec& null_model, const DetectorSettings& settings,
                        double b, int replicas, long horizon, std::uint64_t seed,
                        int parallel = 1);

/// Mean of (T - kappa + 1)^+ over alarmed replicas; censored replicas are
/// counted as misses, alarms at or before kappa as false alarms.
RunMetrics estimate_edd(const FrameModelSpec& change_model, const DetectorSettings& settings,
                        double b, long kappa, int replicas, long horizon, std::uint64_t seed,
                        int parallel = 1);

struct CalibrationResult {
  double b = 0.0;
  RunMetrics metrics;  // replay estimate at b on the calibration paths
  int iterations = 0;
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
};

/// Finds b with simulated ARL within +/-10% of the target by bisection,
/// exploiting that each replica's stopping time is nondecreasing in b. One
/// set of common-random-number paths is simulated to the horizon (default
/// 20 * target) and replayed for every bisection iterate.
CalibrationResult calibrate_threshold(const FrameModelSpec& null_model,
                                      const DetectorSettings& settings, double target_arl,
                                      int replicas, std::uint64_t seed, long horizon = -1,
                                      int parallel = 1);

}  // namespace simnet
