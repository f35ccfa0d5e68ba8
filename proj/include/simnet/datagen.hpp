#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <variant>
#include <vector>

#include <json.hpp>

#include "simnet/snapshot.hpp"
#include "simnet/stream_window.hpp"

namespace simnet {

// All generators are driven by counter-based sampling keyed on the seed, so
// a (spec, seed) pair fully determines the output regardless of scheduling.

/// Sensors whose mean follows slope_null * t; after the change tick kappa the
/// anomalous subset continues from its mean at kappa with slope_anomalous
/// (slope change only, no level jump). kappa is the last pre-change tick.
struct TrendModelSpec {
  int n_sensors = 0;
  std::vector<int> anomalous;
  double variance = 25.0;
  double slope_null = 1.0;
  double slope_anomalous = 1.0;
  std::optional<long> kappa;
  long horizon = 0;

  void validate() const;
};

/// Zero-mean Gaussian frames; the change alters only the correlation matrix:
/// rho_normal everywhere before kappa, afterwards rho_cross between anomalous
/// and normal sensors and rho_anomalous inside the anomalous set.
struct CovarianceModelSpec {
  int n_sensors = 0;
  std::vector<int> anomalous;
  double rho_normal = 0.5;
  double rho_cross = -0.2;
  double rho_anomalous = 0.5;
  std::optional<long> kappa;
  long horizon = 0;

  // Builds both correlation matrices and rejects non-PSD ones by full
  // eigendecomposition, naming the offending eigenvalue.
  void validate() const;
};

/// Edge scores drawn directly: y_ij ~ N(u_i . u_j, sigma2), i.i.d. across
/// masked edges and ticks; each unordered pair is sampled once.
struct DirectSimilaritySpec {
  std::vector<std::vector<double>> u;  // unit vectors, one per node
  double sigma2 = 1.0;
  EdgeMask mask = EdgeMask::complete(1);
  long horizon = 0;

  void validate() const;
};

using FrameModelSpec = std::variant<TrendModelSpec, CovarianceModelSpec>;

std::unique_ptr<FrameSource> gen_trend(const TrendModelSpec& spec, std::uint64_t seed);
std::unique_ptr<FrameSource> gen_covariance(const CovarianceModelSpec& spec, std::uint64_t seed);
std::unique_ptr<FrameSource> make_frame_source(const FrameModelSpec& spec, std::uint64_t seed);

bool model_is_null(const FrameModelSpec& spec);
long model_horizon(const FrameModelSpec& spec);
FrameModelSpec model_with_horizon(const FrameModelSpec& spec, long horizon);
FrameModelSpec model_with_kappa(const FrameModelSpec& spec, std::optional<long> kappa);

class SnapshotSource {
 public:
  virtual ~SnapshotSource() = default;
  virtual std::optional<SimilaritySnapshot> next() = 0;
};

std::unique_ptr<SnapshotSource> gen_direct_similarity(const DirectSimilaritySpec& spec,
                                                      std::uint64_t seed);

// Random access into the direct-similarity stream (ticks are i.i.d.), used
// to split long tick ranges across workers.
SimilaritySnapshot direct_similarity_at(const DirectSimilaritySpec& spec, std::uint64_t seed,
                                        long t);

/// Single complete-graph snapshot with a planted two-block structure:
/// N(mu_in, sigma^2) within each side of the split, N(mu_cross, sigma^2)
/// across. S must be a proper subset of the nodes.
SimilaritySnapshot planted_isolation_instance(int n, const std::vector<int>& planted,
                                              double mu_in, double mu_cross, double sigma,
                                              std::uint64_t seed);

// JSON (de)serialization for model specs; "type" selects the model.
nlohmann::ordered_json model_spec_to_json(const FrameModelSpec& spec);
FrameModelSpec model_spec_from_json(const nlohmann::json& j);
nlohmann::ordered_json direct_spec_to_json(const DirectSimilaritySpec& spec);
DirectSimilaritySpec direct_spec_from_json(const nlohmann::json& j);

}  // namespace simnet
