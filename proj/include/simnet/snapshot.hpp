#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <json.hpp>

#include "simnet/similarity.hpp"
#include "simnet/stream_window.hpp"

namespace simnet {

/// Symmetric boolean edge set over n nodes (no self-loops). Upper-triangular
/// storage; the graph topology is fixed for the life of a run.
class EdgeMask {
 public:
  EdgeMask(int n, bool value);
  static EdgeMask complete(int n) { return EdgeMask(n, true); }
  static EdgeMask empty(int n) { return EdgeMask(n, false); }

  int n() const { return n_; }
  bool edge(int i, int j) const;
  void set(int i, int j, bool present);
  long edge_count() const;
  bool is_complete() const;

  static std::size_t tri_index(int i, int j, int n);
  static std::size_t tri_size(int n);

 private:
  int n_;
  std::vector<std::uint8_t> bits_;
};

nlohmann::ordered_json edge_mask_to_json(const EdgeMask& mask);
EdgeMask edge_mask_from_json(const nlohmann::json& j);

/// The per-tick similarity network: symmetric scores with an observed-edge
/// mask. Masked-out slots hold NaN so an accidental read is loudly wrong.
/// Immutable once built; safe to share across threads.
struct SimilaritySnapshot {
  long t = 0;
  int n = 0;
  std::vector<double> y;             // upper-triangular scores
  std::vector<std::uint8_t> mask;    // upper-triangular observed-edge flags
  std::vector<int> degenerate;       // zero-variance nodes (Pearson only)

  bool edge(int i, int j) const;
  double value(int i, int j) const;  // asserts edge(i, j) in debug builds

  // Dense helper for tests and generators; m must be exactly symmetric.
  static SimilaritySnapshot from_matrix(long t, const std::vector<std::vector<double>>& m,
                                        const EdgeMask* mask = nullptr);

  nlohmann::ordered_json to_json() const;
  static SimilaritySnapshot from_json(const nlohmann::json& j);
};

struct Neighborhood {
  int node = 0;
  std::vector<int> members;
};

/// Reusable scratch for per-tick snapshot construction in detection loops.
class SnapshotBuilder {
 public:
  // Rebuilds `out` from the bank's current windows; false when fewer than two
  // windows are complete (detection is not ready yet).
  bool build(const WindowBank& bank, MeasureKind kind, const EdgeMask* edge_mask,
             SimilaritySnapshot& out);

 private:
  std::vector<double> win_;
  std::vector<double> unit_;
  std::vector<std::uint8_t> complete_;
  std::vector<std::uint8_t> degen_;
};

/// Scores every masked-in pair whose windows are complete; other pairs are
/// masked out. nullopt when fewer than two windows are complete.
std::optional<SimilaritySnapshot> build_snapshot(const WindowBank& bank, MeasureKind kind,
                                                 const EdgeMask* edge_mask = nullptr);

Neighborhood neighborhood(const SimilaritySnapshot& snap, int node);

}  // namespace simnet
