#include "simnet/snapshot.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace simnet {

namespace {

constexpr double kMaskedSentinel = std::numeric_limits<double>::quiet_NaN();

void check_node(int i, int n, const char* who) {
  if (i < 0 || i >= n)
    throw std::out_of_range(std::string(who) + ": node index " + std::to_string(i) +
                            " out of range [0, " + std::to_string(n) + ")");
}

}  // namespace

EdgeMask::EdgeMask(int n, bool value) : n_(n) {
  if (n_ < 1) throw std::invalid_argument("EdgeMask: need at least one node");
  bits_.assign(tri_size(n_), value ? 1 : 0);
}

std::size_t EdgeMask::tri_index(int i, int j, int n) {
  assert(i >= 0 && j > i && j < n);
  const std::size_t si = static_cast<std::size_t>(i);
  return si * (2 * static_cast<std::size_t>(n) - si - 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

std::size_t EdgeMask::tri_size(int n) {
  return static_cast<std::size_t>(n) * (static_cast<std::size_t>(n) - 1) / 2;
}

bool EdgeMask::edge(int i, int j) const {
  check_node(i, n_, "EdgeMask");
  check_node(j, n_, "EdgeMask");
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  return bits_[tri_index(i, j, n_)] != 0;
}

void EdgeMask::set(int i, int j, bool present) {
  check_node(i, n_, "EdgeMask");
  check_node(j, n_, "EdgeMask");
  if (i == j) throw std::invalid_argument("EdgeMask: no self-loops");
  if (i > j) std::swap(i, j);
  bits_[tri_index(i, j, n_)] = present ? 1 : 0;
}

long EdgeMask::edge_count() const {
  long c = 0;
  for (auto b : bits_) c += b;
  return c;
}

bool EdgeMask::is_complete() const {
  return static_cast<std::size_t>(edge_count()) == bits_.size();
}

nlohmann::ordered_json edge_mask_to_json(const EdgeMask& mask) {
  nlohmann::ordered_json j;
  j["n"] = mask.n();
  if (mask.is_complete()) {
    j["complete"] = true;
  } else {
    nlohmann::ordered_json edges = nlohmann::ordered_json::array();
    for (int i = 0; i < mask.n(); ++i)
      for (int k = i + 1; k < mask.n(); ++k)
        if (mask.edge(i, k)) edges.push_back({i, k});
    j["edges"] = std::move(edges);
  }
  return j;
}

EdgeMask edge_mask_from_json(const nlohmann::json& j) {
  const int n = j.at("n").get<int>();
  if (j.contains("complete") && j.at("complete").get<bool>()) return EdgeMask::complete(n);
  EdgeMask mask = EdgeMask::empty(n);
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2)
      throw std::invalid_argument("edge mask: each edge must be a pair [i, j]");
    mask.set(e.at(0).get<int>(), e.at(1).get<int>(), true);
  }
  return mask;
}

bool SimilaritySnapshot::edge(int i, int j) const {
  check_node(i, n, "SimilaritySnapshot");
  check_node(j, n, "SimilaritySnapshot");
  if (i == j) return false;
  if (i > j) std::swap(i, j);
  return mask[EdgeMask::tri_index(i, j, n)] != 0;
}

double SimilaritySnapshot::value(int i, int j) const {
  check_node(i, n, "SimilaritySnapshot");
  check_node(j, n, "SimilaritySnapshot");
  assert(edge(i, j) && "reading a masked-out similarity entry");
  if (i > j) std::swap(i, j);
  return y[EdgeMask::tri_index(i, j, n)];
}

SimilaritySnapshot SimilaritySnapshot::from_matrix(long t,
                                                   const std::vector<std::vector<double>>& m,
                                                   const EdgeMask* mask) {
  const int n = static_cast<int>(m.size());
  if (n < 1) throw std::invalid_argument("from_matrix: empty matrix");
  for (const auto& row : m)
    if (static_cast<int>(row.size()) != n) throw std::invalid_argument("from_matrix: not square");
  if (mask && mask->n() != n) throw std::invalid_argument("from_matrix: mask size mismatch");
  SimilaritySnapshot snap;
  snap.t = t;
  snap.n = n;
  snap.y.assign(EdgeMask::tri_size(n), kMaskedSentinel);
  snap.mask.assign(EdgeMask::tri_size(n), 0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (m[i][j] != m[j][i]) throw std::invalid_argument("from_matrix: matrix not symmetric");
      if (mask && !mask->edge(i, j)) continue;
      const std::size_t idx = EdgeMask::tri_index(i, j, n);
      snap.y[idx] = m[i][j];
      snap.mask[idx] = 1;
    }
  }
  return snap;
}

nlohmann::ordered_json SimilaritySnapshot::to_json() const {
  nlohmann::ordered_json j;
  j["t"] = t;
  j["n"] = n;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < n; ++k) {
      if (k != i && edge(i, k)) {
        rows.push_back(value(i, k));
      } else {
        rows.push_back(nullptr);
      }
    }
  }
  j["y"] = std::move(rows);
  j["degenerate"] = degenerate;
  return j;
}

SimilaritySnapshot SimilaritySnapshot::from_json(const nlohmann::json& j) {
  SimilaritySnapshot snap;
  snap.t = j.at("t").get<long>();
  snap.n = j.at("n").get<int>();
  const auto& rows = j.at("y");
  if (!rows.is_array() ||
      rows.size() != static_cast<std::size_t>(snap.n) * static_cast<std::size_t>(snap.n))
    throw std::invalid_argument("snapshot json: y must be a row-major n*n array");
  snap.y.assign(EdgeMask::tri_size(snap.n), kMaskedSentinel);
  snap.mask.assign(EdgeMask::tri_size(snap.n), 0);
  for (int i = 0; i < snap.n; ++i) {
    for (int k = 0; k < snap.n; ++k) {
      const auto& cell = rows[static_cast<std::size_t>(i) * snap.n + k];
      if (i == k) {
        if (!cell.is_null()) throw std::invalid_argument("snapshot json: diagonal must be null");
        continue;
      }
      if (i > k) continue;  // validated against the mirror below
      const auto& mirror = rows[static_cast<std::size_t>(k) * snap.n + i];
      if (cell.is_null() != mirror.is_null())
        throw std::invalid_argument("snapshot json: asymmetric mask");
      if (cell.is_null()) continue;
      const double a = cell.get<double>();
      const double b = mirror.get<double>();
      if (a != b) throw std::invalid_argument("snapshot json: asymmetric values");
      const std::size_t idx = EdgeMask::tri_index(i, k, snap.n);
      snap.y[idx] = a;
      snap.mask[idx] = 1;
    }
  }
  if (j.contains("degenerate")) snap.degenerate = j.at("degenerate").get<std::vector<int>>();
  for (int d : snap.degenerate) check_node(d, snap.n, "snapshot json degenerate");
  return snap;
}

bool SnapshotBuilder::build(const WindowBank& bank, MeasureKind kind, const EdgeMask* edge_mask,
                            SimilaritySnapshot& out) {
  const int n = bank.sensor_count();
  const int w = bank.window_length();
  if (edge_mask && edge_mask->n() != n)
    throw std::invalid_argument("build_snapshot: edge mask is for " +
                                std::to_string(edge_mask->n()) + " nodes, bank has " +
                                std::to_string(n));
  win_.resize(static_cast<std::size_t>(n) * w);
  complete_.assign(static_cast<std::size_t>(n), 0);
  degen_.assign(static_cast<std::size_t>(n), 0);

  int n_complete = 0;
  for (int i = 0; i < n; ++i) {
    std::span<double> row(win_.data() + static_cast<std::size_t>(i) * w, static_cast<std::size_t>(w));
    if (bank.window_into(i, row)) {
      complete_[i] = 1;
      ++n_complete;
    }
  }
  if (n_complete < 2) return false;

  const bool use_unit = (kind == MeasureKind::pearson);
  if (use_unit) {
    unit_.resize(static_cast<std::size_t>(n) * w);
    for (int i = 0; i < n; ++i) {
      if (!complete_[i]) continue;
      std::span<const double> src(win_.data() + static_cast<std::size_t>(i) * w,
                                  static_cast<std::size_t>(w));
      std::span<double> dst(unit_.data() + static_cast<std::size_t>(i) * w,
                            static_cast<std::size_t>(w));
      degen_[i] = standardize_into(src, dst) ? 0 : 1;
    }
  }

  out.t = bank.current_tick();
  out.n = n;
  out.y.assign(EdgeMask::tri_size(n), kMaskedSentinel);
  out.mask.assign(EdgeMask::tri_size(n), 0);
  out.degenerate.clear();

  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    const double* ui = (use_unit ? unit_.data() : win_.data()) + static_cast<std::size_t>(i) * w;
    for (int j = i + 1; j < n; ++j, ++idx) {
      if (!complete_[i] || !complete_[j]) continue;
      if (edge_mask && !edge_mask->edge(i, j)) continue;
      double v;
      if (use_unit) {
        if (degen_[i] || degen_[j]) {
          v = 0.0;  // neutral score for zero-variance windows
        } else {
          const double* uj = unit_.data() + static_cast<std::size_t>(j) * w;
          double dot = 0.0;
          for (int k = 0; k < w; ++k) dot += ui[k] * uj[k];
          v = std::clamp(dot, -1.0, 1.0);
        }
      } else {
        std::span<const double> xi(win_.data() + static_cast<std::size_t>(i) * w,
                                   static_cast<std::size_t>(w));
        std::span<const double> xj(win_.data() + static_cast<std::size_t>(j) * w,
                                   static_cast<std::size_t>(w));
        v = *measure(kind, xi, xj);
      }
      out.y[idx] = v;
      out.mask[idx] = 1;
    }
  }
  if (use_unit) {
    for (int i = 0; i < n; ++i)
      if (complete_[i] && degen_[i]) out.degenerate.push_back(i);
  }
  return true;
}

std::optional<SimilaritySnapshot> build_snapshot(const WindowBank& bank, MeasureKind kind,
                                                 const EdgeMask* edge_mask) {
  SnapshotBuilder builder;
  SimilaritySnapshot snap;
  if (!builder.build(bank, kind, edge_mask, snap)) return std::nullopt;
  return snap;
}

Neighborhood neighborhood(const SimilaritySnapshot& snap, int node) {
  check_node(node, snap.n, "neighborhood");
  Neighborhood nb;
  nb.node = node;
  for (int j = 0; j < snap.n; ++j)
    if (j != node && snap.edge(node, j)) nb.members.push_back(j);
  return nb;
}

}  // namespace simnet
