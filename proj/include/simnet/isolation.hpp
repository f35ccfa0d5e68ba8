#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "simnet/snapshot.hpp"

namespace simnet {

/// Two-group membership over the snapshot's nodes. After sign
/// disambiguation the anomalous side carries +1, so
/// anomalous == { i : x[i] == +1 }.
struct Membership {
  std::vector<int> x;          // +1 / -1 per node
  std::vector<int> anomalous;  // sorted
  double objective = 0.0;
  bool no_split = false;       // the labeling found one side empty
};

/// sum_{i != j, masked-in} x_i x_j y_ij; the diagonal is excluded and
/// masked-out edges contribute 0.
double membership_objective(const SimilaritySnapshot& snap, std::span<const int> x);

struct LabelResult {
  std::vector<int> anomalous;  // sorted
  bool no_split = false;
};

/// Resolves the global sign ambiguity of a split: the anomalous side is the
/// group whose members average lower total similarity to the complement
/// (cross-sum divided by group size). Ties go to the smaller group, then to
/// the group containing the smallest node index. An empty side yields an
/// empty set with no_split set.
LabelResult label_anomalous(const SimilaritySnapshot& snap, std::span<const int> x);

/// Exact maximizer of the membership objective by enumeration with x[0]
/// fixed to -1 (global sign symmetry); ties break to the lexicographically
/// smallest pattern (-1 before +1). Requires n <= 20.
Membership brute_force_membership(const SimilaritySnapshot& snap);

struct SpectralOptions {
  std::uint64_t seed = 0;
  double tolerance = 1e-10;  // on the successive direction change
  int max_iterations = 10000;
};

struct SpectralResult {
  Membership membership;
  double eigengap = 0.0;  // gap between the two leading eigenvalues
  double leading_eigenvalue = 0.0;
  int iterations = 0;
};

/// Sign pattern of the leading eigenvector of the masked zero-diagonal score
/// matrix, computed by power iteration on the matrix shifted by its maximum
/// absolute row sum (which makes the target eigenvalue dominant). Zero
/// components round to +1. Throws on non-convergence, with the residual.
SpectralResult spectral_membership(const SimilaritySnapshot& snap,
                                   const SpectralOptions& options = {});

struct RefineResult {
  Membership membership;
  int flips = 0;
};

/// Best-improvement single-coordinate hill climbing from x0; the objective
/// never decreases and the loop stops at the first local maximum.
RefineResult local_search_refine(const SimilaritySnapshot& snap, std::span<const int> x0);

/// Threshold rule on the node statistic: { i : rho_i > b_prime }. Nodes with
/// empty neighborhoods are skipped. Kept as the per-node baseline that joint
/// membership estimation is compared against.
std::vector<int> naive_isolation(const SimilaritySnapshot& snap, double b_prime);

/// Nodes ordered anomalous-first (ascending within each group), for heat-map
/// rendering of the split.
std::vector<int> membership_permutation(const Membership& membership);

}  // namespace simnet
