#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "simnet/datagen.hpp"
#include "simnet/detector.hpp"
#include "simnet/isolation.hpp"
#include "simnet/rng.hpp"

#include "oracles.hpp"

using namespace simnet;

namespace {

SimilaritySnapshot random_snapshot(int n, std::uint64_t key) {
  std::vector<std::vector<double>> m(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      m[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          m[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)] = counter_gaussian(key, i, j);
  return SimilaritySnapshot::from_matrix(1, m);
}

// The instance behind the isolate-vs-threshold comparison: {4, 5} is the
// true pair, node 5 hides behind its strong link to node 4.
SimilaritySnapshot counterexample_instance() {
  const int n = 6;
  const double a = 0.6, c = 0.9, d4 = -0.8, d5 = 0.2;
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) m[i][j] = a;
  m[4][5] = m[5][4] = c;
  for (int j = 0; j < 4; ++j) {
    m[4][j] = m[j][4] = d4;
    m[5][j] = m[j][5] = d5;
  }
  return SimilaritySnapshot::from_matrix(1, m);
}

}  // namespace

TEST_CASE("objective basics") {
  std::vector<std::vector<double>> zeros(4, std::vector<double>(4, 0.0));
  const auto z = SimilaritySnapshot::from_matrix(1, zeros);
  CHECK(membership_objective(z, std::vector<int>{1, -1, 1, -1}) == 0.0);

  const auto snap = random_snapshot(5, 17);
  const std::vector<int> x = {1, -1, -1, 1, 1};
  std::vector<int> neg(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) neg[k] = -x[k];
  CHECK(membership_objective(snap, x) == membership_objective(snap, neg));

  CHECK_THROWS_AS((void)membership_objective(snap, std::vector<int>{1, -1, 0, 1, 1}),
                  std::invalid_argument);
  CHECK_THROWS_AS((void)membership_objective(snap, std::vector<int>{1, -1}),
                  std::invalid_argument);
}

TEST_CASE("objective equals the double-loop oracle on random instances") {
  for (int trial = 0; trial < 30; ++trial) {
    const auto snap = random_snapshot(5, 100 + trial);
    std::vector<int> x(5);
    for (int k = 0; k < 5; ++k)
      x[static_cast<std::size_t>(k)] = counter_uniform(200, trial, k) < 0.5 ? -1 : 1;
    long double want = 0.0L;
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j)
        if (i != j)
          want += static_cast<long double>(x[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(j)]) *
                  static_cast<long double>(snap.value(i, j));
    CHECK(membership_objective(snap, x) ==
          doctest::Approx(static_cast<double>(want)).epsilon(1e-12));
  }
}

TEST_CASE("masked edges contribute nothing to the objective") {
  EdgeMask mask = EdgeMask::complete(4);
  mask.set(0, 1, false);
  std::vector<std::vector<double>> m(4, std::vector<double>(4, 0.5));
  for (int i = 0; i < 4; ++i) m[i][i] = 0.0;
  const auto full = SimilaritySnapshot::from_matrix(1, m);
  const auto masked = SimilaritySnapshot::from_matrix(1, m, &mask);
  const std::vector<int> x = {1, -1, 1, -1};
  // removing edge (0,1) removes the ordered-pair term 2 * x0 * x1 * y01
  CHECK(membership_objective(full, x) - membership_objective(masked, x) ==
        doctest::Approx(2.0 * (1 * -1) * 0.5).epsilon(1e-15));
}

TEST_CASE("brute force: all-positive matrix refuses to split") {
  std::vector<std::vector<double>> pos(4, std::vector<double>(4, 0.3));
  for (int i = 0; i < 4; ++i) pos[i][i] = 0.0;
  const auto best = brute_force_membership(SimilaritySnapshot::from_matrix(1, pos));
  CHECK(best.no_split);
  CHECK(best.anomalous.empty());
  CHECK(best.objective == doctest::Approx(2.0 * 6 * 0.3).epsilon(1e-12));
}

TEST_CASE("brute force recovers planted blocks exactly") {
  const auto snap = planted_isolation_instance(9, {6, 7, 8}, 1.0, -1.0, 0.0, 4);
  const auto best = brute_force_membership(snap);
  CHECK(best.anomalous == std::vector<int>{6, 7, 8});
  // normalized so the anomalous side carries +1
  for (int i = 0; i < 9; ++i) CHECK(best.x[static_cast<std::size_t>(i)] == (i >= 6 ? 1 : -1));
}

TEST_CASE("brute force agrees with the unreduced enumeration oracle") {
  for (int trial = 0; trial < 12; ++trial) {
    const auto snap = random_snapshot(8, 300 + trial);
    const auto reduced = brute_force_membership(snap);
    const auto full = oracles::unreduced_enumeration(snap);
    CHECK(reduced.objective == doctest::Approx(full.objective).epsilon(1e-12));
  }
}

TEST_CASE("brute force enforces the enumeration size limit") {
  CHECK_THROWS_AS((void)brute_force_membership(random_snapshot(21, 1)), std::invalid_argument);
}

TEST_CASE("spectral membership splits a planted two-block matrix") {
  const auto snap = planted_isolation_instance(10, {0, 1, 2, 3}, 1.0, -1.0, 0.0, 5);
  const auto res = spectral_membership(snap, {});
  CHECK(res.membership.anomalous == std::vector<int>{0, 1, 2, 3});
  CHECK(res.eigengap > 1.0);
  CHECK(res.leading_eigenvalue > 0.0);
}

TEST_CASE("spectral membership fails loudly on a degenerate spectrum") {
  std::vector<std::vector<double>> zeros(5, std::vector<double>(5, 0.0));
  CHECK_THROWS_WITH_AS((void)spectral_membership(SimilaritySnapshot::from_matrix(1, zeros), {}),
                       doctest::Contains("eigengap 0"), std::runtime_error);
}

TEST_CASE("spectral membership commutes with node permutations") {
  const auto snap = random_snapshot(7, 42);
  SpectralOptions opts;
  opts.seed = 3;
  const auto base = spectral_membership(snap, opts);

  // rotate node labels by 2
  const int n = 7;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = (i + 2) % n;
  std::vector<std::vector<double>> pm(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j)
        pm[static_cast<std::size_t>(perm[static_cast<std::size_t>(i)])]
          [static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])] = snap.value(i, j);
  const auto permuted = spectral_membership(SimilaritySnapshot::from_matrix(1, pm), opts);

  std::vector<int> mapped;
  for (int node : base.membership.anomalous) mapped.push_back(perm[static_cast<std::size_t>(node)]);
  std::sort(mapped.begin(), mapped.end());
  CHECK(mapped == permuted.membership.anomalous);
  CHECK(base.membership.objective == doctest::Approx(permuted.membership.objective).epsilon(1e-9));
}

TEST_CASE("local search: fixed point, single correction, objective growth") {
  const auto snap = planted_isolation_instance(10, {7, 8, 9}, 1.0, -1.0, 0.0, 6);
  const auto best = brute_force_membership(snap);
  const auto at_opt = local_search_refine(snap, best.x);
  CHECK(at_opt.flips == 0);
  CHECK(at_opt.membership.objective == doctest::Approx(best.objective).epsilon(1e-12));

  std::vector<int> off = best.x;
  off[0] = -off[0];
  const auto fixed = local_search_refine(snap, off);
  CHECK(fixed.flips == 1);
  CHECK(fixed.membership.anomalous == best.anomalous);

  for (int trial = 0; trial < 20; ++trial) {
    const auto rs = random_snapshot(9, 500 + trial);
    std::vector<int> x0(9);
    for (int k = 0; k < 9; ++k)
      x0[static_cast<std::size_t>(k)] = counter_uniform(600, trial, k) < 0.5 ? -1 : 1;
    const double before = membership_objective(rs, x0);
    const auto refined = local_search_refine(rs, x0);
    CHECK(refined.membership.objective >= before - 1e-12);
    CHECK(refined.flips <= 10 * 9 * 9);
  }
}

TEST_CASE("spectral plus refinement attains the enumerated optimum on planted instances") {
  int optimum = 0, recovered = 0;
  for (int k = 0; k < 100; ++k) {
    const auto snap =
        planted_isolation_instance(12, {0, 1, 2}, 0.8, -0.5, 0.2, derive_seed(9000, k));
    const auto brute = brute_force_membership(snap);
    SpectralOptions opts;
    opts.seed = derive_seed(9001, k);
    const auto refined = local_search_refine(snap, spectral_membership(snap, opts).membership.x);
    if (std::abs(refined.membership.objective - brute.objective) <= 1e-9) ++optimum;
    if (refined.membership.anomalous == std::vector<int>{0, 1, 2}) ++recovered;
  }
  CHECK(optimum >= 99);
  CHECK(recovered >= 99);
}

TEST_CASE("labeling resolves the sign ambiguity") {
  // negative cross-similarity: the small side is the anomaly
  const auto blocks = planted_isolation_instance(12, {0, 1, 2}, 0.6, -0.3, 0.0, 8);
  std::vector<int> x(12, -1);
  x[0] = x[1] = x[2] = 1;
  CHECK(label_anomalous(blocks, x).anomalous == std::vector<int>{0, 1, 2});
  // flipping the input flips nothing after disambiguation
  std::vector<int> flipped(12, 1);
  flipped[0] = flipped[1] = flipped[2] = -1;
  CHECK(label_anomalous(blocks, flipped).anomalous == std::vector<int>{0, 1, 2});

  // one side empty: no split
  const auto lone = label_anomalous(blocks, std::vector<int>(12, 1));
  CHECK(lone.no_split);
  CHECK(lone.anomalous.empty());
}

TEST_CASE("labeling tie rules") {
  // zero cross-similarity forces the size tie-break
  std::vector<std::vector<double>> m(5, std::vector<double>(5, 0.0));
  m[0][1] = m[1][0] = 0.9;
  m[2][3] = m[3][2] = 0.9;
  m[2][4] = m[4][2] = 0.9;
  m[3][4] = m[4][3] = 0.9;
  const auto snap = SimilaritySnapshot::from_matrix(1, m);
  const std::vector<int> x = {1, 1, -1, -1, -1};
  CHECK(label_anomalous(snap, x).anomalous == std::vector<int>{0, 1});  // smaller group

  // equal sizes and zero cross: the group holding node 0 wins
  std::vector<std::vector<double>> m4(4, std::vector<double>(4, 0.0));
  m4[0][1] = m4[1][0] = 0.5;
  m4[2][3] = m4[3][2] = 0.5;
  const auto snap4 = SimilaritySnapshot::from_matrix(1, m4);
  CHECK(label_anomalous(snap4, std::vector<int>{1, 1, -1, -1}).anomalous ==
        std::vector<int>{0, 1});
  CHECK(label_anomalous(snap4, std::vector<int>{-1, -1, 1, 1}).anomalous ==
        std::vector<int>{0, 1});
}

TEST_CASE("threshold rule basics") {
  std::vector<std::vector<double>> ones(4, std::vector<double>(4, 1.0));
  for (int i = 0; i < 4; ++i) ones[i][i] = 0.0;
  CHECK(naive_isolation(SimilaritySnapshot::from_matrix(1, ones), 0.0).empty());

  std::vector<std::vector<double>> single(4, std::vector<double>(4, 0.8));
  for (int i = 0; i < 4; ++i) single[i][i] = 0.0;
  for (int j = 1; j < 4; ++j) single[0][j] = single[j][0] = -0.6;
  CHECK(naive_isolation(SimilaritySnapshot::from_matrix(1, single), 0.0) ==
        std::vector<int>{0});
}

TEST_CASE("threshold rule misses the hidden anomaly at every threshold") {
  const auto inst = counterexample_instance();
  const std::vector<int> planted = {4, 5};

  const auto brute = brute_force_membership(inst);
  CHECK(brute.anomalous == planted);
  SpectralOptions opts;
  opts.seed = 7;
  const auto refined = local_search_refine(inst, spectral_membership(inst, opts).membership.x);
  CHECK(refined.membership.anomalous == planted);
  CHECK(refined.membership.objective == doctest::Approx(brute.objective).epsilon(1e-12));

  std::vector<double> stats;
  for (int i = 0; i < inst.n; ++i) stats.push_back(*node_statistic(inst, i));
  std::vector<double> sorted = stats;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  std::vector<double> thresholds = {sorted.front() - 1.0, sorted.back() + 1.0};
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k)
    thresholds.push_back(0.5 * (sorted[k] + sorted[k + 1]));
  for (double b_prime : thresholds) CHECK(naive_isolation(inst, b_prime) != planted);
}

TEST_CASE("enumerated optimum dominates every other route") {
  for (int trial = 0; trial < 10; ++trial) {
    const auto snap = random_snapshot(9, 700 + trial);
    const auto brute = brute_force_membership(snap);
    SpectralOptions opts;
    opts.seed = trial;
    const auto spectral = spectral_membership(snap, opts);
    const auto refined = local_search_refine(snap, spectral.membership.x);
    CHECK(brute.objective >= spectral.membership.objective - 1e-9);
    CHECK(brute.objective >= refined.membership.objective - 1e-9);
  }
}

TEST_CASE("membership permutation lists the anomalous side first") {
  const auto snap = planted_isolation_instance(6, {1, 4}, 1.0, -1.0, 0.0, 2);
  const auto best = brute_force_membership(snap);
  CHECK(membership_permutation(best) == std::vector<int>{1, 4, 0, 2, 3, 5});
}
