#include "simnet/isolation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "simnet/detector.hpp"
#include "simnet/rng.hpp"

namespace simnet {

namespace {

void check_pattern(const SimilaritySnapshot& snap, std::span<const int> x, const char* who) {
  if (static_cast<int>(x.size()) != snap.n)
    throw std::invalid_argument(std::string(who) + ": membership vector has " +
                                std::to_string(x.size()) + " entries, snapshot has " +
                                std::to_string(snap.n) + " nodes");
  for (int v : x)
    if (v != 1 && v != -1)
      throw std::invalid_argument(std::string(who) + ": membership entries must be +1 or -1");
}

// Dense masked score matrix with zero diagonal.
std::vector<double> dense_scores(const SimilaritySnapshot& snap) {
  const int n = snap.n;
  std::vector<double> a(static_cast<std::size_t>(n) * n, 0.0);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++idx) {
      if (!snap.mask[idx]) continue;
      const double v = snap.y[idx];
      a[static_cast<std::size_t>(i) * n + j] = v;
      a[static_cast<std::size_t>(j) * n + i] = v;
    }
  }
  return a;
}

// Applies the labeling and normalizes x so the anomalous side is +1.
Membership finish_membership(const SimilaritySnapshot& snap, std::vector<int> x) {
  const LabelResult label = label_anomalous(snap, x);
  Membership m;
  m.objective = membership_objective(snap, x);
  m.anomalous = label.anomalous;
  m.no_split = label.no_split;
  std::vector<std::uint8_t> in_s(static_cast<std::size_t>(snap.n), 0);
  for (int node : label.anomalous) in_s[static_cast<std::size_t>(node)] = 1;
  for (int i = 0; i < snap.n; ++i)
    x[static_cast<std::size_t>(i)] = in_s[static_cast<std::size_t>(i)] ? 1 : -1;
  m.x = std::move(x);
  return m;
}

}  // namespace

double membership_objective(const SimilaritySnapshot& snap, std::span<const int> x) {
  check_pattern(snap, x, "membership_objective");
  double acc = 0.0;
  std::size_t idx = 0;
  for (int i = 0; i < snap.n; ++i)
    for (int j = i + 1; j < snap.n; ++j, ++idx)
      if (snap.mask[idx]) acc += static_cast<double>(x[i] * x[j]) * snap.y[idx];
  return 2.0 * acc;
}

LabelResult label_anomalous(const SimilaritySnapshot& snap, std::span<const int> x) {
  check_pattern(snap, x, "label_anomalous");
  int n_plus = 0;
  for (int v : x)
    if (v == 1) ++n_plus;
  const int n_minus = snap.n - n_plus;
  if (n_plus == 0 || n_minus == 0) return {{}, true};

  double cross = 0.0;
  std::size_t idx = 0;
  for (int i = 0; i < snap.n; ++i)
    for (int j = i + 1; j < snap.n; ++j, ++idx)
      if (snap.mask[idx] && x[i] != x[j]) cross += snap.y[idx];

  const double score_plus = cross / static_cast<double>(n_plus);
  const double score_minus = cross / static_cast<double>(n_minus);
  int anomalous_sign;
  if (score_plus < score_minus) {
    anomalous_sign = 1;
  } else if (score_minus < score_plus) {
    anomalous_sign = -1;
  } else if (n_plus != n_minus) {
    anomalous_sign = (n_plus < n_minus) ? 1 : -1;
  } else {
    anomalous_sign = x[0];  // group containing the smallest node index
  }

  LabelResult out;
  for (int i = 0; i < snap.n; ++i)
    if (x[i] == anomalous_sign) out.anomalous.push_back(i);
  return out;
}

Membership brute_force_membership(const SimilaritySnapshot& snap) {
  const int n = snap.n;
  if (n < 1) throw std::invalid_argument("brute_force_membership: empty snapshot");
  if (n > 20)
    throw std::invalid_argument("brute_force_membership: n = " + std::to_string(n) +
                                " exceeds the enumeration limit of 20");
  std::vector<int> x(static_cast<std::size_t>(n), -1);
  std::vector<int> best_x = x;
  double best = membership_objective(snap, x);
  const std::uint64_t patterns = 1ull << (n - 1);
  for (std::uint64_t c = 1; c < patterns; ++c) {
    for (int k = 0; k < n - 1; ++k) x[static_cast<std::size_t>(k) + 1] = (c >> k) & 1 ? 1 : -1;
    const double obj = membership_objective(snap, x);
    if (obj > best) {
      best = obj;
      best_x = x;
    } else if (obj == best && std::lexicographical_compare(x.begin(), x.end(), best_x.begin(),
                                                           best_x.end())) {
      best_x = x;
    }
  }
  return finish_membership(snap, std::move(best_x));
}

SpectralResult spectral_membership(const SimilaritySnapshot& snap, const SpectralOptions& options) {
  const int n = snap.n;
  if (n < 2) throw std::invalid_argument("spectral_membership: need at least two nodes");
  const std::vector<double> a = dense_scores(snap);

  // Shift by the maximum absolute row sum so the algebraically largest
  // eigenvalue becomes the dominant one for power iteration.
  double shift = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += std::abs(a[static_cast<std::size_t>(i) * n + j]);
    shift = std::max(shift, row);
  }

  const auto apply = [&](const std::vector<double>& v, std::vector<double>& out) {
    for (int i = 0; i < n; ++i) {
      double acc = shift * v[static_cast<std::size_t>(i)];
      const double* row = a.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) acc += row[j] * v[static_cast<std::size_t>(j)];
      out[static_cast<std::size_t>(i)] = acc;
    }
  };
  const auto norm_of = [n](const std::vector<double>& v) {
    double ss = 0.0;
    for (int i = 0; i < n; ++i) ss += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    return std::sqrt(ss);
  };

  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    v[static_cast<std::size_t>(i)] = (i % 2 == 0 ? 1.0 : -1.0) +
        0.5 * (counter_uniform(options.seed, 0x5eed, static_cast<std::uint64_t>(i)) - 0.5);
  {
    const double nv = norm_of(v);
    for (auto& c : v) c /= nv;
  }

  std::vector<double> next(static_cast<std::size_t>(n));
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
  for (int it = 1; it <= options.max_iterations; ++it) {
    apply(v, next);
    const double nv = norm_of(next);
    if (nv == 0.0)
      throw std::runtime_error(
          "spectral_membership: zero matrix-vector product; spectrum is degenerate (eigengap 0)");
    double diff = 0.0;
    for (int i = 0; i < n; ++i) {
      next[static_cast<std::size_t>(i)] /= nv;
      const double d = next[static_cast<std::size_t>(i)] - v[static_cast<std::size_t>(i)];
      diff += d * d;
    }
    v.swap(next);
    residual = std::sqrt(diff);
    iterations = it;
    if (residual <= options.tolerance) {
      converged = true;
      break;
    }
  }
  if (!converged)
    throw std::runtime_error("spectral_membership: power iteration did not converge in " +
                             std::to_string(options.max_iterations) +
                             " iterations (residual " + std::to_string(residual) + ")");

  apply(v, next);
  double lambda1 = 0.0;
  for (int i = 0; i < n; ++i) lambda1 += v[static_cast<std::size_t>(i)] * next[static_cast<std::size_t>(i)];

  // Deflated power iteration for the runner-up eigenvalue; this only feeds
  // the eigengap confidence number, so a loose tolerance is fine.
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    w[static_cast<std::size_t>(i)] = 1.0 +
        0.5 * (counter_uniform(options.seed, 0xdef1a7e, static_cast<std::uint64_t>(i)) - 0.5);
  double lambda2 = 0.0;
  {
    const auto deflate = [&](std::vector<double>& vec) {
      double proj = 0.0;
      for (int i = 0; i < n; ++i) proj += vec[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
      for (int i = 0; i < n; ++i) vec[static_cast<std::size_t>(i)] -= proj * v[static_cast<std::size_t>(i)];
    };
    deflate(w);
    double nw = norm_of(w);
    if (nw > 0.0) {
      for (auto& c : w) c /= nw;
      std::vector<double> wn(static_cast<std::size_t>(n));
      for (int it = 0; it < 1000; ++it) {
        apply(w, wn);
        deflate(wn);
        nw = norm_of(wn);
        if (nw == 0.0) break;
        double diff = 0.0;
        for (int i = 0; i < n; ++i) {
          wn[static_cast<std::size_t>(i)] /= nw;
          const double d = wn[static_cast<std::size_t>(i)] - w[static_cast<std::size_t>(i)];
          diff += d * d;
        }
        w.swap(wn);
        if (std::sqrt(diff) <= 1e-8) break;
      }
      apply(w, wn);
      for (int i = 0; i < n; ++i)
        lambda2 += w[static_cast<std::size_t>(i)] * wn[static_cast<std::size_t>(i)];
      double proj = 0.0;
      for (int i = 0; i < n; ++i) proj += w[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
      lambda2 -= lambda1 * proj * proj;
    }
  }

  std::vector<int> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] < 0.0 ? -1 : 1;

  SpectralResult result;
  result.membership = finish_membership(snap, std::move(x));
  result.leading_eigenvalue = lambda1 - shift;
  result.eigengap = std::max(lambda1 - lambda2, 0.0);
  result.iterations = iterations;
  return result;
}

RefineResult local_search_refine(const SimilaritySnapshot& snap, std::span<const int> x0) {
  check_pattern(snap, x0, "local_search_refine");
  const int n = snap.n;
  const std::vector<double> a = dense_scores(snap);
  std::vector<int> x(x0.begin(), x0.end());
  std::vector<double> s(static_cast<std::size_t>(n));
  double obj = membership_objective(snap, x);
  int flips = 0;
  for (;;) {
    for (int i = 0; i < n; ++i) {
      double acc = 0.0;
      const double* row = a.data() + static_cast<std::size_t>(i) * n;
      for (int j = 0; j < n; ++j) acc += row[j] * static_cast<double>(x[static_cast<std::size_t>(j)]);
      s[static_cast<std::size_t>(i)] = acc;
    }
    int best_i = -1;
    double best_delta = 0.0;
    for (int i = 0; i < n; ++i) {
      const double delta = -4.0 * static_cast<double>(x[static_cast<std::size_t>(i)]) *
                           s[static_cast<std::size_t>(i)];
      if (delta > best_delta) {
        best_delta = delta;
        best_i = i;
      }
    }
    if (best_i < 0) break;
    x[static_cast<std::size_t>(best_i)] = -x[static_cast<std::size_t>(best_i)];
    const double new_obj = membership_objective(snap, x);
    if (!(new_obj > obj)) {  // rounding produced a non-improving flip
      x[static_cast<std::size_t>(best_i)] = -x[static_cast<std::size_t>(best_i)];
      break;
    }
    obj = new_obj;
    ++flips;
  }
  RefineResult result;
  result.membership = finish_membership(snap, std::move(x));
  result.flips = flips;
  return result;
}

std::vector<int> naive_isolation(const SimilaritySnapshot& snap, double b_prime) {
  std::vector<int> flagged;
  for (int i = 0; i < snap.n; ++i) {
    const auto stat = node_statistic(snap, i);
    if (stat && *stat > b_prime) flagged.push_back(i);
  }
  return flagged;
}

std::vector<int> membership_permutation(const Membership& membership) {
  std::vector<int> order = membership.anomalous;
  std::vector<std::uint8_t> in_s(membership.x.size(), 0);
  for (int node : membership.anomalous) in_s[static_cast<std::size_t>(node)] = 1;
  for (std::size_t i = 0; i < membership.x.size(); ++i)
    if (!in_s[i]) order.push_back(static_cast<int>(i));
  return order;
}

}  // namespace simnet
