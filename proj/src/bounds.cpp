#include "simnet/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace simnet {

long cut_size(const EdgeMask& graph, const std::vector<int>& s) {
  std::vector<std::uint8_t> in_s(static_cast<std::size_t>(graph.n()), 0);
  std::set<int> seen;
  for (int node : s) {
    if (node < 0 || node >= graph.n())
      throw std::out_of_range("cut_size: node " + std::to_string(node) + " out of range");
    if (!seen.insert(node).second)
      throw std::invalid_argument("cut_size: duplicate node " + std::to_string(node));
    in_s[static_cast<std::size_t>(node)] = 1;
  }
  long cut = 0;
  for (int i = 0; i < graph.n(); ++i)
    for (int j = i + 1; j < graph.n(); ++j)
      if (graph.edge(i, j) && in_s[static_cast<std::size_t>(i)] != in_s[static_cast<std::size_t>(j)])
        ++cut;
  return cut;
}

double kl_gaussian(double mu0, double sigma0, double mu1, double sigma1) {
  if (!(sigma0 > 0.0) || !(sigma1 > 0.0))
    throw std::invalid_argument("kl_gaussian: standard deviations must be > 0");
  const double dm = mu1 - mu0;
  return std::log(sigma0 / sigma1) + (sigma1 * sigma1 + dm * dm) / (2.0 * sigma0 * sigma0) - 0.5;
}

double edd_bound(double gamma, long cut, double kl) {
  if (!(gamma > 1.0)) throw std::invalid_argument("edd_bound: gamma must be > 1");
  if (cut < 0) throw std::invalid_argument("edd_bound: cut must be >= 0");
  if (kl < 0.0) throw std::invalid_argument("edd_bound: kl must be >= 0");
  if (cut == 0 || kl == 0.0) return std::numeric_limits<double>::infinity();
  return std::log(gamma) / (static_cast<double>(cut) * kl);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

NodeSnr snr(const std::vector<std::vector<double>>& u, const EdgeMask& graph, double sigma2,
            const std::vector<int>& over) {
  const int n = graph.n();
  if (static_cast<int>(u.size()) != n)
    throw std::invalid_argument("snr: need one mean vector per node");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("snr: sigma2 must be > 0");
  const std::size_t dim = u.empty() ? 0 : u.front().size();
  for (const auto& v : u)
    if (v.size() != dim) throw std::invalid_argument("snr: ragged mean vectors");

  NodeSnr out;
  out.snr.resize(static_cast<std::size_t>(n));
  out.signed_mean.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    int count = 0;
    for (int j = 0; j < n; ++j) {
      if (j == i || !graph.edge(i, j)) continue;
      double dot = 0.0;
      for (std::size_t k = 0; k < dim; ++k)
        dot += u[static_cast<std::size_t>(i)][k] * u[static_cast<std::size_t>(j)][k];
      sum += dot;
      ++count;
    }
    if (count == 0) {
      out.skipped.push_back(i);
      continue;
    }
    const double denom = static_cast<double>(count) * sigma2;
    out.snr[static_cast<std::size_t>(i)] = sum * sum / denom;
    out.signed_mean[static_cast<std::size_t>(i)] = sum / std::sqrt(denom);
  }

  for (int node : over) {
    if (node < 0 || node >= n)
      throw std::out_of_range("snr: node " + std::to_string(node) + " out of range");
    const auto& v = out.snr[static_cast<std::size_t>(node)];
    if (!v) continue;
    if (!out.extremum || *v > *out.extremum) out.extremum = *v;
  }
  return out;
}

TailBound false_alarm_bound(int n_nodes, double snr_value) {
  if (n_nodes < 1) throw std::invalid_argument("false_alarm_bound: need at least one node");
  if (snr_value < 0.0) throw std::invalid_argument("false_alarm_bound: snr must be >= 0");
  TailBound b;
  b.phi_form = std::min(static_cast<double>(n_nodes) * (1.0 - normal_cdf(std::sqrt(snr_value))), 1.0);
  b.exp_form = std::min(static_cast<double>(n_nodes) * std::exp(-snr_value), 1.0);
  return b;
}

DetectionBound detection_bound(double snr_value, bool sign_condition_holds) {
  if (snr_value < 0.0) throw std::invalid_argument("detection_bound: snr must be >= 0");
  DetectionBound b;
  b.phi_form = std::max(1.0 - normal_cdf(-std::sqrt(snr_value)), 0.0);
  b.exp_form = std::max(1.0 - std::exp(-snr_value), 0.0);
  b.applicable = sign_condition_holds;
  return b;
}

}  // namespace simnet
