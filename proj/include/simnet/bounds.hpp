#pragma once

#include <optional>
#include <vector>

#include "simnet/snapshot.hpp"

namespace simnet {

/// Number of masked-in edges with exactly one endpoint in S.
long cut_size(const EdgeMask& graph, const std::vector<int>& s);

/// KL(N(mu1, sigma1^2) || N(mu0, sigma0^2)) in nats, closed form.
/// sigma0 and sigma1 are standard deviations.
double kl_gaussian(double mu0, double sigma0, double mu1, double sigma1);

/// log(gamma) / (cut * kl). The additive O(1) slack of the underlying
/// asymptotic statement is not included. +infinity when cut or kl is zero
/// (no information crosses the cut).
double edd_bound(double gamma, long cut, double kl);

double normal_cdf(double x);

struct NodeSnr {
  // (sum_j u_i.u_j)^2 / (|N(i)| sigma^2) per node; nullopt for nodes with an
  // empty neighborhood (skipped).
  std::vector<std::optional<double>> snr;
  // sum_j u_i.u_j / sqrt(|N(i)| sigma^2), the signed version used for the
  // detection-bound sign condition.
  std::vector<std::optional<double>> signed_mean;
  std::optional<double> extremum;  // max snr over the `over` set
  std::vector<int> skipped;
};

/// Per-node squared standardized neighborhood means and their maximum over
/// `over` (all nodes for the false-alarm side, the anomalous set for the
/// detection side).
NodeSnr snr(const std::vector<std::vector<double>>& u, const EdgeMask& graph, double sigma2,
            const std::vector<int>& over);

struct TailBound {
  double phi_form = 0.0;  // exact normal-tail form
  double exp_form = 0.0;  // order-of-magnitude exponential form
};

/// Per-tick false-alarm probability bound at threshold 0: both
/// N * (1 - Phi(sqrt(snr))) and N * exp(-snr), each capped at 1.
TailBound false_alarm_bound(int n_nodes, double snr_value);

struct DetectionBound {
  double phi_form = 0.0;  // 1 - Phi(-sqrt(snr))
  double exp_form = 0.0;  // 1 - exp(-snr), floored at 0
  bool applicable = true; // false when the sign condition fails
};

/// Per-tick detection probability bound at threshold 0. Requires the signed
/// neighborhood means over the anomalous set to be negative; callers pass
/// the checked condition and the bound is reported inapplicable otherwise.
DetectionBound detection_bound(double snr_value, bool sign_condition_holds);

}  // namespace simnet
