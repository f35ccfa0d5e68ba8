#include "simnet/detector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "simnet/rng.hpp"
#include "simnet/util.hpp"

namespace simnet {

namespace {

// Fills rho for every node (NaN when inactive) and returns the maximum over
// active nodes with its first attaining index.
std::optional<std::pair<double, int>> tick_statistics(const SimilaritySnapshot& snap,
                                                      std::vector<double>& rho) {
  const int n = snap.n;
  rho.assign(static_cast<std::size_t>(n), std::numeric_limits<double>::quiet_NaN());
  std::vector<double> sums(static_cast<std::size_t>(n), 0.0);
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++idx) {
      if (!snap.mask[idx]) continue;
      const double v = snap.y[idx];
      sums[static_cast<std::size_t>(i)] += v;
      sums[static_cast<std::size_t>(j)] += v;
      ++counts[static_cast<std::size_t>(i)];
      ++counts[static_cast<std::size_t>(j)];
    }
  }
  std::optional<std::pair<double, int>> best;
  for (int i = 0; i < n; ++i) {
    if (counts[static_cast<std::size_t>(i)] == 0) continue;
    const double r = -sums[static_cast<std::size_t>(i)] /
                     static_cast<double>(counts[static_cast<std::size_t>(i)]);
    rho[static_cast<std::size_t>(i)] = r;
    if (!best || r > best->first) best = {r, i};
  }
  return best;
}

struct ReplicaOutcome {
  long stop = 0;     // alarm tick, or horizon when censored
  bool alarmed = false;
};

ReplicaOutcome run_replica(const FrameModelSpec& model, const DetectorSettings& settings,
                           double b, long horizon, std::uint64_t replica_seed) {
  auto source = make_frame_source(model_with_horizon(model, horizon), replica_seed);
  const DetectionResult res = run_detection(*source, settings, b, horizon, false);
  if (res.alarm_time) return {*res.alarm_time, true};
  return {horizon, false};
}

// Strictly increasing running-maximum breakpoints of the alarm statistic.
// first_crossing(b) replays the whole path for any threshold.
struct MaxStatPath {
  std::vector<long> ticks;
  std::vector<double> maxima;
  long horizon = 0;

  // Smallest tick whose running maximum strictly exceeds b; horizon when none.
  std::pair<long, bool> first_crossing(double b) const {
    const auto it = std::upper_bound(maxima.begin(), maxima.end(), b);
    if (it == maxima.end()) return {horizon, false};
    return {ticks[static_cast<std::size_t>(it - maxima.begin())], true};
  }
};

MaxStatPath simulate_max_stat_path(const FrameModelSpec& model, const DetectorSettings& settings,
                                   long horizon, std::uint64_t replica_seed) {
  auto source = make_frame_source(model_with_horizon(model, horizon), replica_seed);
  MaxStatPath path;
  path.horizon = horizon;
  WindowBank bank(1, 1);
  bool bank_ready = false;
  SnapshotBuilder builder;
  SimilaritySnapshot snap;
  std::vector<double> rho;
  double running = -std::numeric_limits<double>::infinity();
  while (auto frame = source->next()) {
    if (frame->t > horizon) break;
    if (!bank_ready) {
      bank = WindowBank(static_cast<int>(frame->values.size()), settings.w);
      bank_ready = true;
    }
    bank.push(*frame);
    if (!builder.build(bank, settings.kind, settings.edge_mask ? &*settings.edge_mask : nullptr,
                       snap))
      continue;
    const auto best = tick_statistics(snap, rho);
    if (best && best->first > running) {
      running = best->first;
      path.ticks.push_back(frame->t);
      path.maxima.push_back(running);
    }
  }
  return path;
}

RunMetrics metrics_from_stops(const std::vector<double>& stops, int censored, double b,
                              std::uint64_t seed) {
  RunMetrics m;
  m.replicas = static_cast<int>(stops.size());
  m.alarmed = m.replicas - censored;
  m.censored = censored;
  m.seed = seed;
  m.b = b;
  m.arl = mean_of(stops);
  m.arl_se = standard_error(stops);
  return m;
}

}  // namespace

void DetectorSettings::validate() const {
  if (w < 2) throw std::invalid_argument("detector: window length must be >= 2");
}

std::optional<double> node_statistic(const SimilaritySnapshot& snap, int node) {
  const Neighborhood nb = neighborhood(snap, node);
  if (nb.members.empty()) return std::nullopt;
  double sum = 0.0;
  for (int j : nb.members) sum += snap.value(node, j);
  return -sum / static_cast<double>(nb.members.size());
}

void step(DetectorState& state, const SimilaritySnapshot& snap) {
  if (state.alarmed) throw std::logic_error("step: detector already alarmed at t = " +
                                            std::to_string(*state.alarm_time));
  if (state.t != 0 && snap.t != state.t + 1)
    throw std::invalid_argument("step: expected snapshot at t = " + std::to_string(state.t + 1) +
                                ", got t = " + std::to_string(snap.t));
  const auto best = tick_statistics(snap, state.rho);
  state.t = snap.t;
  if (best && best->first > state.b) {
    state.alarmed = true;
    state.alarm_time = snap.t;
    state.argmax_node = best->second;
  }
}

DetectionResult run_detection(FrameSource& source, const DetectorSettings& settings, double b,
                              long max_ticks, bool record_trace) {
  settings.validate();
  DetectionResult result;
  DetectorState state;
  state.b = b;
  WindowBank bank(1, 1);
  bool bank_ready = false;
  SnapshotBuilder builder;
  SimilaritySnapshot snap;
  while (auto frame = source.next()) {
    if (max_ticks >= 0 && frame->t > max_ticks) break;
    if (!bank_ready) {
      bank = WindowBank(static_cast<int>(frame->values.size()), settings.w);
      bank_ready = true;
    }
    bank.push(*frame);
    result.last_tick = frame->t;
    if (!builder.build(bank, settings.kind, settings.edge_mask ? &*settings.edge_mask : nullptr,
                       snap))
      continue;
    step(state, snap);
    if (record_trace) {
      for (int i = 0; i < snap.n; ++i) {
        const double r = state.rho[static_cast<std::size_t>(i)];
        if (std::isfinite(r)) result.trace.push_back({snap.t, i, r});
      }
    }
    if (state.alarmed) {
      result.alarm_time = state.alarm_time;
      result.argmax_node = state.argmax_node;
      break;
    }
  }
  return result;
}

nlohmann::ordered_json RunMetrics::to_json() const {
  nlohmann::ordered_json j;
  j["arl"] = arl ? nlohmann::ordered_json(*arl) : nlohmann::ordered_json(nullptr);
  j["arl_se"] = arl_se ? nlohmann::ordered_json(*arl_se) : nlohmann::ordered_json(nullptr);
  j["edd"] = edd ? nlohmann::ordered_json(*edd) : nlohmann::ordered_json(nullptr);
  j["edd_se"] = edd_se ? nlohmann::ordered_json(*edd_se) : nlohmann::ordered_json(nullptr);
  j["replicas"] = replicas;
  j["alarmed"] = alarmed;
  j["censored"] = censored;
  j["false_alarms"] = false_alarms;
  j["seed"] = seed;
  j["b"] = b;
  return j;
}

RunMetrics estimate_arl(const FrameModelSpec& null_model, const DetectorSettings& settings,
                        double b, int replicas, long horizon, std::uint64_t seed, int parallel) {
  settings.validate();
  if (replicas < 1) throw std::invalid_argument("estimate_arl: replicas must be >= 1");
  if (horizon < 1) throw std::invalid_argument("estimate_arl: horizon must be >= 1");
  if (!model_is_null(null_model))
    throw std::invalid_argument("estimate_arl: model must be a null model (no change tick)");
  std::vector<double> stops(static_cast<std::size_t>(replicas), 0.0);
  std::vector<std::uint8_t> alarmed(static_cast<std::size_t>(replicas), 0);
  parallel_for_index(replicas, parallel, [&](int r) {
    const auto out = run_replica(null_model, settings, b, horizon, derive_seed(seed, r));
    stops[static_cast<std::size_t>(r)] = static_cast<double>(out.stop);
    alarmed[static_cast<std::size_t>(r)] = out.alarmed ? 1 : 0;
  });
  int censored = 0;
  for (auto a : alarmed)
    if (!a) ++censored;
  return metrics_from_stops(stops, censored, b, seed);
}

RunMetrics estimate_edd(const FrameModelSpec& change_model, const DetectorSettings& settings,
                        double b, long kappa, int replicas, long horizon, std::uint64_t seed,
                        int parallel) {
  settings.validate();
  if (replicas < 1) throw std::invalid_argument("estimate_edd: replicas must be >= 1");
  if (kappa < settings.w)
    throw std::invalid_argument("estimate_edd: kappa must be >= the window length");
  if (horizon <= kappa) throw std::invalid_argument("estimate_edd: horizon must exceed kappa");
  const auto existing = std::visit([](const auto& s) { return s.kappa; }, change_model);
  if (existing && *existing != kappa)
    throw std::invalid_argument("estimate_edd: model kappa disagrees with the kappa argument");
  const FrameModelSpec model = model_with_kappa(change_model, kappa);

  std::vector<long> stops(static_cast<std::size_t>(replicas), 0);
  std::vector<std::uint8_t> alarmed(static_cast<std::size_t>(replicas), 0);
  parallel_for_index(replicas, parallel, [&](int r) {
    const auto out = run_replica(model, settings, b, horizon, derive_seed(seed, r));
    stops[static_cast<std::size_t>(r)] = out.stop;
    alarmed[static_cast<std::size_t>(r)] = out.alarmed ? 1 : 0;
  });

  RunMetrics m;
  m.replicas = replicas;
  m.seed = seed;
  m.b = b;
  std::vector<double> delays;
  delays.reserve(static_cast<std::size_t>(replicas));
  for (int r = 0; r < replicas; ++r) {
    if (!alarmed[static_cast<std::size_t>(r)]) {
      ++m.censored;
      continue;
    }
    ++m.alarmed;
    const long stop = stops[static_cast<std::size_t>(r)];
    if (stop <= kappa) ++m.false_alarms;
    delays.push_back(static_cast<double>(std::max<long>(stop - kappa + 1, 0)));
  }
  if (!delays.empty()) {
    m.edd = mean_of(delays);
    m.edd_se = standard_error(delays);
  }
  return m;
}

CalibrationResult calibrate_threshold(const FrameModelSpec& null_model,
                                      const DetectorSettings& settings, double target_arl,
                                      int replicas, std::uint64_t seed, long horizon,
                                      int parallel) {
  settings.validate();
  if (replicas < 1) throw std::invalid_argument("calibrate_threshold: replicas must be >= 1");
  // target == w is the bracket edge: every run alarms at the first evaluable
  // tick, so b sits at the bottom of the bracket.
  if (!(target_arl >= settings.w))
    throw std::invalid_argument(
        "calibrate_threshold: target ARL must be at least the window length");
  if (!model_is_null(null_model))
    throw std::invalid_argument("calibrate_threshold: model must be a null model");
  if (horizon < 0) horizon = static_cast<long>(20.0 * target_arl);
  if (horizon < static_cast<long>(target_arl))
    throw std::invalid_argument("calibrate_threshold: horizon below the target ARL");

  std::vector<MaxStatPath> paths(static_cast<std::size_t>(replicas));
  parallel_for_index(replicas, parallel, [&](int r) {
    paths[static_cast<std::size_t>(r)] =
        simulate_max_stat_path(null_model, settings, horizon, derive_seed(seed, r));
  });

  std::vector<double> stops(static_cast<std::size_t>(replicas), 0.0);
  const auto replay = [&](double b) -> std::pair<double, int> {
    int censored = 0;
    for (int r = 0; r < replicas; ++r) {
      const auto [stop, hit] = paths[static_cast<std::size_t>(r)].first_crossing(b);
      stops[static_cast<std::size_t>(r)] = static_cast<double>(stop);
      if (!hit) ++censored;
    }
    return {mean_of(stops), censored};
  };

  double lo, hi;
  if (settings.kind == MeasureKind::pearson) {
    lo = -1.0;
    hi = 1.0;
  } else {
    // Statistic range is data-dependent for other measures; bracket from the
    // observed breakpoints.
    lo = std::numeric_limits<double>::infinity();
    hi = -std::numeric_limits<double>::infinity();
    for (const auto& p : paths) {
      if (p.maxima.empty()) continue;
      lo = std::min(lo, p.maxima.front());
      hi = std::max(hi, p.maxima.back());
    }
    if (!std::isfinite(lo))
      throw std::runtime_error("calibrate_threshold: no evaluable ticks in any replica");
    lo -= 1.0;
  }

  const auto [arl_lo, cen_lo] = replay(lo);
  const auto [arl_hi, cen_hi] = replay(hi);
  const double accept_tol = 0.05;   // returned b satisfies the +/-10% contract with margin
  const double contract_tol = 0.10;
  if (arl_lo > target_arl * (1.0 + contract_tol) || arl_hi < target_arl * (1.0 - contract_tol))
    throw std::runtime_error(
        "calibrate_threshold: target ARL " + std::to_string(target_arl) +
        " unreachable within bracket [" + std::to_string(lo) + ", " + std::to_string(hi) +
        "] (ARL at bracket ends: " + std::to_string(arl_lo) + ", " + std::to_string(arl_hi) +
        "; horizon " + std::to_string(horizon) + ")");

  const int max_iterations = 30;
  double best_b = hi;
  double best_err = std::abs(arl_hi - target_arl);
  double best_arl = arl_hi;
  int best_censored = cen_hi;
  if (std::abs(arl_lo - target_arl) < best_err) {
    best_b = lo;
    best_err = std::abs(arl_lo - target_arl);
    best_arl = arl_lo;
    best_censored = cen_lo;
  }
  int iterations = 0;
  for (int it = 0; it < max_iterations && best_err > accept_tol * target_arl; ++it) {
    const double mid = 0.5 * (lo + hi);
    const auto [arl_mid, cen_mid] = replay(mid);
    ++iterations;
    if (std::abs(arl_mid - target_arl) < best_err) {
      best_b = mid;
      best_err = std::abs(arl_mid - target_arl);
      best_arl = arl_mid;
      best_censored = cen_mid;
    }
    if (std::abs(arl_mid - target_arl) <= accept_tol * target_arl) break;
    if (arl_mid < target_arl) lo = mid; else hi = mid;
  }

  if (best_err > contract_tol * target_arl)
    throw std::runtime_error("calibrate_threshold: bisection exhausted " +
                             std::to_string(iterations) + " iterations; closest ARL " +
                             std::to_string(best_arl) + " at b = " + std::to_string(best_b) +
                             " misses target " + std::to_string(target_arl) + " by more than 10%");

  replay(best_b);  // restore stops for the reported metrics
  RunMetrics metrics = metrics_from_stops(stops, best_censored, best_b, seed);
  CalibrationResult result;
  result.b = best_b;
  result.metrics = metrics;
  result.iterations = iterations;
  result.bracket_lo = lo;
  result.bracket_hi = hi;
  return result;
}

}  // namespace simnet
