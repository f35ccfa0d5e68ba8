#include "simnet/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "simnet/isolation.hpp"
#include "simnet/rng.hpp"
#include "simnet/util.hpp"

namespace simnet {

namespace {

using ordered_json = nlohmann::ordered_json;

}  // namespace

nlohmann::ordered_json settings_to_json(const DetectorSettings& settings) {
  ordered_json j;
  j["w"] = settings.w;
  j["kind"] = to_string(settings.kind);
  j["edge_mask"] =
      settings.edge_mask ? edge_mask_to_json(*settings.edge_mask) : ordered_json(nullptr);
  return j;
}

DetectorSettings settings_from_json(const nlohmann::json& j) {
  DetectorSettings s;
  s.w = j.at("w").get<int>();
  s.kind = measure_kind_from_string(j.value("kind", std::string("pearson")));
  if (j.contains("edge_mask") && !j.at("edge_mask").is_null())
    s.edge_mask = edge_mask_from_json(j.at("edge_mask"));
  s.validate();
  return s;
}

nlohmann::ordered_json run_calibration(const CalibrationExperiment& exp, int parallel) {
  const long horizon =
      exp.horizon >= 0 ? exp.horizon : static_cast<long>(20.0 * exp.target_arl);
  const CalibrationResult cal = calibrate_threshold(exp.model, exp.settings, exp.target_arl,
                                                    exp.replicas, exp.seed, horizon, parallel);
  ordered_json config;
  config["model"] = model_spec_to_json(exp.model);
  config.update(settings_to_json(exp.settings));
  config["target_arl"] = exp.target_arl;
  config["replicas"] = exp.replicas;
  config["horizon"] = horizon;
  config["seed"] = exp.seed;
  config["revalidate_seed"] =
      exp.revalidate_seed ? ordered_json(*exp.revalidate_seed) : ordered_json(nullptr);
  const int reval_replicas = exp.revalidate_replicas > 0 ? exp.revalidate_replicas : exp.replicas;
  config["revalidate_replicas"] = reval_replicas;

  ordered_json result;
  result["b"] = cal.b;
  result["iterations"] = cal.iterations;
  result["replay"] = cal.metrics.to_json();
  if (exp.revalidate_seed) {
    const RunMetrics fresh = estimate_arl(exp.model, exp.settings, cal.b, reval_replicas, horizon,
                                          *exp.revalidate_seed, parallel);
    result["revalidation"] = fresh.to_json();
  } else {
    result["revalidation"] = nullptr;
  }

  ordered_json report;
  report["command"] = "calibrate";
  report["config"] = std::move(config);
  report["result"] = std::move(result);
  return report;
}

CalibrationExperiment calibration_from_json(const nlohmann::json& j) {
  CalibrationExperiment exp;
  exp.model = model_spec_from_json(j.at("model"));
  exp.settings = settings_from_json(j);
  exp.target_arl = j.at("target_arl").get<double>();
  exp.replicas = j.at("replicas").get<int>();
  exp.horizon = j.value("horizon", -1L);
  exp.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("revalidate_seed") && !j.at("revalidate_seed").is_null())
    exp.revalidate_seed = j.at("revalidate_seed").get<std::uint64_t>();
  exp.revalidate_replicas = j.value("revalidate_replicas", -1);
  return exp;
}

nlohmann::ordered_json run_edd_sweep(const EddSweepExperiment& exp, int parallel) {
  if (exp.slopes.empty()) throw std::invalid_argument("edd sweep: no slopes given");
  ordered_json rows = ordered_json::array();
  for (std::size_t k = 0; k < exp.slopes.size(); ++k) {
    TrendModelSpec model = exp.base;
    model.slope_anomalous = exp.slopes[k];
    model.kappa = std::nullopt;  // estimate_edd injects kappa
    const RunMetrics m = estimate_edd(model, exp.settings, exp.b, exp.kappa, exp.replicas,
                                      exp.horizon, derive_seed(exp.seed, k), parallel);
    ordered_json row;
    row["slope"] = exp.slopes[k];
    row["edd"] = m.edd ? ordered_json(*m.edd) : ordered_json(nullptr);
    row["edd_se"] = m.edd_se ? ordered_json(*m.edd_se) : ordered_json(nullptr);
    row["alarmed"] = m.alarmed;
    row["misses"] = m.censored;
    row["false_alarms"] = m.false_alarms;
    rows.push_back(std::move(row));
  }

  ordered_json config;
  config["model"] = model_spec_to_json(exp.base);
  config.update(settings_to_json(exp.settings));
  config["b"] = exp.b;
  config["slopes"] = exp.slopes;
  config["kappa"] = exp.kappa;
  config["replicas"] = exp.replicas;
  config["horizon"] = exp.horizon;
  config["seed"] = exp.seed;

  ordered_json report;
  report["command"] = "edd-sweep";
  report["config"] = std::move(config);
  report["result"] = ordered_json{{"rows", std::move(rows)}};
  return report;
}

EddSweepExperiment edd_sweep_from_json(const nlohmann::json& j) {
  EddSweepExperiment exp;
  const FrameModelSpec model = model_spec_from_json(j.at("model"));
  const auto* trend = std::get_if<TrendModelSpec>(&model);
  if (!trend) throw std::invalid_argument("edd sweep: model must be a trend model");
  exp.base = *trend;
  exp.settings = settings_from_json(j);
  exp.b = j.at("b").get<double>();
  exp.slopes = j.at("slopes").get<std::vector<double>>();
  exp.kappa = j.at("kappa").get<long>();
  exp.replicas = j.at("replicas").get<int>();
  exp.horizon = j.at("horizon").get<long>();
  exp.seed = j.value("seed", std::uint64_t{0});
  return exp;
}

nlohmann::ordered_json run_detection_rate(const DetectionRateExperiment& exp, int parallel) {
  if (!exp.model.kappa) throw std::invalid_argument("detection rate: model needs a change tick");
  const long kappa = *exp.model.kappa;
  const FrameModelSpec model = exp.model;

  std::vector<long> stops(static_cast<std::size_t>(exp.replicas), 0);
  std::vector<std::uint8_t> alarmed(static_cast<std::size_t>(exp.replicas), 0);
  parallel_for_index(exp.replicas, parallel, [&](int r) {
    auto source = make_frame_source(model_with_horizon(model, exp.horizon),
                                    derive_seed(exp.seed, r));
    const DetectionResult res = run_detection(*source, exp.settings, exp.b, exp.horizon, false);
    if (res.alarm_time) {
      stops[static_cast<std::size_t>(r)] = *res.alarm_time;
      alarmed[static_cast<std::size_t>(r)] = 1;
    }
  });

  int in_window = 0, false_alarms = 0, censored = 0;
  std::vector<double> delays;
  for (int r = 0; r < exp.replicas; ++r) {
    if (!alarmed[static_cast<std::size_t>(r)]) {
      ++censored;
      continue;
    }
    const long stop = stops[static_cast<std::size_t>(r)];
    if (stop <= kappa) {
      ++false_alarms;
    } else if (stop <= kappa + exp.window_ticks) {
      ++in_window;
      delays.push_back(static_cast<double>(stop - kappa));
    }
  }

  ordered_json config;
  config["model"] = model_spec_to_json(FrameModelSpec(exp.model));
  config.update(settings_to_json(exp.settings));
  config["b"] = exp.b;
  config["window_ticks"] = exp.window_ticks;
  config["replicas"] = exp.replicas;
  config["horizon"] = exp.horizon;
  config["seed"] = exp.seed;

  ordered_json result;
  result["detected_in_window"] = in_window;
  result["rate"] = static_cast<double>(in_window) / static_cast<double>(exp.replicas);
  result["false_alarms"] = false_alarms;
  result["censored"] = censored;
  result["mean_delay_in_window"] =
      delays.empty() ? ordered_json(nullptr) : ordered_json(mean_of(delays));

  ordered_json report;
  report["command"] = "detection-rate";
  report["config"] = std::move(config);
  report["result"] = std::move(result);
  return report;
}

nlohmann::ordered_json run_similarity_split(const SimilaritySplitExperiment& exp, int parallel) {
  if (!exp.model.kappa) throw std::invalid_argument("similarity split: model needs a change tick");
  if (exp.from_tick > exp.to_tick)
    throw std::invalid_argument("similarity split: empty tick range");
  const int n = exp.model.n_sensors;
  std::vector<std::uint8_t> in_s(static_cast<std::size_t>(n), 0);
  for (int a : exp.model.anomalous) in_s[static_cast<std::size_t>(a)] = 1;

  struct Counts {
    long nn = 0, an = 0, nn_wrong = 0, an_wrong = 0;
  };
  std::vector<Counts> per_replica(static_cast<std::size_t>(exp.replicas));
  DetectorSettings settings;
  settings.w = exp.w;
  settings.kind = MeasureKind::pearson;

  parallel_for_index(exp.replicas, parallel, [&](int r) {
    auto source = make_frame_source(model_with_horizon(FrameModelSpec(exp.model), exp.to_tick),
                                    derive_seed(exp.seed, r));
    WindowBank bank(n, exp.w);
    SnapshotBuilder builder;
    SimilaritySnapshot snap;
    Counts& c = per_replica[static_cast<std::size_t>(r)];
    while (auto frame = source->next()) {
      bank.push(*frame);
      if (frame->t < exp.from_tick || frame->t > exp.to_tick) continue;
      if (!builder.build(bank, MeasureKind::pearson, nullptr, snap)) continue;
      std::size_t idx = 0;
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j, ++idx) {
          if (!snap.mask[idx]) continue;
          const double neg_y = -snap.y[idx];
          const bool ai = in_s[static_cast<std::size_t>(i)];
          const bool aj = in_s[static_cast<std::size_t>(j)];
          if (!ai && !aj) {
            ++c.nn;
            if (neg_y >= 0.0) ++c.nn_wrong;  // normal pair should score similar
          } else if (ai != aj) {
            ++c.an;
            if (neg_y <= 0.0) ++c.an_wrong;  // cross pair should score dissimilar
          }
        }
      }
    }
  });

  Counts total;
  for (const auto& c : per_replica) {
    total.nn += c.nn;
    total.an += c.an;
    total.nn_wrong += c.nn_wrong;
    total.an_wrong += c.an_wrong;
  }
  const long pooled = total.nn + total.an;
  const double overlap =
      pooled == 0 ? 0.0
                  : static_cast<double>(total.nn_wrong + total.an_wrong) / static_cast<double>(pooled);

  ordered_json config;
  config["model"] = model_spec_to_json(FrameModelSpec(exp.model));
  config["w"] = exp.w;
  config["replicas"] = exp.replicas;
  config["from_tick"] = exp.from_tick;
  config["to_tick"] = exp.to_tick;
  config["seed"] = exp.seed;

  ordered_json result;
  result["normal_normal_samples"] = total.nn;
  result["anomalous_normal_samples"] = total.an;
  result["normal_normal_wrong_side"] = total.nn_wrong;
  result["anomalous_normal_wrong_side"] = total.an_wrong;
  result["overlap_at_zero"] = overlap;

  ordered_json report;
  report["command"] = "similarity-split";
  report["config"] = std::move(config);
  report["result"] = std::move(result);
  return report;
}

nlohmann::ordered_json run_tick_rate(const TickRateExperiment& exp, int parallel) {
  exp.model.validate();
  const long ticks = exp.model.horizon;
  if (ticks < 1) throw std::invalid_argument("tick rate: need at least one tick");

  const int blocks = static_cast<int>(std::min<long>(ticks, 256));
  const long per_block = (ticks + blocks - 1) / blocks;
  std::vector<long> hits(static_cast<std::size_t>(blocks), 0);
  parallel_for_index(blocks, parallel, [&](int blk) {
    const long lo = static_cast<long>(blk) * per_block + 1;
    const long hi = std::min(ticks, lo + per_block - 1);
    long count = 0;
    for (long t = lo; t <= hi; ++t) {
      const SimilaritySnapshot snap = direct_similarity_at(exp.model, exp.seed, t);
      DetectorState state;
      state.b = exp.b;
      step(state, snap);
      if (state.alarmed) ++count;
    }
    hits[static_cast<std::size_t>(blk)] = count;
  });

  long alarms = 0;
  for (long h : hits) alarms += h;
  const double rate = static_cast<double>(alarms) / static_cast<double>(ticks);
  const double se = std::sqrt(std::max(rate * (1.0 - rate), 0.0) / static_cast<double>(ticks));

  ordered_json config;
  config["model"] = direct_spec_to_json(exp.model);
  config["b"] = exp.b;
  config["seed"] = exp.seed;

  ordered_json result;
  result["ticks"] = ticks;
  result["alarms"] = alarms;
  result["rate"] = rate;
  result["se"] = se;

  ordered_json report;
  report["command"] = "tick-rate";
  report["config"] = std::move(config);
  report["result"] = std::move(result);
  return report;
}

nlohmann::ordered_json run_isolation_batch(const IsolationBatchExperiment& exp, int parallel) {
  if (exp.instances < 1) throw std::invalid_argument("isolation batch: need instances >= 1");
  std::vector<std::uint8_t> opt_match(static_cast<std::size_t>(exp.instances), 0);
  std::vector<std::uint8_t> recovered(static_cast<std::size_t>(exp.instances), 0);
  std::vector<int> flips(static_cast<std::size_t>(exp.instances), 0);

  std::vector<int> planted = exp.planted;
  std::sort(planted.begin(), planted.end());

  parallel_for_index(exp.instances, parallel, [&](int k) {
    const SimilaritySnapshot snap = planted_isolation_instance(
        exp.n, exp.planted, exp.mu_in, exp.mu_cross, exp.sigma, derive_seed(exp.seed, k));
    const Membership brute = brute_force_membership(snap);
    SpectralOptions opts;
    opts.seed = derive_seed(exp.seed, k, 0x2);
    const SpectralResult spectral = spectral_membership(snap, opts);
    const RefineResult refined = local_search_refine(snap, spectral.membership.x);
    const double tol = 1e-9 * std::max(1.0, std::abs(brute.objective));
    opt_match[static_cast<std::size_t>(k)] =
        std::abs(refined.membership.objective - brute.objective) <= tol ? 1 : 0;
    recovered[static_cast<std::size_t>(k)] = refined.membership.anomalous == planted ? 1 : 0;
    flips[static_cast<std::size_t>(k)] = refined.flips;
  });

  int matches = 0, recoveries = 0, max_flips = 0;
  for (int k = 0; k < exp.instances; ++k) {
    matches += opt_match[static_cast<std::size_t>(k)];
    recoveries += recovered[static_cast<std::size_t>(k)];
    max_flips = std::max(max_flips, flips[static_cast<std::size_t>(k)]);
  }

  ordered_json config;
  config["n"] = exp.n;
  config["planted"] = exp.planted;
  config["mu_in"] = exp.mu_in;
  config["mu_cross"] = exp.mu_cross;
  config["sigma"] = exp.sigma;
  config["instances"] = exp.instances;
  config["seed"] = exp.seed;

  ordered_json result;
  result["optimum_matches"] = matches;
  result["exact_recoveries"] = recoveries;
  result["max_flips"] = max_flips;

  ordered_json report;
  report["command"] = "isolation-batch";
  report["config"] = std::move(config);
  report["result"] = std::move(result);
  return report;
}

}  // namespace simnet
