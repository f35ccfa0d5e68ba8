#include "simnet/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include <Eigen/Dense>

#include "simnet/rng.hpp"

namespace simnet {

namespace {

void check_anomalous(int n, const std::vector<int>& anomalous, const char* who) {
  std::set<int> seen;
  for (int a : anomalous) {
    if (a < 0 || a >= n)
      throw std::invalid_argument(std::string(who) + ": anomalous sensor " + std::to_string(a) +
                                  " out of range");
    if (!seen.insert(a).second)
      throw std::invalid_argument(std::string(who) + ": duplicate anomalous sensor " +
                                  std::to_string(a));
  }
}

std::vector<std::uint8_t> membership_flags(int n, const std::vector<int>& anomalous) {
  std::vector<std::uint8_t> flags(static_cast<std::size_t>(n), 0);
  for (int a : anomalous) flags[static_cast<std::size_t>(a)] = 1;
  return flags;
}

// Correlation matrix for the covariance model; `post` selects the
// post-change structure.
Eigen::MatrixXd covariance_matrix(const CovarianceModelSpec& spec, bool post) {
  const int n = spec.n_sensors;
  const auto flags = membership_flags(n, spec.anomalous);
  Eigen::MatrixXd c(n, n);
  for (int i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double r = spec.rho_normal;
      if (post) {
        if (flags[i] && flags[j]) {
          r = spec.rho_anomalous;
        } else if (flags[i] != flags[j]) {
          r = spec.rho_cross;
        }
      }
      c(i, j) = r;
      c(j, i) = r;
    }
  }
  return c;
}

// Symmetric square root; throws when the matrix is not PSD.
Eigen::MatrixXd symmetric_sqrt(const Eigen::MatrixXd& c, const char* label) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success)
    throw std::runtime_error(std::string(label) + ": eigendecomposition failed");
  const Eigen::VectorXd vals = es.eigenvalues();
  const double min_eig = vals.minCoeff();
  if (min_eig < -1e-10)
    throw std::invalid_argument(std::string(label) +
                                ": correlation matrix is not positive semidefinite (eigenvalue " +
                                std::to_string(min_eig) + ")");
  Eigen::VectorXd roots = vals.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
}

class TrendSource final : public FrameSource {
 public:
  TrendSource(const TrendModelSpec& spec, std::uint64_t seed)
      : spec_(spec), flags_(membership_flags(spec.n_sensors, spec.anomalous)), key_(seed),
        sd_(std::sqrt(spec.variance)) {
    spec_.validate();
  }

  std::optional<ObservationFrame> next() override {
    if (t_ >= spec_.horizon) return std::nullopt;
    ++t_;
    ObservationFrame frame;
    frame.t = t_;
    frame.values.resize(static_cast<std::size_t>(spec_.n_sensors));
    for (int i = 0; i < spec_.n_sensors; ++i)
      frame.values[static_cast<std::size_t>(i)] =
          mean_at(i, t_) + sd_ * counter_gaussian(key_, static_cast<std::uint64_t>(t_),
                                                  static_cast<std::uint64_t>(i));
    return frame;
  }

 private:
  double mean_at(int sensor, long t) const {
    if (spec_.kappa && flags_[static_cast<std::size_t>(sensor)] && t > *spec_.kappa) {
      const double at_change = spec_.slope_null * static_cast<double>(*spec_.kappa);
      return at_change + spec_.slope_anomalous * static_cast<double>(t - *spec_.kappa);
    }
    return spec_.slope_null * static_cast<double>(t);
  }

  TrendModelSpec spec_;
  std::vector<std::uint8_t> flags_;
  std::uint64_t key_;
  double sd_;
  long t_ = 0;
};

class CovarianceSource final : public FrameSource {
 public:
  CovarianceSource(const CovarianceModelSpec& spec, std::uint64_t seed) : spec_(spec), key_(seed) {
    spec_.validate();
    pre_factor_ = symmetric_sqrt(covariance_matrix(spec_, false), "gen_covariance(pre)");
    if (spec_.kappa)
      post_factor_ = symmetric_sqrt(covariance_matrix(spec_, true), "gen_covariance(post)");
  }

  std::optional<ObservationFrame> next() override {
    if (t_ >= spec_.horizon) return std::nullopt;
    ++t_;
    const int n = spec_.n_sensors;
    Eigen::VectorXd g(n);
    for (int k = 0; k < n; ++k)
      g(k) = counter_gaussian(key_, static_cast<std::uint64_t>(t_), static_cast<std::uint64_t>(k));
    const bool post = spec_.kappa && t_ > *spec_.kappa;
    Eigen::VectorXd x = (post ? post_factor_ : pre_factor_) * g;
    ObservationFrame frame;
    frame.t = t_;
    frame.values.assign(x.data(), x.data() + n);
    return frame;
  }

 private:
  CovarianceModelSpec spec_;
  std::uint64_t key_;
  Eigen::MatrixXd pre_factor_;
  Eigen::MatrixXd post_factor_;
  long t_ = 0;
};

class DirectSource final : public SnapshotSource {
 public:
  DirectSource(const DirectSimilaritySpec& spec, std::uint64_t seed) : spec_(spec), key_(seed) {
    spec_.validate();
  }

  std::optional<SimilaritySnapshot> next() override {
    if (t_ >= spec_.horizon) return std::nullopt;
    ++t_;
    return direct_similarity_at(spec_, key_, t_);
  }

 private:
  DirectSimilaritySpec spec_;
  std::uint64_t key_;
  long t_ = 0;
};

}  // namespace

void TrendModelSpec::validate() const {
  if (n_sensors < 1) throw std::invalid_argument("trend model: need at least one sensor");
  check_anomalous(n_sensors, anomalous, "trend model");
  if (!(variance > 0.0)) throw std::invalid_argument("trend model: variance must be > 0");
  if (horizon < 0) throw std::invalid_argument("trend model: horizon must be >= 0");
  if (kappa && *kappa < 0) throw std::invalid_argument("trend model: kappa must be >= 0");
}

void CovarianceModelSpec::validate() const {
  if (n_sensors < 1) throw std::invalid_argument("covariance model: need at least one sensor");
  check_anomalous(n_sensors, anomalous, "covariance model");
  if (horizon < 0) throw std::invalid_argument("covariance model: horizon must be >= 0");
  if (kappa && *kappa < 0) throw std::invalid_argument("covariance model: kappa must be >= 0");
  symmetric_sqrt(covariance_matrix(*this, false), "covariance model (pre)");
  if (kappa) symmetric_sqrt(covariance_matrix(*this, true), "covariance model (post)");
}

void DirectSimilaritySpec::validate() const {
  const int n = static_cast<int>(u.size());
  if (n < 2) throw std::invalid_argument("direct similarity: need at least two node vectors");
  if (!(sigma2 > 0.0)) throw std::invalid_argument("direct similarity: sigma2 must be > 0");
  if (mask.n() != n) throw std::invalid_argument("direct similarity: mask size mismatch");
  const std::size_t dim = u.front().size();
  if (dim < 1) throw std::invalid_argument("direct similarity: empty node vector");
  for (const auto& v : u) {
    if (v.size() != dim) throw std::invalid_argument("direct similarity: ragged node vectors");
    double ss = 0.0;
    for (double c : v) ss += c * c;
    if (std::abs(ss - 1.0) > 1e-6)
      throw std::invalid_argument("direct similarity: node vectors must have unit norm");
  }
  if (horizon < 0) throw std::invalid_argument("direct similarity: horizon must be >= 0");
}

std::unique_ptr<FrameSource> gen_trend(const TrendModelSpec& spec, std::uint64_t seed) {
  return std::make_unique<TrendSource>(spec, seed);
}

std::unique_ptr<FrameSource> gen_covariance(const CovarianceModelSpec& spec, std::uint64_t seed) {
  return std::make_unique<CovarianceSource>(spec, seed);
}

std::unique_ptr<FrameSource> make_frame_source(const FrameModelSpec& spec, std::uint64_t seed) {
  return std::visit(
      [seed](const auto& s) -> std::unique_ptr<FrameSource> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, TrendModelSpec>) return gen_trend(s, seed);
        else return gen_covariance(s, seed);
      },
      spec);
}

bool model_is_null(const FrameModelSpec& spec) {
  return std::visit([](const auto& s) { return !s.kappa.has_value(); }, spec);
}

long model_horizon(const FrameModelSpec& spec) {
  return std::visit([](const auto& s) { return s.horizon; }, spec);
}

FrameModelSpec model_with_horizon(const FrameModelSpec& spec, long horizon) {
  FrameModelSpec out = spec;
  std::visit([horizon](auto& s) { s.horizon = horizon; }, out);
  return out;
}

FrameModelSpec model_with_kappa(const FrameModelSpec& spec, std::optional<long> kappa) {
  FrameModelSpec out = spec;
  std::visit([kappa](auto& s) { s.kappa = kappa; }, out);
  return out;
}

std::unique_ptr<SnapshotSource> gen_direct_similarity(const DirectSimilaritySpec& spec,
                                                      std::uint64_t seed) {
  return std::make_unique<DirectSource>(spec, seed);
}

SimilaritySnapshot direct_similarity_at(const DirectSimilaritySpec& spec, std::uint64_t seed,
                                        long t) {
  const int n = static_cast<int>(spec.u.size());
  const double sd = std::sqrt(spec.sigma2);
  SimilaritySnapshot snap;
  snap.t = t;
  snap.n = n;
  snap.y.assign(EdgeMask::tri_size(n), std::numeric_limits<double>::quiet_NaN());
  snap.mask.assign(EdgeMask::tri_size(n), 0);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++idx) {
      if (!spec.mask.edge(i, j)) continue;
      double mu = 0.0;
      for (std::size_t k = 0; k < spec.u[i].size(); ++k)
        mu += spec.u[static_cast<std::size_t>(i)][k] * spec.u[static_cast<std::size_t>(j)][k];
      snap.y[idx] = mu + sd * counter_gaussian(seed, static_cast<std::uint64_t>(t), idx);
      snap.mask[idx] = 1;
    }
  }
  return snap;
}

SimilaritySnapshot planted_isolation_instance(int n, const std::vector<int>& planted,
                                              double mu_in, double mu_cross, double sigma,
                                              std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("planted instance: need at least two nodes");
  check_anomalous(n, planted, "planted instance");
  if (static_cast<int>(planted.size()) >= n)
    throw std::invalid_argument("planted instance: planted set must be a proper subset");
  if (sigma < 0.0) throw std::invalid_argument("planted instance: sigma must be >= 0");
  const auto flags = membership_flags(n, planted);
  SimilaritySnapshot snap;
  snap.t = 1;
  snap.n = n;
  snap.y.assign(EdgeMask::tri_size(n), std::numeric_limits<double>::quiet_NaN());
  snap.mask.assign(EdgeMask::tri_size(n), 1);
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++idx) {
      const double mu = (flags[static_cast<std::size_t>(i)] == flags[static_cast<std::size_t>(j)])
                            ? mu_in
                            : mu_cross;
      snap.y[idx] = mu + sigma * counter_gaussian(seed, 1, idx);
    }
  }
  return snap;
}

nlohmann::ordered_json model_spec_to_json(const FrameModelSpec& spec) {
  nlohmann::ordered_json j;
  if (const auto* trend = std::get_if<TrendModelSpec>(&spec)) {
    j["type"] = "trend";
    j["n_sensors"] = trend->n_sensors;
    j["anomalous"] = trend->anomalous;
    j["variance"] = trend->variance;
    j["slope_null"] = trend->slope_null;
    j["slope_anomalous"] = trend->slope_anomalous;
    if (trend->kappa) j["kappa"] = *trend->kappa; else j["kappa"] = nullptr;
    j["horizon"] = trend->horizon;
  } else {
    const auto& cov = std::get<CovarianceModelSpec>(spec);
    j["type"] = "covariance";
    j["n_sensors"] = cov.n_sensors;
    j["anomalous"] = cov.anomalous;
    j["rho_normal"] = cov.rho_normal;
    j["rho_cross"] = cov.rho_cross;
    j["rho_anomalous"] = cov.rho_anomalous;
    if (cov.kappa) j["kappa"] = *cov.kappa; else j["kappa"] = nullptr;
    j["horizon"] = cov.horizon;
  }
  return j;
}

FrameModelSpec model_spec_from_json(const nlohmann::json& j) {
  const std::string type = j.at("type").get<std::string>();
  const auto kappa_of = [&j]() -> std::optional<long> {
    if (!j.contains("kappa") || j.at("kappa").is_null()) return std::nullopt;
    return j.at("kappa").get<long>();
  };
  if (type == "trend") {
    TrendModelSpec s;
    s.n_sensors = j.at("n_sensors").get<int>();
    s.anomalous = j.value("anomalous", std::vector<int>{});
    s.variance = j.value("variance", 25.0);
    s.slope_null = j.value("slope_null", 1.0);
    s.slope_anomalous = j.value("slope_anomalous", 1.0);
    s.kappa = kappa_of();
    s.horizon = j.at("horizon").get<long>();
    s.validate();
    return s;
  }
  if (type == "covariance") {
    CovarianceModelSpec s;
    s.n_sensors = j.at("n_sensors").get<int>();
    s.anomalous = j.value("anomalous", std::vector<int>{});
    s.rho_normal = j.value("rho_normal", 0.5);
    s.rho_cross = j.value("rho_cross", -0.2);
    s.rho_anomalous = j.value("rho_anomalous", 0.5);
    s.kappa = kappa_of();
    s.horizon = j.at("horizon").get<long>();
    s.validate();
    return s;
  }
  throw std::invalid_argument("unknown model type: " + type);
}

nlohmann::ordered_json direct_spec_to_json(const DirectSimilaritySpec& spec) {
  nlohmann::ordered_json j;
  j["type"] = "direct";
  j["u"] = spec.u;
  j["sigma2"] = spec.sigma2;
  j["mask"] = edge_mask_to_json(spec.mask);
  j["horizon"] = spec.horizon;
  return j;
}

DirectSimilaritySpec direct_spec_from_json(const nlohmann::json& j) {
  DirectSimilaritySpec s;
  s.u = j.at("u").get<std::vector<std::vector<double>>>();
  s.sigma2 = j.at("sigma2").get<double>();
  s.mask = j.contains("mask") ? edge_mask_from_json(j.at("mask"))
                              : EdgeMask::complete(static_cast<int>(s.u.size()));
  s.horizon = j.at("horizon").get<long>();
  s.validate();
  return s;
}

}  // namespace simnet
