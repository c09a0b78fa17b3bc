/*
 * Copyright 2026 The CausalNet Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "causalnet/synthdata.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <map>
#include <numbers>
#include <random>

#include "causalnet/error.hpp"
#include "text_util.hpp"

namespace causalnet {

void SynthConfig::validate() const {
  auto fail = [](const std::string& m) { throw_error(ErrorKind::Config, "synth: " + m); };
  if (airports < 2) fail("need at least 2 airports");
  if (hours < 500) fail("need at least 500 hours");
  if (!(edge_density >= 0.0 && edge_density <= 1.0)) fail("edge_density must lie in [0, 1]");
  if (!(weight_min >= 0.0 && weight_max >= weight_min)) fail("weight range must satisfy 0 <= min <= max");
  if (lag_min < 1 || lag_max < lag_min) fail("lags must satisfy 1 <= lag_min <= lag_max");
  if (!(base_min >= 0.0 && base_max >= base_min)) fail("base range must satisfy 0 <= min <= max");
  if (daily_amplitude < 0.0 || weekly_amplitude < 0.0 || noise_std < 0.0 || spike_magnitude < 0.0) {
    fail("amplitudes, noise and spike magnitude must be >= 0");
  }
  if (!(spike_rate >= 0.0 && spike_rate <= 1.0)) fail("spike_rate must lie in [0, 1]");
  if (receivers > airports) fail("receivers exceeds airport count");
}

double companion_spectral_radius(const Eigen::MatrixXd& weights, const Eigen::MatrixXi& lags) {
  const Eigen::Index n = weights.rows();
  const int max_lag = std::max(1, lags.size() ? lags.maxCoeff() : 1);
  const Eigen::Index dim = n * max_lag;
  Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      if (weights(a, b) != 0.0) companion(a, (lags(a, b) - 1) * n + b) += weights(a, b);
  for (Eigen::Index k = n; k < dim; ++k) companion(k, k - n) = 1.0;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

SynthDataset generate(const SynthConfig& cfg) {
  cfg.validate();
  const std::size_t n = cfg.airports;
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  SynthDataset out;
  GroundTruth& truth = out.truth;
  for (std::size_t i = 0; i < n; ++i) {
    truth.airports.push_back((i < 10 ? "A0" : "A") + std::to_string(i));
  }

  truth.weights = Eigen::MatrixXd::Zero(n, n);
  truth.lags = Eigen::MatrixXi::Zero(n, n);
  const std::size_t first_receiver = cfg.receivers == 0 ? 0 : n - cfg.receivers;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) {
      // Draw for every pair so the stream does not depend on `receivers`.
      const double coin = unit(rng);
      const double w = uniform(cfg.weight_min, cfg.weight_max);
      const auto lag = static_cast<int>(cfg.lag_min + static_cast<std::size_t>(unit(rng) * static_cast<double>(cfg.lag_max - cfg.lag_min + 1)));
      if (a == b || a < first_receiver || coin >= cfg.edge_density) continue;
      truth.weights(a, b) = w;
      truth.lags(a, b) = std::min(lag, static_cast<int>(cfg.lag_max));
    }
  }

  double radius = companion_spectral_radius(truth.weights, truth.lags);
  if (radius >= 0.95) {
    if (!cfg.auto_scale && radius >= 1.0) {
      throw_error(ErrorKind::Numeric, "synth: propagation is unstable, companion spectral radius " + std::to_string(radius));
    }
    if (cfg.auto_scale) {
      // The radius is monotone in a common nonnegative scale factor but not
      // linear in it when lags differ, so bisect for radius 0.94.
      const Eigen::MatrixXd raw = truth.weights;
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (companion_spectral_radius(mid * raw, truth.lags) <= 0.94 ? lo : hi) = mid;
      }
      truth.weight_scale = lo;
      truth.weights = lo * raw;
      radius = companion_spectral_radius(truth.weights, truth.lags);
    }
  }
  truth.spectral_radius = radius;
  for (std::size_t a = 0; a < n; ++a) truth.susceptibility.push_back(truth.weights.row(a).sum());

  for (std::size_t i = 0; i < n; ++i) truth.coordinates.push_back({uniform(22.0, 45.0), uniform(100.0, 125.0)});

  std::vector<double> base(n), daily_shift(n), weekly_shift(n);
  for (std::size_t i = 0; i < n; ++i) {
    base[i] = uniform(cfg.base_min, cfg.base_max);
    daily_shift[i] = uniform(-1.0, 1.0);
    weekly_shift[i] = uniform(-6.0, 6.0);
  }

  const std::size_t total = cfg.burn_in + cfg.hours;
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(n, total);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  for (std::size_t s = 0; s < total; ++s) {
    // Hour of day/week measured from the first emitted hour.
    const double t = static_cast<double>(s) - static_cast<double>(cfg.burn_in);
    for (std::size_t a = 0; a < n; ++a) {
      double v = base[a] + cfg.daily_amplitude * std::sin(two_pi * (t + daily_shift[a]) / 24.0) +
                 cfg.weekly_amplitude * std::sin(two_pi * (t + weekly_shift[a]) / 168.0);
      for (std::size_t b = 0; b < n; ++b) {
        const double w = truth.weights(a, b);
        if (w == 0.0) continue;
        const auto lag = static_cast<std::size_t>(truth.lags(a, b));
        if (s >= lag) v += w * y(b, s - lag);
      }
      const double noise = gauss(rng);
      const double spike_coin = unit(rng);
      const double spike_size = uniform(0.5, 1.5);
      v += cfg.noise_std * noise;
      if (spike_coin < cfg.spike_rate) v += cfg.spike_magnitude * spike_size;
      y(a, s) = std::max(0.0, v);
    }
  }

  DelayMatrix& m = out.delays;
  m.airports = truth.airports;
  using namespace std::chrono;
  m.start_hour = static_cast<std::int64_t>(sys_days{year{2018} / April / 1}.time_since_epoch().count()) * 24;
  m.values = y.rightCols(static_cast<Eigen::Index>(cfg.hours));
  m.mask = MaskMatrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(cfg.hours), true);
  return out;
}

double great_circle_km(const Coordinate& a, const Coordinate& b) {
  constexpr double kEarthRadiusKm = 6371.0;
  constexpr double deg = std::numbers::pi / 180.0;
  const double dlat = (b.lat_deg - a.lat_deg) * deg;
  const double dlon = (b.lon_deg - a.lon_deg) * deg;
  const double h = std::sin(dlat / 2) * std::sin(dlat / 2) +
                   std::cos(a.lat_deg * deg) * std::cos(b.lat_deg * deg) * std::sin(dlon / 2) * std::sin(dlon / 2);
  return 2.0 * kEarthRadiusKm * std::asin(std::min(1.0, std::sqrt(h)));
}

GeoGraph geo_graph(std::span<const Coordinate> coords, double sigma_km, double cutoff_km) {
  const std::size_t n = coords.size();
  if (n < 2) throw_error(ErrorKind::Input, "geo_graph: need at least 2 coordinates");
  Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
  double sum = 0.0, sum_sq = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = great_circle_km(coords[i], coords[j]);
      dist(i, j) = dist(j, i) = d;
      sum += d;
      sum_sq += d * d;
      ++pairs;
    }
  double sigma = sigma_km;
  if (sigma <= 0.0) {
    const double mean = sum / static_cast<double>(pairs);
    sigma = std::sqrt(std::max(0.0, sum_sq / static_cast<double>(pairs) - mean * mean));
  }
  GeoGraph g;
  g.coordinates.assign(coords.begin(), coords.end());
  g.weights = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double d = dist(i, j);
      if (cutoff_km > 0.0 && d > cutoff_km) continue;
      if (sigma > 0.0) {
        g.weights(i, j) = std::exp(-(d * d) / (sigma * sigma));
      } else {
        g.weights(i, j) = d == 0.0 ? 1.0 : 0.0;
      }
    }
  return g;
}

void write_ground_truth_json(const std::string& path, const GroundTruth& truth) {
  using nlohmann::json;
  json doc;
  doc["airports"] = truth.airports;
  json edges = json::array();
  for (Eigen::Index a = 0; a < truth.weights.rows(); ++a)
    for (Eigen::Index b = 0; b < truth.weights.cols(); ++b)
      if (truth.weights(a, b) != 0.0) {
        edges.push_back(json::array({truth.airports[b], truth.airports[a], truth.weights(a, b), truth.lags(a, b)}));
      }
  doc["edges"] = std::move(edges);
  doc["susceptibility"] = truth.susceptibility;
  json coords = json::array();
  for (const auto& c : truth.coordinates) coords.push_back(json::array({c.lat_deg, c.lon_deg}));
  doc["coords"] = std::move(coords);
  doc["spectral_radius"] = truth.spectral_radius;
  doc["weight_scale"] = truth.weight_scale;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_error(ErrorKind::Io, "cannot write '" + path + "'");
  out << doc.dump(1) << "\n";
}

GroundTruth read_ground_truth_json(const std::string& path) {
  using nlohmann::json;
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::Io, "cannot open '" + path + "'");
  GroundTruth truth;
  try {
    const json doc = json::parse(in);
    truth.airports = doc.at("airports").get<std::vector<std::string>>();
    const auto n = static_cast<Eigen::Index>(truth.airports.size());
    std::map<std::string, Eigen::Index> index;
    for (Eigen::Index i = 0; i < n; ++i) index[truth.airports[i]] = i;
    truth.weights = Eigen::MatrixXd::Zero(n, n);
    truth.lags = Eigen::MatrixXi::Zero(n, n);
    for (const auto& e : doc.at("edges")) {
      const auto from = index.at(e.at(0).get<std::string>());
      const auto to = index.at(e.at(1).get<std::string>());
      truth.weights(to, from) = e.at(2).get<double>();
      truth.lags(to, from) = e.at(3).get<int>();
    }
    truth.susceptibility = doc.at("susceptibility").get<std::vector<double>>();
    for (const auto& c : doc.at("coords")) truth.coordinates.push_back({c.at(0).get<double>(), c.at(1).get<double>()});
    truth.spectral_radius = doc.value("spectral_radius", 0.0);
    truth.weight_scale = doc.value("weight_scale", 1.0);
  } catch (const json::exception& e) {
    throw_error(ErrorKind::Input, path + ": " + e.what());
  } catch (const std::out_of_range&) {
    throw_error(ErrorKind::Input, path + ": edge references an unknown airport");
  }
  return truth;
}

std::vector<Coordinate> read_coordinates_csv(const std::string& path, std::span<const std::string> airports) {
  std::ifstream in(path);
  if (!in) throw_error(ErrorKind::Io, "cannot open coordinates '" + path + "'");
  std::map<std::string, Coordinate, std::less<>> by_id;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto f = detail::split(trimmed, ',');
    if (line_no == 1 && f[0] == "airport") continue;
    const std::string where = path + ":" + std::to_string(line_no);
    if (f.size() != 3) throw_error(ErrorKind::Input, where + ": expected airport,lat,lon");
    by_id[std::string(f[0])] = {detail::parse_double(f[1], where), detail::parse_double(f[2], where)};
  }
  std::vector<Coordinate> out;
  for (const auto& a : airports) {
    auto it = by_id.find(a);
    if (it == by_id.end()) throw_error(ErrorKind::Input, path + ": no coordinates for airport '" + a + "'");
    out.push_back(it->second);
  }
  return out;
}

}  // namespace causalnet
