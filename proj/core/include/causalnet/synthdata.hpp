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

#ifndef CAUSALNET_SYNTHDATA_HPP
#define CAUSALNET_SYNTHDATA_HPP

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "causalnet/delay_ingest.hpp"

namespace causalnet {

struct Coordinate {
  double lat_deg = 0.0;
  double lon_deg = 0.0;
};

// Settings for the planted-propagation delay generator.
struct SynthConfig {
  std::size_t airports = 10;
  std::size_t hours = 1440;
  double edge_density = 0.15;  // probability of each ordered pair carrying an edge
  double weight_min = 0.5;
  double weight_max = 0.9;
  std::size_t lag_min = 1;
  std::size_t lag_max = 2;
  double base_min = 8.0;  // per-airport baseline delay, minutes
  double base_max = 16.0;
  double daily_amplitude = 4.0;
  // 168h cycle; not removed by a 24h seasonal difference.
  double weekly_amplitude = 0.0;
  double noise_std = 1.0;
  double spike_rate = 0.002;
  double spike_magnitude = 20.0;
  // When > 0 only the last `receivers` airports have inbound edges.
  std::size_t receivers = 0;
  // Rescale weights when the companion spectral radius reaches 0.95; when
  // false a radius >= 1 is an error.
  bool auto_scale = true;
  std::size_t burn_in = 336;
  std::uint64_t seed = 1;

  void validate() const;
};

struct GroundTruth {
  std::vector<std::string> airports;
  // weights(a, b) > 0 means b -> a with that coefficient at lag lags(a, b).
  Eigen::MatrixXd weights;
  Eigen::MatrixXi lags;
  std::vector<double> susceptibility;  // inbound weight sum per airport
  std::vector<Coordinate> coordinates;
  double spectral_radius = 0.0;  // after any rescaling
  double weight_scale = 1.0;     // factor applied by auto_scale
};

struct SynthDataset {
  DelayMatrix delays;
  GroundTruth truth;
};

SynthDataset generate(const SynthConfig& cfg);

// Spectral radius of the lag-companion matrix of the linear propagation part.
double companion_spectral_radius(const Eigen::MatrixXd& weights, const Eigen::MatrixXi& lags);

struct GeoGraph {
  Eigen::MatrixXd weights;  // symmetric, zero diagonal, entries in [0, 1]
  std::vector<Coordinate> coordinates;
};

double great_circle_km(const Coordinate& a, const Coordinate& b);

// A_ij = exp(-d_ij^2 / sigma_d^2) when d_ij <= cutoff. sigma_km <= 0 uses the
// standard deviation of all pairwise distances; cutoff_km <= 0 disables the cutoff.
GeoGraph geo_graph(std::span<const Coordinate> coords, double sigma_km = 0.0, double cutoff_km = 0.0);

// {airports, edges: [[from, to, weight, lag], ...], susceptibility, coords: [[lat, lon], ...]}
void write_ground_truth_json(const std::string& path, const GroundTruth& truth);
GroundTruth read_ground_truth_json(const std::string& path);

// `airport,lat,lon` with optional header; returned in the order of `airports`.
std::vector<Coordinate> read_coordinates_csv(const std::string& path, std::span<const std::string> airports);

}  // namespace causalnet

#endif  // CAUSALNET_SYNTHDATA_HPP
