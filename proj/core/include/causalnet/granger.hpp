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

#ifndef CAUSALNET_GRANGER_HPP
#define CAUSALNET_GRANGER_HPP

#include <Eigen/Core>
#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "causalnet/delay_ingest.hpp"

namespace causalnet {

// Time scales of the causality graph set, in storage order.
enum class Scale : std::size_t { Year = 0, Month = 1, Week = 2, Day = 3 };
inline constexpr std::size_t kScaleCount = 4;
inline constexpr std::array<Scale, kScaleCount> kScales{Scale::Year, Scale::Month, Scale::Week, Scale::Day};

const char* scale_name(Scale s) noexcept;
Scale scale_from_name(std::string_view name);

struct GrangerConfig {
  std::size_t lag = 2;
  double significance = 0.05;
  // Trailing window per scale in hours; 0 means all available history.
  std::array<std::size_t, kScaleCount> window_hours{0, 720, 168, 24};
  // Differencing interval per scale in hours (24 removes the daily cycle).
  std::array<std::size_t, kScaleCount> difference_interval{24, 24, 24, 1};
  // Graph sets are precomputed at hours cadence-1, 2*cadence-1, ...
  std::size_t cadence_hours = 24;
  std::size_t threads = 1;

  // Smallest differenced window a test accepts.
  std::size_t min_observations() const noexcept { return 2 * lag + 10; }
  void validate() const;
};

// output[k] = series[k + interval] - series[k].
std::vector<double> difference(std::span<const double> series, std::size_t interval);

struct OlsResult {
  Eigen::VectorXd coefficients;
  double rss = 0.0;
  bool rank_deficient = false;
};

// Least squares via column-pivoted Householder QR. `x` must already contain
// the intercept column.
OlsResult ols_rss(const Eigen::VectorXd& y, const Eigen::MatrixXd& x);

// Upper tail of the F(d1, d2) distribution.
double f_pvalue(double f, double d1, double d2);

struct GrangerResult {
  double f = 0.0;
  double p = 1.0;
  double rss_restricted = 0.0;
  double rss_unrestricted = 0.0;
  std::size_t observations = 0;
  // Rank-deficient or perfectly fitted regression; never an edge.
  bool degenerate = false;
};

// Does `cause` help predict `effect` beyond effect's own lags 1..lag?
// Both series must already be differenced and of equal length.
GrangerResult granger_test(std::span<const double> effect, std::span<const double> cause, std::size_t lag);

struct PairTest {
  std::size_t effect = 0;
  std::size_t cause = 0;
};

// Runs granger_test for each pair; results are returned in pair order no
// matter how the work is scheduled across threads.
std::vector<GrangerResult> evaluate_pairs(std::span<const std::vector<double>> series, std::span<const PairTest> pairs,
                                          std::size_t lag, std::size_t threads = 1);

// Graph (a, b) = 1 means airport b Granger-causes airport a at that scale.
struct CausalGraphSet {
  std::size_t anchor = 0;
  std::array<Eigen::MatrixXd, kScaleCount> graphs;
  std::array<Eigen::MatrixXd, kScaleCount> p_values;

  const Eigen::MatrixXd& graph(Scale s) const { return graphs[static_cast<std::size_t>(s)]; }
};

// Per scale: trailing window ending at hour t (inclusive), differenced, then
// pairwise tests. A window longer than the history uses the full history; a
// differenced window shorter than min_observations() yields no edges.
CausalGraphSet build_graph_set(const Eigen::MatrixXd& delays, std::size_t t, const GrangerConfig& cfg);
CausalGraphSet build_graph_set(const DelayMatrix& delays, std::size_t t, const GrangerConfig& cfg);

// Graph sets precomputed on a fixed cadence; each hour uses the latest set
// whose anchor is not after it.
class GraphSchedule {
 public:
  GraphSchedule() = default;

  static GraphSchedule build(const Eigen::MatrixXd& delays, const GrangerConfig& cfg);
  // Sets must be ordered with anchors cadence-1, 2*cadence-1, ...
  static GraphSchedule from_sets(std::vector<CausalGraphSet> sets, std::size_t cadence);

  const CausalGraphSet* latest_at_or_before(std::size_t hour) const noexcept;
  const std::vector<CausalGraphSet>& sets() const noexcept { return sets_; }
  std::size_t cadence() const noexcept { return cadence_; }

 private:
  std::size_t cadence_ = 24;
  std::vector<CausalGraphSet> sets_;
};

// JSON: {anchor_time, airports, graphs: [{anchor_time, scale, adjacency, p_values}, ...]}.
void write_graph_set_json(const std::string& path, const CausalGraphSet& set, std::span<const std::string> airports);
CausalGraphSet read_graph_set_json(const std::string& path);

}  // namespace causalnet

#endif  // CAUSALNET_GRANGER_HPP
