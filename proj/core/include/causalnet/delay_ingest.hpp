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

#ifndef CAUSALNET_DELAY_INGEST_HPP
#define CAUSALNET_DELAY_INGEST_HPP

#include <Eigen/Core>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace causalnet {

using MaskMatrix = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// One departure. Times are minutes since the Unix epoch (UTC).
struct FlightRecord {
  std::string airport;
  std::int64_t scheduled_minute = 0;
  std::optional<std::int64_t> actual_minute;
  bool cancelled = false;
};

// Hourly average departure delay per airport. Column t covers the hour
// starting at start_hour + t (hours since the Unix epoch).
struct DelayMatrix {
  std::vector<std::string> airports;
  std::int64_t start_hour = 0;
  Eigen::MatrixXd values;  // airports x hours, minutes
  MaskMatrix mask;         // true where at least one flight was scheduled

  std::size_t airport_count() const noexcept { return static_cast<std::size_t>(values.rows()); }
  std::size_t hours() const noexcept { return static_cast<std::size_t>(values.cols()); }
};

// Half-open range of hours since the Unix epoch.
struct HourSpan {
  std::int64_t begin = 0;
  std::int64_t end = 0;
};

inline constexpr double kDefaultCancellationMinutes = 180.0;

struct BinResult {
  DelayMatrix matrix;
  // Records dropped for violating the record invariants (cancelled with an
  // actual time, missing actual time, or departing > 24h before schedule).
  std::size_t rejected = 0;
};

// Entry (i, t) = (total delay + rho * cancellations) / scheduled flights for
// flights scheduled in hour t at airport i. Per-flight delay is floored at 0.
BinResult bin_delays(std::span<const FlightRecord> records, std::span<const std::string> airports,
                     HourSpan span, double rho = kDefaultCancellationMinutes);

// Clipping quantile that trims ~4.26% of observations on continuous data.
inline constexpr double kDefaultOutlierQuantile = 0.9574;

struct ClipResult {
  DelayMatrix matrix;
  double clipped_fraction = 0.0;
  std::vector<double> thresholds;  // per airport
};

// Clips each airport's observed values above its upper_quantile (linear
// interpolation between order statistics). The mask is unchanged.
ClipResult remove_outliers(const DelayMatrix& m, double upper_quantile);

struct ZScoreParams {
  double mean = 0.0;
  double std = 1.0;  // population standard deviation
};

ZScoreParams zscore_fit(const Eigen::MatrixXd& values, const MaskMatrix& mask);
ZScoreParams zscore_fit(const DelayMatrix& train);
Eigen::MatrixXd zscore_apply(const ZScoreParams& params, const Eigen::MatrixXd& values);
Eigen::MatrixXd zscore_invert(const ZScoreParams& params, const Eigen::MatrixXd& z);

// Columns [begin, end) of m.
DelayMatrix slice_hours(const DelayMatrix& m, std::size_t begin, std::size_t end);

struct SplitFractions {
  double train = 0.70;
  double validation = 0.15;
  double test = 0.15;
};

// Contiguous block of hours [begin, end) and the anchors t of every window
// inside it: inputs cover t - r .. t, targets t + 1 .. t + m.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<std::size_t> anchors;
};

struct WindowSplit {
  std::size_t input_steps = 0;  // r
  std::size_t horizon = 0;      // m
  Segment train;
  Segment validation;
  Segment test;
};

WindowSplit split_windows(std::size_t hours, const SplitFractions& fractions, std::size_t input_steps,
                          std::size_t horizon);
WindowSplit split_windows(const DelayMatrix& m, const SplitFractions& fractions, std::size_t input_steps,
                          std::size_t horizon);

// RFC 3339 timestamp -> minutes since the Unix epoch (seconds truncated).
std::int64_t parse_rfc3339_minutes(std::string_view text);
// Hour index -> "YYYY-MM-DDTHH:00:00Z".
std::string format_hour(std::int64_t hour);

// `airport_id,scheduled_utc,actual_utc,cancelled`, optional header line.
std::vector<FlightRecord> read_flight_records(const std::string& path);
// Sorted unique airport ids.
std::vector<std::string> airports_of(std::span<const FlightRecord> records);

// Header `time,<airport_1>,...`, one row per hour. The mask goes to a sibling
// file with the same layout and 0/1 entries.
void write_delay_matrix(const DelayMatrix& m, const std::string& values_path, const std::string& mask_path);
DelayMatrix read_delay_matrix(const std::string& values_path, const std::string& mask_path = {});

}  // namespace causalnet

#endif  // CAUSALNET_DELAY_INGEST_HPP
