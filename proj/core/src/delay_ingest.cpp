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

#include "causalnet/delay_ingest.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>
#include <tuple>
#include <unordered_map>

#include "causalnet/error.hpp"

namespace causalnet {
namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

using RecordKey = std::tuple<std::string, std::int64_t, std::int64_t, bool>;

RecordKey key_of(const FlightRecord& r) {
  return {r.airport, r.scheduled_minute, r.actual_minute.value_or(INT64_MIN), r.cancelled};
}

bool record_valid(const FlightRecord& r) {
  if (r.cancelled) return !r.actual_minute.has_value();
  if (!r.actual_minute) return false;
  return *r.actual_minute >= r.scheduled_minute - 1440;
}

}  // namespace

BinResult bin_delays(std::span<const FlightRecord> records, std::span<const std::string> airports,
                     HourSpan span, double rho) {
  if (airports.empty()) throw_error(ErrorKind::Input, "bin_delays: empty airport list");
  if (!(rho >= 0.0)) throw_error(ErrorKind::Config, "bin_delays: rho must be >= 0");
  if (span.end <= span.begin) throw_error(ErrorKind::Input, "bin_delays: empty hour span");

  std::unordered_map<std::string, std::size_t> row_of;
  for (std::size_t i = 0; i < airports.size(); ++i) {
    if (!row_of.emplace(airports[i], i).second) {
      throw_error(ErrorKind::Input, "bin_delays: airport '" + airports[i] + "' listed twice");
    }
  }

  {
    std::set<RecordKey> seen;
    std::vector<std::string> dupes;
    for (const auto& r : records) {
      if (!seen.insert(key_of(r)).second && dupes.size() < 10) {
        dupes.push_back(r.airport + "@" + std::to_string(r.scheduled_minute));
      }
    }
    if (!dupes.empty()) {
      std::string msg = "bin_delays: duplicate records:";
      for (const auto& d : dupes) msg += " " + d;
      throw_error(ErrorKind::Input, msg);
    }
  }

  const std::size_t n = airports.size();
  const auto hours = static_cast<std::size_t>(span.end - span.begin);
  Eigen::MatrixXd delay_sum = Eigen::MatrixXd::Zero(n, hours);
  Eigen::MatrixXd cancelled = Eigen::MatrixXd::Zero(n, hours);
  Eigen::MatrixXd scheduled = Eigen::MatrixXd::Zero(n, hours);

  BinResult out;
  for (const auto& r : records) {
    auto it = row_of.find(r.airport);
    if (it == row_of.end()) {
      throw_error(ErrorKind::Input, "bin_delays: record airport '" + r.airport + "' not in airport list");
    }
    if (!record_valid(r)) {
      ++out.rejected;
      continue;
    }
    const std::int64_t hour = floor_div(r.scheduled_minute, 60);
    if (hour < span.begin || hour >= span.end) continue;
    const auto col = static_cast<Eigen::Index>(hour - span.begin);
    const auto row = static_cast<Eigen::Index>(it->second);
    scheduled(row, col) += 1.0;
    if (r.cancelled) {
      cancelled(row, col) += 1.0;
    } else {
      delay_sum(row, col) += static_cast<double>(std::max<std::int64_t>(0, *r.actual_minute - r.scheduled_minute));
    }
  }

  DelayMatrix& m = out.matrix;
  m.airports.assign(airports.begin(), airports.end());
  m.start_hour = span.begin;
  m.values = Eigen::MatrixXd::Zero(n, hours);
  m.mask = MaskMatrix::Constant(n, hours, false);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index t = 0; t < m.values.cols(); ++t) {
      const double a = scheduled(i, t);
      if (a == 0.0) continue;
      m.values(i, t) = (delay_sum(i, t) + rho * cancelled(i, t)) / a;
      m.mask(i, t) = true;
    }
  }
  return out;
}

ClipResult remove_outliers(const DelayMatrix& m, double upper_quantile) {
  if (!(upper_quantile > 0.0 && upper_quantile < 1.0)) {
    throw_error(ErrorKind::Config, "remove_outliers: upper_quantile must lie in (0, 1)");
  }
  ClipResult out;
  out.matrix = m;
  std::size_t observed = 0, clipped = 0;
  std::vector<double> xs;
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    xs.clear();
    for (Eigen::Index t = 0; t < m.values.cols(); ++t) {
      if (m.mask(i, t)) xs.push_back(m.values(i, t));
    }
    if (xs.empty()) {
      const std::string name = i < static_cast<Eigen::Index>(m.airports.size()) ? m.airports[i] : std::to_string(i);
      throw_error(ErrorKind::Input, "remove_outliers: airport '" + name + "' has no observed hours");
    }
    std::sort(xs.begin(), xs.end());
    const double h = static_cast<double>(xs.size() - 1) * upper_quantile;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, xs.size() - 1);
    const double threshold = xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
    out.thresholds.push_back(threshold);
    for (Eigen::Index t = 0; t < m.values.cols(); ++t) {
      if (!m.mask(i, t)) continue;
      ++observed;
      if (m.values(i, t) > threshold) {
        out.matrix.values(i, t) = threshold;
        ++clipped;
      }
    }
  }
  out.clipped_fraction = static_cast<double>(clipped) / static_cast<double>(observed);
  return out;
}

ZScoreParams zscore_fit(const Eigen::MatrixXd& values, const MaskMatrix& mask) {
  if (values.rows() != mask.rows() || values.cols() != mask.cols()) {
    throw_error(ErrorKind::Shape, "zscore_fit: values and mask differ in shape");
  }
  double sum = 0.0;
  std::size_t count = 0;
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      if (mask(i, j)) {
        sum += values(i, j);
        ++count;
      }
  if (count == 0) throw_error(ErrorKind::Input, "zscore_fit: no observed entries");
  const double mean = sum / static_cast<double>(count);
  double ss = 0.0;
  for (Eigen::Index j = 0; j < values.cols(); ++j)
    for (Eigen::Index i = 0; i < values.rows(); ++i)
      if (mask(i, j)) ss += (values(i, j) - mean) * (values(i, j) - mean);
  const double sd = std::sqrt(ss / static_cast<double>(count));
  if (!(sd > 0.0)) throw_error(ErrorKind::Input, "zscore_fit: zero standard deviation (constant training data)");
  return {mean, sd};
}

ZScoreParams zscore_fit(const DelayMatrix& train) { return zscore_fit(train.values, train.mask); }

Eigen::MatrixXd zscore_apply(const ZScoreParams& p, const Eigen::MatrixXd& values) {
  return ((values.array() - p.mean) / p.std).matrix();
}

Eigen::MatrixXd zscore_invert(const ZScoreParams& p, const Eigen::MatrixXd& z) {
  return (z.array() * p.std + p.mean).matrix();
}

DelayMatrix slice_hours(const DelayMatrix& m, std::size_t begin, std::size_t end) {
  if (begin > end || end > m.hours()) throw_error(ErrorKind::Input, "slice_hours: range out of bounds");
  DelayMatrix out;
  out.airports = m.airports;
  out.start_hour = m.start_hour + static_cast<std::int64_t>(begin);
  const auto b = static_cast<Eigen::Index>(begin);
  const auto len = static_cast<Eigen::Index>(end - begin);
  out.values = m.values.middleCols(b, len);
  out.mask = m.mask.middleCols(b, len);
  return out;
}

namespace {

struct Bounds {
  std::size_t train_end, validation_end;
};

Bounds split_bounds(std::size_t hours, const SplitFractions& f) {
  const double total = static_cast<double>(hours);
  const auto train_end = static_cast<std::size_t>(std::llround(total * f.train));
  const auto validation_end = static_cast<std::size_t>(std::llround(total * (f.train + f.validation)));
  return {std::min(train_end, hours), std::min(validation_end, hours)};
}

bool long_enough(std::size_t hours, const SplitFractions& f, std::size_t need) {
  const Bounds b = split_bounds(hours, f);
  return b.train_end >= need && b.validation_end - b.train_end >= need && hours - b.validation_end >= need;
}

Segment make_segment(std::size_t begin, std::size_t end, std::size_t r, std::size_t m) {
  Segment s{begin, end, {}};
  for (std::size_t t = begin + r; t + m < end; ++t) s.anchors.push_back(t);
  return s;
}

}  // namespace

WindowSplit split_windows(std::size_t hours, const SplitFractions& fractions, std::size_t input_steps,
                          std::size_t horizon) {
  const double fsum = fractions.train + fractions.validation + fractions.test;
  if (std::fabs(fsum - 1.0) > 1e-9 || fractions.train <= 0 || fractions.validation <= 0 || fractions.test <= 0) {
    throw_error(ErrorKind::Config, "split_windows: fractions must be positive and sum to 1");
  }
  if (horizon < 1) throw_error(ErrorKind::Config, "split_windows: horizon must be >= 1");
  const std::size_t need = input_steps + horizon + 1;
  if (!long_enough(hours, fractions, need)) {
    std::size_t minimum = need;
    while (!long_enough(minimum, fractions, need)) ++minimum;
    throw_error(ErrorKind::Input, "split_windows: series of " + std::to_string(hours) +
                                      " hours is too short; need at least " + std::to_string(minimum));
  }
  const Bounds b = split_bounds(hours, fractions);
  WindowSplit out;
  out.input_steps = input_steps;
  out.horizon = horizon;
  out.train = make_segment(0, b.train_end, input_steps, horizon);
  out.validation = make_segment(b.train_end, b.validation_end, input_steps, horizon);
  out.test = make_segment(b.validation_end, hours, input_steps, horizon);
  return out;
}

WindowSplit split_windows(const DelayMatrix& m, const SplitFractions& fractions, std::size_t input_steps,
                          std::size_t horizon) {
  return split_windows(m.hours(), fractions, input_steps, horizon);
}

}  // namespace causalnet
