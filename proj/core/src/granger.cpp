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

#include "causalnet/granger.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <boost/math/special_functions/beta.hpp>
#include <cassert>
#include <cmath>
#include <thread>

#include "causalnet/error.hpp"

namespace causalnet {

const char* scale_name(Scale s) noexcept {
  switch (s) {
    case Scale::Year: return "year";
    case Scale::Month: return "month";
    case Scale::Week: return "week";
    case Scale::Day: return "day";
  }
  return "?";
}

Scale scale_from_name(std::string_view name) {
  for (Scale s : kScales)
    if (name == scale_name(s)) return s;
  throw_error(ErrorKind::Input, "unknown scale '" + std::string(name) + "'");
}

void GrangerConfig::validate() const {
  if (lag < 1) throw_error(ErrorKind::Config, "granger: lag must be >= 1");
  if (!(significance > 0.0 && significance < 1.0)) {
    throw_error(ErrorKind::Config, "granger: significance must lie in (0, 1)");
  }
  for (std::size_t s = 0; s < kScaleCount; ++s) {
    if (difference_interval[s] < 1) throw_error(ErrorKind::Config, "granger: difference intervals must be >= 1");
    if (window_hours[s] != 0 && window_hours[s] < difference_interval[s] + min_observations()) {
      throw_error(ErrorKind::Config, std::string("granger: ") + scale_name(kScales[s]) +
                                         " window is shorter than interval + " +
                                         std::to_string(min_observations()) + " observations");
    }
  }
  if (cadence_hours < 1) throw_error(ErrorKind::Config, "granger: cadence must be >= 1 hour");
}

std::vector<double> difference(std::span<const double> series, std::size_t interval) {
  if (interval < 1) throw_error(ErrorKind::Input, "difference: interval must be >= 1");
  if (series.size() < interval + 1) {
    throw_error(ErrorKind::Input, "difference: series of length " + std::to_string(series.size()) +
                                      " is shorter than interval + 1");
  }
  std::vector<double> out(series.size() - interval);
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = series[k + interval] - series[k];
  return out;
}

OlsResult ols_rss(const Eigen::VectorXd& y, const Eigen::MatrixXd& x) {
  if (x.rows() != y.size()) throw_error(ErrorKind::Shape, "ols_rss: design rows differ from response length");
  if (x.rows() <= x.cols()) throw_error(ErrorKind::Input, "ols_rss: need more rows than columns");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.rows(), x.cols());
  qr.setThreshold(1e-10);
  qr.compute(x);
  OlsResult out;
  out.rank_deficient = qr.rank() < x.cols();
  out.coefficients = qr.solve(y);
  out.rss = (y - x * out.coefficients).squaredNorm();
  return out;
}

double f_pvalue(double f, double d1, double d2) {
  if (!(f > 0.0)) return 1.0;  // also catches NaN
  if (std::isinf(f)) return 0.0;
  // P(F > f) = I_{d2 / (d2 + d1 f)}(d2/2, d1/2)
  const double x = d2 / (d2 + d1 * f);
  const double p = boost::math::ibeta(d2 / 2.0, d1 / 2.0, x);
  return std::clamp(p, 0.0, 1.0);
}

namespace {

Eigen::MatrixXd lag_design(std::span<const double> effect, std::span<const double> cause, std::size_t lag) {
  const std::size_t n = effect.size() - lag;
  const std::size_t cols = 1 + lag + (cause.empty() ? 0 : lag);
  Eigen::MatrixXd x(n, cols);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t t = r + lag;
    x(r, 0) = 1.0;
    for (std::size_t i = 1; i <= lag; ++i) x(r, i) = effect[t - i];
    if (!cause.empty())
      for (std::size_t j = 1; j <= lag; ++j) x(r, lag + j) = cause[t - j];
  }
  return x;
}

GrangerResult granger_with_restricted(std::span<const double> effect, std::span<const double> cause, std::size_t lag,
                                      const OlsResult& restricted) {
  const std::size_t n = effect.size() - lag;
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(effect.data() + lag, static_cast<Eigen::Index>(n));
  const OlsResult unrestricted = ols_rss(y, lag_design(effect, cause, lag));

  GrangerResult out;
  out.observations = n;
  out.rss_restricted = restricted.rss;
  out.rss_unrestricted = unrestricted.rss;
  const double tss = (y.array() - y.mean()).square().sum();
  if (restricted.rank_deficient || unrestricted.rank_deficient || !(unrestricted.rss > 1e-12 * tss)) {
    out.degenerate = true;
    return out;
  }
  // Nested models: the unrestricted fit can only lower the RSS (up to roundoff).
  assert(restricted.rss >= unrestricted.rss * (1.0 - 1e-9));
  const double df2 = static_cast<double>(n - 2 * lag - 1);
  const double numerator = std::max(0.0, restricted.rss - unrestricted.rss) / static_cast<double>(lag);
  out.f = numerator / (unrestricted.rss / df2);
  out.p = f_pvalue(out.f, static_cast<double>(lag), df2);
  return out;
}

OlsResult restricted_fit(std::span<const double> effect, std::size_t lag) {
  const std::size_t n = effect.size() - lag;
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(effect.data() + lag, static_cast<Eigen::Index>(n));
  return ols_rss(y, lag_design(effect, {}, lag));
}

void check_test_inputs(std::span<const double> effect, std::span<const double> cause, std::size_t lag) {
  if (lag < 1) throw_error(ErrorKind::Input, "granger_test: lag must be >= 1");
  if (effect.size() != cause.size()) throw_error(ErrorKind::Input, "granger_test: series lengths differ");
  if (effect.size() < 2 * lag + 10) {
    throw_error(ErrorKind::Input, "granger_test: need at least " + std::to_string(2 * lag + 10) + " observations");
  }
}

// Runs fn(i) for i in [0, count) across up to `threads` workers.
template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += threads) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

GrangerResult granger_test(std::span<const double> effect, std::span<const double> cause, std::size_t lag) {
  check_test_inputs(effect, cause, lag);
  return granger_with_restricted(effect, cause, lag, restricted_fit(effect, lag));
}

std::vector<GrangerResult> evaluate_pairs(std::span<const std::vector<double>> series, std::span<const PairTest> pairs,
                                          std::size_t lag, std::size_t threads) {
  for (const auto& pr : pairs) {
    if (pr.effect >= series.size() || pr.cause >= series.size()) {
      throw_error(ErrorKind::Input, "evaluate_pairs: pair index out of range");
    }
    check_test_inputs(series[pr.effect], series[pr.cause], lag);
  }
  std::vector<GrangerResult> out(pairs.size());
  parallel_for(pairs.size(), threads, [&](std::size_t i) {
    out[i] = granger_test(series[pairs[i].effect], series[pairs[i].cause], lag);
  });
  return out;
}

CausalGraphSet build_graph_set(const Eigen::MatrixXd& delays, std::size_t t, const GrangerConfig& cfg) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(delays.rows());
  if (n < 2) throw_error(ErrorKind::Input, "build_graph_set: need at least 2 airports");
  if (t >= static_cast<std::size_t>(delays.cols())) {
    throw_error(ErrorKind::Input, "build_graph_set: anchor hour " + std::to_string(t) + " is beyond the data");
  }

  CausalGraphSet set;
  set.anchor = t;
  for (std::size_t s = 0; s < kScaleCount; ++s) {
    Eigen::MatrixXd& graph = set.graphs[s];
    Eigen::MatrixXd& pv = set.p_values[s];
    graph = Eigen::MatrixXd::Zero(n, n);
    pv = Eigen::MatrixXd::Ones(n, n);

    const std::size_t available = t + 1;
    const std::size_t window = cfg.window_hours[s] == 0 ? available : std::min(cfg.window_hours[s], available);
    const std::size_t interval = cfg.difference_interval[s];
    if (window < interval + cfg.min_observations()) continue;

    const std::size_t first = available - window;
    std::vector<std::vector<double>> series(n);
    std::vector<double> raw(window);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < window; ++k) raw[k] = delays(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(first + k));
      series[i] = difference(raw, interval);
    }

    std::vector<OlsResult> restricted(n);
    parallel_for(n, cfg.threads, [&](std::size_t a) { restricted[a] = restricted_fit(series[a], cfg.lag); });

    std::vector<PairTest> pairs;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = 0; b < n; ++b)
        if (a != b) pairs.push_back({a, b});
    std::vector<GrangerResult> results(pairs.size());
    parallel_for(pairs.size(), cfg.threads, [&](std::size_t i) {
      const auto& pr = pairs[i];
      results[i] = granger_with_restricted(series[pr.effect], series[pr.cause], cfg.lag, restricted[pr.effect]);
    });
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto a = static_cast<Eigen::Index>(pairs[i].effect);
      const auto b = static_cast<Eigen::Index>(pairs[i].cause);
      pv(a, b) = results[i].p;
      graph(a, b) = !results[i].degenerate && results[i].p < cfg.significance ? 1.0 : 0.0;
    }
  }
  return set;
}

CausalGraphSet build_graph_set(const DelayMatrix& delays, std::size_t t, const GrangerConfig& cfg) {
  return build_graph_set(delays.values, t, cfg);
}

GraphSchedule GraphSchedule::build(const Eigen::MatrixXd& delays, const GrangerConfig& cfg) {
  cfg.validate();
  GraphSchedule out;
  out.cadence_ = cfg.cadence_hours;
  const auto hours = static_cast<std::size_t>(delays.cols());
  for (std::size_t anchor = cfg.cadence_hours - 1; anchor < hours; anchor += cfg.cadence_hours) {
    out.sets_.push_back(build_graph_set(delays, anchor, cfg));
  }
  return out;
}

GraphSchedule GraphSchedule::from_sets(std::vector<CausalGraphSet> sets, std::size_t cadence) {
  if (cadence == 0) throw_error(ErrorKind::Config, "graph cadence must be at least 1");
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].anchor != (i + 1) * cadence - 1) {
      throw_error(ErrorKind::Input, "graph set " + std::to_string(i) + " has anchor " +
                                        std::to_string(sets[i].anchor) + ", expected " +
                                        std::to_string((i + 1) * cadence - 1));
    }
  }
  GraphSchedule out;
  out.cadence_ = cadence;
  out.sets_ = std::move(sets);
  return out;
}

const CausalGraphSet* GraphSchedule::latest_at_or_before(std::size_t hour) const noexcept {
  if (sets_.empty() || hour + 1 < cadence_) return nullptr;
  const std::size_t idx = std::min((hour + 1) / cadence_ - 1, sets_.size() - 1);
  return &sets_[idx];
}

}  // namespace causalnet
