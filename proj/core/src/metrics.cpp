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


#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "causalnet/error.hpp"
#include "causalnet/trainer.hpp"
#include "text_util.hpp"

namespace causalnet {
namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw_error(ErrorKind::Io, "cannot write " + path);
  return out;
}

}  // namespace

HorizonMetrics evaluate(const Eigen::MatrixXd& predictions, const Eigen::MatrixXd& truth, const MaskMatrix& mask) {
  if (predictions.rows() != truth.rows() || predictions.cols() != truth.cols() || mask.rows() != truth.rows() ||
      mask.cols() != truth.cols()) {
    throw_error(ErrorKind::Shape, "evaluate: predictions, truth and mask must have equal shapes");
  }
  double abs_sum = 0.0;
  double sq_sum = 0.0;
  std::size_t count = 0;
  for (Eigen::Index c = 0; c < truth.cols(); ++c) {
    for (Eigen::Index r = 0; r < truth.rows(); ++r) {
      if (!mask(r, c)) continue;
      const double e = predictions(r, c) - truth(r, c);
      abs_sum += std::fabs(e);
      sq_sum += e * e;
      ++count;
    }
  }
  if (count == 0) throw_error(ErrorKind::Input, "evaluate: no observed entries");
  const double n = static_cast<double>(count);
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) {
    throw_error(ErrorKind::Input, "spearman: need two equal-length samples of size >= 2");
  }
  const std::vector<double> ra = average_ranks(a);
  const std::vector<double> rb = average_ranks(b);
  const double mean = 0.5 * static_cast<double>(a.size() + 1);
  double cov = 0.0, va = 0.0, vb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cov += (ra[i] - mean) * (rb[i] - mean);
    va += (ra[i] - mean) * (ra[i] - mean);
    vb += (rb[i] - mean) * (rb[i] - mean);
  }
  if (va == 0.0 || vb == 0.0) return 0.0;
  return cov / std::sqrt(va * vb);
}

double median(std::vector<double> values) {
  if (values.empty()) throw_error(ErrorKind::Input, "median of an empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

MetricsRow metrics_row(const RunResult& run) {
  return {variant_name(run.variant), run.seed, run.test.metrics};
}

void write_metrics_csv(const std::string& path, std::span<const MetricsRow> rows) {
  std::ofstream out = open_csv(path);
  out << "horizon,mae,rmse,variant,seed\n";
  for (const auto& row : rows) {
    for (std::size_t h = 0; h < row.metrics.size(); ++h) {
      out << h + 1 << ',' << detail::format_double(row.metrics[h].mae) << ','
          << detail::format_double(row.metrics[h].rmse) << ',' << row.variant << ',' << row.seed << '\n';
    }
  }
  if (!out) throw_error(ErrorKind::Io, "failed writing " + path);
}

void write_history_csv(const std::string& path, std::span<const EpochRecord> history) {
  std::ofstream out = open_csv(path);
  out << "epoch,train_loss,val_mae,lr\n";
  for (const auto& r : history) {
    out << r.epoch << ',' << detail::format_double(r.train_loss) << ',' << detail::format_double(r.val_mae) << ','
        << detail::format_double(r.lr) << '\n';
  }
  if (!out) throw_error(ErrorKind::Io, "failed writing " + path);
}

}  // namespace causalnet
