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


#ifndef CAUSALNET_TESTS_REGRESSION_ORACLE_HPP
#define CAUSALNET_TESTS_REGRESSION_ORACLE_HPP

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

namespace causalnet::testing {

// Solves (X'X) b = X'y by Gauss-Jordan elimination in long double and returns
// the residual sum of squares.
inline double normal_equations_rss(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  const std::size_t k = x[0].size();
  std::vector<std::vector<long double>> a(k, std::vector<long double>(k + 1, 0.0L));
  for (std::size_t r = 0; r < x.size(); ++r) {
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j = 0; j < k; ++j) a[i][j] += static_cast<long double>(x[r][i]) * x[r][j];
      a[i][k] += static_cast<long double>(x[r][i]) * y[r];
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < k; ++r)
      if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == c) continue;
      const long double f = a[r][c] / a[c][c];
      for (std::size_t j = c; j <= k; ++j) a[r][j] -= f * a[c][j];
    }
  }
  long double rss = 0.0L;
  for (std::size_t r = 0; r < x.size(); ++r) {
    long double fit = 0.0L;
    for (std::size_t i = 0; i < k; ++i) fit += x[r][i] * (a[i][k] / a[i][i]);
    rss += (y[r] - fit) * (y[r] - fit);
  }
  return static_cast<double>(rss);
}

// F statistic of the lag-l Granger regression built from scratch.
inline double oracle_f(const std::vector<double>& effect, const std::vector<double>& cause, std::size_t lag) {
  std::vector<std::vector<double>> xr, xu;
  std::vector<double> y;
  for (std::size_t t = lag; t < effect.size(); ++t) {
    std::vector<double> row{1.0};
    for (std::size_t i = 1; i <= lag; ++i) row.push_back(effect[t - i]);
    xr.push_back(row);
    for (std::size_t i = 1; i <= lag; ++i) row.push_back(cause[t - i]);
    xu.push_back(row);
    y.push_back(effect[t]);
  }
  const double rss_r = normal_equations_rss(xr, y);
  const double rss_u = normal_equations_rss(xu, y);
  const double df2 = static_cast<double>(y.size() - 2 * lag - 1);
  return ((rss_r - rss_u) / lag) / (rss_u / df2);
}

}  // namespace causalnet::testing

#endif  // CAUSALNET_TESTS_REGRESSION_ORACLE_HPP
