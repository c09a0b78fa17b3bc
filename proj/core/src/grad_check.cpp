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

#include "causalnet/grad_check.hpp"

#include <algorithm>
#include <cmath>

#include "causalnet/error.hpp"

namespace causalnet {
namespace {

double evaluate(const ScalarFunction& f, const std::vector<Tensor>& params) {
  Tape tape;
  std::vector<Tensor> bound;
  bound.reserve(params.size());
  for (const auto& p : params) bound.push_back(tape.variable(p));
  const double v = f(tape, bound).item();
  if (!std::isfinite(v)) throw_error(ErrorKind::Numeric, "grad_check: function value is not finite");
  return v;
}

}  // namespace

GradCheckReport grad_check(const ScalarFunction& f, std::span<const Tensor> params, double eps) {
  if (!(eps >= 1e-7 && eps <= 1e-4)) {
    throw_error(ErrorKind::Config, "grad_check: eps must lie in [1e-7, 1e-4]");
  }
  std::vector<Tensor> base(params.begin(), params.end());
  for (auto& p : base) p = p.detach();

  std::vector<Tensor> analytic;
  double f0 = 0.0;
  {
    Tape tape;
    std::vector<Tensor> bound;
    for (const auto& p : base) bound.push_back(tape.variable(p));
    const Tensor loss = f(tape, bound);
    f0 = loss.item();
    if (!std::isfinite(f0)) throw_error(ErrorKind::Numeric, "grad_check: function value is not finite");
    const Gradients grads = tape.backward(loss);
    for (const auto& b : bound) analytic.push_back(grads.of(b));
  }

  GradCheckReport report;
  std::vector<Tensor> probe = base;
  for (std::size_t pi = 0; pi < base.size(); ++pi) {
    const auto values = base[pi].values();
    for (std::size_t i = 0; i < values.size(); ++i) {
      std::vector<double> shifted(values.begin(), values.end());
      shifted[i] = values[i] + eps;
      probe[pi] = Tensor(base[pi].shape(), shifted);
      const double up = evaluate(f, probe);
      shifted[i] = values[i] - eps;
      probe[pi] = Tensor(base[pi].shape(), shifted);
      const double down = evaluate(f, probe);
      probe[pi] = base[pi];

      const double forward_slope = (up - f0) / eps;
      const double backward_slope = (f0 - down) / eps;
      const double kink_scale = std::max({1.0, std::fabs(forward_slope), std::fabs(backward_slope)});
      if (std::fabs(forward_slope - backward_slope) > 0.1 * kink_scale) {
        ++report.excluded;
        continue;
      }
      const double numeric = (up - down) / (2.0 * eps);
      const double exact = analytic[pi][i];
      const double denom = std::max({1.0, std::fabs(exact), std::fabs(numeric)});
      report.max_relative_error = std::max(report.max_relative_error, std::fabs(exact - numeric) / denom);
      ++report.checked;
    }
  }
  return report;
}

}  // namespace causalnet
