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

#ifndef CAUSALNET_GRAD_CHECK_HPP
#define CAUSALNET_GRAD_CHECK_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "causalnet/tensor.hpp"

namespace causalnet {

// Builds a scalar from parameters placed on `tape`.
using ScalarFunction = std::function<Tensor(Tape& tape, std::span<const Tensor> params)>;

struct GradCheckReport {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  // Entries sitting on a kink (one-sided slopes disagree), e.g. relu at 0.
  std::size_t excluded = 0;
};

// Compares reverse-mode gradients against central differences entry by entry:
// |analytic - numeric| / max(1, |analytic|, |numeric|). eps in [1e-7, 1e-4].
GradCheckReport grad_check(const ScalarFunction& f, std::span<const Tensor> params, double eps);

}  // namespace causalnet

#endif  // CAUSALNET_GRAD_CHECK_HPP
