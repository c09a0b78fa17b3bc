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

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "causalnet/error.hpp"
#include "causalnet/tensor.hpp"

namespace causalnet::ad {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat>;
using MutMap = Eigen::Map<RowMat>;
using Storage = std::shared_ptr<const std::vector<double>>;

[[noreturn]] void shape_mismatch(const char* op, const Shape& a, const Shape& b) {
  throw_error(ErrorKind::Shape,
              std::string(op) + ": shape mismatch " + shape_string(a) + " vs " + shape_string(b));
}

// Index maps for numpy-style broadcasting of two operands onto `out`.
struct Broadcast {
  Shape out;
  std::vector<std::size_t> a_stride;  // per output axis; 0 where broadcast
  std::vector<std::size_t> b_stride;
  bool same = false;

  template <class F>
  void for_each(F&& f) const {
    const std::size_t total = shape_size(out);
    if (same) {
      for (std::size_t i = 0; i < total; ++i) f(i, i, i);
      return;
    }
    const std::size_t rank = out.size();
    if (rank == 0) {
      f(0, 0, 0);
      return;
    }
    std::vector<std::size_t> idx(rank, 0);
    std::size_t ia = 0, ib = 0;
    const std::size_t inner = out[rank - 1];
    const std::size_t sa = a_stride[rank - 1], sb = b_stride[rank - 1];
    for (std::size_t o = 0; o < total; o += inner) {
      for (std::size_t j = 0; j < inner; ++j) f(o + j, ia + j * sa, ib + j * sb);
      // advance the odometer over the outer axes
      for (std::size_t ax = rank - 1; ax-- > 0;) {
        ++idx[ax];
        ia += a_stride[ax];
        ib += b_stride[ax];
        if (idx[ax] < out[ax]) break;
        ia -= a_stride[ax] * out[ax];
        ib -= b_stride[ax] * out[ax];
        idx[ax] = 0;
      }
    }
  }
};

std::vector<std::size_t> aligned_strides(const Shape& in, const Shape& out) {
  const std::size_t offset = out.size() - in.size();
  std::vector<std::size_t> stride(out.size(), 0);
  std::size_t s = 1;
  for (std::size_t ax = in.size(); ax-- > 0;) {
    stride[ax + offset] = in[ax] == 1 ? 0 : s;
    s *= in[ax];
  }
  return stride;
}

Broadcast plan_broadcast(const char* op, const Shape& a, const Shape& b) {
  Broadcast plan;
  if (a == b) {
    plan.out = a;
    plan.same = true;
    return plan;
  }
  const std::size_t rank = std::max(a.size(), b.size());
  plan.out.assign(rank, 1);
  for (std::size_t i = 0; i < rank; ++i) {
    const std::size_t da = i < rank - a.size() ? 1 : a[i - (rank - a.size())];
    const std::size_t db = i < rank - b.size() ? 1 : b[i - (rank - b.size())];
    if (da != db && da != 1 && db != 1) shape_mismatch(op, a, b);
    plan.out[i] = std::max(da, db);
  }
  plan.a_stride = aligned_strides(a, plan.out);
  plan.b_stride = aligned_strides(b, plan.out);
  return plan;
}

enum class BinaryKind { Add, Subtract, Multiply };

Tensor binary(const char* name, BinaryKind kind, const Tensor& a, const Tensor& b) {
  Broadcast plan = plan_broadcast(name, a.shape(), b.shape());
  std::vector<double> out(shape_size(plan.out));
  const auto av = a.values();
  const auto bv = b.values();
  switch (kind) {
    case BinaryKind::Add:
      plan.for_each([&](std::size_t o, std::size_t i, std::size_t j) { out[o] = av[i] + bv[j]; });
      break;
    case BinaryKind::Subtract:
      plan.for_each([&](std::size_t o, std::size_t i, std::size_t j) { out[o] = av[i] - bv[j]; });
      break;
    case BinaryKind::Multiply:
      plan.for_each([&](std::size_t o, std::size_t i, std::size_t j) { out[o] = av[i] * bv[j]; });
      break;
  }
  // Only the product rule needs operand values.
  Storage sa, sb;
  if (kind == BinaryKind::Multiply) {
    sa = a.storage();
    sb = b.storage();
  }
  Shape out_shape = plan.out;
  return Tape::record(
      std::move(out_shape), std::move(out), {&a, &b},
      [plan = std::move(plan), sa, sb, kind](std::span<const double> g,
                                             std::span<const std::span<double>> p) {
        auto ga = p[0], gb = p[1];
        switch (kind) {
          case BinaryKind::Add:
            plan.for_each([&](std::size_t o, std::size_t i, std::size_t j) {
              if (!ga.empty()) ga[i] += g[o];
              if (!gb.empty()) gb[j] += g[o];
            });
            break;
          case BinaryKind::Subtract:
            plan.for_each([&](std::size_t o, std::size_t i, std::size_t j) {
              if (!ga.empty()) ga[i] += g[o];
              if (!gb.empty()) gb[j] -= g[o];
            });
            break;
          case BinaryKind::Multiply: {
            const auto& av = *sa;
            const auto& bv = *sb;
            plan.for_each([&](std::size_t o, std::size_t i, std::size_t j) {
              if (!ga.empty()) ga[i] += g[o] * bv[j];
              if (!gb.empty()) gb[j] += g[o] * av[i];
            });
            break;
          }
        }
      });
}

// Unary map whose derivative is expressed through input x and output y.
template <class Forward, class Derivative>
Tensor unary(const Tensor& a, Forward fwd, Derivative deriv) {
  const auto av = a.values();
  auto out = std::make_shared<std::vector<double>>(av.size());
  for (std::size_t i = 0; i < av.size(); ++i) (*out)[i] = fwd(av[i]);
  Storage sy = out;
  Storage sx = a.storage();
  return Tape::record(a.shape(), sy, {&a},
                      [sx, sy, deriv](std::span<const double> g, std::span<const std::span<double>> p) {
                        auto ga = p[0];
                        if (ga.empty()) return;
                        const auto& x = *sx;
                        const auto& y = *sy;
                        for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * deriv(x[i], y[i]);
                      });
}

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) { return binary("add", BinaryKind::Add, a, b); }
Tensor subtract(const Tensor& a, const Tensor& b) {
  return binary("subtract", BinaryKind::Subtract, a, b);
}
Tensor multiply(const Tensor& a, const Tensor& b) {
  return binary("multiply", BinaryKind::Multiply, a, b);
}

Tensor scale(const Tensor& a, double factor) {
  return unary(a, [factor](double x) { return x * factor; },
               [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& a, double offset) {
  return unary(a, [offset](double x) { return x + offset; }, [](double, double) { return 1.0; });
}

constexpr std::size_t kSmallProduct = 16384;

Tensor matmul(const Tensor& a, const Tensor& b) {
  const std::size_t ra = a.rank(), rb = b.rank();
  if (ra < 2 || ra > 3 || rb < 2 || rb > 3) shape_mismatch("matmul", a.shape(), b.shape());
  const std::size_t n = a.shape()[ra - 2], k = a.shape()[ra - 1];
  const std::size_t kb = b.shape()[rb - 2], m = b.shape()[rb - 1];
  if (k != kb) shape_mismatch("matmul", a.shape(), b.shape());
  const std::size_t batch_a = ra == 3 ? a.shape()[0] : 1;
  const std::size_t batch_b = rb == 3 ? b.shape()[0] : 1;
  if (ra == 3 && rb == 3 && batch_a != batch_b) shape_mismatch("matmul", a.shape(), b.shape());
  const std::size_t batch = std::max(batch_a, batch_b);
  const bool batched = ra == 3 || rb == 3;
  // Blocked GEMM setup dominates for the small per-sample products.
  const bool small = n * k * m <= kSmallProduct;

  std::vector<double> out(batch * n * m);
  const double* ap = a.values().data();
  const double* bp = b.values().data();
  if (ra == 3 && rb == 2) {
    MutMap(out.data(), batch * n, m).noalias() = ConstMap(ap, batch * n, k) * ConstMap(bp, k, m);
  } else {
    for (std::size_t i = 0; i < batch; ++i) {
      const double* ai = ra == 3 ? ap + i * n * k : ap;
      const double* bi = rb == 3 ? bp + i * k * m : bp;
      if (small) {
        MutMap(out.data() + i * n * m, n, m).noalias() = ConstMap(ai, n, k).lazyProduct(ConstMap(bi, k, m));
      } else {
        MutMap(out.data() + i * n * m, n, m).noalias() = ConstMap(ai, n, k) * ConstMap(bi, k, m);
      }
    }
  }
  Shape shape = batched ? Shape{batch, n, m} : Shape{n, m};
  Storage sa = a.storage(), sb = b.storage();
  return Tape::record(
      std::move(shape), std::move(out), {&a, &b},
      [sa, sb, ra, rb, batch, n, k, m, small](std::span<const double> g, std::span<const std::span<double>> p) {
        auto ga = p[0], gb = p[1];
        const double* ap = sa->data();
        const double* bp = sb->data();
        if (ra == 3 && rb == 2) {
          ConstMap gm(g.data(), batch * n, m);
          if (!ga.empty()) MutMap(ga.data(), batch * n, k).noalias() += gm * ConstMap(bp, k, m).transpose();
          if (!gb.empty()) MutMap(gb.data(), k, m).noalias() += ConstMap(ap, batch * n, k).transpose() * gm;
          return;
        }
        for (std::size_t i = 0; i < batch; ++i) {
          ConstMap gm(g.data() + i * n * m, n, m);
          const double* ai = ra == 3 ? ap + i * n * k : ap;
          const double* bi = rb == 3 ? bp + i * k * m : bp;
          if (!ga.empty()) {
            MutMap gai(ra == 3 ? ga.data() + i * n * k : ga.data(), n, k);
            if (small) {
              gai.noalias() += gm.lazyProduct(ConstMap(bi, k, m).transpose());
            } else {
              gai.noalias() += gm * ConstMap(bi, k, m).transpose();
            }
          }
          if (!gb.empty()) {
            MutMap gbi(rb == 3 ? gb.data() + i * k * m : gb.data(), k, m);
            if (small) {
              gbi.noalias() += ConstMap(ai, n, k).transpose().lazyProduct(gm);
            } else {
              gbi.noalias() += ConstMap(ai, n, k).transpose() * gm;
            }
          }
        }
      });
}

Tensor transpose(const Tensor& a) {
  const std::size_t r = a.rank();
  if (r < 2) throw_error(ErrorKind::Shape, "transpose: needs rank >= 2, got " + shape_string(a.shape()));
  const std::size_t rows = a.shape()[r - 2], cols = a.shape()[r - 1];
  const std::size_t batch = a.size() / (rows * cols);
  std::vector<double> out(a.size());
  const double* ap = a.values().data();
  for (std::size_t i = 0; i < batch; ++i) {
    MutMap(out.data() + i * rows * cols, cols, rows) = ConstMap(ap + i * rows * cols, rows, cols).transpose();
  }
  Shape shape = a.shape();
  std::swap(shape[r - 2], shape[r - 1]);
  return Tape::record(std::move(shape), std::move(out), {&a},
                      [batch, rows, cols](std::span<const double> g, std::span<const std::span<double>> p) {
                        if (p[0].empty()) return;
                        for (std::size_t i = 0; i < batch; ++i) {
                          MutMap(p[0].data() + i * rows * cols, rows, cols) +=
                              ConstMap(g.data() + i * rows * cols, cols, rows).transpose();
                        }
                      });
}

Tensor concat(const Tensor& a, const Tensor& b) {
  const std::size_t r = a.rank();
  if (r == 0 || r != b.rank() || !std::equal(a.shape().begin(), a.shape().end() - 1, b.shape().begin())) {
    shape_mismatch("concat", a.shape(), b.shape());
  }
  const std::size_t ka = a.shape()[r - 1], kb = b.shape()[r - 1];
  const std::size_t rows = a.size() / std::max<std::size_t>(ka, 1);
  const std::size_t rows_b = b.size() / std::max<std::size_t>(kb, 1);
  if (ka == 0 || kb == 0 || rows != rows_b) shape_mismatch("concat", a.shape(), b.shape());
  const std::size_t kc = ka + kb;
  std::vector<double> out(rows * kc);
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t i = 0; i < rows; ++i) {
    std::copy_n(av.data() + i * ka, ka, out.data() + i * kc);
    std::copy_n(bv.data() + i * kb, kb, out.data() + i * kc + ka);
  }
  Shape shape = a.shape();
  shape[r - 1] = kc;
  return Tape::record(std::move(shape), std::move(out), {&a, &b},
                      [rows, ka, kb, kc](std::span<const double> g, std::span<const std::span<double>> p) {
                        for (std::size_t i = 0; i < rows; ++i) {
                          if (!p[0].empty())
                            for (std::size_t j = 0; j < ka; ++j) p[0][i * ka + j] += g[i * kc + j];
                          if (!p[1].empty())
                            for (std::size_t j = 0; j < kb; ++j) p[1][i * kb + j] += g[i * kc + ka + j];
                        }
                      });
}

Tensor broadcast_to(const Tensor& a, const Shape& shape) {
  Broadcast plan = plan_broadcast("broadcast_to", a.shape(), shape);
  if (plan.out != shape) shape_mismatch("broadcast_to", a.shape(), shape);
  std::vector<double> out(shape_size(shape));
  const auto av = a.values();
  plan.for_each([&](std::size_t o, std::size_t i, std::size_t) { out[o] = av[i]; });
  return Tape::record(shape, std::move(out), {&a},
                      [plan = std::move(plan)](std::span<const double> g, std::span<const std::span<double>> p) {
                        if (p[0].empty()) return;
                        plan.for_each([&](std::size_t o, std::size_t i, std::size_t) { p[0][i] += g[o]; });
                      });
}

Tensor reshape(const Tensor& a, Shape shape) {
  if (shape_size(shape) != a.size()) shape_mismatch("reshape", a.shape(), shape);
  std::vector<double> out(a.values().begin(), a.values().end());
  return Tape::record(std::move(shape), std::move(out), {&a},
                      [](std::span<const double> g, std::span<const std::span<double>> p) {
                        if (p[0].empty()) return;
                        for (std::size_t i = 0; i < g.size(); ++i) p[0][i] += g[i];
                      });
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double v : a.values()) s += v;
  return Tape::record({}, {s}, {&a}, [](std::span<const double> g, std::span<const std::span<double>> p) {
    if (p[0].empty()) return;
    for (double& v : p[0]) v += g[0];
  });
}

Tensor mean(const Tensor& a) {
  if (a.size() == 0) throw_error(ErrorKind::Shape, "mean: empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(a.size()));
}

Tensor sum_last(const Tensor& a) {
  if (a.rank() == 0) throw_error(ErrorKind::Shape, "sum_last: needs rank >= 1");
  const std::size_t k = a.shape().back();
  const std::size_t rows = k ? a.size() / k : 0;
  std::vector<double> out(rows, 0.0);
  const auto av = a.values();
  for (std::size_t i = 0; i < rows; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < k; ++j) s += av[i * k + j];
    out[i] = s;
  }
  Shape shape = a.shape();
  shape.back() = 1;
  return Tape::record(std::move(shape), std::move(out), {&a},
                      [rows, k](std::span<const double> g, std::span<const std::span<double>> p) {
                        if (p[0].empty()) return;
                        for (std::size_t i = 0; i < rows; ++i)
                          for (std::size_t j = 0; j < k; ++j) p[0][i * k + j] += g[i];
                      });
}

Tensor sigmoid(const Tensor& a) {
  return unary(a, stable_sigmoid, [](double, double y) { return y * (1.0 - y); });
}

Tensor tanh(const Tensor& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor relu(const Tensor& a) {
  return unary(a, [](double x) { return x > 0.0 ? x : 0.0; },
               [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Tensor abs(const Tensor& a) {
  return unary(a, [](double x) { return std::fabs(x); },
               [](double x, double) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); });
}

Tensor reciprocal(const Tensor& a) {
  return unary(a, [](double x) { return 1.0 / x; }, [](double, double y) { return -y * y; });
}

Tensor affine(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  return add(matmul(x, weight), bias);
}

}  // namespace causalnet::ad
