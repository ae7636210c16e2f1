// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include "geolid/autodiff/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "geolid/autodiff/branch.hpp"
#include "geolid/kernels/kernels.hpp"

namespace geolid::ad {

namespace {

template <class T>
Tape<T>* common_tape(std::initializer_list<const Tensor<T>*> inputs, std::string_view op) {
  Tape<T>* tape = nullptr;
  for (const Tensor<T>* t : inputs) {
    if (!t->on_tape()) continue;
    if (tape != nullptr && tape != t->tape()) {
      throw std::logic_error(std::string(op) + ": inputs recorded on different tapes");
    }
    tape = t->tape();
  }
  return tape;
}

template <class T>
Tensor<T> finish(const Tensor<T>& out, std::initializer_list<const Tensor<T>*> inputs,
                 std::string_view op, typename Tape<T>::BackwardFn fn) {
  Tape<T>* tape = common_tape<T>(inputs, op);
  if (tape == nullptr) return out;
  return tape->record(out, std::vector<const Tensor<T>*>(inputs), std::move(fn));
}

[[noreturn]] void shape_fail(std::string_view op, const Shape& a, const Shape& b) {
  throw ShapeError(std::string(op) + ": incompatible shapes " + shape_str(a) + " and " +
                   shape_str(b));
}

[[noreturn]] void shape_fail(std::string_view op, const Shape& a, const std::string& why) {
  throw ShapeError(std::string(op) + ": shape " + shape_str(a) + " " + why);
}

std::size_t norm_axis(int axis, std::size_t rank, std::string_view op, const Shape& s) {
  const int r = static_cast<int>(rank);
  const int a = axis < 0 ? axis + r : axis;
  if (a < 0 || a >= r) shape_fail(op, s, "has no axis " + std::to_string(axis));
  return static_cast<std::size_t>(a);
}

// outer x n x inner decomposition around one axis.
struct AxisSplit {
  std::size_t outer = 1, n = 1, inner = 1;
};

AxisSplit split_at(const Shape& s, std::size_t axis) {
  AxisSplit r;
  for (std::size_t i = 0; i < axis; ++i) r.outer *= s[i];
  r.n = s[axis];
  for (std::size_t i = axis + 1; i < s.size(); ++i) r.inner *= s[i];
  return r;
}

Shape drop_axis(const Shape& s, std::size_t axis) {
  Shape out;
  for (std::size_t i = 0; i < s.size(); ++i)
    if (i != axis) out.push_back(s[i]);
  return out;
}

template <class T>
void require_same(std::string_view op, const Tensor<T>& a, const Tensor<T>& b) {
  if (a.shape() != b.shape()) shape_fail(op, a.shape(), b.shape());
}

// Unary elementwise op; `deriv(x, y)` is dy/dx.
template <class T, class F, class D>
Tensor<T> unary(const Tensor<T>& x, std::string_view op, F f, D deriv) {
  Tensor<T> out(x.shape());
  auto y = out.mutable_data();
  auto xs = x.data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = f(xs[i]);
  Tensor<T> xc = x.detach();
  Tensor<T> yc = out;
  return finish<T>(out, {&x}, op, [xc, yc, deriv](std::span<const T> g, GradSink<T>& sink) {
    auto gx = sink[0];
    auto xv = xc.data();
    auto yv = yc.data();
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * deriv(xv[i], yv[i]);
  });
}

template <class T>
bool is_time_broadcast(const Tensor<T>& x, const Tensor<T>& v) {
  if (x.rank() < 2) return false;
  if (v.rank() == 1 && v.dim(0) == x.dim(-1)) return true;
  return v.shape() == drop_axis(x.shape(), x.rank() - 2);
}

}  // namespace

// ---------------------------------------------------------------------------
// elementwise

template <class T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  require_same("add", a, b);
  Tensor<T> out(a.shape());
  auto y = out.mutable_data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] + b[i];
  return finish<T>(out, {&a, &b}, "add", [](std::span<const T> g, GradSink<T>& sink) {
    for (std::size_t slot = 0; slot < 2; ++slot) {
      auto gs = sink[slot];
      for (std::size_t i = 0; i < gs.size(); ++i) gs[i] += g[i];
    }
  });
}

template <class T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
  require_same("sub", a, b);
  Tensor<T> out(a.shape());
  auto y = out.mutable_data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] - b[i];
  return finish<T>(out, {&a, &b}, "sub", [](std::span<const T> g, GradSink<T>& sink) {
    auto ga = sink[0];
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
    auto gb = sink[1];
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= g[i];
  });
}

template <class T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  require_same("mul", a, b);
  Tensor<T> out(a.shape());
  auto y = out.mutable_data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] * b[i];
  Tensor<T> ac = a.detach(), bc = b.detach();
  return finish<T>(out, {&a, &b}, "mul", [ac, bc](std::span<const T> g, GradSink<T>& sink) {
    auto ga = sink[0];
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * bc[i];
    auto gb = sink[1];
    for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g[i] * ac[i];
  });
}

template <class T>
Tensor<T> scale(const Tensor<T>& a, T factor) {
  Tensor<T> out(a.shape());
  auto y = out.mutable_data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] * factor;
  return finish<T>(out, {&a}, "scale", [factor](std::span<const T> g, GradSink<T>& sink) {
    auto ga = sink[0];
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i] * factor;
  });
}

template <class T>
Tensor<T> add_scalar(const Tensor<T>& a, T offset) {
  Tensor<T> out(a.shape());
  auto y = out.mutable_data();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = a[i] + offset;
  return finish<T>(out, {&a}, "add_scalar", [](std::span<const T> g, GradSink<T>& sink) {
    auto ga = sink[0];
    for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g[i];
  });
}

template <class T>
Tensor<T> relu(const Tensor<T>& x) {
  if (auto* r = active_branch_recorder()) {
    for (T v : x.data()) r->record(v > T(0));
  }
  return unary<T>(
      x, "relu", [](T v) { return v > T(0) ? v : T(0); },
      [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <class T>
Tensor<T> gelu(const Tensor<T>& x) {
  constexpr T inv_sqrt2 = T(0.70710678118654752440);
  constexpr T inv_sqrt2pi = T(0.39894228040143267794);
  return unary<T>(
      x, "gelu", [](T v) { return T(0.5) * v * (T(1) + std::erf(v * inv_sqrt2)); },
      [](T v, T) {
        return T(0.5) * (T(1) + std::erf(v * inv_sqrt2)) + v * inv_sqrt2pi * std::exp(-T(0.5) * v * v);
      });
}

template <class T>
Tensor<T> tanh(const Tensor<T>& x) {
  return unary<T>(
      x, "tanh", [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <class T>
Tensor<T> sigmoid(const Tensor<T>& x) {
  return unary<T>(
      x, "sigmoid",
      [](T v) {
        if (v >= 0) return T(1) / (T(1) + std::exp(-v));
        const T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <class T>
Tensor<T> log(const Tensor<T>& x) {
  return unary<T>(
      x, "log", [](T v) { return std::log(v); }, [](T v, T) { return T(1) / v; });
}

template <class T>
Tensor<T> exp(const Tensor<T>& x) {
  return unary<T>(
      x, "exp", [](T v) { return std::exp(v); }, [](T, T y) { return y; });
}

template <class T>
Tensor<T> sqrt(const Tensor<T>& x) {
  return unary<T>(
      x, "sqrt", [](T v) { return std::sqrt(v); }, [](T, T y) { return T(0.5) / y; });
}

// ---------------------------------------------------------------------------
// linear algebra

template <class T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  kernels::GemmShape s;
  Shape out_shape;
  bool shared_rhs = false;
  if (a.rank() == 2 && b.rank() == 2) {
    if (a.dim(1) != b.dim(0)) shape_fail("matmul", a.shape(), b.shape());
    s.m = a.dim(0);
    s.k = a.dim(1);
    s.n = b.dim(1);
    out_shape = {s.m, s.n};
  } else if (a.rank() == 3 && b.rank() == 3) {
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(1)) shape_fail("matmul", a.shape(), b.shape());
    s.batch = a.dim(0);
    s.m = a.dim(1);
    s.k = a.dim(2);
    s.n = b.dim(2);
    out_shape = {s.batch, s.m, s.n};
  } else if (a.rank() == 3 && b.rank() == 2) {
    if (a.dim(2) != b.dim(0)) shape_fail("matmul", a.shape(), b.shape());
    s.m = a.dim(0) * a.dim(1);
    s.k = a.dim(2);
    s.n = b.dim(1);
    out_shape = {a.dim(0), a.dim(1), s.n};
    shared_rhs = true;
  } else {
    shape_fail("matmul", a.shape(), b.shape());
  }
  s.stride_a = s.m * s.k;
  s.stride_b = s.k * s.n;
  s.stride_c = s.m * s.n;
  Tensor<T> out(out_shape);
  kernels::gemm<T>(s, a.data(), b.data(), out.mutable_data(), false);
  (void)shared_rhs;
  Tensor<T> ac = a.detach(), bc = b.detach();
  return finish<T>(out, {&a, &b}, "matmul", [s, ac, bc](std::span<const T> g, GradSink<T>& sink) {
    if (sink.wants(0)) {
      // dA = dC * B^T
      kernels::GemmShape ga{s.batch, s.m, s.k, s.n, false, true, s.stride_c, s.stride_b,
                            s.stride_a};
      kernels::gemm<T>(ga, g, bc.data(), sink[0], true);
    }
    if (sink.wants(1)) {
      // dB = A^T * dC
      kernels::GemmShape gb{s.batch, s.k, s.n, s.m, true, false, s.stride_a, s.stride_c,
                            s.stride_b};
      kernels::gemm<T>(gb, ac.data(), g, sink[1], true);
    }
  });
}

template <class T>
Tensor<T> conv1d(const Tensor<T>& x, const Tensor<T>& w, Conv1dAttrs attrs) {
  if ((x.rank() != 2 && x.rank() != 3) || w.rank() != 3 || x.dim(-1) != w.dim(1)) {
    shape_fail("conv1d", x.shape(), w.shape());
  }
  if (attrs.stride == 0 || attrs.dilation == 0) {
    shape_fail("conv1d", x.shape(), "with zero stride or dilation");
  }
  kernels::ConvShape s;
  s.batch = x.rank() == 3 ? x.dim(0) : 1;
  s.in_len = x.dim(-2);
  s.in_ch = x.dim(-1);
  s.kernel = w.dim(0);
  s.out_ch = w.dim(2);
  s.stride = attrs.stride;
  s.dilation = attrs.dilation;
  s.padding = attrs.padding;
  s.out_len = kernels::conv_out_len(s.in_len, s.kernel, s.stride, s.dilation, s.padding);
  if (s.out_len == 0) {
    shape_fail("conv1d", x.shape(),
               "is shorter than the receptive field of kernel " + shape_str(w.shape()));
  }
  Shape out_shape = x.rank() == 3 ? Shape{s.batch, s.out_len, s.out_ch} : Shape{s.out_len, s.out_ch};
  Tensor<T> out(out_shape);
  kernels::conv1d_forward<T>(s, x.data(), w.data(), out.mutable_data());
  Tensor<T> xc = x.detach(), wc = w.detach();
  return finish<T>(out, {&x, &w}, "conv1d", [s, xc, wc](std::span<const T> g, GradSink<T>& sink) {
    if (sink.wants(0)) kernels::conv1d_backward_input<T>(s, g, wc.data(), sink[0]);
    if (sink.wants(1)) kernels::conv1d_backward_weight<T>(s, xc.data(), g, sink[1]);
  });
}

// ---------------------------------------------------------------------------
// softmax and reductions

template <class T>
Tensor<T> softmax(const Tensor<T>& x, int axis) {
  const std::size_t ax = norm_axis(axis, x.rank(), "softmax", x.shape());
  const AxisSplit sp = split_at(x.shape(), ax);
  Tensor<T> out(x.shape());
  auto y = out.mutable_data();
  auto xs = x.data();
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t in = 0; in < sp.inner; ++in) {
      const std::size_t base = o * sp.n * sp.inner + in;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t i = 0; i < sp.n; ++i) mx = std::max(mx, xs[base + i * sp.inner]);
      T total = 0;
      for (std::size_t i = 0; i < sp.n; ++i) {
        const T e = std::exp(xs[base + i * sp.inner] - mx);
        y[base + i * sp.inner] = e;
        total += e;
      }
      for (std::size_t i = 0; i < sp.n; ++i) y[base + i * sp.inner] /= total;
    }
  Tensor<T> yc = out;
  return finish<T>(out, {&x}, "softmax", [sp, yc](std::span<const T> g, GradSink<T>& sink) {
    auto gx = sink[0];
    auto yv = yc.data();
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t in = 0; in < sp.inner; ++in) {
        const std::size_t base = o * sp.n * sp.inner + in;
        T dot = 0;
        for (std::size_t i = 0; i < sp.n; ++i) dot += g[base + i * sp.inner] * yv[base + i * sp.inner];
        for (std::size_t i = 0; i < sp.n; ++i) {
          const std::size_t j = base + i * sp.inner;
          gx[j] += yv[j] * (g[j] - dot);
        }
      }
  });
}

namespace {

// sum or mean over one axis; `factor` is 1 for sum and 1/n for mean.
template <class T>
Tensor<T> reduce_axis(const Tensor<T>& x, int axis, bool average, std::string_view op) {
  const std::size_t ax = norm_axis(axis, x.rank(), op, x.shape());
  const AxisSplit sp = split_at(x.shape(), ax);
  const T factor = average ? T(1) / static_cast<T>(sp.n) : T(1);
  Tensor<T> out(drop_axis(x.shape(), ax));
  auto y = out.mutable_data();
  auto xs = x.data();
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t in = 0; in < sp.inner; ++in) {
      T acc = 0;
      for (std::size_t i = 0; i < sp.n; ++i) acc += xs[(o * sp.n + i) * sp.inner + in];
      y[o * sp.inner + in] = acc * factor;
    }
  return finish<T>(out, {&x}, op, [sp, factor](std::span<const T> g, GradSink<T>& sink) {
    auto gx = sink[0];
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t in = 0; in < sp.inner; ++in) {
        const T gv = g[o * sp.inner + in] * factor;
        for (std::size_t i = 0; i < sp.n; ++i) gx[(o * sp.n + i) * sp.inner + in] += gv;
      }
  });
}

}  // namespace

template <class T>
Tensor<T> sum(const Tensor<T>& x, int axis) {
  return reduce_axis<T>(x, axis, false, "sum");
}

template <class T>
Tensor<T> mean(const Tensor<T>& x, int axis) {
  return reduce_axis<T>(x, axis, true, "mean");
}

template <class T>
Tensor<T> variance(const Tensor<T>& x, int axis) {
  const std::size_t ax = norm_axis(axis, x.rank(), "variance", x.shape());
  const AxisSplit sp = split_at(x.shape(), ax);
  const T inv_n = T(1) / static_cast<T>(sp.n);
  Tensor<T> out(drop_axis(x.shape(), ax));
  Tensor<T> mu(drop_axis(x.shape(), ax));
  auto y = out.mutable_data();
  auto m = mu.mutable_data();
  auto xs = x.data();
  for (std::size_t o = 0; o < sp.outer; ++o)
    for (std::size_t in = 0; in < sp.inner; ++in) {
      T acc = 0;
      for (std::size_t i = 0; i < sp.n; ++i) acc += xs[(o * sp.n + i) * sp.inner + in];
      const T mean_v = acc * inv_n;
      T sq = 0;
      for (std::size_t i = 0; i < sp.n; ++i) {
        const T d = xs[(o * sp.n + i) * sp.inner + in] - mean_v;
        sq += d * d;
      }
      m[o * sp.inner + in] = mean_v;
      y[o * sp.inner + in] = sq * inv_n;
    }
  Tensor<T> xc = x.detach();
  return finish<T>(out, {&x}, "variance", [sp, inv_n, xc, mu](std::span<const T> g, GradSink<T>& sink) {
    auto gx = sink[0];
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t in = 0; in < sp.inner; ++in) {
        const T gv = g[o * sp.inner + in] * T(2) * inv_n;
        const T mean_v = mu[o * sp.inner + in];
        for (std::size_t i = 0; i < sp.n; ++i) {
          const std::size_t j = (o * sp.n + i) * sp.inner + in;
          gx[j] += gv * (xc[j] - mean_v);
        }
      }
  });
}

template <class T>
Tensor<T> sum_all(const Tensor<T>& x) {
  T acc = 0;
  for (T v : x.data()) acc += v;
  return finish<T>(Tensor<T>::scalar(acc), {&x}, "sum_all",
                   [](std::span<const T> g, GradSink<T>& sink) {
                     auto gx = sink[0];
                     for (auto& v : gx) v += g[0];
                   });
}

template <class T>
Tensor<T> mean_all(const Tensor<T>& x) {
  T acc = 0;
  for (T v : x.data()) acc += v;
  const T inv_n = T(1) / static_cast<T>(x.size());
  return finish<T>(Tensor<T>::scalar(acc * inv_n), {&x}, "mean_all",
                   [inv_n](std::span<const T> g, GradSink<T>& sink) {
                     auto gx = sink[0];
                     for (auto& v : gx) v += g[0] * inv_n;
                   });
}

// ---------------------------------------------------------------------------
// layout

template <class T>
Tensor<T> concat(std::span<const Tensor<T>> parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const Tensor<T>& first = parts[0];
  const std::size_t ax = norm_axis(axis, first.rank(), "concat", first.shape());
  Shape out_shape = first.shape();
  out_shape[ax] = 0;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    if (p.rank() != first.rank()) shape_fail("concat", first.shape(), p.shape());
    for (std::size_t i = 0; i < p.rank(); ++i)
      if (i != ax && p.shape()[i] != first.shape()[i]) shape_fail("concat", first.shape(), p.shape());
    out_shape[ax] += p.shape()[ax];
    widths.push_back(p.shape()[ax]);
  }
  const AxisSplit sp = split_at(out_shape, ax);
  Tensor<T> out(out_shape);
  auto y = out.mutable_data();
  std::size_t offset = 0;
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    auto src = parts[pi].data();
    const std::size_t w = widths[pi] * sp.inner;
    for (std::size_t o = 0; o < sp.outer; ++o)
      std::copy_n(src.begin() + static_cast<long>(o * w), w,
                  y.begin() + static_cast<long>(o * sp.n * sp.inner + offset));
    offset += w;
  }
  Tape<T>* tape = nullptr;
  std::vector<const Tensor<T>*> inputs;
  for (const auto& p : parts) {
    inputs.push_back(&p);
    if (p.on_tape()) {
      if (tape != nullptr && tape != p.tape()) throw std::logic_error("concat: mixed tapes");
      tape = p.tape();
    }
  }
  if (tape == nullptr) return out;
  return tape->record(out, inputs, [sp, widths](std::span<const T> g, GradSink<T>& sink) {
    std::size_t off = 0;
    for (std::size_t pi = 0; pi < widths.size(); ++pi) {
      const std::size_t w = widths[pi] * sp.inner;
      if (sink.wants(pi)) {
        auto gp = sink[pi];
        for (std::size_t o = 0; o < sp.outer; ++o)
          for (std::size_t i = 0; i < w; ++i) gp[o * w + i] += g[o * sp.n * sp.inner + off + i];
      }
      off += w;
    }
  });
}

template <class T>
Tensor<T> slice(const Tensor<T>& x, int axis, std::size_t begin, std::size_t end) {
  const std::size_t ax = norm_axis(axis, x.rank(), "slice", x.shape());
  if (begin >= end || end > x.shape()[ax]) {
    shape_fail("slice", x.shape(),
               "cannot take [" + std::to_string(begin) + ", " + std::to_string(end) + ")");
  }
  const AxisSplit sp = split_at(x.shape(), ax);
  Shape out_shape = x.shape();
  out_shape[ax] = end - begin;
  Tensor<T> out(out_shape);
  auto y = out.mutable_data();
  auto xs = x.data();
  const std::size_t w = (end - begin) * sp.inner;
  for (std::size_t o = 0; o < sp.outer; ++o)
    std::copy_n(xs.begin() + static_cast<long>((o * sp.n + begin) * sp.inner), w,
                y.begin() + static_cast<long>(o * w));
  return finish<T>(out, {&x}, "slice", [sp, begin, w](std::span<const T> g, GradSink<T>& sink) {
    auto gx = sink[0];
    for (std::size_t o = 0; o < sp.outer; ++o)
      for (std::size_t i = 0; i < w; ++i) gx[(o * sp.n + begin) * sp.inner + i] += g[o * w + i];
  });
}

template <class T>
Tensor<T> transpose(const Tensor<T>& x) {
  if (x.rank() < 2) shape_fail("transpose", x.shape(), "has fewer than two axes");
  const std::size_t rows = x.dim(-2), cols = x.dim(-1);
  const std::size_t batch = x.size() / (rows * cols);
  Shape out_shape = x.shape();
  std::swap(out_shape[x.rank() - 2], out_shape[x.rank() - 1]);
  Tensor<T> out(out_shape);
  auto y = out.mutable_data();
  auto xs = x.data();
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        y[b * rows * cols + j * rows + i] = xs[b * rows * cols + i * cols + j];
  return finish<T>(out, {&x}, "transpose", [batch, rows, cols](std::span<const T> g, GradSink<T>& sink) {
    auto gx = sink[0];
    for (std::size_t b = 0; b < batch; ++b)
      for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < cols; ++j)
          gx[b * rows * cols + i * cols + j] += g[b * rows * cols + j * rows + i];
  });
}

template <class T>
Tensor<T> reshape(const Tensor<T>& x, Shape shape) {
  Tensor<T> out = x.reshaped(std::move(shape));
  return finish<T>(out, {&x}, "reshape", [](std::span<const T> g, GradSink<T>& sink) {
    auto gx = sink[0];
    for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
  });
}

// ---------------------------------------------------------------------------
// normalization

template <class T>
Tensor<T> layernorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta, T eps) {
  if (x.rank() < 1) shape_fail("layernorm", x.shape(), "is a scalar");
  const std::size_t d = x.dim(-1);
  if (gamma.shape() != Shape{d} || beta.shape() != Shape{d}) {
    shape_fail("layernorm", x.shape(), gamma.shape());
  }
  const std::size_t rows = x.size() / d;
  Tensor<T> out(x.shape());
  Tensor<T> xhat(x.shape());
  std::vector<T> inv(rows);
  {
    auto y = out.mutable_data();
    auto xh = xhat.mutable_data();
    auto xs = x.data();
    for (std::size_t r = 0; r < rows; ++r) {
      T mu = 0;
      for (std::size_t i = 0; i < d; ++i) mu += xs[r * d + i];
      mu /= static_cast<T>(d);
      T var = 0;
      for (std::size_t i = 0; i < d; ++i) {
        const T c = xs[r * d + i] - mu;
        var += c * c;
      }
      var /= static_cast<T>(d);
      inv[r] = T(1) / std::sqrt(var + eps);
      for (std::size_t i = 0; i < d; ++i) {
        xh[r * d + i] = (xs[r * d + i] - mu) * inv[r];
        y[r * d + i] = xh[r * d + i] * gamma[i] + beta[i];
      }
    }
  }
  Tensor<T> gc = gamma.detach();
  return finish<T>(out, {&x, &gamma, &beta}, "layernorm",
                   [d, rows, xhat, inv, gc](std::span<const T> g, GradSink<T>& sink) {
                     if (sink.wants(1)) {
                       auto gg = sink[1];
                       for (std::size_t r = 0; r < rows; ++r)
                         for (std::size_t i = 0; i < d; ++i) gg[i] += g[r * d + i] * xhat[r * d + i];
                     }
                     if (sink.wants(2)) {
                       auto gb = sink[2];
                       for (std::size_t r = 0; r < rows; ++r)
                         for (std::size_t i = 0; i < d; ++i) gb[i] += g[r * d + i];
                     }
                     if (sink.wants(0)) {
                       auto gx = sink[0];
                       const T inv_d = T(1) / static_cast<T>(d);
                       for (std::size_t r = 0; r < rows; ++r) {
                         T s1 = 0, s2 = 0;
                         for (std::size_t i = 0; i < d; ++i) {
                           const T gh = g[r * d + i] * gc[i];
                           s1 += gh;
                           s2 += gh * xhat[r * d + i];
                         }
                         for (std::size_t i = 0; i < d; ++i) {
                           const T gh = g[r * d + i] * gc[i];
                           gx[r * d + i] += inv[r] * (gh - inv_d * s1 - xhat[r * d + i] * inv_d * s2);
                         }
                       }
                     }
                   });
}

template <class T>
Tensor<T> batchnorm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                    BatchNormStats<T> stats, BatchNormAttrs attrs) {
  if (x.rank() < 2) shape_fail("batchnorm", x.shape(), "needs a batch axis");
  const std::size_t f = x.dim(-1);
  if (gamma.shape() != Shape{f} || beta.shape() != Shape{f}) {
    shape_fail("batchnorm", x.shape(), gamma.shape());
  }
  if (stats.mean.size() != f || stats.var.size() != f) {
    shape_fail("batchnorm", x.shape(), "running statistics have the wrong size");
  }
  const std::size_t n = x.size() / f;
  const T eps = static_cast<T>(attrs.eps);
  std::vector<T> mu(f, T(0)), inv(f);
  auto xs = x.data();
  if (attrs.training) {
    std::vector<T> var(f, T(0));
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < f; ++i) mu[i] += xs[r * f + i];
    for (auto& m : mu) m /= static_cast<T>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < f; ++i) {
        const T c = xs[r * f + i] - mu[i];
        var[i] += c * c;
      }
    const T mom = static_cast<T>(attrs.momentum);
    for (std::size_t i = 0; i < f; ++i) {
      var[i] /= static_cast<T>(n);
      inv[i] = T(1) / std::sqrt(var[i] + eps);
      const T unbiased = n > 1 ? var[i] * static_cast<T>(n) / static_cast<T>(n - 1) : var[i];
      stats.mean[i] = (T(1) - mom) * stats.mean[i] + mom * mu[i];
      stats.var[i] = (T(1) - mom) * stats.var[i] + mom * unbiased;
    }
  } else {
    for (std::size_t i = 0; i < f; ++i) {
      mu[i] = stats.mean[i];
      inv[i] = T(1) / std::sqrt(stats.var[i] + eps);
    }
  }
  Tensor<T> out(x.shape());
  Tensor<T> xhat(x.shape());
  {
    auto y = out.mutable_data();
    auto xh = xhat.mutable_data();
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t i = 0; i < f; ++i) {
        xh[r * f + i] = (xs[r * f + i] - mu[i]) * inv[i];
        y[r * f + i] = xh[r * f + i] * gamma[i] + beta[i];
      }
  }
  Tensor<T> gc = gamma.detach();
  const bool training = attrs.training;
  return finish<T>(out, {&x, &gamma, &beta}, "batchnorm",
                   [f, n, xhat, inv, gc, training](std::span<const T> g, GradSink<T>& sink) {
                     std::vector<T> s1(f, T(0)), s2(f, T(0));
                     for (std::size_t r = 0; r < n; ++r)
                       for (std::size_t i = 0; i < f; ++i) {
                         s1[i] += g[r * f + i];
                         s2[i] += g[r * f + i] * xhat[r * f + i];
                       }
                     if (sink.wants(1)) {
                       auto gg = sink[1];
                       for (std::size_t i = 0; i < f; ++i) gg[i] += s2[i];
                     }
                     if (sink.wants(2)) {
                       auto gb = sink[2];
                       for (std::size_t i = 0; i < f; ++i) gb[i] += s1[i];
                     }
                     if (sink.wants(0)) {
                       auto gx = sink[0];
                       const T inv_n = T(1) / static_cast<T>(n);
                       for (std::size_t r = 0; r < n; ++r)
                         for (std::size_t i = 0; i < f; ++i) {
                           const T gh = g[r * f + i];
                           if (training) {
                             gx[r * f + i] += gc[i] * inv[i] *
                                              (gh - inv_n * s1[i] - xhat[r * f + i] * inv_n * s2[i]);
                           } else {
                             gx[r * f + i] += gc[i] * inv[i] * gh;
                           }
                         }
                     }
                   });
}

// ---------------------------------------------------------------------------
// broadcasting over time

template <class T>
Tensor<T> broadcast_add(const Tensor<T>& x, const Tensor<T>& v) {
  if (!is_time_broadcast(x, v)) shape_fail("broadcast_add", x.shape(), v.shape());
  const std::size_t d = x.dim(-1), t = x.dim(-2);
  const std::size_t outer = x.size() / (t * d);
  const bool shared = v.rank() == 1;
  Tensor<T> out(x.shape());
  auto y = out.mutable_data();
  auto xs = x.data();
  auto vs = v.data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t ti = 0; ti < t; ++ti)
      for (std::size_t i = 0; i < d; ++i) {
        const std::size_t j = (o * t + ti) * d + i;
        y[j] = xs[j] + vs[(shared ? 0 : o * d) + i];
      }
  return finish<T>(out, {&x, &v}, "broadcast_add",
                   [outer, t, d, shared](std::span<const T> g, GradSink<T>& sink) {
                     if (sink.wants(0)) {
                       auto gx = sink[0];
                       for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
                     }
                     if (sink.wants(1)) {
                       auto gv = sink[1];
                       for (std::size_t o = 0; o < outer; ++o)
                         for (std::size_t ti = 0; ti < t; ++ti)
                           for (std::size_t i = 0; i < d; ++i)
                             gv[(shared ? 0 : o * d) + i] += g[(o * t + ti) * d + i];
                     }
                   });
}

template <class T>
Tensor<T> broadcast_mul(const Tensor<T>& x, const Tensor<T>& v) {
  if (!is_time_broadcast(x, v)) shape_fail("broadcast_mul", x.shape(), v.shape());
  const std::size_t d = x.dim(-1), t = x.dim(-2);
  const std::size_t outer = x.size() / (t * d);
  const bool shared = v.rank() == 1;
  Tensor<T> out(x.shape());
  auto y = out.mutable_data();
  auto xs = x.data();
  auto vs = v.data();
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t ti = 0; ti < t; ++ti)
      for (std::size_t i = 0; i < d; ++i) {
        const std::size_t j = (o * t + ti) * d + i;
        y[j] = xs[j] * vs[(shared ? 0 : o * d) + i];
      }
  Tensor<T> xc = x.detach(), vc = v.detach();
  return finish<T>(out, {&x, &v}, "broadcast_mul",
                   [outer, t, d, shared, xc, vc](std::span<const T> g, GradSink<T>& sink) {
                     const bool want_x = sink.wants(0), want_v = sink.wants(1);
                     std::span<T> gx = want_x ? sink[0] : std::span<T>{};
                     std::span<T> gv = want_v ? sink[1] : std::span<T>{};
                     for (std::size_t o = 0; o < outer; ++o)
                       for (std::size_t ti = 0; ti < t; ++ti)
                         for (std::size_t i = 0; i < d; ++i) {
                           const std::size_t j = (o * t + ti) * d + i;
                           const std::size_t vi = (shared ? 0 : o * d) + i;
                           if (want_x) gx[j] += g[j] * vc[vi];
                           if (want_v) gv[vi] += g[j] * xc[j];
                         }
                   });
}

template <class T>
Tensor<T> weighted_sum(const Tensor<T>& weights, std::span<const Tensor<T>> parts) {
  if (weights.rank() != 1 || weights.dim(0) != parts.size() || parts.empty()) {
    shape_fail("weighted_sum", weights.shape(), std::to_string(parts.size()) + " parts");
  }
  for (const auto& p : parts)
    if (p.shape() != parts[0].shape()) shape_fail("weighted_sum", parts[0].shape(), p.shape());
  Tensor<T> out(parts[0].shape());
  auto y = out.mutable_data();
  for (std::size_t pi = 0; pi < parts.size(); ++pi) {
    const T w = weights[pi];
    auto ps = parts[pi].data();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += w * ps[i];
  }
  std::vector<const Tensor<T>*> inputs{&weights};
  std::vector<Tensor<T>> saved;
  Tape<T>* tape = weights.on_tape() ? weights.tape() : nullptr;
  for (const auto& p : parts) {
    inputs.push_back(&p);
    saved.push_back(p.detach());
    if (p.on_tape()) {
      if (tape != nullptr && tape != p.tape()) throw std::logic_error("weighted_sum: mixed tapes");
      tape = p.tape();
    }
  }
  if (tape == nullptr) return out;
  Tensor<T> wc = weights.detach();
  return tape->record(out, inputs, [wc, saved](std::span<const T> g, GradSink<T>& sink) {
    if (sink.wants(0)) {
      auto gw = sink[0];
      for (std::size_t pi = 0; pi < saved.size(); ++pi) {
        T acc = 0;
        auto ps = saved[pi].data();
        for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * ps[i];
        gw[pi] += acc;
      }
    }
    for (std::size_t pi = 0; pi < saved.size(); ++pi) {
      if (!sink.wants(pi + 1)) continue;
      auto gp = sink[pi + 1];
      const T w = wc[pi];
      for (std::size_t i = 0; i < g.size(); ++i) gp[i] += w * g[i];
    }
  });
}

// ---------------------------------------------------------------------------
// classification helpers

template <class T>
Tensor<T> group_max(const Tensor<T>& x, std::size_t group_size) {
  if (x.rank() < 1 || group_size == 0 || x.dim(-1) % group_size != 0) {
    shape_fail("group_max", x.shape(), "is not divisible into groups of " + std::to_string(group_size));
  }
  const std::size_t groups = x.dim(-1) / group_size;
  Shape out_shape = x.shape();
  out_shape.back() = groups;
  Tensor<T> out(out_shape);
  auto y = out.mutable_data();
  auto xs = x.data();
  std::vector<std::size_t> arg(out.size());
  for (std::size_t o = 0; o < out.size(); ++o) {
    std::size_t best = o * group_size;
    for (std::size_t k = 1; k < group_size; ++k)
      if (xs[o * group_size + k] > xs[best]) best = o * group_size + k;
    arg[o] = best;
    y[o] = xs[best];
  }
  if (auto* r = active_branch_recorder()) {
    for (auto a : arg) r->record(a);
  }
  return finish<T>(out, {&x}, "group_max", [arg](std::span<const T> g, GradSink<T>& sink) {
    auto gx = sink[0];
    for (std::size_t o = 0; o < arg.size(); ++o) gx[arg[o]] += g[o];
  });
}

template <class T>
Tensor<T> l2_normalize(const Tensor<T>& x, T eps) {
  if (x.rank() < 1) shape_fail("l2_normalize", x.shape(), "is a scalar");
  const std::size_t d = x.dim(-1);
  const std::size_t rows = x.size() / d;
  Tensor<T> out(x.shape());
  std::vector<T> norms(rows);
  auto y = out.mutable_data();
  auto xs = x.data();
  for (std::size_t r = 0; r < rows; ++r) {
    T sq = 0;
    for (std::size_t i = 0; i < d; ++i) sq += xs[r * d + i] * xs[r * d + i];
    norms[r] = std::sqrt(sq);
    if (auto* rec = active_branch_recorder()) rec->record(norms[r] > eps);
    const T denom = std::max(norms[r], eps);
    for (std::size_t i = 0; i < d; ++i) y[r * d + i] = xs[r * d + i] / denom;
  }
  Tensor<T> yc = out;
  return finish<T>(out, {&x}, "l2_normalize", [d, rows, norms, eps, yc](std::span<const T> g, GradSink<T>& sink) {
    auto gx = sink[0];
    for (std::size_t r = 0; r < rows; ++r) {
      if (norms[r] > eps) {
        T dot = 0;
        for (std::size_t i = 0; i < d; ++i) dot += yc[r * d + i] * g[r * d + i];
        for (std::size_t i = 0; i < d; ++i)
          gx[r * d + i] += (g[r * d + i] - yc[r * d + i] * dot) / norms[r];
      } else {
        for (std::size_t i = 0; i < d; ++i) gx[r * d + i] += g[r * d + i] / eps;
      }
    }
  });
}

namespace {
void check_labels(std::string_view op, const Shape& s, std::span<const int> labels) {
  if (s.size() != 2 || labels.size() != s[0]) {
    throw ShapeError(std::string(op) + ": logits " + shape_str(s) + " with " +
                     std::to_string(labels.size()) + " labels");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= s[1]) {
      throw std::invalid_argument(std::string(op) + ": label " + std::to_string(y) +
                                  " outside [0, " + std::to_string(s[1]) + ")");
    }
  }
}
}  // namespace

template <class T>
Tensor<T> angular_margin(const Tensor<T>& cosines, std::span<const int> labels, T margin) {
  check_labels("angular_margin", cosines.shape(), labels);
  const std::size_t classes = cosines.dim(1);
  Tensor<T> out = cosines.detach();
  std::vector<T> slope(labels.size(), T(1));
  if (margin != T(0)) {
    auto y = out.mutable_data();
    constexpr T lim = T(1) - T(1e-7);
    constexpr T pi = std::numbers::pi_v<T>;
    for (std::size_t b = 0; b < labels.size(); ++b) {
      const std::size_t j = b * classes + static_cast<std::size_t>(labels[b]);
      const T c = y[j];
      const T cc = std::clamp(c, -lim, lim);
      const T theta = std::acos(cc);
      const T phi = theta + margin;
      if (auto* r = active_branch_recorder()) r->record((c == cc ? 0u : 1u) + (phi >= pi ? 2u : 0u));
      if (phi >= pi) {
        y[j] = T(-1);
        slope[b] = T(0);
      } else {
        y[j] = std::cos(phi);
        slope[b] = (c == cc) ? std::sin(phi) / std::sin(theta) : T(0);
      }
    }
  }
  std::vector<int> lab(labels.begin(), labels.end());
  return finish<T>(out, {&cosines}, "angular_margin",
                   [classes, lab, slope](std::span<const T> g, GradSink<T>& sink) {
                     auto gx = sink[0];
                     for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g[i];
                     for (std::size_t b = 0; b < lab.size(); ++b) {
                       const std::size_t j = b * classes + static_cast<std::size_t>(lab[b]);
                       gx[j] += g[j] * (slope[b] - T(1));
                     }
                   });
}

template <class T>
Tensor<T> cross_entropy(const Tensor<T>& logits, std::span<const int> labels) {
  check_labels("cross_entropy", logits.shape(), labels);
  const std::size_t batch = logits.dim(0), classes = logits.dim(1);
  std::vector<T> probs(logits.size());
  auto xs = logits.data();
  T total = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    T mx = -std::numeric_limits<T>::infinity();
    for (std::size_t j = 0; j < classes; ++j) mx = std::max(mx, xs[b * classes + j]);
    T z = 0;
    for (std::size_t j = 0; j < classes; ++j) {
      probs[b * classes + j] = std::exp(xs[b * classes + j] - mx);
      z += probs[b * classes + j];
    }
    for (std::size_t j = 0; j < classes; ++j) probs[b * classes + j] /= z;
    total += (mx + std::log(z)) - xs[b * classes + static_cast<std::size_t>(labels[b])];
  }
  const T inv_b = T(1) / static_cast<T>(batch);
  std::vector<int> lab(labels.begin(), labels.end());
  return finish<T>(Tensor<T>::scalar(total * inv_b), {&logits}, "cross_entropy",
                   [probs, lab, classes, inv_b](std::span<const T> g, GradSink<T>& sink) {
                     auto gx = sink[0];
                     const T s = g[0] * inv_b;
                     for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += s * probs[i];
                     for (std::size_t b = 0; b < lab.size(); ++b)
                       gx[b * classes + static_cast<std::size_t>(lab[b])] -= s;
                   });
}

template <class T>
Tensor<T> mse(const Tensor<T>& prediction, const Tensor<T>& target) {
  require_same("mse", prediction, target);
  const std::size_t n = prediction.size();
  std::vector<T> diff(n);
  T acc = 0;
  for (std::size_t i = 0; i < n; ++i) {
    diff[i] = prediction[i] - target[i];
    acc += diff[i] * diff[i];
  }
  const T inv_n = T(1) / static_cast<T>(n);
  return finish<T>(Tensor<T>::scalar(acc * inv_n), {&prediction, &target}, "mse",
                   [diff, inv_n](std::span<const T> g, GradSink<T>& sink) {
                     const T s = T(2) * g[0] * inv_n;
                     if (sink.wants(0)) {
                       auto ga = sink[0];
                       for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += s * diff[i];
                     }
                     if (sink.wants(1)) {
                       auto gb = sink[1];
                       for (std::size_t i = 0; i < gb.size(); ++i) gb[i] -= s * diff[i];
                     }
                   });
}

template <class T>
Tensor<T> detach(const Tensor<T>& x) {
  return x.detach();
}

// ---------------------------------------------------------------------------
// generic entry point

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::add: return "add";
    case OpKind::sub: return "sub";
    case OpKind::mul: return "mul";
    case OpKind::scale: return "scale";
    case OpKind::matmul: return "matmul";
    case OpKind::conv1d: return "conv1d";
    case OpKind::relu: return "relu";
    case OpKind::gelu: return "gelu";
    case OpKind::tanh: return "tanh";
    case OpKind::sigmoid: return "sigmoid";
    case OpKind::softmax: return "softmax";
    case OpKind::log: return "log";
    case OpKind::exp: return "exp";
    case OpKind::sqrt: return "sqrt";
    case OpKind::mean: return "mean";
    case OpKind::variance: return "variance";
    case OpKind::sum: return "sum";
    case OpKind::concat: return "concat";
    case OpKind::slice: return "slice";
    case OpKind::transpose: return "transpose";
    case OpKind::layernorm: return "layernorm";
    case OpKind::batchnorm: return "batchnorm";
    case OpKind::broadcast_add: return "broadcast_add";
    case OpKind::broadcast_mul: return "broadcast_mul";
    case OpKind::weighted_sum: return "weighted_sum";
    case OpKind::group_max: return "group_max";
    case OpKind::l2_normalize: return "l2_normalize";
    case OpKind::cross_entropy: return "cross_entropy";
    case OpKind::mse: return "mse";
    case OpKind::angular_margin: return "angular_margin";
    case OpKind::detach: return "detach";
  }
  return "unknown";
}

std::vector<OpKind> all_op_kinds() {
  std::vector<OpKind> out;
  for (int k = 0; k <= static_cast<int>(OpKind::detach); ++k) out.push_back(static_cast<OpKind>(k));
  return out;
}

template <class T>
Tensor<T> tensor_op(OpKind kind, std::span<const Tensor<T>> in, const OpAttrs& attrs) {
  auto need = [&](std::size_t n) {
    if (in.size() != n) {
      throw std::invalid_argument(std::string(op_name(kind)) + ": expected " + std::to_string(n) +
                                  " inputs, got " + std::to_string(in.size()));
    }
  };
  const T s = static_cast<T>(attrs.scalar);
  switch (kind) {
    case OpKind::add: need(2); return add(in[0], in[1]);
    case OpKind::sub: need(2); return sub(in[0], in[1]);
    case OpKind::mul: need(2); return mul(in[0], in[1]);
    case OpKind::scale: need(1); return scale(in[0], s);
    case OpKind::matmul: need(2); return matmul(in[0], in[1]);
    case OpKind::conv1d: need(2); return conv1d(in[0], in[1], attrs.conv);
    case OpKind::relu: need(1); return relu(in[0]);
    case OpKind::gelu: need(1); return gelu(in[0]);
    case OpKind::tanh: need(1); return tanh(in[0]);
    case OpKind::sigmoid: need(1); return sigmoid(in[0]);
    case OpKind::softmax: need(1); return softmax(in[0], attrs.axis);
    case OpKind::log: need(1); return log(in[0]);
    case OpKind::exp: need(1); return exp(in[0]);
    case OpKind::sqrt: need(1); return sqrt(in[0]);
    case OpKind::mean: need(1); return mean(in[0], attrs.axis);
    case OpKind::variance: need(1); return variance(in[0], attrs.axis);
    case OpKind::sum: need(1); return sum(in[0], attrs.axis);
    case OpKind::concat: return concat(in, attrs.axis);
    case OpKind::slice: need(1); return slice(in[0], attrs.axis, attrs.begin, attrs.end);
    case OpKind::transpose: need(1); return transpose(in[0]);
    case OpKind::layernorm: need(3); return layernorm(in[0], in[1], in[2]);
    case OpKind::batchnorm: {
      need(3);
      const std::size_t f = in[0].dim(-1);
      std::vector<T> rm(f, T(0)), rv(f, T(1));
      return batchnorm(in[0], in[1], in[2], BatchNormStats<T>{rm, rv}, attrs.bn);
    }
    case OpKind::broadcast_add: need(2); return broadcast_add(in[0], in[1]);
    case OpKind::broadcast_mul: need(2); return broadcast_mul(in[0], in[1]);
    case OpKind::weighted_sum:
      if (in.empty()) need(1);
      return weighted_sum(in[0], in.subspan(1));
    case OpKind::group_max: need(1); return group_max(in[0], attrs.group);
    case OpKind::l2_normalize: need(1); return l2_normalize(in[0]);
    case OpKind::cross_entropy: need(1); return cross_entropy<T>(in[0], attrs.labels);
    case OpKind::mse: need(2); return mse(in[0], in[1]);
    case OpKind::angular_margin: need(1); return angular_margin<T>(in[0], attrs.labels, s);
    case OpKind::detach: need(1); return detach(in[0]);
  }
  throw std::invalid_argument("tensor_op: unknown op kind");
}

// ---------------------------------------------------------------------------

#define GEOLID_INSTANTIATE(T)                                                                    \
  template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> scale(const Tensor<T>&, T);                                                 \
  template Tensor<T> add_scalar(const Tensor<T>&, T);                                            \
  template Tensor<T> relu(const Tensor<T>&);                                                     \
  template Tensor<T> gelu(const Tensor<T>&);                                                     \
  template Tensor<T> tanh(const Tensor<T>&);                                                     \
  template Tensor<T> sigmoid(const Tensor<T>&);                                                  \
  template Tensor<T> log(const Tensor<T>&);                                                      \
  template Tensor<T> exp(const Tensor<T>&);                                                      \
  template Tensor<T> sqrt(const Tensor<T>&);                                                     \
  template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                 \
  template Tensor<T> conv1d(const Tensor<T>&, const Tensor<T>&, Conv1dAttrs);                    \
  template Tensor<T> softmax(const Tensor<T>&, int);                                             \
  template Tensor<T> sum(const Tensor<T>&, int);                                                 \
  template Tensor<T> mean(const Tensor<T>&, int);                                                \
  template Tensor<T> variance(const Tensor<T>&, int);                                            \
  template Tensor<T> sum_all(const Tensor<T>&);                                                  \
  template Tensor<T> mean_all(const Tensor<T>&);                                                 \
  template Tensor<T> concat(std::span<const Tensor<T>>, int);                                    \
  template Tensor<T> slice(const Tensor<T>&, int, std::size_t, std::size_t);                     \
  template Tensor<T> transpose(const Tensor<T>&);                                                \
  template Tensor<T> reshape(const Tensor<T>&, Shape);                                           \
  template Tensor<T> layernorm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, T);         \
  template Tensor<T> batchnorm(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&,             \
                               BatchNormStats<T>, BatchNormAttrs);                               \
  template Tensor<T> broadcast_add(const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> broadcast_mul(const Tensor<T>&, const Tensor<T>&);                          \
  template Tensor<T> weighted_sum(const Tensor<T>&, std::span<const Tensor<T>>);                 \
  template Tensor<T> group_max(const Tensor<T>&, std::size_t);                                   \
  template Tensor<T> l2_normalize(const Tensor<T>&, T);                                          \
  template Tensor<T> angular_margin(const Tensor<T>&, std::span<const int>, T);                  \
  template Tensor<T> cross_entropy(const Tensor<T>&, std::span<const int>);                      \
  template Tensor<T> mse(const Tensor<T>&, const Tensor<T>&);                                    \
  template Tensor<T> detach(const Tensor<T>&);                                                   \
  template Tensor<T> tensor_op(OpKind, std::span<const Tensor<T>>, const OpAttrs&);

GEOLID_INSTANTIATE(float)
GEOLID_INSTANTIATE(double)
#undef GEOLID_INSTANTIATE

}  // namespace geolid::ad
