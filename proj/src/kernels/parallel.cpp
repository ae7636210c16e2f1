// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdint>

#include "geolid/kernels/kernels.hpp"

namespace geolid::kernels::parallel {

namespace {
// Below this many multiply-adds a parallel region costs more than it saves.
constexpr std::size_t kParallelWork = 1 << 15;
}  // namespace

template <class T>
void gemm(const GemmShape& s, std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate) {
  const auto rows = static_cast<std::int64_t>(s.batch * s.m);
  const bool go_parallel = s.batch * s.m * s.n * s.k >= kParallelWork;
  const T* A0 = a.data();
  const T* B0 = b.data();
  T* C0 = c.data();
#pragma omp parallel for schedule(static) if (go_parallel)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t bi = static_cast<std::size_t>(r) / s.m;
    const std::size_t i = static_cast<std::size_t>(r) % s.m;
    const T* A = A0 + bi * s.stride_a;
    const T* B = B0 + bi * s.stride_b;
    T* crow = C0 + bi * s.stride_c + i * s.n;
    if (!s.trans_b) {
      if (!accumulate)
        for (std::size_t j = 0; j < s.n; ++j) crow[j] = 0;
      for (std::size_t p = 0; p < s.k; ++p) {
        const T av = s.trans_a ? A[p * s.m + i] : A[i * s.k + p];
        const T* brow = B + p * s.n;
        for (std::size_t j = 0; j < s.n; ++j) crow[j] += av * brow[j];
      }
    } else {
      for (std::size_t j = 0; j < s.n; ++j) {
        const T* brow = B + j * s.k;
        T acc = 0;
        if (s.trans_a) {
          for (std::size_t p = 0; p < s.k; ++p) acc += A[p * s.m + i] * brow[p];
        } else {
          const T* arow = A + i * s.k;
          for (std::size_t p = 0; p < s.k; ++p) acc += arow[p] * brow[p];
        }
        crow[j] = accumulate ? crow[j] + acc : acc;
      }
    }
  }
}

template <class T>
void conv1d_forward(const ConvShape& s, std::span<const T> x, std::span<const T> w,
                    std::span<T> y) {
  const auto rows = static_cast<std::int64_t>(s.batch * s.out_len);
  const bool go_parallel = s.batch * s.out_len * s.kernel * s.in_ch * s.out_ch >= kParallelWork;
#pragma omp parallel for schedule(static) if (go_parallel)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t b = static_cast<std::size_t>(r) / s.out_len;
    const std::size_t t = static_cast<std::size_t>(r) % s.out_len;
    T* yrow = y.data() + static_cast<std::size_t>(r) * s.out_ch;
    for (std::size_t co = 0; co < s.out_ch; ++co) yrow[co] = 0;
    for (std::size_t k = 0; k < s.kernel; ++k) {
      const long u =
          static_cast<long>(t * s.stride + k * s.dilation) - static_cast<long>(s.padding);
      if (u < 0 || u >= static_cast<long>(s.in_len)) continue;
      const T* xrow = x.data() + (b * s.in_len + static_cast<std::size_t>(u)) * s.in_ch;
      const T* wk = w.data() + k * s.in_ch * s.out_ch;
      for (std::size_t ci = 0; ci < s.in_ch; ++ci) {
        const T xv = xrow[ci];
        const T* wrow = wk + ci * s.out_ch;
        for (std::size_t co = 0; co < s.out_ch; ++co) yrow[co] += xv * wrow[co];
      }
    }
  }
}

// Gather form: each input position collects from the outputs that read it, so
// rows are independent.
template <class T>
void conv1d_backward_input(const ConvShape& s, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx) {
  const auto rows = static_cast<std::int64_t>(s.batch * s.in_len);
  const bool go_parallel = s.batch * s.out_len * s.kernel * s.in_ch * s.out_ch >= kParallelWork;
#pragma omp parallel for schedule(static) if (go_parallel)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t b = static_cast<std::size_t>(r) / s.in_len;
    const long u = static_cast<long>(static_cast<std::size_t>(r) % s.in_len);
    T* gxrow = gx.data() + static_cast<std::size_t>(r) * s.in_ch;
    for (std::size_t k = 0; k < s.kernel; ++k) {
      const long v = u + static_cast<long>(s.padding) - static_cast<long>(k * s.dilation);
      if (v < 0 || v % static_cast<long>(s.stride) != 0) continue;
      const auto t = static_cast<std::size_t>(v / static_cast<long>(s.stride));
      if (t >= s.out_len) continue;
      const T* gyrow = gy.data() + (b * s.out_len + t) * s.out_ch;
      const T* wk = w.data() + k * s.in_ch * s.out_ch;
      for (std::size_t ci = 0; ci < s.in_ch; ++ci) {
        const T* wrow = wk + ci * s.out_ch;
        T acc = 0;
        for (std::size_t co = 0; co < s.out_ch; ++co) acc += gyrow[co] * wrow[co];
        gxrow[ci] += acc;
      }
    }
  }
}

template <class T>
void conv1d_backward_weight(const ConvShape& s, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw) {
  const auto rows = static_cast<std::int64_t>(s.kernel * s.in_ch);
  const bool go_parallel = s.batch * s.out_len * s.kernel * s.in_ch * s.out_ch >= kParallelWork;
#pragma omp parallel for schedule(static) if (go_parallel)
  for (std::int64_t r = 0; r < rows; ++r) {
    const std::size_t k = static_cast<std::size_t>(r) / s.in_ch;
    const std::size_t ci = static_cast<std::size_t>(r) % s.in_ch;
    T* gwrow = gw.data() + static_cast<std::size_t>(r) * s.out_ch;
    for (std::size_t b = 0; b < s.batch; ++b)
      for (std::size_t t = 0; t < s.out_len; ++t) {
        const long u =
            static_cast<long>(t * s.stride + k * s.dilation) - static_cast<long>(s.padding);
        if (u < 0 || u >= static_cast<long>(s.in_len)) continue;
        const T xv = x[(b * s.in_len + static_cast<std::size_t>(u)) * s.in_ch + ci];
        const T* gyrow = gy.data() + (b * s.out_len + t) * s.out_ch;
        for (std::size_t co = 0; co < s.out_ch; ++co) gwrow[co] += xv * gyrow[co];
      }
  }
}

#define GEOLID_INSTANTIATE(T)                                                                 \
  template void gemm<T>(const GemmShape&, std::span<const T>, std::span<const T>, std::span<T>, \
                        bool);                                                                \
  template void conv1d_forward<T>(const ConvShape&, std::span<const T>, std::span<const T>,   \
                                  std::span<T>);                                              \
  template void conv1d_backward_input<T>(const ConvShape&, std::span<const T>,                \
                                         std::span<const T>, std::span<T>);                   \
  template void conv1d_backward_weight<T>(const ConvShape&, std::span<const T>,               \
                                          std::span<const T>, std::span<T>);
GEOLID_INSTANTIATE(float)
GEOLID_INSTANTIATE(double)
#undef GEOLID_INSTANTIATE

}  // namespace geolid::kernels::parallel
