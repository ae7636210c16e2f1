// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

// Reference kernels: direct transcriptions of the defining sums, no blocking,
// no threading. Tests compare parallel:: against these.

#include "geolid/kernels/kernels.hpp"

namespace geolid::kernels {

std::size_t conv_out_len(std::size_t in_len, std::size_t kernel, std::size_t stride,
                         std::size_t dilation, std::size_t padding) {
  const std::size_t span = dilation * (kernel - 1) + 1;
  const std::size_t padded = in_len + 2 * padding;
  if (padded < span || stride == 0) return 0;
  return (padded - span) / stride + 1;
}

namespace serial {

template <class T>
void gemm(const GemmShape& s, std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate) {
  for (std::size_t bi = 0; bi < s.batch; ++bi) {
    const T* A = a.data() + bi * s.stride_a;
    const T* B = b.data() + bi * s.stride_b;
    T* C = c.data() + bi * s.stride_c;
    for (std::size_t i = 0; i < s.m; ++i) {
      for (std::size_t j = 0; j < s.n; ++j) {
        T acc = 0;
        for (std::size_t p = 0; p < s.k; ++p) {
          const T av = s.trans_a ? A[p * s.m + i] : A[i * s.k + p];
          const T bv = s.trans_b ? B[j * s.k + p] : B[p * s.n + j];
          acc += av * bv;
        }
        C[i * s.n + j] = accumulate ? C[i * s.n + j] + acc : acc;
      }
    }
  }
}

template <class T>
void conv1d_forward(const ConvShape& s, std::span<const T> x, std::span<const T> w,
                    std::span<T> y) {
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t t = 0; t < s.out_len; ++t)
      for (std::size_t co = 0; co < s.out_ch; ++co) {
        T acc = 0;
        for (std::size_t k = 0; k < s.kernel; ++k) {
          const long u = static_cast<long>(t * s.stride + k * s.dilation) -
                         static_cast<long>(s.padding);
          if (u < 0 || u >= static_cast<long>(s.in_len)) continue;
          for (std::size_t ci = 0; ci < s.in_ch; ++ci)
            acc += x[(b * s.in_len + u) * s.in_ch + ci] * w[(k * s.in_ch + ci) * s.out_ch + co];
        }
        y[(b * s.out_len + t) * s.out_ch + co] = acc;
      }
}

template <class T>
void conv1d_backward_input(const ConvShape& s, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx) {
  for (std::size_t b = 0; b < s.batch; ++b)
    for (std::size_t t = 0; t < s.out_len; ++t)
      for (std::size_t k = 0; k < s.kernel; ++k) {
        const long u = static_cast<long>(t * s.stride + k * s.dilation) -
                       static_cast<long>(s.padding);
        if (u < 0 || u >= static_cast<long>(s.in_len)) continue;
        for (std::size_t ci = 0; ci < s.in_ch; ++ci)
          for (std::size_t co = 0; co < s.out_ch; ++co)
            gx[(b * s.in_len + u) * s.in_ch + ci] +=
                gy[(b * s.out_len + t) * s.out_ch + co] * w[(k * s.in_ch + ci) * s.out_ch + co];
      }
}

template <class T>
void conv1d_backward_weight(const ConvShape& s, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw) {
  for (std::size_t k = 0; k < s.kernel; ++k)
    for (std::size_t ci = 0; ci < s.in_ch; ++ci)
      for (std::size_t co = 0; co < s.out_ch; ++co) {
        T acc = 0;
        for (std::size_t b = 0; b < s.batch; ++b)
          for (std::size_t t = 0; t < s.out_len; ++t) {
            const long u = static_cast<long>(t * s.stride + k * s.dilation) -
                           static_cast<long>(s.padding);
            if (u < 0 || u >= static_cast<long>(s.in_len)) continue;
            acc += x[(b * s.in_len + u) * s.in_ch + ci] * gy[(b * s.out_len + t) * s.out_ch + co];
          }
        gw[(k * s.in_ch + ci) * s.out_ch + co] += acc;
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

}  // namespace serial
}  // namespace geolid::kernels
