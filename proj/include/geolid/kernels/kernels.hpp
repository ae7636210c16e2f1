// Copyright (c) 2026, The geolid Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Dense compute kernels used by the autodiff ops.
//
// Two implementations exist for every kernel:
//   serial::   plain reference loops, kept for tests and the benchmark
//   parallel:: OpenMP versions; every output element is produced by exactly one
//              thread with a fixed summation order, so results do not depend on
//              the thread count
//
// The unqualified entry points below forward to parallel::.

#include <cstddef>
#include <span>

namespace geolid::kernels {

// Batched C = op(A) * op(B), row-major.
//   op(A) is m x k (A stored k x m when trans_a)
//   op(B) is k x n (B stored n x k when trans_b)
// Matrices of batch item i start at i * stride_{a,b,c}; a stride of 0 reuses the
// same operand for every batch item. When accumulate is false C is overwritten.
struct GemmShape {
  std::size_t batch = 1;
  std::size_t m = 0, n = 0, k = 0;
  bool trans_a = false;
  bool trans_b = false;
  std::size_t stride_a = 0, stride_b = 0, stride_c = 0;
};

// Channels-last 1-D convolution geometry: x is (batch, in_len, in_ch),
// w is (kernel, in_ch, out_ch), y is (batch, out_len, out_ch).
struct ConvShape {
  std::size_t batch = 1;
  std::size_t in_len = 0, out_len = 0;
  std::size_t in_ch = 0, out_ch = 0;
  std::size_t kernel = 1, stride = 1, dilation = 1, padding = 0;
};

std::size_t conv_out_len(std::size_t in_len, std::size_t kernel, std::size_t stride,
                         std::size_t dilation, std::size_t padding);

namespace serial {
template <class T>
void gemm(const GemmShape& s, std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate);
template <class T>
void conv1d_forward(const ConvShape& s, std::span<const T> x, std::span<const T> w,
                    std::span<T> y);
template <class T>
void conv1d_backward_input(const ConvShape& s, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx);
template <class T>
void conv1d_backward_weight(const ConvShape& s, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw);
}  // namespace serial

namespace parallel {
template <class T>
void gemm(const GemmShape& s, std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate);
template <class T>
void conv1d_forward(const ConvShape& s, std::span<const T> x, std::span<const T> w,
                    std::span<T> y);
template <class T>
void conv1d_backward_input(const ConvShape& s, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx);
template <class T>
void conv1d_backward_weight(const ConvShape& s, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw);
}  // namespace parallel

template <class T>
void gemm(const GemmShape& s, std::span<const T> a, std::span<const T> b, std::span<T> c,
          bool accumulate) {
  parallel::gemm<T>(s, a, b, c, accumulate);
}
template <class T>
void conv1d_forward(const ConvShape& s, std::span<const T> x, std::span<const T> w,
                    std::span<T> y) {
  parallel::conv1d_forward<T>(s, x, w, y);
}
template <class T>
void conv1d_backward_input(const ConvShape& s, std::span<const T> gy, std::span<const T> w,
                           std::span<T> gx) {
  parallel::conv1d_backward_input<T>(s, gy, w, gx);
}
template <class T>
void conv1d_backward_weight(const ConvShape& s, std::span<const T> x, std::span<const T> gy,
                            std::span<T> gw) {
  parallel::conv1d_backward_weight<T>(s, x, gy, gw);
}

// Caps OpenMP worker threads; 1 means fully serial execution.
void set_num_threads(int threads);
int num_threads();

}  // namespace geolid::kernels
