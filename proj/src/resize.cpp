// Copyright 2026 The incanom Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "incanom/resize.hpp"

#include <cmath>
#include <cstddef>

namespace incanom {

template <typename T>
AxisTaps<T> BilinearTaps(int in, int out) {
  AxisTaps<T> taps;
  taps.i0.resize(out);
  taps.i1.resize(out);
  taps.w0.resize(out);
  taps.w1.resize(out);
  const T scale = static_cast<T>(in) / static_cast<T>(out);
  for (int d = 0; d < out; ++d) {
    T src = (static_cast<T>(d) + T(0.5)) * scale - T(0.5);
    if (src < T(0)) src = T(0);
    int i0 = static_cast<int>(std::floor(src));
    if (i0 > in - 1) i0 = in - 1;
    int i1 = i0 + 1 < in ? i0 + 1 : in - 1;
    T l1 = src - static_cast<T>(i0);
    taps.i0[d] = i0;
    taps.i1[d] = i1;
    taps.w0[d] = T(1) - l1;
    taps.w1[d] = l1;
  }
  return taps;
}

template <typename T>
void ResizeBilinear(const T* in, int channels, int h, int w, T* out, int oh, int ow) {
  const auto ty = BilinearTaps<T>(h, oh);
  const auto tx = BilinearTaps<T>(w, ow);
  const std::size_t in_plane = static_cast<std::size_t>(h) * w;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
  for (int c = 0; c < channels; ++c) {
    const T* src = in + c * in_plane;
    T* dst = out + c * out_plane;
    for (int y = 0; y < oh; ++y) {
      const T* r0 = src + static_cast<std::size_t>(ty.i0[y]) * w;
      const T* r1 = src + static_cast<std::size_t>(ty.i1[y]) * w;
      for (int x = 0; x < ow; ++x) {
        T top = tx.w0[x] * r0[tx.i0[x]] + tx.w1[x] * r0[tx.i1[x]];
        T bottom = tx.w0[x] * r1[tx.i0[x]] + tx.w1[x] * r1[tx.i1[x]];
        dst[static_cast<std::size_t>(y) * ow + x] = ty.w0[y] * top + ty.w1[y] * bottom;
      }
    }
  }
}

template <typename T>
void ResizeBilinearBackward(const T* grad_out, int channels, int h, int w, int oh, int ow,
                            T* grad_in) {
  const auto ty = BilinearTaps<T>(h, oh);
  const auto tx = BilinearTaps<T>(w, ow);
  const std::size_t in_plane = static_cast<std::size_t>(h) * w;
  const std::size_t out_plane = static_cast<std::size_t>(oh) * ow;
  for (int c = 0; c < channels; ++c) {
    const T* g = grad_out + c * out_plane;
    T* dst = grad_in + c * in_plane;
    for (int y = 0; y < oh; ++y) {
      T* r0 = dst + static_cast<std::size_t>(ty.i0[y]) * w;
      T* r1 = dst + static_cast<std::size_t>(ty.i1[y]) * w;
      for (int x = 0; x < ow; ++x) {
        T v = g[static_cast<std::size_t>(y) * ow + x];
        T top = ty.w0[y] * v;
        T bottom = ty.w1[y] * v;
        r0[tx.i0[x]] += tx.w0[x] * top;
        r0[tx.i1[x]] += tx.w1[x] * top;
        r1[tx.i0[x]] += tx.w0[x] * bottom;
        r1[tx.i1[x]] += tx.w1[x] * bottom;
      }
    }
  }
}

template AxisTaps<float> BilinearTaps<float>(int, int);
template AxisTaps<double> BilinearTaps<double>(int, int);
template void ResizeBilinear<float>(const float*, int, int, int, float*, int, int);
template void ResizeBilinear<double>(const double*, int, int, int, double*, int, int);
template void ResizeBilinearBackward<float>(const float*, int, int, int, int, int, float*);
template void ResizeBilinearBackward<double>(const double*, int, int, int, int, int, double*);

}  // namespace incanom
