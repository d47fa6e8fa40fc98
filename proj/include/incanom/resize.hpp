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

#pragma once

#include <vector>

namespace incanom {

// Bilinear resampling, align_corners = false:
//   src = (dst + 0.5) * in / out - 0.5, clamped below at 0
//   i0 = floor(src), i1 = min(i0 + 1, in - 1), w1 = src - i0, w0 = 1 - w1
//   out(y, x) = wy0 * (wx0 * in(y0, x0) + wx1 * in(y0, x1))
//             + wy1 * (wx0 * in(y1, x0) + wx1 * in(y1, x1))
// All arithmetic runs in the element type, so float results are reproducible.
template <typename T>
struct AxisTaps {
  std::vector<int> i0;
  std::vector<int> i1;
  std::vector<T> w0;
  std::vector<T> w1;
};

template <typename T>
AxisTaps<T> BilinearTaps(int in, int out);

// Resizes each of `channels` planes of a CHW tensor from h x w to oh x ow.
template <typename T>
void ResizeBilinear(const T* in, int channels, int h, int w, T* out, int oh, int ow);

// Adjoint of ResizeBilinear: accumulates grad_out (C x oh x ow) into grad_in (C x h x w).
template <typename T>
void ResizeBilinearBackward(const T* grad_out, int channels, int h, int w, int oh, int ow,
                            T* grad_in);

}  // namespace incanom
