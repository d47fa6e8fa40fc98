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

#include "incanom/featurizer.hpp"

#include <cmath>

namespace incanom {

FilterBank MakeFilterBank(const FilterBankOptions& opts) {
  if (opts.in_channels < 1 || opts.channels_fine < 1 || opts.channels_coarse < 1 ||
      opts.kernel_fine < 1 || opts.kernel_coarse < 1) {
    throw ConfigError("filter bank dimensions must be positive");
  }
  Rng rng(opts.rng_seed);
  FilterBank bank;
  auto make = [&](int out, int kernel, int stride) {
    ConvStage s;
    s.out_channels = out;
    s.in_channels = opts.in_channels;
    s.kernel = kernel;
    s.stride = stride;
    const int fan_in = opts.in_channels * kernel * kernel;
    const double std = 1.0 / std::sqrt(static_cast<double>(fan_in));
    s.weights.resize(static_cast<std::size_t>(out) * fan_in);
    for (auto& w : s.weights) w = static_cast<float>(std * rng.Normal());
    return s;
  };
  bank.stages.push_back(make(opts.channels_fine, opts.kernel_fine, 4));
  bank.stages.push_back(make(opts.channels_coarse, opts.kernel_coarse, 8));
  return bank;
}

namespace {

// Strided valid-start convolution (windows anchored at y*stride, zero padding
// past the bottom/right edge), ReLU, then 2x2 average pooling.
FeatureMap RunStage(const Image& img, const ConvStage& st, Exec exec) {
  const int ch = img.height / st.stride;
  const int cw = img.width / st.stride;
  const int ph = ch / 2;
  const int pw = cw / 2;
  FeatureMap out;
  out.channels = st.out_channels;
  out.height = ph;
  out.width = pw;
  out.data.assign(out.size(), 0.0f);
  const std::size_t plane = static_cast<std::size_t>(img.height) * img.width;
  const int k = st.kernel;

#pragma omp parallel if (exec == Exec::kParallel)
  {
    std::vector<float> conv(static_cast<std::size_t>(ch) * cw);
#pragma omp for schedule(static)
    for (int o = 0; o < st.out_channels; ++o) {
      const float* w = st.weights.data() + static_cast<std::size_t>(o) * st.in_channels * k * k;
      for (int y = 0; y < ch; ++y) {
        for (int x = 0; x < cw; ++x) {
          float acc = 0.0f;
          for (int c = 0; c < st.in_channels; ++c) {
            const float* src = img.data.data() + c * plane;
            const float* wc = w + static_cast<std::size_t>(c) * k * k;
            for (int ky = 0; ky < k; ++ky) {
              int iy = y * st.stride + ky;
              if (iy >= img.height) break;
              for (int kx = 0; kx < k; ++kx) {
                int ix = x * st.stride + kx;
                if (ix >= img.width) break;
                acc += wc[ky * k + kx] * src[static_cast<std::size_t>(iy) * img.width + ix];
              }
            }
          }
          conv[static_cast<std::size_t>(y) * cw + x] = acc > 0.0f ? acc : 0.0f;
        }
      }
      float* dst = out.data.data() + static_cast<std::size_t>(o) * ph * pw;
      for (int y = 0; y < ph; ++y) {
        for (int x = 0; x < pw; ++x) {
          const float* r0 = conv.data() + static_cast<std::size_t>(2 * y) * cw + 2 * x;
          const float* r1 = r0 + cw;
          dst[static_cast<std::size_t>(y) * pw + x] = 0.25f * ((r0[0] + r0[1]) + (r1[0] + r1[1]));
        }
      }
    }
  }
  return out;
}

}  // namespace

MultiScaleFeatures FeaturizeBuiltin(const Image& image, const FilterBank& bank, Exec exec) {
  if (image.height < kMinFeaturizeSize || image.width < kMinFeaturizeSize) {
    throw DataError("image below minimum size 32x32");
  }
  if (image.data.size() != static_cast<std::size_t>(image.channels) * image.height * image.width) {
    throw DataError("invalid input: image payload does not match its shape");
  }
  for (float v : image.data) {
    if (!std::isfinite(v)) throw DataError("invalid input: non-finite pixel");
  }
  MultiScaleFeatures f;
  for (const auto& st : bank.stages) {
    if (st.in_channels != image.channels) throw DataError("filter bank channel mismatch");
    f.scales.push_back(RunStage(image, st, exec));
  }
  return f;
}

}  // namespace incanom
