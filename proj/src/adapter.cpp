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

#include "incanom/adapter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "incanom/memory.hpp"
#include "incanom/resize.hpp"

namespace incanom {
namespace {

constexpr double kNormFloor = 1e-12;

struct ScaleCache {
  std::size_t locations = 0;
  std::vector<std::size_t> offset;  // first location of each image
  std::vector<double> xhat;         // locations x out_dim
  std::vector<double> pre_relu;     // locations x out_dim
  std::vector<double> mean;
  std::vector<double> var;
};

struct ImageCache {
  int grid_h = 0;
  int grid_w = 0;
  std::vector<double> z;     // patches x dim, before L2 normalization
  std::vector<double> norm;  // per patch
  std::vector<double> q;     // normalized
};

struct ForwardCache {
  int dim = 0;
  std::vector<ScaleCache> scales;
  std::vector<ImageCache> images;
};

void CheckCompatible(const MultiScaleFeatures& f, const AdapterParams& p) {
  if (f.scales.size() != p.scales.size()) throw DataError("channel mismatch: scale count differs");
  for (std::size_t s = 0; s < f.scales.size(); ++s) {
    if (f.scales[s].channels != p.scales[s].in_channels) {
      throw DataError("channel mismatch at scale " + std::to_string(s));
    }
    if (f.scales[s].data.size() != f.scales[s].size()) throw DataError("feature payload mismatch");
  }
}

void CheckFinite(std::span<const double> v, const char* name) {
  for (double x : v) {
    if (!std::isfinite(x)) throw NumericError(std::string("numerical failure in ") + name);
  }
}

// Per-channel population moments of a (locations x dim) buffer.
void ChannelMoments(const std::vector<double>& a, std::size_t locations, std::size_t dim,
                    std::vector<double>& mean, std::vector<double>& var, Exec exec) {
  mean.assign(dim, 0.0);
  var.assign(dim, 0.0);
  const auto d = static_cast<std::ptrdiff_t>(dim);
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (std::ptrdiff_t c = 0; c < d; ++c) {
    auto u = static_cast<std::size_t>(c);
    double sum = 0.0;
    for (std::size_t l = 0; l < locations; ++l) sum += a[l * dim + u];
    double mu = sum / static_cast<double>(locations);
    double sq = 0.0;
    for (std::size_t l = 0; l < locations; ++l) {
      double diff = a[l * dim + u] - mu;
      sq += diff * diff;
    }
    mean[u] = mu;
    var[u] = sq / static_cast<double>(locations);
  }
}

// Projects every image of the batch at scale s into one locations x out_dim buffer.
std::vector<double> Project(std::span<const MultiScaleFeatures* const> batch, const ScaleParams& sp,
                            std::size_t s, std::vector<std::size_t>& offset, Exec exec) {
  offset.clear();
  std::size_t total = 0;
  for (const auto* f : batch) {
    offset.push_back(total);
    total += static_cast<std::size_t>(f->scales[s].height) * f->scales[s].width;
  }
  const auto out_dim = static_cast<std::size_t>(sp.out_dim);
  std::vector<double> a(total * out_dim);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& fm = batch[i]->scales[s];
    const std::size_t locs = static_cast<std::size_t>(fm.height) * fm.width;
    kernels::LinearForward(fm.data.data(), static_cast<std::size_t>(fm.channels), locs,
                           sp.weight.data(), sp.bias.data(), out_dim,
                           a.data() + offset[i] * out_dim, exec);
  }
  return a;
}

ForwardCache RunForward(std::span<const MultiScaleFeatures* const> batch, const AdapterParams& p,
                        Mode mode, Exec exec) {
  if (batch.empty()) throw DataError("empty batch");
  for (const auto* f : batch) CheckCompatible(*f, p);
  const auto out_dim = static_cast<std::size_t>(p.out_dim);
  const std::size_t n_scales = p.scales.size();

  ForwardCache cache;
  cache.dim = p.embedding_dim();
  cache.scales.resize(n_scales);
  for (std::size_t s = 0; s < n_scales; ++s) {
    const auto& sp = p.scales[s];
    auto& sc = cache.scales[s];
    std::vector<double> a = Project(batch, sp, s, sc.offset, exec);
    sc.locations = a.size() / out_dim;
    if (mode == Mode::kTrain) {
      ChannelMoments(a, sc.locations, out_dim, sc.mean, sc.var, exec);
    } else {
      sc.mean = sp.running_mean;
      sc.var = sp.running_var;
    }
    std::vector<double> inv_std(out_dim);
    for (std::size_t c = 0; c < out_dim; ++c) inv_std[c] = 1.0 / std::sqrt(sc.var[c] + p.norm_eps);
    sc.xhat.resize(a.size());
    sc.pre_relu.resize(a.size());
    for (std::size_t l = 0; l < sc.locations; ++l) {
      for (std::size_t c = 0; c < out_dim; ++c) {
        std::size_t k = l * out_dim + c;
        double xh = (a[k] - sc.mean[c]) * inv_std[c];
        sc.xhat[k] = xh;
        sc.pre_relu[k] = sp.norm_scale[c] * xh + sp.norm_shift[c];
      }
    }
  }

  cache.images.resize(batch.size());
  const auto dim = static_cast<std::size_t>(cache.dim);
  const auto n_images = static_cast<std::ptrdiff_t>(batch.size());
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
  for (std::ptrdiff_t ii = 0; ii < n_images; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    const auto* f = batch[i];
    auto& ic = cache.images[i];
    ic.grid_h = 0;
    ic.grid_w = 0;
    for (const auto& fm : f->scales) {
      ic.grid_h = std::max(ic.grid_h, fm.height);
      ic.grid_w = std::max(ic.grid_w, fm.width);
    }
    const std::size_t patches = static_cast<std::size_t>(ic.grid_h) * ic.grid_w;
    ic.z.assign(patches * dim, 0.0);
    std::vector<double> chw;
    std::vector<double> big;
    for (std::size_t s = 0; s < n_scales; ++s) {
      const auto& fm = f->scales[s];
      const auto& sc = cache.scales[s];
      const std::size_t locs = static_cast<std::size_t>(fm.height) * fm.width;
      chw.assign(out_dim * locs, 0.0);
      for (std::size_t l = 0; l < locs; ++l) {
        const double* y = sc.pre_relu.data() + (sc.offset[i] + l) * out_dim;
        for (std::size_t c = 0; c < out_dim; ++c) chw[c * locs + l] = y[c] > 0.0 ? y[c] : 0.0;
      }
      const double* src = chw.data();
      if (fm.height != ic.grid_h || fm.width != ic.grid_w) {
        big.assign(out_dim * patches, 0.0);
        ResizeBilinear(chw.data(), static_cast<int>(out_dim), fm.height, fm.width, big.data(),
                       ic.grid_h, ic.grid_w);
        src = big.data();
      }
      for (std::size_t pp = 0; pp < patches; ++pp) {
        for (std::size_t c = 0; c < out_dim; ++c) ic.z[pp * dim + s * out_dim + c] = src[c * patches + pp];
      }
    }
    ic.norm.resize(patches);
    ic.q.resize(patches * dim);
    for (std::size_t pp = 0; pp < patches; ++pp) {
      double sq = 0.0;
      for (std::size_t c = 0; c < dim; ++c) sq += ic.z[pp * dim + c] * ic.z[pp * dim + c];
      double n = std::sqrt(sq);
      ic.norm[pp] = n;
      double inv = 1.0 / (n + kNormFloor);
      for (std::size_t c = 0; c < dim; ++c) ic.q[pp * dim + c] = ic.z[pp * dim + c] * inv;
    }
  }
  return cache;
}

PatchEmbeddings ToEmbeddings(const ImageCache& ic, int dim) {
  PatchEmbeddings out;
  out.grid_h = ic.grid_h;
  out.grid_w = ic.grid_w;
  out.dim = dim;
  out.vectors.resize(ic.q.size());
  for (std::size_t i = 0; i < ic.q.size(); ++i) out.vectors[i] = static_cast<float>(ic.q[i]);
  return out;
}

void UpdateRunning(AdapterParams& p, const ForwardCache& cache) {
  const double m = p.norm_momentum;
  for (std::size_t s = 0; s < p.scales.size(); ++s) {
    auto& sp = p.scales[s];
    const auto& sc = cache.scales[s];
    const double n = static_cast<double>(sc.locations);
    const double unbias = sc.locations > 1 ? n / (n - 1.0) : 1.0;
    for (int c = 0; c < sp.out_dim; ++c) {
      auto u = static_cast<std::size_t>(c);
      sp.running_mean[u] = (1.0 - m) * sp.running_mean[u] + m * sc.mean[u];
      sp.running_var[u] = (1.0 - m) * sp.running_var[u] + m * sc.var[u] * unbias;
    }
  }
}

// Nearest prototype by explicit squared difference; lowest index wins ties.
std::size_t NearestPrototype(const double* q, const PrototypeSet& protos, double& dist_sq) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  const std::size_t dim = protos.vectors.cols;
  for (std::size_t j = 0; j < protos.vectors.rows; ++j) {
    auto pr = protos.vectors.row(j);
    double d = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
      double diff = q[c] - static_cast<double>(pr[c]);
      d += diff * diff;
    }
    if (d < best_d) {
      best_d = d;
      best = j;
    }
  }
  dist_sq = best_d;
  return best;
}

void CheckPrototypes(const PrototypeSet& protos, int dim) {
  if (protos.vectors.rows == 0) throw DataError("no prototypes");
  if (protos.vectors.cols != static_cast<std::size_t>(dim)) throw DataError("prototype dim mismatch");
}

double CacheLoss(const ForwardCache& cache, const PrototypeSet& protos) {
  const auto dim = static_cast<std::size_t>(cache.dim);
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& ic : cache.images) {
    const std::size_t patches = ic.q.size() / dim;
    for (std::size_t pp = 0; pp < patches; ++pp) {
      double d2 = 0.0;
      NearestPrototype(ic.q.data() + pp * dim, protos, d2);
      sum += std::sqrt(d2);
    }
    count += patches;
  }
  return sum / static_cast<double>(count);
}

}  // namespace

AdapterParams InitAdapter(std::span<const int> in_channels, int out_dim, std::uint64_t rng_seed) {
  if (in_channels.empty()) throw ConfigError("adapter needs at least one scale");
  if (out_dim < 1) throw ConfigError("adapter out_dim must be positive");
  Rng rng(rng_seed);
  AdapterParams p;
  p.out_dim = out_dim;
  for (int c : in_channels) {
    if (c < 1) throw ConfigError("adapter in_channels must be positive");
    ScaleParams sp;
    sp.in_channels = c;
    sp.out_dim = out_dim;
    const double std = std::sqrt(2.0 / static_cast<double>(c));
    sp.weight.resize(static_cast<std::size_t>(out_dim) * c);
    for (auto& w : sp.weight) w = std * rng.Normal();
    sp.bias.assign(out_dim, 0.0);
    sp.norm_scale.assign(out_dim, 1.0);
    sp.norm_shift.assign(out_dim, 0.0);
    sp.running_mean.assign(out_dim, 0.0);
    sp.running_var.assign(out_dim, 1.0);
    p.scales.push_back(std::move(sp));
  }
  return p;
}

void InitRunningStats(AdapterParams& params, std::span<const MultiScaleFeatures* const> images) {
  if (images.empty()) return;
  const auto out_dim = static_cast<std::size_t>(params.out_dim);
  for (const auto* f : images) CheckCompatible(*f, params);
  for (std::size_t s = 0; s < params.scales.size(); ++s) {
    std::vector<std::size_t> offset;
    auto a = Project(images, params.scales[s], s, offset, Exec::kParallel);
    std::vector<double> mean, var;
    ChannelMoments(a, a.size() / out_dim, out_dim, mean, var, Exec::kParallel);
    for (std::size_t c = 0; c < out_dim; ++c) {
      params.scales[s].running_mean[c] = mean[c];
      params.scales[s].running_var[c] = var[c] > 0.0 ? var[c] : 1.0;
    }
  }
}

std::size_t TrainableCount(const AdapterParams& params) {
  std::size_t n = 0;
  for (const auto& sp : params.scales) {
    n += sp.weight.size() + sp.bias.size() + sp.norm_scale.size() + sp.norm_shift.size();
  }
  return n;
}

std::vector<double> FlattenTrainable(const AdapterParams& params) {
  std::vector<double> out;
  out.reserve(TrainableCount(params));
  for (const auto& sp : params.scales) {
    out.insert(out.end(), sp.weight.begin(), sp.weight.end());
    out.insert(out.end(), sp.bias.begin(), sp.bias.end());
    out.insert(out.end(), sp.norm_scale.begin(), sp.norm_scale.end());
    out.insert(out.end(), sp.norm_shift.begin(), sp.norm_shift.end());
  }
  return out;
}

void AssignTrainable(AdapterParams& params, std::span<const double> values) {
  if (values.size() != TrainableCount(params)) throw DataError("trainable vector size mismatch");
  std::size_t k = 0;
  auto take = [&](std::vector<double>& dst) {
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(k),
              values.begin() + static_cast<std::ptrdiff_t>(k + dst.size()), dst.begin());
    k += dst.size();
  };
  for (auto& sp : params.scales) {
    take(sp.weight);
    take(sp.bias);
    take(sp.norm_scale);
    take(sp.norm_shift);
  }
}

PatchEmbeddings Embed(const MultiScaleFeatures& features, const AdapterParams& params, Exec exec) {
  const MultiScaleFeatures* one[] = {&features};
  auto cache = RunForward(one, params, Mode::kEval, exec);
  return ToEmbeddings(cache.images.front(), cache.dim);
}

std::vector<PatchEmbeddings> ForwardTrain(std::span<const MultiScaleFeatures* const> batch,
                                          AdapterParams& params, Exec exec) {
  auto cache = RunForward(batch, params, Mode::kTrain, exec);
  UpdateRunning(params, cache);
  std::vector<PatchEmbeddings> out;
  out.reserve(cache.images.size());
  for (const auto& ic : cache.images) out.push_back(ToEmbeddings(ic, cache.dim));
  return out;
}

double PrototypeLoss(const PatchEmbeddings& q, const PrototypeSet& protos) {
  CheckPrototypes(protos, q.dim);
  const std::size_t patches = q.patch_count();
  if (patches == 0) throw DataError("empty embeddings");
  double sum = 0.0;
  std::vector<double> row(static_cast<std::size_t>(q.dim));
  for (std::size_t pp = 0; pp < patches; ++pp) {
    auto r = q.row(pp);
    std::copy(r.begin(), r.end(), row.begin());
    double d2 = 0.0;
    NearestPrototype(row.data(), protos, d2);
    sum += std::sqrt(d2);
  }
  return sum / static_cast<double>(patches);
}

double TrainLoss(std::span<const MultiScaleFeatures* const> batch, const AdapterParams& params,
                 const PrototypeSet& protos) {
  CheckPrototypes(protos, params.embedding_dim());
  auto cache = RunForward(batch, params, Mode::kTrain, Exec::kSerial);
  return CacheLoss(cache, protos);
}

namespace {

LossGradient LossGradientImpl(std::span<const MultiScaleFeatures* const> batch,
                              const AdapterParams& params, const PrototypeSet& protos, Exec exec,
                              ForwardCache& cache) {
  CheckPrototypes(protos, params.embedding_dim());
  cache = RunForward(batch, params, Mode::kTrain, exec);
  const auto dim = static_cast<std::size_t>(cache.dim);
  const auto out_dim = static_cast<std::size_t>(params.out_dim);
  const std::size_t n_scales = params.scales.size();

  std::size_t total_patches = 0;
  for (const auto& ic : cache.images) total_patches += ic.q.size() / dim;
  const double inv_count = 1.0 / static_cast<double>(total_patches);

  // d loss / d relu output, per scale, locations x out_dim.
  std::vector<std::vector<double>> d_relu(n_scales);
  for (std::size_t s = 0; s < n_scales; ++s) d_relu[s].assign(cache.scales[s].locations * out_dim, 0.0);

  double loss_sum = 0.0;
  for (std::size_t i = 0; i < cache.images.size(); ++i) {
    const auto& ic = cache.images[i];
    const std::size_t patches = ic.q.size() / dim;
    std::vector<double> dz(patches * dim, 0.0);
    for (std::size_t pp = 0; pp < patches; ++pp) {
      const double* q = ic.q.data() + pp * dim;
      double d2 = 0.0;
      std::size_t j = NearestPrototype(q, protos, d2);
      double dist = std::sqrt(d2);
      loss_sum += dist;
      if (dist == 0.0) continue;
      auto pr = protos.vectors.row(j);
      std::vector<double> dq(dim);
      for (std::size_t c = 0; c < dim; ++c) dq[c] = (q[c] - static_cast<double>(pr[c])) * inv_count / dist;
      // q = z / (|z| + eps)
      const double n = ic.norm[pp];
      const double denom = n + kNormFloor;
      double zg = 0.0;
      const double* z = ic.z.data() + pp * dim;
      for (std::size_t c = 0; c < dim; ++c) zg += z[c] * dq[c];
      const double coef = n > 0.0 ? zg / (n * denom * denom) : 0.0;
      for (std::size_t c = 0; c < dim; ++c) dz[pp * dim + c] = dq[c] / denom - z[c] * coef;
    }
    // Split back into scales and undo the bilinear alignment.
    const auto* f = batch[i];
    std::vector<double> g_big;
    std::vector<double> g_small;
    for (std::size_t s = 0; s < n_scales; ++s) {
      const auto& fm = f->scales[s];
      const std::size_t locs = static_cast<std::size_t>(fm.height) * fm.width;
      g_big.assign(out_dim * patches, 0.0);
      for (std::size_t pp = 0; pp < patches; ++pp) {
        for (std::size_t c = 0; c < out_dim; ++c) g_big[c * patches + pp] = dz[pp * dim + s * out_dim + c];
      }
      const double* g = g_big.data();
      if (fm.height != ic.grid_h || fm.width != ic.grid_w) {
        g_small.assign(out_dim * locs, 0.0);
        ResizeBilinearBackward(g_big.data(), static_cast<int>(out_dim), fm.height, fm.width,
                               ic.grid_h, ic.grid_w, g_small.data());
        g = g_small.data();
      }
      double* dst = d_relu[s].data() + cache.scales[s].offset[i] * out_dim;
      for (std::size_t l = 0; l < locs; ++l) {
        for (std::size_t c = 0; c < out_dim; ++c) dst[l * out_dim + c] = g[c * locs + l];
      }
    }
  }

  LossGradient result;
  result.loss = loss_sum * inv_count;
  result.gradient.assign(TrainableCount(params), 0.0);
  std::size_t base = 0;
  for (std::size_t s = 0; s < n_scales; ++s) {
    const auto& sp = params.scales[s];
    const auto& sc = cache.scales[s];
    const std::size_t in_dim = static_cast<std::size_t>(sp.in_channels);
    const std::size_t L = sc.locations;
    double* g_w = result.gradient.data() + base;
    double* g_b = g_w + sp.weight.size();
    double* g_scale = g_b + sp.bias.size();
    double* g_shift = g_scale + sp.norm_scale.size();
    base += sp.weight.size() + sp.bias.size() + sp.norm_scale.size() + sp.norm_shift.size();

    // Through ReLU and the affine part of the normalization; d_a via the
    // batch-statistics normalization Jacobian.
    std::vector<double> d_a(L * out_dim);
    const auto od = static_cast<std::ptrdiff_t>(out_dim);
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
    for (std::ptrdiff_t cc = 0; cc < od; ++cc) {
      const auto c = static_cast<std::size_t>(cc);
      double sum_dy = 0.0, sum_dy_xhat = 0.0;
      for (std::size_t l = 0; l < L; ++l) {
        std::size_t k = l * out_dim + c;
        double dy = sc.pre_relu[k] > 0.0 ? d_relu[s][k] : 0.0;
        sum_dy += dy;
        sum_dy_xhat += dy * sc.xhat[k];
      }
      g_scale[c] = sum_dy_xhat;
      g_shift[c] = sum_dy;
      const double gamma = sp.norm_scale[c];
      const double inv_std = 1.0 / std::sqrt(sc.var[c] + params.norm_eps);
      const double mean_dxhat = gamma * sum_dy / static_cast<double>(L);
      const double mean_dxhat_xhat = gamma * sum_dy_xhat / static_cast<double>(L);
      for (std::size_t l = 0; l < L; ++l) {
        std::size_t k = l * out_dim + c;
        double dy = sc.pre_relu[k] > 0.0 ? d_relu[s][k] : 0.0;
        d_a[k] = inv_std * (gamma * dy - mean_dxhat - sc.xhat[k] * mean_dxhat_xhat);
      }
    }

    // Linear map: dW = sum_l d_a[l] x[l]^T, db = sum_l d_a[l].
#pragma omp parallel for schedule(static) if (exec == Exec::kParallel)
    for (std::ptrdiff_t oo = 0; oo < od; ++oo) {
      const auto o = static_cast<std::size_t>(oo);
      double db = 0.0;
      double* w_row = g_w + o * in_dim;
      for (std::size_t i = 0; i < batch.size(); ++i) {
        const auto& fm = batch[i]->scales[s];
        const std::size_t locs = static_cast<std::size_t>(fm.height) * fm.width;
        const std::size_t off = sc.offset[i];
        for (std::size_t l = 0; l < locs; ++l) {
          double da = d_a[(off + l) * out_dim + o];
          db += da;
          if (da == 0.0) continue;
          for (std::size_t c = 0; c < in_dim; ++c) w_row[c] += da * static_cast<double>(fm.data[c * locs + l]);
        }
      }
      g_b[o] = db;
    }
  }
  if (!std::isfinite(result.loss)) throw NumericError("numerical failure in loss");
  CheckFinite(result.gradient, "adapter gradient");
  return result;
}

}  // namespace

LossGradient ComputeLossGradient(std::span<const MultiScaleFeatures* const> batch,
                                 const AdapterParams& params, const PrototypeSet& protos,
                                 Exec exec) {
  ForwardCache cache;
  return LossGradientImpl(batch, params, protos, exec, cache);
}

AdamState MakeAdam(const AdapterParams& params, double lr) {
  AdamState st;
  st.m.assign(TrainableCount(params), 0.0);
  st.v.assign(TrainableCount(params), 0.0);
  st.lr = lr;
  return st;
}

void AdamStep(AdapterParams& params, std::span<const double> gradient, AdamState& state) {
  const std::size_t n = TrainableCount(params);
  if (gradient.size() != n) throw DataError("gradient size mismatch");
  if (state.m.size() != n || state.v.size() != n) throw DataError("optimizer state size mismatch");
  state.step += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto theta = FlattenTrainable(params);
  for (std::size_t i = 0; i < n; ++i) {
    const double g = gradient[i];
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * g;
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * g * g;
    const double m_hat = state.m[i] / bc1;
    const double v_hat = state.v[i] / bc2;
    theta[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
  }
  CheckFinite(theta, "adapter parameters");
  AssignTrainable(params, theta);
}

std::vector<double> TrainEpochs(std::span<const MultiScaleFeatures* const> images,
                                AdapterParams& params, AdamState& optimizer,
                                const PrototypeSet& protos, const TrainOptions& opts, Exec exec) {
  if (images.empty()) throw DataError("empty training set");
  if (opts.batch_size < 1) throw ConfigError("batch size must be positive");
  std::vector<double> losses;
  std::vector<std::size_t> order(images.size());
  for (int e = 0; e < opts.epochs; ++e) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(MixSeed(opts.rng_seed, static_cast<std::uint64_t>(e)));
    rng.Shuffle(order);
    double sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opts.batch_size)) {
      std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opts.batch_size));
      std::vector<const MultiScaleFeatures*> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(images[order[k]]);
      ForwardCache cache;
      auto lg = LossGradientImpl(batch, params, protos, exec, cache);
      UpdateRunning(params, cache);
      AdamStep(params, lg.gradient, optimizer);
      sum += lg.loss;
      ++batches;
    }
    losses.push_back(sum / static_cast<double>(batches));
    if (opts.on_epoch) opts.on_epoch(e, params);
  }
  return losses;
}

PrototypeSet SelectPrototypes(const Matrix& vectors, int budget, Exec exec) {
  if (vectors.rows == 0) throw DataError("empty seed");
  if (budget < 1) throw ConfigError("prototype budget must be positive");
  const double ratio = std::min(1.0, static_cast<double>(budget) / static_cast<double>(vectors.rows));
  const auto picks = CoresetGreedy(vectors, ratio, 0, exec);
  PrototypeSet protos;
  protos.vectors = Matrix(picks.size(), vectors.cols);
  for (std::size_t i = 0; i < picks.size(); ++i) {
    auto src = vectors.row(picks[i]);
    std::copy(src.begin(), src.end(), protos.vectors.row(i).begin());
  }
  return protos;
}

WarmupResult Warmup(std::span<const MultiScaleFeatures* const> seed, AdapterParams params,
                    const WarmupOptions& opts, Exec exec) {
  if (seed.empty()) throw DataError("empty seed");
  if (opts.epochs < 0) throw ConfigError("epochs must be non-negative");
  std::vector<PatchEmbeddings> embedded;
  embedded.reserve(seed.size());
  std::size_t rows = 0;
  for (const auto* f : seed) {
    embedded.push_back(Embed(*f, params, exec));
    rows += embedded.back().patch_count();
  }
  const auto dim = static_cast<std::size_t>(params.embedding_dim());
  Matrix v_seed(rows, dim);
  std::size_t r = 0;
  for (const auto& q : embedded) {
    std::copy(q.vectors.begin(), q.vectors.end(), v_seed.data.begin() + static_cast<std::ptrdiff_t>(r * dim));
    r += q.patch_count();
  }
  WarmupResult out;
  out.prototypes = SelectPrototypes(v_seed, opts.proto_budget, exec);
  out.optimizer = MakeAdam(params, opts.lr);
  TrainOptions topts;
  topts.epochs = opts.epochs;
  topts.batch_size = opts.batch_size;
  topts.rng_seed = opts.rng_seed;
  topts.on_epoch = opts.on_epoch;
  if (opts.epochs > 0) {
    out.epoch_losses = TrainEpochs(seed, params, out.optimizer, out.prototypes, topts, exec);
  }
  out.params = std::move(params);
  return out;
}

double MeanPrototypeLoss(std::span<const MultiScaleFeatures* const> images,
                         const AdapterParams& params, const PrototypeSet& protos) {
  if (images.empty()) throw DataError("no images");
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto* f : images) {
    auto q = Embed(*f, params);
    sum += PrototypeLoss(q, protos) * static_cast<double>(q.patch_count());
    count += q.patch_count();
  }
  return sum / static_cast<double>(count);
}

}  // namespace incanom
