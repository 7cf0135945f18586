// Copyright 2026 The FedMeter Authors
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

#include "fedmeter/nn.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace fedmeter {

void MLPShape::validate() const {
  if (input_dim < 1) throw std::invalid_argument("MLPShape: input_dim must be >= 1");
  if (hidden_dim < 1) throw std::invalid_argument("MLPShape: hidden_dim must be >= 1");
  if (output_dim != 1) throw std::invalid_argument("MLPShape: output_dim is fixed at 1");
}

bool ParamVector::all_finite() const {
  for (double v : values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double dot(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double l2_norm(const ParamVector& a) { return std::sqrt(dot(a, a)); }

void axpy(ParamVector& dst, double scale, const ParamVector& src) {
  if (dst.size() != src.size()) throw std::invalid_argument("axpy: length mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
}

ParamVector subtract(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("subtract: length mismatch");
  ParamVector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  return out;
}

ParamVector init_params(const MLPShape& shape, Rng& rng) {
  shape.validate();
  ParamVector p(static_cast<std::size_t>(shape.param_count()));
  const double bound1 = 1.0 / std::sqrt(static_cast<double>(shape.input_dim));
  const double bound2 = 1.0 / std::sqrt(static_cast<double>(shape.hidden_dim));
  double* w1 = &p[shape.w1_offset()];
  for (int i = 0; i < shape.hidden_dim * shape.input_dim; ++i) {
    w1[i] = rng.uniform(-bound1, bound1);
  }
  // b1 stays zero.
  double* w2 = &p[shape.w2_offset()];
  for (int i = 0; i < shape.output_dim * shape.hidden_dim; ++i) {
    w2[i] = rng.uniform(-bound2, bound2);
  }
  // b2 stays zero.
  return p;
}

namespace {

void check_dims(const ParamVector& params, const MLPShape& shape,
                std::size_t feature_len) {
  if (static_cast<int>(params.size()) != shape.param_count()) {
    throw std::invalid_argument("forward: parameter vector length " +
                                std::to_string(params.size()) +
                                " does not match shape param_count " +
                                std::to_string(shape.param_count()));
  }
  if (static_cast<int>(feature_len) != shape.input_dim) {
    throw std::invalid_argument("forward: feature length " +
                                std::to_string(feature_len) +
                                " does not match input_dim " +
                                std::to_string(shape.input_dim));
  }
}

}  // namespace

double forward(const ParamVector& params, const MLPShape& shape,
               std::span<const double> x) {
  check_dims(params, shape, x.size());
  const double* w1 = &params[shape.w1_offset()];
  const double* b1 = &params[shape.b1_offset()];
  const double* w2 = &params[shape.w2_offset()];
  const double b2 = params[shape.b2_offset()];
  const int in = shape.input_dim;
  double out = b2;
  for (int j = 0; j < shape.hidden_dim; ++j) {
    double z = b1[j];
    const double* row = w1 + static_cast<std::size_t>(j) * in;
    for (int k = 0; k < in; ++k) z += row[k] * x[k];
    if (z > 0.0) out += w2[j] * z;
  }
  return out;
}

double mse_loss(const ParamVector& params, const MLPShape& shape,
                std::span<const Sample> data) {
  if (data.empty()) throw std::invalid_argument("mse_loss: empty data");
  double acc = 0.0;
  for (const Sample& s : data) {
    double r = forward(params, shape, s.features) - s.target;
    acc += r * r;
  }
  return acc / static_cast<double>(data.size());
}

GradVector grad_mse(const ParamVector& params, const MLPShape& shape,
                    std::span<const Sample> batch) {
  if (batch.empty()) throw std::invalid_argument("grad_mse: empty batch");
  check_dims(params, shape, batch.front().features.size());
  const int in = shape.input_dim;
  const int hid = shape.hidden_dim;
  const double* w1 = &params[shape.w1_offset()];
  const double* b1 = &params[shape.b1_offset()];
  const double* w2 = &params[shape.w2_offset()];
  const double b2 = params[shape.b2_offset()];

  GradVector g(params.size());
  double* gw1 = &g[shape.w1_offset()];
  double* gb1 = &g[shape.b1_offset()];
  double* gw2 = &g[shape.w2_offset()];
  double* gb2 = &g[shape.b2_offset()];

  std::vector<double> act(static_cast<std::size_t>(hid));
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  for (const Sample& s : batch) {
    const double* x = s.features.data();
    double out = b2;
    for (int j = 0; j < hid; ++j) {
      double z = b1[j];
      const double* row = w1 + static_cast<std::size_t>(j) * in;
      for (int k = 0; k < in; ++k) z += row[k] * x[k];
      act[j] = z > 0.0 ? z : 0.0;
      out += w2[j] * act[j];
    }
    const double go = 2.0 * (out - s.target) * inv_n;
    *gb2 += go;
    for (int j = 0; j < hid; ++j) {
      gw2[j] += go * act[j];
      if (act[j] > 0.0) {
        const double dz = go * w2[j];
        gb1[j] += dz;
        double* grow = gw1 + static_cast<std::size_t>(j) * in;
        for (int k = 0; k < in; ++k) grow[k] += dz * x[k];
      }
    }
  }
  return g;
}

GradVector grad_ditto(const ParamVector& v, const ParamVector& w_global,
                      const MLPShape& shape, std::span<const Sample> batch,
                      double mu) {
  if (v.size() != w_global.size()) {
    throw std::invalid_argument("grad_ditto: personalized and global vectors differ in length");
  }
  if (mu < 0.0) throw std::invalid_argument("grad_ditto: mu must be >= 0");
  GradVector g = grad_mse(v, shape, batch);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] += mu * (v[i] - w_global[i]);
  return g;
}

ParamVector sgd_epochs(const ParamVector& start, const MLPShape& shape,
                       std::span<const Sample> data, int epochs,
                       int batch_size, double lr, const GradFn& grad_fn,
                       Rng& rng) {
  if (epochs < 0) throw std::invalid_argument("sgd_epochs: epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("sgd_epochs: batch_size must be >= 1");
  if (lr < 0.0) throw std::invalid_argument("sgd_epochs: lr must be >= 0");
  if (start.size() != static_cast<std::size_t>(shape.param_count())) {
    throw std::invalid_argument("sgd_epochs: parameter size mismatch");
  }
  ParamVector p = start;
  if (epochs == 0 || data.empty()) return p;
  // Minibatch steps are norm-bounded. The limit is far above any gradient
  // seen in a calibrated run; it only engages when training starts from a
  // pathological point (e.g., a broadcast swamped by privacy noise), where
  // unbounded steps would overflow. Bounded steps keep every parameter
  // finite and let descent recover instead of diverging.
  constexpr double kMaxStepNorm = 1.0e3;
  std::vector<Sample> shuffled(data.begin(), data.end());
  for (int e = 0; e < epochs; ++e) {
    shuffle(shuffled, rng);
    for (std::size_t off = 0; off < shuffled.size();
         off += static_cast<std::size_t>(batch_size)) {
      std::size_t len = std::min(static_cast<std::size_t>(batch_size),
                                 shuffled.size() - off);
      GradVector g =
          grad_fn(p, std::span<const Sample>(shuffled.data() + off, len));
      const double norm = l2_norm(g);
      if (norm > kMaxStepNorm) {
        const double scale = kMaxStepNorm / norm;
        for (std::size_t i = 0; i < g.size(); ++i) g[i] *= scale;
      }
      axpy(p, -lr, g);
    }
  }
  return p;
}

}  // namespace fedmeter
