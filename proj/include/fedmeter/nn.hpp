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

#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fedmeter/rng.hpp"

namespace fedmeter {

/// One-hidden-layer regression network: ReLU hidden layer, linear output
/// neuron. All parameters live in one flat vector so model arithmetic
/// (deltas, aggregation, clipping, noising) is plain vector algebra.
///
/// Flat layout: [W1 row-major (hidden x input) | b1 | W2 (1 x hidden) | b2].
struct MLPShape {
  int input_dim = 0;
  int hidden_dim = 0;
  int output_dim = 1;  // fixed

  int param_count() const {
    return (input_dim + 1) * hidden_dim + (hidden_dim + 1) * output_dim;
  }
  // Offsets into the flat vector.
  int w1_offset() const { return 0; }
  int b1_offset() const { return input_dim * hidden_dim; }
  int w2_offset() const { return b1_offset() + hidden_dim; }
  int b2_offset() const { return w2_offset() + hidden_dim * output_dim; }

  /// Throws std::invalid_argument unless input_dim >= 1, hidden_dim >= 1 and
  /// output_dim == 1.
  void validate() const;
};

/// Flat parameter vector. Also used for updates (deltas) and gradients,
/// which share the same length and layout.
struct ParamVector {
  std::vector<double> values;

  ParamVector() = default;
  explicit ParamVector(std::size_t n, double fill = 0.0) : values(n, fill) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  const double& operator[](std::size_t i) const { return values[i]; }

  bool all_finite() const;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;
};

using GradVector = ParamVector;

// Elementwise helpers.
double dot(const ParamVector& a, const ParamVector& b);
double l2_norm(const ParamVector& a);
/// dst += scale * src
void axpy(ParamVector& dst, double scale, const ParamVector& src);
ParamVector subtract(const ParamVector& a, const ParamVector& b);

/// One observation: features are
/// [net_load kW, irradiance W/m^2, temperature degC, humidity %, wind m/s]
/// for the solar task, but any length matching the shape's input_dim works.
struct Sample {
  std::vector<double> features;
  double target = 0.0;
};

/// Weights uniform in (-1/sqrt(fan_in), +1/sqrt(fan_in)) per layer, biases
/// zero. Deterministic given the stream.
ParamVector init_params(const MLPShape& shape, Rng& rng);

/// hidden = relu(W1 x + b1); returns W2 hidden + b2.
double forward(const ParamVector& params, const MLPShape& shape,
               std::span<const double> x);

/// Mean of squared residuals over `data`. Throws on empty data.
double mse_loss(const ParamVector& params, const MLPShape& shape,
                std::span<const Sample> data);

/// Exact analytic gradient of mse_loss over the batch (backprop).
GradVector grad_mse(const ParamVector& params, const MLPShape& shape,
                    std::span<const Sample> batch);

/// grad_mse(v) + mu * (v - w_global): gradient of the personalized objective
/// F(v) + mu/2 ||v - w_global||^2.
GradVector grad_ditto(const ParamVector& v, const ParamVector& w_global,
                      const MLPShape& shape, std::span<const Sample> batch,
                      double mu);

using GradFn =
    std::function<GradVector(const ParamVector&, std::span<const Sample>)>;

/// Mini-batch SGD: per epoch, shuffles a copy of the data (seeded), walks
/// batches of `batch_size` (last one may be short) and applies
/// p <- p - lr * grad_fn(p, batch). epochs == 0 returns start unchanged.
ParamVector sgd_epochs(const ParamVector& start, const MLPShape& shape,
                       std::span<const Sample> data, int epochs,
                       int batch_size, double lr, const GradFn& grad_fn,
                       Rng& rng);

}  // namespace fedmeter
