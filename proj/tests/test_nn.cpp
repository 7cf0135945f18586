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
#include <vector>

#include "doctest.h"
#include "fedmeter/rng.hpp"
#include "support/oracles.hpp"

namespace {

using fedmeter::GradVector;
using fedmeter::MLPShape;
using fedmeter::ParamVector;
using fedmeter::Rng;
using fedmeter::Sample;

std::vector<Sample> random_batch(int count, int input_dim, Rng& rng) {
  std::vector<Sample> batch(static_cast<std::size_t>(count));
  for (Sample& s : batch) {
    s.features.resize(static_cast<std::size_t>(input_dim));
    for (double& f : s.features) f = rng.uniform01();
    s.target = rng.uniform(-1.0, 1.0);
  }
  return batch;
}

// The hidden layer is piecewise linear; finite differences are only valid
// where no unit sits within `margin` of its kink for any sample. A 1e-5
// coordinate step moves pre-activations by at most 1e-5 (features are in
// [0,1]), so a 1e-4 margin guarantees every perturbed evaluation stays on
// the same linear piece.
bool away_from_kinks(const ParamVector& p, const MLPShape& shape,
                     const std::vector<Sample>& batch, double margin) {
  for (const Sample& s : batch) {
    for (int j = 0; j < shape.hidden_dim; ++j) {
      double z = p[static_cast<std::size_t>(shape.b1_offset() + j)];
      for (int k = 0; k < shape.input_dim; ++k) {
        z += p[static_cast<std::size_t>(shape.w1_offset() +
                                        j * shape.input_dim + k)] *
             s.features[static_cast<std::size_t>(k)];
      }
      if (std::fabs(z) < margin) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("shape arithmetic and validation") {
  MLPShape shape{5, 40, 1};
  CHECK(shape.param_count() == 281);  // 6*40 weights+bias in, 41 out
  CHECK(shape.w1_offset() == 0);
  CHECK(shape.b1_offset() == 200);
  CHECK(shape.w2_offset() == 240);
  CHECK(shape.b2_offset() == 280);
  CHECK_NOTHROW(shape.validate());
  CHECK_THROWS_AS((MLPShape{0, 4, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MLPShape{4, 0, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MLPShape{4, 4, 2}.validate()), std::invalid_argument);
}

TEST_CASE("initialization: uniform fan-in bounds, zero biases, seeded") {
  MLPShape shape{5, 40, 1};
  Rng rng_a(7);
  Rng rng_b(7);
  ParamVector a = fedmeter::init_params(shape, rng_a);
  ParamVector b = fedmeter::init_params(shape, rng_b);
  CHECK(a == b);
  const double bound1 = 1.0 / std::sqrt(5.0);
  const double bound2 = 1.0 / std::sqrt(40.0);
  for (int i = 0; i < 200; ++i) {
    CHECK(std::fabs(a[static_cast<std::size_t>(i)]) < bound1);
  }
  for (int j = 0; j < 40; ++j) {
    CHECK(a[static_cast<std::size_t>(shape.b1_offset() + j)] == 0.0);
    CHECK(std::fabs(a[static_cast<std::size_t>(shape.w2_offset() + j)]) < bound2);
  }
  CHECK(a[static_cast<std::size_t>(shape.b2_offset())] == 0.0);
}

TEST_CASE("forward pass matches a hand computation") {
  // (2,2,1): W1 = [[1,-1],[2,0]], b1 = (0.5,-3), W2 = (1,2), b2 = 0.25.
  MLPShape shape{2, 2, 1};
  ParamVector p(9);
  p[0] = 1.0; p[1] = -1.0; p[2] = 2.0; p[3] = 0.0;  // W1 rows
  p[4] = 0.5; p[5] = -3.0;                          // b1
  p[6] = 1.0; p[7] = 2.0;                           // W2
  p[8] = 0.25;                                      // b2
  // x = (1, 2): unit 0 pre-act 1-2+0.5 = -0.5 -> 0; unit 1: 2-3 = -1 -> 0.
  const std::vector<double> x1{1.0, 2.0};
  CHECK(fedmeter::forward(p, shape, x1) == doctest::Approx(0.25).epsilon(1e-15));
  // x = (2, 0.5): unit 0: 2-0.5+0.5 = 2; unit 1: 4-3 = 1 -> 0.25+2+2 = 4.25.
  const std::vector<double> x2{2.0, 0.5};
  CHECK(fedmeter::forward(p, shape, x2) == doctest::Approx(4.25).epsilon(1e-15));
  const std::vector<double> bad{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(fedmeter::forward(p, shape, bad), std::invalid_argument);
}

TEST_CASE("mse loss: hand value and empty-data error") {
  MLPShape shape{2, 2, 1};
  ParamVector p(9);  // all zeros: prediction is always 0
  std::vector<Sample> data{{{0.0, 0.0}, 1.0}, {{1.0, 1.0}, 3.0}};
  CHECK(fedmeter::mse_loss(p, shape, data) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_THROWS_AS(fedmeter::mse_loss(p, shape, std::span<const Sample>{}),
                  std::invalid_argument);
}

TEST_CASE("plain gradient matches central finite differences") {
  const MLPShape shape{5, 40, 1};
  Rng rng(11);
  ParamVector p;
  std::vector<Sample> batch;
  bool found = false;
  for (int attempt = 0; attempt < 100 && !found; ++attempt) {
    p = fedmeter::init_params(shape, rng);
    batch = random_batch(8, 5, rng);
    found = away_from_kinks(p, shape, batch, 1e-4);
  }
  REQUIRE(found);

  const GradVector g = fedmeter::grad_mse(p, shape, batch);
  auto loss = [&](const ParamVector& q) {
    return fedmeter::mse_loss(q, shape, batch);
  };
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t coord = static_cast<std::size_t>(
        rng.below(static_cast<std::uint64_t>(shape.param_count())));
    const double fd = oracles::central_fd(loss, p, coord, 1e-5);
    CHECK(oracles::relative_error(g[coord], fd) <= 1e-6);
    ++checked;
  }
  CHECK(checked >= 50);
}

TEST_CASE("proximal gradient: identity and finite differences") {
  const MLPShape shape{5, 40, 1};
  const double mu = 0.37;
  Rng rng(13);
  ParamVector v;
  ParamVector w;
  std::vector<Sample> batch;
  bool found = false;
  for (int attempt = 0; attempt < 100 && !found; ++attempt) {
    v = fedmeter::init_params(shape, rng);
    w = fedmeter::init_params(shape, rng);
    batch = random_batch(6, 5, rng);
    found = away_from_kinks(v, shape, batch, 1e-4);
  }
  REQUIRE(found);

  const GradVector gd = fedmeter::grad_ditto(v, w, shape, batch, mu);
  const GradVector gm = fedmeter::grad_mse(v, shape, batch);
  for (std::size_t i = 0; i < gd.size(); ++i) {
    CHECK(gd[i] == doctest::Approx(gm[i] + mu * (v[i] - w[i])).epsilon(1e-12));
  }

  auto objective = [&](const ParamVector& q) {
    double reg = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double d = q[i] - w[i];
      reg += d * d;
    }
    return fedmeter::mse_loss(q, shape, batch) + 0.5 * mu * reg;
  };
  for (int trial = 0; trial < 60; ++trial) {
    const std::size_t coord = static_cast<std::size_t>(
        rng.below(static_cast<std::uint64_t>(shape.param_count())));
    const double fd = oracles::central_fd(objective, v, coord, 1e-5);
    CHECK(oracles::relative_error(gd[coord], fd) <= 1e-6);
  }

  CHECK_THROWS_AS(fedmeter::grad_ditto(v, w, shape, batch, -1.0),
                  std::invalid_argument);
}

TEST_CASE("gradient is zero at zero residual and averages over the batch") {
  const MLPShape shape{3, 4, 1};
  Rng rng(17);
  ParamVector p = fedmeter::init_params(shape, rng);
  std::vector<Sample> batch = random_batch(5, 3, rng);
  // Make every residual exactly zero: the gradient must vanish identically.
  for (Sample& s : batch) s.target = fedmeter::forward(p, shape, s.features);
  GradVector g = fedmeter::grad_mse(p, shape, batch);
  for (std::size_t i = 0; i < g.size(); ++i) CHECK(g[i] == 0.0);

  // Duplicating the batch leaves the mean gradient unchanged.
  batch = random_batch(4, 3, rng);
  std::vector<Sample> doubled = batch;
  doubled.insert(doubled.end(), batch.begin(), batch.end());
  const GradVector g1 = fedmeter::grad_mse(p, shape, batch);
  const GradVector g2 = fedmeter::grad_mse(p, shape, doubled);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    CHECK(g1[i] == doctest::Approx(g2[i]).epsilon(1e-12));
  }
}

TEST_CASE("sgd: no-op cases, single-step oracle, determinism") {
  const MLPShape shape{3, 4, 1};
  Rng rng(19);
  const ParamVector start = fedmeter::init_params(shape, rng);
  const std::vector<Sample> data = random_batch(6, 3, rng);
  auto grad_fn = [&shape](const ParamVector& p, std::span<const Sample> b) {
    return fedmeter::grad_mse(p, shape, b);
  };

  SUBCASE("zero epochs returns the start") {
    Rng r(1);
    CHECK(fedmeter::sgd_epochs(start, shape, data, 0, 2, 0.1, grad_fn, r) ==
          start);
  }
  SUBCASE("zero learning rate returns the start") {
    Rng r(1);
    CHECK(fedmeter::sgd_epochs(start, shape, data, 3, 2, 0.0, grad_fn, r) ==
          start);
  }
  SUBCASE("one full-batch epoch is exactly one gradient step") {
    Rng r(1);
    const ParamVector got = fedmeter::sgd_epochs(
        start, shape, data, 1, static_cast<int>(data.size()), 0.05, grad_fn, r);
    const GradVector g = fedmeter::grad_mse(start, shape, data);
    for (std::size_t i = 0; i < got.size(); ++i) {
      CHECK(got[i] == doctest::Approx(start[i] - 0.05 * g[i]).epsilon(1e-15));
    }
  }
  SUBCASE("same stream, same trajectory; different stream diverges") {
    Rng r1(5), r2(5), r3(6);
    const ParamVector a = fedmeter::sgd_epochs(start, shape, data, 4, 2, 0.05,
                                               grad_fn, r1);
    const ParamVector b = fedmeter::sgd_epochs(start, shape, data, 4, 2, 0.05,
                                               grad_fn, r2);
    const ParamVector c = fedmeter::sgd_epochs(start, shape, data, 4, 2, 0.05,
                                               grad_fn, r3);
    CHECK(a == b);
    CHECK(a.values != c.values);
  }
  SUBCASE("size mismatch and bad arguments throw") {
    Rng r(1);
    ParamVector wrong(7);
    CHECK_THROWS_AS(
        fedmeter::sgd_epochs(wrong, shape, data, 1, 2, 0.1, grad_fn, r),
        std::invalid_argument);
    CHECK_THROWS_AS(
        fedmeter::sgd_epochs(start, shape, data, -1, 2, 0.1, grad_fn, r),
        std::invalid_argument);
    CHECK_THROWS_AS(
        fedmeter::sgd_epochs(start, shape, data, 1, 0, 0.1, grad_fn, r),
        std::invalid_argument);
  }
}

TEST_CASE("sgd survives a pathological start without overflowing") {
  const MLPShape shape{3, 8, 1};
  Rng rng(23);
  const std::vector<Sample> data = random_batch(12, 3, rng);
  ParamVector start(static_cast<std::size_t>(shape.param_count()), 1.0e8);
  auto grad_fn = [&shape](const ParamVector& p, std::span<const Sample> b) {
    return fedmeter::grad_mse(p, shape, b);
  };
  Rng r(1);
  const ParamVector end =
      fedmeter::sgd_epochs(start, shape, data, 3, 4, 0.01, grad_fn, r);
  CHECK(end.all_finite());
}

TEST_CASE("vector helpers: dot, norm, axpy, subtract") {
  ParamVector a(3);
  a[0] = 3.0; a[1] = 0.0; a[2] = 4.0;
  ParamVector b(3);
  b[0] = 1.0; b[1] = 2.0; b[2] = 0.5;
  CHECK(fedmeter::dot(a, b) == doctest::Approx(5.0));
  CHECK(fedmeter::l2_norm(a) == doctest::Approx(5.0));
  fedmeter::axpy(a, 2.0, b);
  CHECK(a[0] == doctest::Approx(5.0));
  CHECK(a[1] == doctest::Approx(4.0));
  CHECK(a[2] == doctest::Approx(5.0));
  const ParamVector d = fedmeter::subtract(a, b);
  CHECK(d[0] == doctest::Approx(4.0));
  ParamVector wrong(2);
  CHECK_THROWS_AS(fedmeter::dot(a, wrong), std::invalid_argument);
  CHECK_THROWS_AS(fedmeter::axpy(a, 1.0, wrong), std::invalid_argument);
  CHECK_THROWS_AS(fedmeter::subtract(a, wrong), std::invalid_argument);
}
