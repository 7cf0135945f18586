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

#include "fedmeter/privacy.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "doctest.h"
#include "fedmeter/rng.hpp"
#include "fedmeter/similarity.hpp"
#include "support/oracles.hpp"

namespace {

using fedmeter::BudgetStrategy;
using fedmeter::NoiseParams;
using fedmeter::ParamVector;
using fedmeter::PrivacyAccountant;
using fedmeter::Rng;

constexpr double kInf = std::numeric_limits<double>::infinity();

ParamVector pv2(double a, double b) {
  ParamVector p(2);
  p[0] = a;
  p[1] = b;
  return p;
}

}  // namespace

TEST_CASE("clipping rescales onto the norm ball") {
  // ||(3,4)|| = 5, threshold 1 -> (0.6, 0.8).
  const ParamVector c1 = fedmeter::clip(pv2(3, 4), 1.0);
  CHECK(c1[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(c1[1] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(fedmeter::l2_norm(c1) == doctest::Approx(1.0).epsilon(1e-12));

  // Doubling the threshold doubles the clipped vector (both still clip).
  const ParamVector c2 = fedmeter::clip(pv2(3, 4), 2.0);
  CHECK(c2[0] == 2.0 * c1[0]);
  CHECK(c2[1] == 2.0 * c1[1]);

  // Inside the ball nothing changes, bit for bit; (3,4) has norm exactly 5,
  // so a threshold of 5 sits exactly on the boundary and still passes through.
  const ParamVector small = pv2(0.3, 0.4);
  CHECK(fedmeter::clip(small, 1.0) == small);
  CHECK(fedmeter::clip(pv2(3, 4), 5.0) == pv2(3, 4));

  CHECK_THROWS_AS(fedmeter::clip(small, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(fedmeter::clip(small, -1.0), std::invalid_argument);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    ParamVector d(8);
    for (std::size_t i = 0; i < 8; ++i) d[i] = rng.uniform(-5.0, 5.0);
    const ParamVector c = fedmeter::clip(d, 0.7);
    CHECK(fedmeter::l2_norm(c) <= 0.7 * (1.0 + 1e-12));
    // Clipping only rescales: the direction is preserved.
    CHECK(fedmeter::cosine_score(c, d) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("sensitivity is twice the threshold over the dataset size") {
  CHECK(fedmeter::sensitivity(1.0, 100) == doctest::Approx(0.02));
  CHECK(fedmeter::sensitivity(1.0, 2) == 1.0);
  CHECK(fedmeter::sensitivity(3.0, 6) == 1.0);
  // Doubling the dataset halves the sensitivity exactly.
  for (int n : {3, 7, 100}) {
    CHECK(fedmeter::sensitivity(0.9, 2 * n) == fedmeter::sensitivity(0.9, n) / 2.0);
  }
  CHECK_THROWS_AS(fedmeter::sensitivity(0.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(fedmeter::sensitivity(1.0, 0), std::invalid_argument);
}

TEST_CASE("noise parameters tie scale to sensitivity over epsilon") {
  const NoiseParams np = NoiseParams::make(1.0, 100, 0.1);
  CHECK(np.clip_threshold == 1.0);
  CHECK(np.sensitivity == doctest::Approx(0.02));
  CHECK(np.scale == doctest::Approx(0.2));
  // Infinite budget degenerates to zero noise.
  CHECK(NoiseParams::make(1.0, 100, kInf).scale == 0.0);
  CHECK_THROWS_AS(NoiseParams::make(1.0, 100, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(NoiseParams::make(1.0, 100, -1.0), std::invalid_argument);
}

TEST_CASE("laplace sampling is exactly linear in its scale") {
  // 0.2 is exactly twice 0.1 in binary, so the draws match bit for bit.
  Rng r1(21), r2(21);
  for (int i = 0; i < 200; ++i) {
    const double x1 = fedmeter::sample_laplace(0.1, r1);
    const double x2 = fedmeter::sample_laplace(0.2, r2);
    CHECK(x2 == 2.0 * x1);
  }
  CHECK_THROWS_AS(fedmeter::sample_laplace(-0.1, r1), std::invalid_argument);
}

TEST_CASE("zero-scale sampling returns zero but still advances the stream") {
  Rng probe(33);
  probe.uniform01();  // skip the draw the sampler will consume
  const double expected_next = probe.uniform01();

  Rng rng(33);
  CHECK(fedmeter::sample_laplace(0.0, rng) == 0.0);
  CHECK(rng.uniform01() == expected_next);
}

TEST_CASE("laplace sample moments match the distribution") {
  const double b = 0.1;
  const int n = 100000;
  Rng rng(12345);
  double sum = 0.0;
  double sum_sq = 0.0;
  int negatives = 0;
  for (int i = 0; i < n; ++i) {
    const double x = fedmeter::sample_laplace(b, rng);
    sum += x;
    sum_sq += x * x;
    if (x < 0.0) ++negatives;
  }
  const double mean = sum / n;
  const double variance = sum_sq / n - mean * mean;
  CHECK(std::abs(mean) <= 3.0 * b * std::sqrt(2.0) / std::sqrt(double(n)));
  CHECK(variance == doctest::Approx(2.0 * b * b).epsilon(0.05));
  // Symmetric about zero.
  CHECK(std::abs(negatives / double(n) - 0.5) < 0.02);
}

TEST_CASE("noising adds an independent draw per coordinate") {
  ParamVector d(5);
  for (std::size_t i = 0; i < 5; ++i) d[i] = 0.1 * double(i);
  const NoiseParams np = NoiseParams::make(1.0, 10, 0.5);

  Rng r1(8), r2(8);
  const ParamVector noisy = fedmeter::add_noise(d, np, r1);
  ParamVector expected = d;
  for (std::size_t i = 0; i < 5; ++i) {
    expected[i] = d[i] + fedmeter::sample_laplace(np.scale, r2);
  }
  CHECK(noisy == expected);
}

TEST_CASE("zero-scale noising is the identity yet consumes the stream") {
  ParamVector d(4);
  for (std::size_t i = 0; i < 4; ++i) d[i] = double(i) - 1.5;
  const NoiseParams np = NoiseParams::make(1.0, 10, kInf);
  REQUIRE(np.scale == 0.0);

  Rng probe(14);
  for (int i = 0; i < 4; ++i) probe.uniform01();
  const double expected_next = probe.uniform01();

  Rng rng(14);
  CHECK(fedmeter::add_noise(d, np, rng) == d);
  CHECK(rng.uniform01() == expected_next);
}

TEST_CASE("accountant constructor validates and exposes the plan") {
  const PrivacyAccountant acc(0.1, 200, BudgetStrategy::dynamic);
  CHECK(acc.epsilon_current() == 0.1);
  CHECK(acc.consumed() == 0.0);
  CHECK(acc.total_budget() == doctest::Approx(20.0));
  CHECK(acc.rounds_total() == 200);
  CHECK(acc.rounds_elapsed() == 0);
  CHECK(acc.strategy() == BudgetStrategy::dynamic);

  // An infinite per-round budget is legal: it models the no-noise limit.
  CHECK(PrivacyAccountant(kInf, 5, BudgetStrategy::fixed).total_budget() == kInf);

  CHECK_THROWS_AS(PrivacyAccountant(0.0, 5, BudgetStrategy::fixed),
                  std::invalid_argument);
  CHECK_THROWS_AS(PrivacyAccountant(-0.1, 5, BudgetStrategy::fixed),
                  std::invalid_argument);
  CHECK_THROWS_AS(PrivacyAccountant(0.1, 0, BudgetStrategy::fixed),
                  std::invalid_argument);
}

TEST_CASE("fixed strategy forfeits failed rounds") {
  PrivacyAccountant acc(0.25, 5, BudgetStrategy::fixed);
  acc.consume(true);
  acc.consume(true);
  acc.consume(false);
  acc.consume(true);
  acc.consume(true);
  CHECK(acc.consumed() == 4 * 0.25);            // exactly: 0.25 is a power of two
  CHECK(acc.epsilon_current() == 0.25);         // the allowance never changes
  CHECK(acc.rounds_elapsed() == 5);
  CHECK_THROWS_AS(acc.consume(true), std::logic_error);
  PrivacyAccountant fixed(0.1, 5, BudgetStrategy::fixed);
  CHECK_THROWS_AS(fixed.reallocate_on_failure(2), std::logic_error);
}

TEST_CASE("dynamic strategy respreads a failed allowance") {
  // Failure in round 100 of 200 bumps the allowance from 0.1 to
  // 0.1 * 101/100 = 0.101.
  PrivacyAccountant acc(0.1, 200, BudgetStrategy::dynamic);
  for (int r = 0; r < 99; ++r) acc.consume(true);
  acc.consume(false);
  CHECK(acc.epsilon_current() == doctest::Approx(0.101).epsilon(1e-12));
  for (int r = 0; r < 100; ++r) acc.consume(true);
  // One non-final failure still ends at the full budget.
  CHECK(acc.consumed() == doctest::Approx(acc.total_budget()).epsilon(1e-9));
}

TEST_CASE("a failure in the last round leaves its allowance unspent") {
  PrivacyAccountant acc(0.5, 3, BudgetStrategy::dynamic);
  acc.consume(true);
  acc.consume(true);
  acc.consume(false);
  CHECK(acc.consumed() == 1.0);  // 2 * 0.5, exactly
  CHECK(acc.epsilon_current() == 0.5);  // nothing left to respread into
  CHECK(acc.total_budget() - acc.consumed() == 0.5);
}

TEST_CASE("reallocation validates its round number") {
  PrivacyAccountant acc(0.1, 10, BudgetStrategy::dynamic);
  CHECK_THROWS_AS(acc.reallocate_on_failure(0), std::invalid_argument);
  CHECK_THROWS_AS(acc.reallocate_on_failure(11), std::invalid_argument);
  const double before = acc.epsilon_current();
  acc.reallocate_on_failure(10);  // final round: explicit no-op
  CHECK(acc.epsilon_current() == before);
  acc.reallocate_on_failure(5);
  CHECK(acc.epsilon_current() == doctest::Approx(0.1 * 6.0 / 5.0).epsilon(1e-12));
}

TEST_CASE("random failure patterns replay exactly and respect the cap") {
  Rng rng(400);
  const int rounds = 30;
  const double eps0 = 0.2;
  for (int pattern = 0; pattern < 50; ++pattern) {
    std::set<int> failed;
    for (int r = 1; r <= rounds; ++r) {
      if (rng.uniform01() < 0.3) failed.insert(r);
    }
    PrivacyAccountant dyn(eps0, rounds, BudgetStrategy::dynamic);
    PrivacyAccountant fix(eps0, rounds, BudgetStrategy::fixed);
    double fixed_expected = 0.0;
    for (int r = 1; r <= rounds; ++r) {
      const bool ok = !failed.count(r);
      dyn.consume(ok);
      fix.consume(ok);
      if (ok) fixed_expected += eps0;
    }
    // The replay oracle performs the identical event sequence.
    CHECK(dyn.consumed() == oracles::replay_dynamic_budget(eps0, rounds, failed));
    CHECK(fix.consumed() == fixed_expected);
    // Consumption never exceeds the total budget...
    CHECK(dyn.consumed() <= dyn.total_budget() + 1e-9);
    CHECK(fix.consumed() <= fix.total_budget() + 1e-9);
    // ...and the dynamic strategy never spends less than the fixed one.
    CHECK(dyn.consumed() >= fix.consumed() - 1e-12);
    // No failure in the final round means the dynamic budget is used up.
    if (!failed.count(rounds)) {
      CHECK(dyn.consumed() == doctest::Approx(dyn.total_budget()).epsilon(1e-9));
    }
  }
}

TEST_CASE("strategy names") {
  CHECK(std::string(fedmeter::budget_strategy_name(BudgetStrategy::fixed)) ==
        "fixed");
  CHECK(std::string(fedmeter::budget_strategy_name(BudgetStrategy::dynamic)) ==
        "dynamic");
}
