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

#include <cmath>
#include <cstdint>
#include <string_view>
#include <utility>
#include <vector>

namespace fedmeter {

/// Deterministic 64-bit generator (SplitMix64). Every stochastic step in the
/// simulator draws from one of these so runs replay bit-for-bit on any
/// platform; std::random distributions are avoided on purpose since their
/// output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform draw strictly inside (0, 1); never returns an endpoint, so
  /// logs of it and of (1 - 2|u - 1/2|) stay finite.
  double uniform01() {
    return (static_cast<double>(next() >> 12) + 0.5) * 0x1.0p-52;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * n) >> 64);
  }

  /// Box-Muller; one value per call, second branch discarded.
  double gaussian(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform01();
    double u2 = uniform01();
    double z = std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    return mean + stddev * z;
  }

 private:
  std::uint64_t state_;
};

namespace detail {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace detail

/// Derives an independent stream from a master seed, a stream name, and up to
/// two indices (typically round and client id). Client-side work inside a
/// round draws only from streams derived this way, which makes results
/// independent of execution order.
inline Rng derive_rng(std::uint64_t master, std::string_view stream,
                      std::uint64_t a = 0, std::uint64_t b = 0) {
  std::uint64_t s = detail::mix64(master ^ 0x9e3779b97f4a7c15ULL);
  s = detail::mix64(s ^ detail::fnv1a(stream));
  s = detail::mix64(s ^ (a + 0x9e3779b97f4a7c15ULL));
  s = detail::mix64(s ^ (b + 0x517cc1b727220a95ULL));
  return Rng(s);
}

/// Fisher-Yates shuffle driven by our own generator (std::shuffle's draw
/// sequence is implementation-defined).
template <typename T>
void shuffle(std::vector<T>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace fedmeter
