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

#include "fedmeter/similarity.hpp"

#include <stdexcept>

#include "fedmeter/util.hpp"

namespace fedmeter {

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::uploaded: return "uploaded";
    case Provenance::substituted: return "substituted";
    case Provenance::excluded: return "excluded";
  }
  return "?";
}

double cosine_score(const ParamVector& a, const ParamVector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine_score: length mismatch");
  }
  const double na = l2_norm(a);
  const double nb = l2_norm(b);
  if (na < 1e-12 || nb < 1e-12) return 0.5;
  return 0.5 * (dot(a, b) / (na * nb) + 1.0);
}

SimilarityMatrix::SimilarityMatrix(int num_clients) : n_(num_clients) {
  if (num_clients < 0) {
    throw std::invalid_argument("SimilarityMatrix: negative size");
  }
  score_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
  count_.assign(static_cast<std::size_t>(n_) * n_, 0);
}

std::size_t SimilarityMatrix::at(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_) {
    throw std::out_of_range("SimilarityMatrix: index out of range");
  }
  return static_cast<std::size_t>(i) * n_ + j;
}

double SimilarityMatrix::score(int i, int j) const { return score_[at(i, j)]; }

std::uint64_t SimilarityMatrix::pair_count(int i, int j) const {
  return count_[at(i, j)];
}

void SimilarityMatrix::update(const std::set<int>& available,
                              const std::map<int, ParamVector>& deltas) {
  for (int i : available) {
    if (!deltas.count(i)) {
      throw std::invalid_argument(
          "SimilarityMatrix::update: missing delta for available client " +
          std::to_string(i));
    }
  }
  for (auto i_it = available.begin(); i_it != available.end(); ++i_it) {
    for (auto j_it = std::next(i_it); j_it != available.end(); ++j_it) {
      const int i = *i_it;
      const int j = *j_it;
      const double s = cosine_score(deltas.at(i), deltas.at(j));
      const std::uint64_t n = count_[at(i, j)];
      const double avg =
          (static_cast<double>(n) * score_[at(i, j)] + s) / (static_cast<double>(n) + 1.0);
      score_[at(i, j)] = avg;
      score_[at(j, i)] = avg;
      count_[at(i, j)] = n + 1;
      count_[at(j, i)] = n + 1;
    }
  }
}

std::map<int, Substitution> SimilarityMatrix::substitute(
    const std::set<int>& unavailable, const std::set<int>& available) const {
  std::map<int, Substitution> out;
  for (int i : unavailable) {
    Substitution sub;
    double best = -1.0;
    for (int j : available) {  // ascending, so strict > keeps the lowest id on ties
      if (j == i || count_[at(i, j)] == 0) continue;
      if (score_[at(i, j)] > best) {
        best = score_[at(i, j)];
        sub.source = j;
      }
    }
    out.emplace(i, sub);
  }
  return out;
}

void SimilarityMatrix::write_csv(std::ostream& out) const {
  for (int i = 0; i < n_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (j) out << ',';
      out << format_double(score_[at(i, j)]);
    }
    out << '\n';
  }
}

}  // namespace fedmeter
