// Copyright 2026 The AFP Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "afp/encoder/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "afp/common/error.h"

namespace afp {
namespace {

double Dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void CheckRows(const EmbeddingMatrix& z, double tau) {
  Require(tau > 0.0, "temperature must be positive");
  Require(z.size() >= 2, "need at least two embeddings");
  for (size_t r = 0; r < z.size(); ++r) {
    Require(z[r].size() == z[0].size(), "embedding rows differ in length");
    const double n = std::sqrt(Dot(z[r], z[r]));
    Require(std::fabs(n - 1.0) <= 1e-6,
            "embedding row " + std::to_string(r) + " is not unit norm");
  }
}

// Logits of anchor i and their log-sum-exp over k != i.
double LogSumExp(const std::vector<double>& logits, size_t skip) {
  double hi = -INFINITY;
  for (size_t k = 0; k < logits.size(); ++k) {
    if (k != skip) hi = std::max(hi, logits[k]);
  }
  double s = 0.0;
  for (size_t k = 0; k < logits.size(); ++k) {
    if (k != skip) s += std::exp(logits[k] - hi);
  }
  return hi + std::log(s);
}

}  // namespace

double PairLoss(const EmbeddingMatrix& z, size_t i, size_t j, double tau) {
  CheckRows(z, tau);
  Require(i < z.size() && j < z.size() && i != j, "invalid pair indices");
  std::vector<double> logits(z.size());
  for (size_t k = 0; k < z.size(); ++k) logits[k] = Dot(z[i], z[k]) / tau;
  return LogSumExp(logits, i) - logits[j];
}

double BatchLoss(const EmbeddingMatrix& z, double tau) {
  return BatchLossGradient(z, tau, nullptr);
}

double BatchLossGradient(const EmbeddingMatrix& z, double tau,
                         EmbeddingMatrix* dz) {
  Require(!z.empty() && z.size() % 2 == 0, "batch needs an even number of rows");
  CheckRows(z, tau);
  const size_t rows = z.size(), n = rows / 2, dim = z[0].size();
  if (dz) dz->assign(rows, std::vector<double>(dim, 0.0));
  const double scale = 1.0 / static_cast<double>(rows);
  double total = 0.0;
  std::vector<double> logits(rows);
  for (size_t i = 0; i < rows; ++i) {
    const size_t pos = i < n ? i + n : i - n;
    for (size_t k = 0; k < rows; ++k) logits[k] = Dot(z[i], z[k]) / tau;
    const double lse = LogSumExp(logits, i);
    total += lse - logits[pos];
    if (!dz) continue;
    // d l / d logit_k = softmax_k - [k == pos]; d logit_k = <z_i, z_k> / tau.
    for (size_t k = 0; k < rows; ++k) {
      if (k == i) continue;
      const double g = (std::exp(logits[k] - lse) - (k == pos ? 1.0 : 0.0)) *
                       scale / tau;
      for (size_t d = 0; d < dim; ++d) {
        (*dz)[i][d] += g * z[k][d];
        (*dz)[k][d] += g * z[i][d];
      }
    }
  }
  return total * scale;
}

}  // namespace afp
