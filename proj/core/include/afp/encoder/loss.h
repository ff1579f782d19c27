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

// Contrastive objective over a batch of 2N embeddings where rows k and
// N + k (0-based) form a positive pair.

#ifndef AFP_ENCODER_LOSS_H_
#define AFP_ENCODER_LOSS_H_

#include <cstddef>
#include <vector>

namespace afp {

using EmbeddingMatrix = std::vector<std::vector<double>>;

// -log( exp(<z_i, z_j> / tau) / sum_{k != i} exp(<z_i, z_k> / tau) ).
// Rows must be unit norm (within 1e-6) and i != j. Not symmetric in i, j.
double PairLoss(const EmbeddingMatrix& z, size_t i, size_t j, double tau);

// (1 / 2N) * sum_k [ l(k, N + k) + l(N + k, k) ]. Throws InvalidArgument
// on an odd or zero row count or tau <= 0.
double BatchLoss(const EmbeddingMatrix& z, double tau);

// BatchLoss plus its gradient with respect to every row of `z`.
double BatchLossGradient(const EmbeddingMatrix& z, double tau,
                         EmbeddingMatrix* dz);

}  // namespace afp

#endif  // AFP_ENCODER_LOSS_H_
