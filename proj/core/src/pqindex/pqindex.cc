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

#include "afp/pqindex/pqindex.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <streambuf>
#include <string>

#include "afp/common/binary_io.h"
#include "afp/common/error.h"
#include "afp/common/rng.h"

namespace afp {
namespace {

constexpr uint16_t kIndexVersion = 1;

double SquaredDistance(const float* a, const double* b, size_t d) {
  double s = 0.0;
  for (size_t i = 0; i < d; ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return s;
}

double SquaredDistance(const float* a, const float* b, size_t d) {
  double s = 0.0;
  for (size_t i = 0; i < d; ++i) {
    const double t = static_cast<double>(a[i]) - b[i];
    s += t * t;
  }
  return s;
}

size_t Nearest(const float* v, const float* centroids, size_t k, size_t d) {
  size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t c = 0; c < k; ++c) {
    const double dist = SquaredDistance(v, centroids + c * d, d);
    if (dist < best_d) {
      best_d = dist;
      best = c;
    }
  }
  return best;
}

bool RefLess(const SearchHit& a, const SearchHit& b) {
  if (a.distance != b.distance) return a.distance < b.distance;
  return a.ref < b.ref;
}

class CountingBuffer : public std::streambuf {
 public:
  uint64_t count() const { return count_; }

 protected:
  std::streamsize xsputn(const char*, std::streamsize n) override {
    count_ += static_cast<uint64_t>(n);
    return n;
  }
  int_type overflow(int_type c) override {
    ++count_;
    return traits_type::not_eof(c);
  }

 private:
  uint64_t count_ = 0;
};

}  // namespace

KMeansResult KMeans(std::span<const float> points, size_t dim, size_t k,
                    size_t iterations, uint64_t seed) {
  Require(dim > 0 && points.size() % dim == 0, "point buffer is not a multiple of dim");
  const size_t n = points.size() / dim;
  Require(k >= 1, "k must be positive");
  Require(n >= k, "k-means needs at least " + std::to_string(k) + " points, got " +
                      std::to_string(n));
  const float* x = points.data();
  Rng rng(seed);

  // k-means++ seeding.
  std::vector<double> centroids(k * dim);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  size_t pick = rng.UniformInt(n);
  for (size_t c = 0; c < k; ++c) {
    for (size_t j = 0; j < dim; ++j) centroids[c * dim + j] = x[pick * dim + j];
    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], SquaredDistance(x + i * dim, centroids.data() + c * dim, dim));
      total += d2[i];
    }
    if (c + 1 == k) break;
    Require(total > 0.0, "k-means needs at least " + std::to_string(k) + " distinct points");
    const double u = rng.Uniform() * total;
    double cum = 0.0;
    pick = n;
    for (size_t i = 0; i < n; ++i) {
      if (d2[i] <= 0.0) continue;
      cum += d2[i];
      pick = i;
      if (cum > u) break;
    }
  }

  KMeansResult result;
  std::vector<size_t> assign(n, k), counts(k);
  std::vector<double> best_dist(n);
  for (size_t it = 0; it < std::max<size_t>(iterations, 1); ++it) {
    bool changed = false;
    double distortion = 0.0;
    for (size_t i = 0; i < n; ++i) {
      size_t best = 0;
      double bd = std::numeric_limits<double>::infinity();
      for (size_t c = 0; c < k; ++c) {
        const double dist = SquaredDistance(x + i * dim, centroids.data() + c * dim, dim);
        if (dist < bd) {
          bd = dist;
          best = c;
        }
      }
      changed |= best != assign[i];
      assign[i] = best;
      best_dist[i] = bd;
      distortion += bd;
    }
    distortion /= static_cast<double>(n);
    if (!result.distortion.empty() &&
        distortion > result.distortion.back() * (1.0 + 1e-9) + 1e-30) {
      throw NumericalError("k-means distortion increased");
    }
    result.distortion.push_back(distortion);
    if (!changed) break;

    std::fill(counts.begin(), counts.end(), 0);
    for (size_t i = 0; i < n; ++i) ++counts[assign[i]];
    for (size_t e = 0; e < k; ++e) {
      if (counts[e] != 0) continue;
      const size_t largest =
          static_cast<size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
      size_t far = n;
      for (size_t i = 0; i < n; ++i) {
        if (assign[i] == largest && (far == n || best_dist[i] > best_dist[far])) far = i;
      }
      assign[far] = e;
      best_dist[far] = 0.0;
      --counts[largest];
      ++counts[e];
    }
    std::fill(centroids.begin(), centroids.end(), 0.0);
    for (size_t i = 0; i < n; ++i) {
      for (size_t j = 0; j < dim; ++j) centroids[assign[i] * dim + j] += x[i * dim + j];
    }
    for (size_t c = 0; c < k; ++c) {
      for (size_t j = 0; j < dim; ++j) centroids[c * dim + j] /= static_cast<double>(counts[c]);
    }
  }
  result.centroids.assign(centroids.begin(), centroids.end());
  return result;
}

void IndexConfig::Validate() const {
  Require(dim > 0 && subquantizers > 0 && dim % subquantizers == 0,
          "subquantizer count must divide the dimension");
  Require(code_bits >= 4 && code_bits <= 8, "code_bits must lie in [4, 8]");
  Require(coarse_cells >= 1, "need at least one coarse cell");
  Require(nprobe >= 1 && nprobe <= coarse_cells, "nprobe must lie in [1, K]");
  Require(kmeans_iterations >= 1, "k-means needs at least one iteration");
}

uint64_t CodeBytes(uint64_t entries, size_t subquantizers, size_t code_bits) {
  return (entries * subquantizers * code_bits + 7) / 8;
}

FingerprintIndex::FingerprintIndex(const IndexConfig& config) : config_(config) {
  config_.Validate();
}

void FingerprintIndex::Train(std::span<const float> sample) {
  const size_t d = config_.dim;
  Require(sample.size() % d == 0, "training sample is not a multiple of dim");
  const size_t n = sample.size() / d;
  const size_t need = 4 * std::max(config_.coarse_cells, config_.sub_centroids());
  Require(n >= need, "training needs at least " + std::to_string(need) +
                         " vectors, got " + std::to_string(n));
  for (float v : sample) Require(std::isfinite(v), "non-finite training vector");

  std::vector<float> data;
  if (n > config_.max_training_sample) {
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng(DeriveSeed(config_.seed, 0));
    rng.Shuffle(order);
    order.resize(config_.max_training_sample);
    std::sort(order.begin(), order.end());
    for (size_t i : order) data.insert(data.end(), sample.begin() + i * d, sample.begin() + (i + 1) * d);
  } else {
    data.assign(sample.begin(), sample.end());
  }
  const size_t rows = data.size() / d;

  coarse_ = KMeans(data, d, config_.coarse_cells, config_.kmeans_iterations,
                   DeriveSeed(config_.seed, 1))
                .centroids;
  std::vector<float> residual(data.size());
  for (size_t i = 0; i < rows; ++i) {
    const size_t c = Nearest(data.data() + i * d, coarse_.data(), config_.coarse_cells, d);
    for (size_t j = 0; j < d; ++j) residual[i * d + j] = data[i * d + j] - coarse_[c * d + j];
  }
  const size_t sd = config_.sub_dim(), ks = config_.sub_centroids();
  sub_.assign(config_.subquantizers * ks * sd, 0.0f);
  std::vector<float> part(rows * sd);
  for (size_t s = 0; s < config_.subquantizers; ++s) {
    for (size_t i = 0; i < rows; ++i) {
      std::copy_n(residual.begin() + i * d + s * sd, sd, part.begin() + i * sd);
    }
    const KMeansResult km =
        KMeans(part, sd, ks, config_.kmeans_iterations, DeriveSeed(config_.seed, 2 + s));
    std::copy(km.centroids.begin(), km.centroids.end(), sub_.begin() + s * ks * sd);
  }
  cells_.assign(config_.coarse_cells, Cell{});
  entry_count_ = 0;
}

std::span<const float> FingerprintIndex::sub_codebook(size_t s) const {
  const size_t len = config_.sub_centroids() * config_.sub_dim();
  return std::span<const float>(sub_).subspan(s * len, len);
}

std::pair<uint32_t, std::vector<uint8_t>> FingerprintIndex::Encode(
    std::span<const float> v) const {
  Require(trained(), "index is not trained");
  Require(v.size() == config_.dim, "vector dimension mismatch");
  const size_t d = config_.dim, sd = config_.sub_dim(), ks = config_.sub_centroids();
  const size_t cell = Nearest(v.data(), coarse_.data(), config_.coarse_cells, d);
  std::vector<float> r(d);
  for (size_t j = 0; j < d; ++j) r[j] = v[j] - coarse_[cell * d + j];
  std::vector<uint8_t> code(config_.subquantizers);
  for (size_t s = 0; s < config_.subquantizers; ++s) {
    code[s] = static_cast<uint8_t>(
        Nearest(r.data() + s * sd, sub_.data() + s * ks * sd, ks, sd));
  }
  return {static_cast<uint32_t>(cell), code};
}

std::vector<float> FingerprintIndex::Decode(uint32_t cell,
                                            std::span<const uint8_t> code) const {
  Require(trained() && cell < config_.coarse_cells &&
              code.size() == config_.subquantizers,
          "invalid code");
  const size_t d = config_.dim, sd = config_.sub_dim(), ks = config_.sub_centroids();
  std::vector<float> out(coarse_.begin() + cell * d, coarse_.begin() + (cell + 1) * d);
  for (size_t s = 0; s < config_.subquantizers; ++s) {
    const float* c = sub_.data() + (s * ks + code[s]) * sd;
    for (size_t j = 0; j < sd; ++j) out[s * sd + j] += c[j];
  }
  return out;
}

void FingerprintIndex::Add(const SegmentRef& ref, std::span<const float> embedding) {
  Require(trained(), "index is not trained");
  Require(embedding.size() == config_.dim, "vector dimension mismatch");
  std::vector<float> v(embedding.begin(), embedding.end());
  double sq = 0.0;
  for (float x : v) {
    Require(std::isfinite(x), "non-finite vector");
    sq += static_cast<double>(x) * x;
  }
  if (config_.require_unit_norm) {
    const double norm = std::sqrt(sq);
    Require(std::fabs(norm - 1.0) <= 1e-3,
            "vector norm " + std::to_string(norm) + " is not 1 within 1e-3");
    if (std::fabs(norm - 1.0) > 1e-6) {
      for (float& x : v) x = static_cast<float>(x / norm);
      ++renormalized_;
    }
  }
  const auto [cell, code] = Encode(v);
  Cell& c = cells_[cell];
  const auto pos = std::upper_bound(c.refs.begin(), c.refs.end(), ref);
  const size_t at = static_cast<size_t>(pos - c.refs.begin());
  c.refs.insert(pos, ref);
  c.codes.insert(c.codes.begin() + static_cast<std::ptrdiff_t>(at * config_.subquantizers),
                 code.begin(), code.end());
  ++entry_count_;
}

std::vector<double> FingerprintIndex::CoarseDistances(std::span<const float> v) const {
  std::vector<double> out(config_.coarse_cells);
  for (size_t c = 0; c < out.size(); ++c) {
    out[c] = SquaredDistance(v.data(), coarse_.data() + c * config_.dim, config_.dim);
  }
  return out;
}

std::vector<SearchHit> FingerprintIndex::Search(std::span<const float> query,
                                                size_t top_k, size_t nprobe) const {
  Require(trained(), "index is not trained");
  Require(entry_count_ > 0, "index is empty");
  Require(query.size() == config_.dim, "query dimension mismatch");
  for (float x : query) Require(std::isfinite(x), "non-finite query");
  const size_t d = config_.dim, sd = config_.sub_dim(), ks = config_.sub_centroids();
  const size_t m = config_.subquantizers;
  const size_t probes = std::min(nprobe == 0 ? config_.nprobe : nprobe, config_.coarse_cells);

  const std::vector<double> coarse = CoarseDistances(query);
  std::vector<uint32_t> order(coarse.size());
  std::iota(order.begin(), order.end(), 0);
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(probes),
                    order.end(), [&](uint32_t a, uint32_t b) {
                      return coarse[a] != coarse[b] ? coarse[a] < coarse[b] : a < b;
                    });

  std::vector<SearchHit> hits;
  std::vector<double> table(m * ks);
  std::vector<float> r(d);
  for (size_t p = 0; p < probes; ++p) {
    const uint32_t cell = order[p];
    const Cell& c = cells_[cell];
    if (c.refs.empty()) continue;
    for (size_t j = 0; j < d; ++j) r[j] = query[j] - coarse_[cell * d + j];
    for (size_t s = 0; s < m; ++s) {
      for (size_t j = 0; j < ks; ++j) {
        table[s * ks + j] = SquaredDistance(r.data() + s * sd, sub_.data() + (s * ks + j) * sd, sd);
      }
    }
    for (size_t e = 0; e < c.refs.size(); ++e) {
      const uint8_t* code = c.codes.data() + e * m;
      double dist = 0.0;
      for (size_t s = 0; s < m; ++s) dist += table[s * ks + code[s]];
      hits.push_back({c.refs[e], dist});
    }
  }
  const size_t keep = std::min(top_k, hits.size());
  std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(keep), hits.end(),
                    RefLess);
  hits.resize(keep);
  return hits;
}

uint64_t FingerprintIndex::SerializedSize() const {
  const uint64_t K = config_.coarse_cells, D = config_.dim;
  return 23 + 4 * K * D + 4 * config_.sub_centroids() * D + 12 * K +
         entry_count_ * (8 + config_.subquantizers);
}

SizeReport FingerprintIndex::Report() const {
  SizeReport r;
  r.code_bytes_total = CodeBytes(entry_count_, config_.subquantizers, config_.code_bits);
  CountingBuffer counter;
  std::ostream out(&counter);
  Write(out);
  r.serialized_bytes = counter.count();
  return r;
}

void FingerprintIndex::Write(std::ostream& out) const {
  Require(trained(), "cannot save an untrained index");
  io::WriteMagic(out, "AFPI");
  io::WriteLE<uint16_t>(out, kIndexVersion);
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.dim));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.subquantizers));
  io::WriteLE<uint8_t>(out, static_cast<uint8_t>(config_.code_bits));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.coarse_cells));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(config_.nprobe));
  io::WriteFloats(out, coarse_);
  io::WriteFloats(out, sub_);
  for (size_t cell = 0; cell < cells_.size(); ++cell) {
    const Cell& c = cells_[cell];
    io::WriteLE<uint32_t>(out, static_cast<uint32_t>(cell));
    io::WriteLE<uint64_t>(out, c.refs.size());
    for (size_t e = 0; e < c.refs.size(); ++e) {
      io::WriteLE(out, c.refs[e].song_id);
      io::WriteLE(out, c.refs[e].segment_index);
      out.write(reinterpret_cast<const char*>(c.codes.data() + e * config_.subquantizers),
                static_cast<std::streamsize>(config_.subquantizers));
    }
  }
}

void FingerprintIndex::Save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  Write(out);
  if (!out) throw FormatError("write failed: " + path.string());
}

FingerprintIndex FingerprintIndex::Load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  io::ExpectMagic(in, "AFPI");
  const uint16_t version = io::ReadLE<uint16_t>(in);
  if (version != kIndexVersion) {
    throw FormatError("unsupported index version " + std::to_string(version));
  }
  IndexConfig c;
  c.dim = io::ReadLE<uint32_t>(in);
  c.subquantizers = io::ReadLE<uint32_t>(in);
  c.code_bits = io::ReadLE<uint8_t>(in);
  c.coarse_cells = io::ReadLE<uint32_t>(in);
  c.nprobe = io::ReadLE<uint32_t>(in);
  try {
    c.Validate();
  } catch (const InvalidArgument& e) {
    throw FormatError(std::string("bad index header: ") + e.what());
  }
  if (c.coarse_cells > (1u << 24) || c.dim > (1u << 16)) {
    throw FormatError("implausible index header");
  }
  FingerprintIndex index(c);
  index.coarse_.resize(c.coarse_cells * c.dim);
  io::ReadFloats(in, index.coarse_);
  index.sub_.resize(c.subquantizers * c.sub_centroids() * c.sub_dim());
  io::ReadFloats(in, index.sub_);
  for (float v : index.coarse_) if (!std::isfinite(v)) throw FormatError("non-finite centroid");
  for (float v : index.sub_) if (!std::isfinite(v)) throw FormatError("non-finite centroid");
  index.cells_.assign(c.coarse_cells, Cell{});
  for (size_t cell = 0; cell < c.coarse_cells; ++cell) {
    if (io::ReadLE<uint32_t>(in) != cell) throw FormatError("cell ids out of order");
    const uint64_t count = io::ReadLE<uint64_t>(in);
    if (count > (uint64_t{1} << 40)) throw FormatError("implausible cell size");
    Cell& dst = index.cells_[cell];
    for (uint64_t e = 0; e < count; ++e) {
      SegmentRef ref;
      ref.song_id = io::ReadLE<uint32_t>(in);
      ref.segment_index = io::ReadLE<uint32_t>(in);
      if (!dst.refs.empty() && ref < dst.refs.back()) {
        throw FormatError("cell entries are not sorted");
      }
      dst.refs.push_back(ref);
      const size_t at = dst.codes.size();
      dst.codes.resize(at + c.subquantizers);
      if (!in.read(reinterpret_cast<char*>(dst.codes.data() + at),
                   static_cast<std::streamsize>(c.subquantizers))) {
        throw FormatError("unexpected end of file");
      }
      for (size_t s = 0; s < c.subquantizers; ++s) {
        if (dst.codes[at + s] >= c.sub_centroids()) throw FormatError("code out of range");
      }
    }
    index.entry_count_ += count;
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("trailing bytes in index");
  return index;
}

}  // namespace afp
