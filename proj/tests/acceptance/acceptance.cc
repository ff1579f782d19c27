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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.
//
//   afp_acceptance [--work DIR] [--only 1,2,...] [--reuse-models]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "afp/augment/augment.h"
#include "afp/augment/pool.h"
#include "afp/common/fft.h"
#include "afp/common/rng.h"
#include "afp/corpus/synth.h"
#include "afp/dsp/features.h"
#include "afp/encoder/loss.h"
#include "afp/encoder/model.h"
#include "afp/encoder/train.h"
#include "afp/evalharness/eval.h"
#include "afp/peakfp/peakfp.h"
#include "afp/pqindex/pqindex.h"
#include "afp/retrieval/catalog.h"
#include "afp/retrieval/retrieval.h"

namespace fs = std::filesystem;

namespace afp {
namespace {

constexpr uint64_t kSeed = 2026;
constexpr size_t kTrainSongs = 50;
constexpr size_t kEpochs = 20;
constexpr size_t kQueriesPerCell = 200;
constexpr size_t kConcertFirst = 50;
constexpr size_t kConcertSongs = 15;
const std::vector<double> kLens = {1, 2, 3, 4, 5, 10, 15};

// Process CPU seconds.
struct Clock {
  using time_point = double;
  static double now() { return static_cast<double>(std::clock()) / CLOCKS_PER_SEC; }
};

double Since(Clock::time_point t0) { return Clock::now() - t0; }

std::string Fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

class Suite {
 public:
  void Record(int id, bool pass, const std::string& what, const std::string& detail) {
    results_[id] = pass;
    std::printf("criterion %2d %s  %s: %s\n", id, pass ? "PASS" : "FAIL", what.c_str(),
                detail.c_str());
    std::fflush(stdout);
  }
  void Info(const std::string& line) {
    std::printf("  %s\n", line.c_str());
    std::fflush(stdout);
  }
  int Failures() const {
    return static_cast<int>(std::count_if(results_.begin(), results_.end(),
                                          [](const auto& r) { return !r.second; }));
  }
  void Summary() const {
    std::printf("acceptance: %zu criteria run, %d failed\n", results_.size(), Failures());
  }

 private:
  std::map<int, bool> results_;
};

// ---- 1: loss exactness ----

void LossExactness(Suite& s) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  // N = 1: the positive is the only candidate, so the loss is -log 1.
  worst = std::max(worst, std::fabs(BatchLoss({{1.0, 0.0}, {0.6, 0.8}}, 0.05)));
  // 2N = 4 identical rows: every directed pair is -log(1/3).
  const EmbeddingMatrix same(4, std::vector<double>{0.0, 1.0, 0.0});
  for (size_t i = 0; i < 4; ++i) {
    for (size_t j = 0; j < 4; ++j) {
      if (i != j) worst = std::max(worst, std::fabs(PairLoss(same, i, j, 0.05) - std::log(3.0)));
    }
  }
  // Positive similarity 1 and two orthogonal negatives at tau = 1.
  const EmbeddingMatrix hand = {{1, 0}, {1, 0}, {0, 1}, {0, 1}};
  const double e = std::numbers::e;
  worst = std::max(worst, std::fabs(PairLoss(hand, 0, 1, 1.0) + std::log(e / (e + 2.0))));
  const double secs = Since(t0);
  s.Record(1, worst < 1e-9 && secs < 1.0, "contrastive loss exactness",
           Fmt("max |err| %.2e, %.3f s", worst, secs));
}

// ---- 2: gradient check ----

void GradientCorrectness(Suite& s, const std::vector<Song>& songs) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (uint64_t b = 0; b < 5; ++b) {
    Rng rng(DeriveSeed(kSeed, 100 + b));
    const size_t rows = b % 2 ? 8 : 4;
    std::vector<Spectrogram> batch;
    for (size_t r = 0; r < rows; ++r) {
      const AudioBuffer& a = songs[rng.UniformInt(songs.size())].audio;
      batch.push_back(MelSpectrogram(a.Slice(rng.UniformInt(a.size() - 8000), 8000)));
    }
    const Encoder enc(EncoderConfig{}, DeriveSeed(kSeed, 200 + b));
    worst = std::max(worst, GradientCheck(enc, batch, 0.05, 40, b));
  }
  std::vector<Spectrogram> batch;
  for (size_t r = 0; r < 4; ++r) batch.push_back(MelSpectrogram(songs[r].audio.Slice(8000, 8000)));
  const GradientFn doubled = [](const Encoder& e, std::span<const Spectrogram> b, double tau) {
    std::vector<double> g = BatchGradient(e, b, tau);
    for (double& x : g) x *= 2.0;
    return g;
  };
  const double fault = GradientCheck(Encoder(EncoderConfig{}, 7), batch, 0.05, 20, 9, doubled);
  const double secs = Since(t0);
  s.Record(2, worst < 1e-4 && fault > 1e-4 && secs < 30.0, "gradient correctness",
           Fmt("max rel err %.2e over 5 batches, injected 2x fault rel err %.3f, %.1f s", worst,
               fault, secs));
}

// ---- 4: segment arithmetic ----

void SegmentArithmetic(Suite& s) {
  const AudioBuffer song = corpus::SynthSong(corpus::RandomSongSpec(kSeed, 180.0));
  const size_t by_count = SegmentCount(song.size(), kSampleRateHz);
  const size_t by_cut = SegmentSong(song).size();
  const Encoder enc(EncoderConfig{}, 1);
  EncoderEmbedder embedder(enc);
  const size_t by_embed =
      EmbedSongs(std::vector<Song>{{0, {}, song}}, embedder, /*energy_gate=*/false).rows();
  s.Record(4, by_count == 359 && by_cut == 359 && by_embed == 359, "segment arithmetic",
           Fmt("180 s song -> %zu counted, %zu cut, %zu embedded", by_count, by_cut, by_embed));
}

// ---- 5 and 6: PQ ----

std::vector<float> SphereVectors(size_t n, size_t dim, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> out(n * dim);
  for (size_t r = 0; r < n; ++r) {
    double norm = 0.0;
    for (size_t d = 0; d < dim; ++d) {
      const double x = rng.Normal();
      out[r * dim + d] = static_cast<float>(x);
      norm += x * x;
    }
    for (size_t d = 0; d < dim; ++d) out[r * dim + d] /= static_cast<float>(std::sqrt(norm));
  }
  return out;
}

SegmentRef RefOf(size_t r) { return {static_cast<uint32_t>(r / 100), static_cast<uint32_t>(r % 100)}; }

double SquaredDistance(std::span<const float> a, std::span<const float> b) {
  double d = 0.0;
  for (size_t i = 0; i < a.size(); ++i) d += (static_cast<double>(a[i]) - b[i]) * (a[i] - b[i]);
  return d;
}

void PqCriteria(Suite& s, const fs::path& work) {
  const auto t0 = Clock::now();
  constexpr size_t kDim = 64;
  constexpr size_t kVectors = 1000;
  constexpr size_t kQueries = 200;
  constexpr double kQueryNoise = 0.25;
  const std::vector<float> db = SphereVectors(kVectors, kDim, DeriveSeed(kSeed, 1));
  const std::vector<float> train = SphereVectors(10000, kDim, DeriveSeed(kSeed, 2));

  // Queries are noisy, renormalized copies of database vectors; the exact
  // answer is the nearest database vector by brute force.
  struct QuerySet {
    std::vector<float> vectors;
    std::vector<size_t> exact;
  };
  const auto make_queries = [&](double noise, uint64_t seed) {
    Rng rng(seed);
    QuerySet qs{std::vector<float>(kQueries * kDim), std::vector<size_t>(kQueries)};
    for (size_t q = 0; q < kQueries; ++q) {
      const size_t src = rng.UniformInt(kVectors);
      double norm = 0.0;
      for (size_t d = 0; d < kDim; ++d) {
        const double x = db[src * kDim + d] + noise / std::sqrt(double(kDim)) * rng.Normal();
        qs.vectors[q * kDim + d] = static_cast<float>(x);
        norm += x * x;
      }
      for (size_t d = 0; d < kDim; ++d) qs.vectors[q * kDim + d] /= static_cast<float>(std::sqrt(norm));
      const std::span<const float> qv(qs.vectors.data() + q * kDim, kDim);
      double best = INFINITY;
      for (size_t r = 0; r < kVectors; ++r) {
        const double d = SquaredDistance(qv, std::span<const float>(db.data() + r * kDim, kDim));
        if (d < best) best = d, qs.exact[q] = r;
      }
    }
    return qs;
  };
  const QuerySet queries = make_queries(kQueryNoise, DeriveSeed(kSeed, 3));
  const QuerySet hard = make_queries(0.8, DeriveSeed(kSeed, 6));
  const auto recall_of = [&](const FingerprintIndex& index, const QuerySet& qs) {
    size_t agree = 0;
    for (size_t q = 0; q < kQueries; ++q) {
      const auto hits =
          index.Search(std::span<const float>(qs.vectors.data() + q * kDim, kDim), 1, 64);
      if (!hits.empty() && hits[0].ref == RefOf(qs.exact[q])) ++agree;
    }
    return static_cast<double>(agree) / kQueries;
  };

  std::vector<double> recall;
  std::vector<double> mse;
  std::optional<FingerprintIndex> m32;
  std::string table;
  std::string hard_table;
  for (size_t m : {4, 8, 16, 32}) {
    IndexConfig c;
    c.dim = kDim;
    c.subquantizers = m;
    c.coarse_cells = 64;
    c.nprobe = 64;
    c.seed = kSeed;
    FingerprintIndex index(c);
    index.Train(train);
    double err = 0.0;
    for (size_t r = 0; r < kVectors; ++r) {
      const std::span<const float> v(db.data() + r * kDim, kDim);
      index.Add(RefOf(r), v);
      const auto [cell, code] = index.Encode(v);
      err += SquaredDistance(v, index.Decode(cell, code));
    }
    recall.push_back(recall_of(index, queries));
    hard_table += Fmt(" m=%zu %.3f;", m, recall_of(index, hard));
    mse.push_back(err / kVectors);
    table += Fmt(" m=%zu recall %.3f mse %.4f;", m, recall.back(), mse.back());
    if (m == 32) m32.emplace(std::move(index));
  }
  bool monotone = true;
  for (size_t i = 1; i < recall.size(); ++i) {
    monotone = monotone && recall[i] >= recall[i - 1] && mse[i] < mse[i - 1];
  }

  // Zero-residual fixed points: reconstructions that encode back to their
  // own code. The stored entry sharing that code lies at ADC distance 0.
  double worst_fixed = 0.0;
  size_t fixed_points = 0;
  for (size_t r = 0; r < kVectors && fixed_points < 50; ++r) {
    const auto [cell, code] = m32->Encode(std::span<const float>(db.data() + r * kDim, kDim));
    const std::vector<float> x = m32->Decode(cell, code);
    if (m32->Encode(x) != std::pair(cell, code)) continue;
    ++fixed_points;
    const auto hits = m32->Search(x, 1, 64);
    worst_fixed = std::max(worst_fixed, hits.empty() ? INFINITY : hits[0].distance);
  }
  const double secs = Since(t0);
  s.Record(5, recall[3] >= 0.9 && monotone && fixed_points > 0 && worst_fixed < 1e-6 && secs < 60.0,
           "PQ oracle equivalence",
           Fmt("%s max ADC distance over %zu fixed points %.1e, %.1f s", table.c_str(), fixed_points,
               worst_fixed, secs));
  s.Info("recall with query noise norm 0.8:" + hard_table);

  // 6: code length and size accounting on the m = 32 index.
  const FingerprintIndex& ix = *m32;
  const IndexConfig& c = ix.config();
  const uint64_t k = c.coarse_cells;
  const uint64_t ks = c.sub_centroids();
  const uint64_t formula = 23 + 4 * k * kDim + 4 * ks * kDim + 12 * k + kVectors * (8 + c.subquantizers);
  const fs::path file = work / "c6.afpi";
  ix.Save(file);
  const uint64_t on_disk = fs::file_size(file);
  bool code_bits_ok = true;
  for (size_t m : {4, 8, 16, 32, 64, 128}) {
    code_bits_ok = code_bits_ok && CodeBytes(1, m, 8) * 8 == 8 * m;
  }
  const uint64_t table1_codes = CodeBytes(58879329, 32, 8);
  const uint64_t table1_total =
      23 + 4ull * 252 * 128 + 4ull * 256 * 128 + 12ull * 252 + 58879329ull * (8 + 32);
  const bool table1_ok = table1_codes == 58879329ull * 32 && table1_codes < 2.2e9;
  s.Record(6, on_disk == formula && ix.SerializedSize() == formula &&
                  ix.Report().serialized_bytes == formula && code_bits_ok && table1_ok,
           "code-length accounting",
           Fmt("file %llu B = formula %llu B; 8m-bit codes; 58,879,329 x 32 B = %.3f GB codes "
               "(full index %.3f GB = %.2f GiB) vs 2.2 reported",
               (unsigned long long)on_disk, (unsigned long long)formula, table1_codes / 1e9,
               table1_total / 1e9, table1_total / 1073741824.0));
}

// ---- 7: filter and mixer ----

std::vector<double> Periodogram(const AudioBuffer& a, size_t start, size_t len) {
  const std::vector<double> w = HannWindow(len);
  std::vector<double> frame(len);
  for (size_t i = 0; i < len; ++i) frame[i] = a.samples[start + i] * w[i];
  return PowerSpectrum(frame);
}

AudioBuffer WhiteNoise(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<float> s(n);
  for (auto& x : s) x = static_cast<float>(0.2 * rng.Normal());
  return AudioBuffer(std::move(s), kSampleRateHz);
}

double AttenuationDb(const FilterSpec& spec, double hz) {
  constexpr size_t kLen = 32768, kWin = 16384, kStart = 8192;
  double in = 0.0, out = 0.0;
  for (int t = 0; t < 30; ++t) {
    const AudioBuffer x = WhiteNoise(kLen, 500 + t);
    const auto px = Periodogram(x, kStart, kWin);
    const auto py = Periodogram(ApplyFilter(x, spec), kStart, kWin);
    for (size_t k = 0; k < px.size(); ++k) {
      if (std::fabs(k * double(kSampleRateHz) / kWin - hz) <= 15.0) in += px[k], out += py[k];
    }
  }
  return -10.0 * std::log10(out / in);
}

void FilterContract(Suite& s, const std::vector<Song>& songs, const std::vector<AudioBuffer>& noise) {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string detail;
  for (int rho : kRolloffChoicesDb) {
    // Low-pass at 2 kHz is the only in-range cutoff whose first octave is
    // still representable at 8 kHz.
    const double lp = AttenuationDb({FilterKind::kLowPass, 2000.0, rho}, 3995.0);
    worst = std::max(worst, std::fabs(lp - rho));
    detail += Fmt(" LP%d %.2f", rho, lp);
    for (double cutoff : {600.0, 800.0, 950.0}) {
      const double hp = AttenuationDb({FilterKind::kHighPass, cutoff, rho}, cutoff / 2);
      worst = std::max(worst, std::fabs(hp - rho));
      detail += Fmt(" HP%d@%g %.2f", rho, cutoff, hp);
    }
  }
  double worst_snr = 0.0;
  Rng rng(DeriveSeed(kSeed, 5));
  for (double snr : {-5.0, 0.0, 5.0, 10.0, 15.0, 20.0}) {
    for (size_t i = 0; i < 5; ++i) {
      const AudioBuffer& song = songs[i].audio;
      const AudioBuffer clean = song.Slice(8000 * i, 16000);
      const AudioBuffer mixed = MixAtSnr(clean, noise[i % noise.size()], snr, rng);
      worst_snr = std::max(worst_snr, std::fabs(MeasuredSnrDb(clean, mixed) - snr));
    }
  }
  const double secs = Since(t0);
  s.Record(7, worst <= 1.5 && worst_snr <= 0.1 && secs < 60.0, "filter contract",
           Fmt("max |attenuation - rolloff| %.2f dB, max SNR error %.4f dB, %.1f s", worst,
               worst_snr, secs));
  s.Info("attenuation (dB):" + detail);
}

// ---- 11: metric exactness ----

void MetricExactness(Suite& s) {
  std::vector<HitJudgment> j = {JudgeHit({3, 10}, 3, 5.0), JudgeHit({3, 11}, 3, 5.0),
                                JudgeHit({3, 9}, 3, 5.0), JudgeHit({3, 12}, 3, 5.0)};
  const double rate = Top1HitRate(j);
  const bool inclusive = JudgeHit({3, 11}, 3, 5.0).hit && JudgeHit({3, 9}, 3, 5.0).hit;
  const bool outside = !JudgeHit({3, 11}, 3, 4.99).hit && !JudgeHit({3, 9}, 3, 5.01).hit &&
                       !JudgeHit({4, 10}, 3, 5.0).hit;
  s.Record(11, rate == 75.0 && inclusive && outside, "metric exactness",
           Fmt("3 hits / 1 miss -> %.4f; +-0.500 s inclusive %s, 0.51 s excluded %s", rate,
               inclusive ? "yes" : "no", outside ? "yes" : "no"));
}

// ---- shared corpus, models and evaluations ----

struct Corpus {
  std::vector<Song> songs;
  AugmentPools train;
  AugmentPools validation;
  AugmentPools eval;
};

Corpus LoadCorpus(const fs::path& dir, Suite& s) {
  const auto t0 = Clock::now();
  if (!fs::exists(dir / "songs" / "songs.json")) {
    corpus::CorpusSpec spec;
    spec.seed = kSeed;
    corpus::WriteCorpus(dir, spec);
  }
  Corpus c;
  c.songs = LoadSongDirectory(dir / "songs");
  c.train = {AudioOf(LoadPool(dir / "noise", "train")), AudioOf(LoadPool(dir / "ir", "train"))};
  c.validation = {AudioOf(LoadPool(dir / "noise", "validation")),
                  AudioOf(LoadPool(dir / "ir", "validation"))};
  // The IR pool has no test split; evaluation uses its validation files.
  c.eval = {AudioOf(LoadPool(dir / "noise", "test")), AudioOf(LoadPool(dir / "ir", "validation"))};
  s.Info(Fmt("corpus: %zu songs, noise %zu/%zu/%zu, IR %zu/%zu (%.1f s)", c.songs.size(),
             c.train.noise.size(), c.validation.noise.size(), c.eval.noise.size(),
             c.train.ir.size(), c.eval.ir.size(), Since(t0)));
  return c;
}

std::vector<AudioBuffer> AudioRange(const std::vector<Song>& songs, size_t from, size_t to) {
  std::vector<AudioBuffer> out;
  for (size_t i = from; i < to; ++i) out.push_back(songs[i].audio);
  return out;
}

TrainConfig AcceptanceTrainConfig() {
  TrainConfig t;
  t.epochs = kEpochs;
  t.seed = kSeed;
  return t;
}

struct Trained {
  Encoder encoder;
  std::vector<double> epoch_loss;
  double seconds = 0.0;
};

Trained TrainModel(const Corpus& c, AugmentKind kind, const fs::path& path, bool reuse,
                   Suite& s) {
  const fs::path curve = path.string() + ".loss";
  if (reuse && fs::exists(path) && fs::exists(curve)) {
    Trained t{Encoder::Load(path), {}, 0.0};
    std::ifstream in(curve);
    in >> t.seconds;
    for (double x; in >> x;) t.epoch_loss.push_back(x);
    s.Info("reusing " + path.string());
    return t;
  }
  const auto t0 = Clock::now();
  const std::vector<AudioBuffer> audio = AudioRange(c.songs, 0, kTrainSongs);
  TrainHooks hooks;
  hooks.on_epoch = [&](size_t epoch, double loss, double probe) {
    s.Info(Fmt("%s epoch %2zu loss %.4f probe %.4f (%.0f s)",
               kind == AugmentKind::kProposed ? "M*" : "MB", epoch + 1, loss, probe, Since(t0)));
  };
  TrainResult r = TrainEncoder(audio, c.train, AugmentConfig{}, kind, EncoderConfig{},
                               AcceptanceTrainConfig(), hooks);
  Trained t{std::move(r.encoder), r.epoch_loss, Since(t0)};
  t.encoder.Save(path);
  std::ofstream out(curve);
  out << t.seconds;
  for (double x : t.epoch_loss) out << " " << x;
  return t;
}

IndexConfig EvalIndexConfig() {
  IndexConfig c;
  c.seed = kSeed;
  c.nprobe = c.coarse_cells;
  return c;
}

std::vector<Song> ConcertSongs(const Corpus& c) {
  return std::vector<Song>(c.songs.begin() + kConcertFirst,
                           c.songs.begin() + kConcertFirst + kConcertSongs);
}

// Proposed-protocol table over all levels and lengths.
EvalReport ProposedTable(const std::vector<ProtocolRecording>& recordings,
                         const SongIdentifier& identify, const std::string& tag,
                         const std::vector<double>& lens, size_t queries) {
  ProposedEvalConfig pc;
  pc.model_tag = tag;
  pc.query_lens_s = lens;
  pc.queries_per_len = queries;
  pc.seed = kSeed;
  EvalReport report;
  for (const ProtocolRecording& r : recordings) {
    const EvalReport part = RunProposedEval(r, identify, pc);
    report.Append(part);
    report.config_json = part.config_json;
  }
  return report;
}

double Cell(const EvalReport& r, const std::string& level, double len,
            const std::string& metric = "song_accuracy") {
  for (const EvalRow& row : r.rows) {
    if (row.level_or_snr == level && row.query_len_s == len && row.metric_name == metric) {
      return row.value;
    }
  }
  return NAN;
}

void PrintTable(Suite& s, const EvalReport& r, const std::vector<std::string>& levels,
                const std::string& metric = "song_accuracy") {
  for (const std::string& level : levels) {
    std::string line = Fmt("%-6s %-5s", r.rows.empty() ? "" : r.rows[0].model_tag.c_str(),
                           level.c_str());
    for (const EvalRow& row : r.rows) {
      if (row.level_or_snr == level && row.metric_name == metric) {
        line += Fmt(" %gs:%6.2f", row.query_len_s, row.value);
      }
    }
    s.Info(line);
  }
}

std::vector<ProtocolRecording> Recordings(const Corpus& c) {
  const ProtocolRecording clean = BuildConcert(ConcertSongs(c));
  std::vector<ProtocolRecording> out;
  for (auto level : {DistortionLevel::kLow, DistortionLevel::kMid, DistortionLevel::kHigh}) {
    out.push_back(SimulateRecording(clean, level, c.eval, DeriveSeed(kSeed, 7)));
  }
  return out;
}

struct LearnedSystem {
  const Encoder* encoder = nullptr;
  std::unique_ptr<EncoderEmbedder> embedder;
  std::unique_ptr<FingerprintIndex> index;
};

LearnedSystem BuildLearned(const Encoder& encoder, const std::vector<Song>& songs) {
  LearnedSystem sys;
  sys.encoder = &encoder;
  sys.embedder = std::make_unique<EncoderEmbedder>(encoder);
  sys.index = std::make_unique<FingerprintIndex>(
      BuildIndex(EmbedSongs(songs, *sys.embedder), EvalIndexConfig()));
  return sys;
}

SongIdentifier IdentifierOf(const LearnedSystem& sys) {
  return LearnedIdentifier(*sys.index, *sys.embedder, 4, sys.index->config().coarse_cells);
}

std::string IndexBytes(const FingerprintIndex& index) {
  std::ostringstream out;
  index.Write(out);
  return out.str();
}

int Run(int argc, char** argv) {
  CLI::App app{"afp acceptance suite"};
  std::string work = "acceptance_work";
  std::vector<int> only;
  bool reuse = false;
  app.add_option("--work", work, "working directory");
  app.add_option("--only", only, "criteria to run")->delimiter(',');
  app.add_flag("--reuse-models", reuse, "load previously trained models from the work directory");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> wanted(only.begin(), only.end());
  auto want = [&](std::initializer_list<int> ids) {
    if (wanted.empty()) return true;
    for (int id : ids) {
      if (wanted.count(id)) return true;
    }
    return false;
  };

  fs::create_directories(work);
  Suite s;
  const auto t_all = Clock::now();
  if (want({1})) LossExactness(s);
  if (want({4})) SegmentArithmetic(s);
  if (want({5, 6})) PqCriteria(s, work);
  if (want({11})) MetricExactness(s);
  if (!want({2, 3, 7, 8, 9, 10, 12})) {
    s.Summary();
    return s.Failures() == 0 ? 0 : 1;
  }

  const Corpus c = LoadCorpus(fs::path(work) / "corpus", s);
  if (want({2})) GradientCorrectness(s, c.songs);
  if (want({7})) FilterContract(s, c.songs, c.eval.noise);
  if (!want({3, 8, 9, 10, 12})) {
    s.Summary();
    return s.Failures() == 0 ? 0 : 1;
  }

  EvalReport full;
  full.config_json = R"({"suite":"acceptance","seed":2026})";

  // 3: training sanity.
  const Trained star = TrainModel(c, AugmentKind::kProposed, fs::path(work) / "m_star.afpm", reuse, s);
  if (want({3})) {
    const auto t0 = Clock::now();
    const std::vector<AudioBuffer> held = AudioRange(c.songs, kTrainSongs, c.songs.size());
    const double margin = PositiveMarginRate(star.encoder, held, c.validation, AugmentConfig{},
                                             AugmentKind::kProposed, 200, DeriveSeed(kSeed, 8));
    const double secs = star.seconds + Since(t0);
    const bool fell = star.epoch_loss.size() == kEpochs && star.epoch_loss.back() < star.epoch_loss.front();
    s.Record(3, fell && margin >= 0.9 && secs < 600.0, "training sanity",
             Fmt("epoch 1 loss %.4f -> epoch %zu loss %.4f; positive beats mean negative on "
                 "%.1f%% of 200 held-out pairs; %.0f s",
                 star.epoch_loss.front(), star.epoch_loss.size(), star.epoch_loss.back(),
                 100 * margin, secs));
  }
  if (!want({8, 9, 10, 12})) {
    s.Summary();
    return s.Failures() == 0 ? 0 : 1;
  }

  // 8: retrieval trends with M*.
  const auto t8 = Clock::now();
  const LearnedSystem star_sys = BuildLearned(star.encoder, c.songs);
  const std::vector<ProtocolRecording> recs = Recordings(c);
  const ProtocolRecording clean_concert = BuildConcert(ConcertSongs(c));
  ProposedEvalConfig clean_cfg;
  clean_cfg.model_tag = "Mstar";
  clean_cfg.query_lens_s = {10};
  clean_cfg.queries_per_len = kQueriesPerCell;
  clean_cfg.seed = kSeed;
  const EvalReport clean = RunProposedEval(clean_concert, IdentifierOf(star_sys), clean_cfg);
  const EvalReport star_table =
      ProposedTable(recs, IdentifierOf(star_sys), "Mstar", kLens, kQueriesPerCell);
  full.Append(clean);
  full.Append(star_table);
  PrintTable(s, star_table, {"low", "mid", "high"});
  if (want({8})) {
    const double secs = Since(t8);
    bool ordered = true;
    bool rising = true;
    std::string why;
    for (double len : kLens) {
      const double lo = Cell(star_table, "low", len), mi = Cell(star_table, "mid", len),
                   hi = Cell(star_table, "high", len);
      if (len >= 5 && !(lo >= mi && mi >= hi)) {
        ordered = false;
        why += Fmt(" order broken at %gs;", len);
      }
    }
    for (const char* level : {"low", "mid", "high"}) {
      for (size_t i = 1; i < kLens.size(); ++i) {
        if (Cell(star_table, level, kLens[i]) + 2.0 < Cell(star_table, level, kLens[i - 1])) {
          rising = false;
          why += Fmt(" %s drops %gs->%gs;", level, kLens[i - 1], kLens[i]);
        }
      }
    }
    const double clean10 = clean.rows[0].value;
    s.Record(8, clean10 == 100.0 && ordered && rising && secs < 600.0, "retrieval trends",
             Fmt("clean 10 s %.1f%%; low>=mid>=high at >=5 s %s; non-decreasing in length %s; "
                 "%.0f s%s",
                 clean10, ordered ? "yes" : "no", rising ? "yes" : "no", secs, why.c_str()));
  }

  // 10: spectral-peak baseline.
  if (want({10})) {
    const auto t10 = Clock::now();
    PeakIndex peaks;
    for (const Song& song : c.songs) peaks.Add(song.id, FingerprintAudio(song.audio));
    size_t self_ok = 0, self_n = 0;
    Rng rng(DeriveSeed(kSeed, 9));
    for (size_t i = 0; i < 100; ++i) {
      const Song& song = c.songs[rng.UniformInt(c.songs.size())];
      const size_t frame = rng.UniformInt((song.audio.size() - 5 * 8000) / 256);
      const auto m = peaks.Match(FingerprintAudio(song.audio.Slice(frame * 256, 5 * 8000)));
      ++self_n;
      if (!m.empty() && m[0].song_id == song.id && m[0].best_offset == static_cast<int64_t>(frame)) {
        ++self_ok;
      }
    }
    BaselineEvalConfig bc;
    bc.model_tag = "peak";
    bc.snr_db = {10};
    bc.query_lens_s = {10};
    bc.queries_per_len = kQueriesPerCell;
    bc.seed = kSeed;
    const EvalReport snr10 = RunBaselineEval(c.songs, c.eval.noise, PeakLocator(peaks), bc);
    const EvalReport peak_table = ProposedTable(recs, PeakIdentifier(peaks), "peak", {2, 5, 10, 15},
                                                kQueriesPerCell);
    full.Append(snr10);
    full.Append(peak_table);
    PrintTable(s, peak_table, {"low", "mid", "high"});
    bool short_worse = true;
    std::string cmp;
    for (const char* level : {"low", "mid", "high"}) {
      const double p = Cell(peak_table, level, 2), l = Cell(star_table, level, 2);
      short_worse = short_worse && p < l;
      cmp += Fmt(" %s %.1f vs %.1f;", level, p, l);
    }
    const double acc10 = Cell(snr10, "10", 10), hit10 = Cell(snr10, "10", 10, "top1_hit_rate");
    s.Record(10, self_ok == self_n && acc10 >= 80.0 && short_worse, "peak baseline",
             Fmt("clean self-match %zu/%zu with exact offsets; 10 dB 10 s accuracy %.1f%% "
                 "(hit rate %.1f%%); 2 s peak vs learned:%s %.0f s",
                 self_ok, self_n, acc10, hit10, cmp.c_str(), Since(t10)));
  }

  // 9: augmentation ablation.
  if (want({9})) {
    const Trained base = TrainModel(c, AugmentKind::kBaseline, fs::path(work) / "m_base.afpm", reuse, s);
    const LearnedSystem base_sys = BuildLearned(base.encoder, c.songs);
    const EvalReport base_table =
        ProposedTable(recs, IdentifierOf(base_sys), "MB", kLens, kQueriesPerCell);
    full.Append(base_table);
    PrintTable(s, base_table, {"low", "mid", "high"});
    const double s5 = Cell(star_table, "high", 5), b5 = Cell(base_table, "high", 5);
    const double s10 = Cell(star_table, "high", 10), b10 = Cell(base_table, "high", 10);
    s.Record(9, s5 > b5 && s10 > b10, "augmentation ablation",
             Fmt("high 5 s: M* %.1f%% vs MB %.1f%%; high 10 s: M* %.1f%% vs MB %.1f%%", s5, b5,
                 s10, b10));
  }

  // 12: determinism.
  if (want({12})) {
    const auto t12 = Clock::now();
    // Same seeds, fresh objects: short training, index build, evaluation.
    TrainConfig tc = AcceptanceTrainConfig();
    tc.epochs = 2;
    tc.steps_per_epoch = 3;
    const std::vector<AudioBuffer> audio = AudioRange(c.songs, 0, kTrainSongs);
    const auto once = [&]() {
      const TrainResult r = TrainEncoder(audio, c.train, AugmentConfig{}, AugmentKind::kProposed,
                                         EncoderConfig{}, tc);
      return std::vector<double>(r.encoder.params().begin(), r.encoder.params().end());
    };
    const bool train_same = once() == once();
    const LearnedSystem again = BuildLearned(star.encoder, c.songs);
    const bool index_same = IndexBytes(*again.index) == IndexBytes(*star_sys.index);
    const std::vector<ProtocolRecording> recs2 = Recordings(c);
    const bool audio_same = recs2[2].audio == recs[2].audio;
    const EvalReport a = ProposedTable(recs2, IdentifierOf(again), "Mstar", {2, 5}, 50);
    const EvalReport b = ProposedTable(recs, IdentifierOf(star_sys), "Mstar", {2, 5}, 50);
    const bool report_same = a.ToCsv() == b.ToCsv() && a.ToJson() == b.ToJson();
    s.Record(12, train_same && index_same && audio_same && report_same, "determinism",
             Fmt("training %s, index bytes %s, simulated audio %s, report bytes %s; %.0f s",
                 train_same ? "identical" : "DIFFER", index_same ? "identical" : "DIFFER",
                 audio_same ? "identical" : "DIFFER", report_same ? "identical" : "DIFFER",
                 Since(t12)));
  }

  full.Write(fs::path(work) / "acceptance_report.csv", fs::path(work) / "acceptance_report.json");
  s.Info(Fmt("total %.0f s; report in %s", Since(t_all),
             (fs::path(work) / "acceptance_report.csv").string().c_str()));
  s.Summary();
  return s.Failures() == 0 ? 0 : 1;
}

}  // namespace
}  // namespace afp

int main(int argc, char** argv) { return afp::Run(argc, argv); }
