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

// afp: command-line front end for corpus generation, training, indexing,
// querying and evaluation.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "afp/augment/pool.h"
#include "afp/common/error.h"
#include "afp/common/rng.h"
#include "afp/dsp/features.h"
#include "afp/dsp/wav.h"
#include "afp/encoder/exchange.h"
#include "afp/evalharness/eval.h"
#include "afp/retrieval/catalog.h"
#include "afp/retrieval/retrieval.h"
#include "config.h"

namespace fs = std::filesystem;

namespace afp::tool {
namespace {

// Options shared by every subcommand.
struct Common {
  std::string config_path;
  std::string run_dir;
  std::vector<std::string> sets;
  std::optional<uint64_t> seed;
};

class RunLog {
 public:
  explicit RunLog(const fs::path& dir) : file_(dir / "log.txt", std::ios::app) {}

  void Info(const std::string& message) {
    std::cerr << message << "\n";
    file_ << message << "\n";
    file_.flush();
  }

 private:
  std::ofstream file_;
};

// Per-invocation state: the effective config, run directory and log.
struct Run {
  json config;
  fs::path dir;
  std::unique_ptr<RunLog> log;
};

Run StartRun(const Common& common, const std::string& command,
             const std::function<void(json&)>& overrides) {
  Run run;
  run.config = LoadConfig(common.config_path);
  for (const std::string& s : common.sets) {
    const size_t eq = s.find('=');
    if (eq == std::string::npos) throw InvalidArgument("--set expects key=value, got '" + s + "'");
    SetField(run.config, s.substr(0, eq), s.substr(eq + 1));
  }
  if (common.seed) run.config["seed"] = *common.seed;
  overrides(run.config);
  run.dir = common.run_dir.empty() ? fs::path("runs") / command : fs::path(common.run_dir);
  fs::create_directories(run.dir);
  std::ofstream(run.dir / "config.json") << run.config.dump(2) << "\n";
  run.log = std::make_unique<RunLog>(run.dir);
  run.log->Info("afp " + command + ": run directory " + run.dir.string());
  return run;
}

void WriteReport(const Run& run, EvalReport report) {
  report.config_json = json{{"run", run.config}, {"eval", json::parse(report.config_json)}}.dump();
  report.Write(run.dir / "report.csv", run.dir / "report.json");
  run.log->Info("wrote " + std::to_string(report.rows.size()) + " report rows to " +
                (run.dir / "report.csv").string());
}

void WriteSidecar(const fs::path& artifact, const json& meta) {
  std::ofstream(artifact.string() + ".json") << meta.dump(2) << "\n";
}

json ReadSidecar(const fs::path& artifact) {
  std::ifstream in(artifact.string() + ".json");
  if (!in) return json::object();
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("malformed sidecar for " + artifact.string() + ": " + e.what());
  }
}

std::string Absolute(const std::string& path) {
  return path.empty() ? path : fs::absolute(path).lexically_normal().string();
}

// Held-out part of a pool: the test split, or validation when test is empty.
std::vector<AudioBuffer> HeldOutPool(const fs::path& dir) {
  std::vector<PoolEntry> test = LoadPool(dir, "test");
  if (test.empty()) test = LoadPool(dir, "validation");
  Require(!test.empty(), "pool " + dir.string() + " has no held-out files");
  return AudioOf(std::move(test));
}

std::vector<Song> LoadSongs(const std::string& dir) {
  Require(!dir.empty(), "--songs is required");
  std::vector<Song> songs = LoadSongDirectory(dir);
  Require(!songs.empty(), "no songs in " + dir);
  return songs;
}

std::string ModelPath(const std::string& flag, const fs::path& index) {
  if (!flag.empty()) return flag;
  const json meta = ReadSidecar(index);
  if (meta.contains("model")) return meta["model"].get<std::string>();
  throw InvalidArgument("--model is required (index " + index.string() + " records none)");
}

std::string Tag(const json& config, const std::string& fallback) {
  const auto tag = Field<std::string>(config, "eval", "model_tag");
  return tag.empty() ? fallback : tag;
}

std::string Seconds(std::chrono::steady_clock::time_point since) {
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.1fs", s);
  return buf;
}

// ---- ingest ----

struct IngestArgs {
  bool synth = false;
  std::string from;
  std::string out;
  std::optional<int> songs;
  std::optional<double> duration;
};

void Ingest(const Common& common, const IngestArgs& a) {
  Run run = StartRun(common, "ingest", [&](json& c) {
    if (a.songs) c["corpus"]["songs"] = *a.songs;
    if (a.duration) c["corpus"]["song_duration_s"] = *a.duration;
  });
  Require(!a.out.empty(), "--out is required");
  if (a.synth) {
    const corpus::CorpusSpec spec = CorpusSpecOf(run.config);
    const auto t0 = std::chrono::steady_clock::now();
    corpus::WriteCorpus(a.out, spec);
    run.log->Info("synthesized " + std::to_string(spec.songs) + " songs, " +
                  std::to_string(3 * spec.noise_files_per_kind) + " noise files and " +
                  std::to_string(spec.irs) + " impulse responses under " + a.out + " in " +
                  Seconds(t0));
    return;
  }
  Require(!a.from.empty(), "ingest needs --synth or --from <dir>");
  const std::vector<Song> songs = LoadSongs(a.from);
  const fs::path dir = fs::path(a.out) / "songs";
  fs::create_directories(dir);
  SongCatalog catalog;
  for (const Song& song : songs) {
    char name[32];
    std::snprintf(name, sizeof(name), "song_%05u.wav", song.id);
    SaveWav(dir / name, song.audio);
    SongInfo info = song.info;
    if (info.title.empty()) info.title = name;
    info.source_path = name;
    info.duration_s = song.audio.duration_s();
    catalog[song.id] = info;
  }
  WriteCatalog(dir / "songs.json", catalog);
  run.log->Info("ingested " + std::to_string(songs.size()) + " songs into " + dir.string());
}

// ---- train-encoder ----

struct TrainArgs {
  std::string songs;
  std::string noise;
  std::string ir;
  std::string out;
  std::string augment;
  std::optional<size_t> epochs;
};

void TrainEncoderCommand(const Common& common, const TrainArgs& a) {
  Run run = StartRun(common, "train-encoder", [&](json& c) {
    if (!a.augment.empty()) c["augment"]["kind"] = a.augment;
    if (a.epochs) c["train"]["epochs"] = *a.epochs;
  });
  Require(!a.noise.empty() && !a.ir.empty(), "--noise and --ir are required");
  const std::vector<Song> songs = LoadSongs(a.songs);
  std::vector<AudioBuffer> audio;
  for (const Song& s : songs) audio.push_back(s.audio);
  AugmentPools pools{AudioOf(LoadPool(a.noise, "train")), AudioOf(LoadPool(a.ir, "train"))};
  Require(!pools.noise.empty() && !pools.ir.empty(), "training pools are empty");

  const TrainConfig tc = TrainConfigOf(run.config);
  const fs::path out = a.out.empty() ? run.dir / "model.afpm" : fs::path(a.out);
  std::ofstream curve(run.dir / "train_curve.csv");
  curve << "epoch,loss,probe_loss\n";
  const auto t0 = std::chrono::steady_clock::now();
  TrainHooks hooks;
  hooks.on_epoch = [&](size_t epoch, double loss, double probe) {
    char line[128];
    std::snprintf(line, sizeof(line), "epoch %zu loss %.6f probe %.6f (%s)", epoch + 1, loss,
                  probe, Seconds(t0).c_str());
    run.log->Info(line);
    curve << epoch + 1 << "," << loss << "," << probe << "\n";
  };
  run.log->Info("training on " + std::to_string(songs.size()) + " songs, " +
                std::to_string(pools.noise.size()) + " noise files, " +
                std::to_string(pools.ir.size()) + " impulse responses");
  const TrainResult result =
      TrainEncoder(audio, pools, AugmentConfigOf(run.config), AugmentKindOf(run.config),
                   EncoderConfigOf(run.config), tc, hooks);
  result.encoder.Save(out);
  run.log->Info("saved encoder to " + out.string());
}

// ---- build-index ----

struct BuildIndexArgs {
  std::string model;
  std::string songs;
  std::string embeddings_in;
  std::string embeddings_out;
  std::string out;
};

void BuildIndexCommand(const Common& common, const BuildIndexArgs& a) {
  Run run = StartRun(common, "build-index", [](json&) {});
  Require(!a.out.empty(), "--out is required");
  EmbeddingTable table;
  const auto t0 = std::chrono::steady_clock::now();
  if (!a.embeddings_in.empty()) {
    table = ImportEmbeddings(a.embeddings_in);
  } else {
    Require(!a.model.empty(), "--model or --embeddings is required");
    const Encoder encoder = Encoder::Load(a.model);
    EncoderEmbedder embedder(encoder);
    table = EmbedSongs(LoadSongs(a.songs), embedder);
  }
  run.log->Info("embedded " + std::to_string(table.rows()) + " segments (" + Seconds(t0) + ")");
  if (!a.embeddings_out.empty()) ExportEmbeddings(a.embeddings_out, table);
  const FingerprintIndex index = BuildIndex(table, IndexConfigOf(run.config, table.dim));
  index.Save(a.out);
  const SizeReport size = index.Report();
  json meta = {{"model", Absolute(a.model)}, {"songs", Absolute(a.songs)}};
  WriteSidecar(a.out, meta);
  run.log->Info("index " + a.out + ": " + std::to_string(index.size()) + " vectors, " +
                std::to_string(size.code_bytes_total) + " code bytes, " +
                std::to_string(size.serialized_bytes) + " bytes on disk (" + Seconds(t0) + ")");
}

// ---- build-peak-index ----

void BuildPeakIndexCommand(const Common& common, const std::string& songs_dir,
                           const std::string& out) {
  Run run = StartRun(common, "build-peak-index", [](json&) {});
  Require(!out.empty(), "--out is required");
  const PeakConfig pc = PeakConfigOf(run.config);
  PeakIndex index;
  for (const Song& song : LoadSongs(songs_dir)) index.Add(song.id, FingerprintAudio(song.audio, pc));
  index.Save(out);
  WriteSidecar(out, {{"songs", Absolute(songs_dir)}, {"peak", run.config["peak"]}});
  run.log->Info("peak index " + out + ": " + std::to_string(index.size()) + " hashes");
}

PeakConfig PeakConfigFor(const fs::path& index, const json& config) {
  const json meta = ReadSidecar(index);
  if (!meta.contains("peak")) return PeakConfigOf(config);
  json merged = config;
  merged["peak"] = meta["peak"];
  return PeakConfigOf(merged);
}

// ---- query ----

struct QueryArgs {
  std::string index;
  std::string peak_index;
  std::string model;
  std::string audio;
  std::optional<size_t> top_k;
  std::optional<size_t> nprobe;
};

void Query(const Common& common, const QueryArgs& a) {
  Run run = StartRun(common, "query", [&](json& c) {
    if (a.top_k) c["eval"]["top_k"] = *a.top_k;
    if (a.nprobe) c["index"]["nprobe"] = *a.nprobe;
  });
  Require(!a.audio.empty(), "--audio is required");
  const AudioBuffer audio = Resample(LoadWav(a.audio), kSampleRateHz);
  json out;
  fs::path source;
  if (!a.peak_index.empty()) {
    source = a.peak_index;
    const PeakIndex index = PeakIndex::Load(a.peak_index);
    const std::vector<PeakMatch> matches =
        index.Match(FingerprintAudio(audio, PeakConfigFor(a.peak_index, run.config)));
    out["winner"] = matches.empty() ? json(nullptr) : json(matches.front().song_id);
    out["matches"] = json::array();
    for (size_t i = 0; i < std::min<size_t>(matches.size(), 10); ++i) {
      out["matches"].push_back({{"song_id", matches[i].song_id},
                                {"votes", matches[i].votes},
                                {"best_offset", matches[i].best_offset}});
    }
  } else {
    Require(!a.index.empty(), "--index or --peak-index is required");
    source = a.index;
    const FingerprintIndex index = FingerprintIndex::Load(a.index);
    const Encoder encoder = Encoder::Load(ModelPath(a.model, a.index));
    EncoderEmbedder embedder(encoder);
    const QueryResult r = Identify(audio, index, embedder, Field<size_t>(run.config, "eval", "top_k"),
                                   Field<size_t>(run.config, "index", "nprobe"));
    out = json::parse(r.ToJson());
  }
  const json meta = ReadSidecar(source);
  if (meta.contains("songs") && out["winner"].is_number()) {
    const fs::path catalog = fs::path(meta["songs"].get<std::string>()) / "songs.json";
    if (fs::exists(catalog)) {
      const SongCatalog songs = ReadCatalog(catalog);
      const auto it = songs.find(out["winner"].get<uint32_t>());
      if (it != songs.end()) out["winner_title"] = it->second.title;
    }
  }
  const std::string text = out.dump(2);
  std::cout << text << "\n";
  std::ofstream(run.dir / "query.json") << text << "\n";
}

// ---- eval-baseline / eval-proposed / sweep-pq ----

struct EvalArgs {
  std::string index;
  std::string peak_index;
  std::string model;
  std::string songs;
  std::string noise;
  std::string ir;
  std::string embeddings;
  std::vector<std::string> levels;
  std::vector<double> lens;
  std::vector<double> snr;
  std::vector<size_t> m;
  std::optional<size_t> queries;
};

void ApplyEvalFlags(const EvalArgs& a, json& c) {
  if (!a.levels.empty()) c["eval"]["levels"] = a.levels;
  if (!a.lens.empty()) c["eval"]["query_lens_s"] = a.lens;
  if (!a.snr.empty()) c["eval"]["snr_db"] = a.snr;
  if (!a.m.empty()) c["eval"]["m_values"] = a.m;
  if (a.queries) c["eval"]["queries_per_len"] = *a.queries;
}

// Songs of the simulated concert: the first eval.concert_songs by id.
std::vector<Song> ConcertSongs(const std::vector<Song>& songs, const json& config) {
  const size_t n = std::min(songs.size(), Field<size_t>(config, "eval", "concert_songs"));
  return std::vector<Song>(songs.begin(), songs.begin() + n);
}

std::vector<DistortionLevel> LevelsOf(const json& config) {
  std::vector<DistortionLevel> out;
  for (const auto& name : Field<std::vector<std::string>>(config, "eval", "levels")) {
    out.push_back(ParseLevel(name));
  }
  return out;
}

EvalReport ProposedReport(const json& config, const std::vector<Song>& songs,
                          const AugmentPools& pools, const SongIdentifier& identify,
                          const std::string& tag, const std::vector<DistortionLevel>& levels,
                          const std::vector<double>& lens, RunLog& log) {
  const ProtocolRecording clean = BuildConcert(ConcertSongs(songs, config));
  const uint64_t seed = SeedOf(config);
  ProposedEvalConfig pc;
  pc.model_tag = tag;
  pc.query_lens_s = lens;
  pc.queries_per_len = Field<size_t>(config, "eval", "queries_per_len");
  pc.seed = seed;
  EvalReport report;
  for (DistortionLevel level : levels) {
    const ProtocolRecording rec = SimulateRecording(clean, level, pools, DeriveSeed(seed, 7));
    const EvalReport part = RunProposedEval(rec, identify, pc);
    for (const EvalRow& row : part.rows) {
      char line[128];
      std::snprintf(line, sizeof(line), "%s %s %gs accuracy %.2f%%", tag.c_str(),
                    row.level_or_snr.c_str(), row.query_len_s, row.value);
      log.Info(line);
    }
    report.Append(part);
    report.config_json = part.config_json;
  }
  return report;
}

void EvalProposed(const Common& common, const EvalArgs& a) {
  Run run = StartRun(common, "eval-proposed", [&](json& c) { ApplyEvalFlags(a, c); });
  Require(!a.noise.empty() && !a.ir.empty(), "--noise and --ir are required");
  const std::vector<Song> songs = LoadSongs(a.songs);
  const AugmentPools pools{HeldOutPool(a.noise), HeldOutPool(a.ir)};
  const auto lens = Field<std::vector<double>>(run.config, "eval", "query_lens_s");
  EvalReport report;
  if (!a.peak_index.empty()) {
    const PeakIndex index = PeakIndex::Load(a.peak_index);
    report = ProposedReport(run.config, songs, pools,
                            PeakIdentifier(index, PeakConfigFor(a.peak_index, run.config)),
                            Tag(run.config, "peak"), LevelsOf(run.config), lens, *run.log);
  } else {
    Require(!a.index.empty(), "--index or --peak-index is required");
    const FingerprintIndex index = FingerprintIndex::Load(a.index);
    const std::string model = ModelPath(a.model, a.index);
    const Encoder encoder = Encoder::Load(model);
    EncoderEmbedder embedder(encoder);
    report = ProposedReport(
        run.config, songs, pools,
        LearnedIdentifier(index, embedder, Field<size_t>(run.config, "eval", "top_k"),
                          Field<size_t>(run.config, "index", "nprobe")),
        Tag(run.config, fs::path(model).stem().string()), LevelsOf(run.config), lens, *run.log);
  }
  WriteReport(run, report);
}

void EvalBaseline(const Common& common, const EvalArgs& a) {
  Run run = StartRun(common, "eval-baseline", [&](json& c) { ApplyEvalFlags(a, c); });
  Require(!a.noise.empty(), "--noise is required");
  const std::vector<Song> songs = LoadSongs(a.songs);
  const std::vector<AudioBuffer> noise = HeldOutPool(a.noise);
  BaselineEvalConfig bc;
  bc.snr_db = Field<std::vector<double>>(run.config, "eval", "snr_db");
  bc.query_lens_s = Field<std::vector<double>>(run.config, "eval", "query_lens_s");
  bc.queries_per_len = Field<size_t>(run.config, "eval", "queries_per_len");
  bc.seed = SeedOf(run.config);
  EvalReport report;
  if (!a.peak_index.empty()) {
    const PeakIndex index = PeakIndex::Load(a.peak_index);
    bc.model_tag = Tag(run.config, "peak");
    report = RunBaselineEval(songs, noise,
                             PeakLocator(index, PeakConfigFor(a.peak_index, run.config)), bc);
  } else {
    Require(!a.index.empty(), "--index or --peak-index is required");
    const FingerprintIndex index = FingerprintIndex::Load(a.index);
    const std::string model = ModelPath(a.model, a.index);
    const Encoder encoder = Encoder::Load(model);
    EncoderEmbedder embedder(encoder);
    bc.model_tag = Tag(run.config, fs::path(model).stem().string());
    report = RunBaselineEval(songs, noise,
                             LearnedLocator(index, embedder, Field<size_t>(run.config, "index", "nprobe")),
                             bc);
  }
  for (const EvalRow& row : report.rows) {
    char line[160];
    std::snprintf(line, sizeof(line), "%s snr %s %gs %s %.2f", row.model_tag.c_str(),
                  row.level_or_snr.c_str(), row.query_len_s, row.metric_name.c_str(), row.value);
    run.log->Info(line);
  }
  WriteReport(run, report);
}

void SweepPq(const Common& common, const EvalArgs& a) {
  Run run = StartRun(common, "sweep-pq", [&](json& c) { ApplyEvalFlags(a, c); });
  Require(!a.model.empty(), "--model is required");
  Require(!a.noise.empty() && !a.ir.empty(), "--noise and --ir are required");
  const Encoder encoder = Encoder::Load(a.model);
  EncoderEmbedder embedder(encoder);
  const std::vector<Song> songs = LoadSongs(a.songs);
  const EmbeddingTable table =
      a.embeddings.empty() ? EmbedSongs(songs, embedder) : ImportEmbeddings(a.embeddings, embedder.dim());

  std::vector<size_t> ms = Field<std::vector<size_t>>(run.config, "eval", "m_values");
  if (a.m.empty() && run.config["eval"]["m_values"] == DefaultConfig()["eval"]["m_values"]) {
    std::erase_if(ms, [&](size_t m) { return table.dim % m != 0; });
    run.log->Info("default quantizer counts filtered to divisors of D = " + std::to_string(table.dim));
  }
  const DistortionLevel level = ParseLevel(Field<std::string>(run.config, "eval", "sweep_level"));
  const double len = Field<double>(run.config, "eval", "sweep_query_len_s");
  const AugmentPools pools{HeldOutPool(a.noise), HeldOutPool(a.ir)};
  const std::string tag = Tag(run.config, fs::path(a.model).stem().string());
  const size_t top_k = Field<size_t>(run.config, "eval", "top_k");
  const SweepResult result = QuantizationSweep(
      table, IndexConfigOf(run.config, table.dim), ms, [&](const FingerprintIndex& index) {
        run.log->Info("m = " + std::to_string(index.config().subquantizers) + ": " +
                      std::to_string(index.SerializedSize()) + " bytes");
        return ProposedReport(run.config, songs, pools,
                              LearnedIdentifier(index, embedder, top_k, index.config().nprobe),
                              tag, {level}, {len}, *run.log);
      });
  WriteReport(run, result.report);
  std::ofstream(run.dir / "plot.csv") << result.PlotCsv();
}

// ---- inspect ----

void Inspect(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open " + path);
  char magic[4] = {};
  in.read(magic, 4);
  const std::string m(magic, 4);
  json out = {{"path", path}, {"bytes", fs::file_size(path)}};
  if (m == "AFPM") {
    const Encoder e = Encoder::Load(path);
    const EncoderConfig& c = e.config();
    out["kind"] = "encoder";
    out["channels"] = c.channels;
    out["input"] = {c.input_bins, c.input_frames};
    out["pool"] = {c.pool_bins, c.pool_frames};
    out["feature_dim"] = c.feature_dim();
    out["embedding_dim"] = c.embedding_dim;
    out["hidden_dim"] = c.hidden_dim;
    out["parameters"] = c.param_count();
  } else if (m == "AFPI") {
    const FingerprintIndex index = FingerprintIndex::Load(path);
    const IndexConfig& c = index.config();
    out["kind"] = "pq_index";
    out["vectors"] = index.size();
    out["dim"] = c.dim;
    out["subquantizers"] = c.subquantizers;
    out["code_bits"] = c.code_bits;
    out["coarse_cells"] = c.coarse_cells;
    out["nprobe"] = c.nprobe;
    out["code_bytes_total"] = index.Report().code_bytes_total;
    out["serialized_bytes"] = index.SerializedSize();
  } else if (m == "AFPH") {
    out["kind"] = "peak_index";
    out["hashes"] = PeakIndex::Load(path).size();
  } else if (m == "AFPE") {
    const EmbeddingTable t = ImportEmbeddings(path);
    out["kind"] = "embeddings";
    out["rows"] = t.rows();
    out["dim"] = t.dim;
  } else if (m == "RIFF") {
    const AudioBuffer a = LoadWav(path);
    out["kind"] = "wav";
    out["sample_rate_hz"] = a.sample_rate_hz;
    out["duration_s"] = a.duration_s();
    out["rms"] = Rms(a.samples);
    out["peak"] = Peak(a.samples);
    out["segments_at_8k"] = SegmentCount(Resample(a, kSampleRateHz).size(), kSampleRateHz);
  } else {
    throw FormatError(path + ": unrecognized file type");
  }
  std::cout << out.dump(2) << "\n";
}

int Main(int argc, char** argv) {
  CLI::App app{"afp: audio fingerprinting toolkit"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--config", common.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--run-dir", common.run_dir, "output directory (default runs/<command>)");
  app.add_option("--set", common.sets, "override a config field: key.path=value");
  app.add_option("--seed", common.seed, "master seed");
  for (auto* opt : app.get_options()) opt->configurable(false);
  app.fallthrough();

  IngestArgs ingest;
  auto* ingest_cmd = app.add_subcommand("ingest", "write a song/noise/IR corpus");
  ingest_cmd->add_flag("--synth", ingest.synth, "synthesize the corpus");
  ingest_cmd->add_option("--from", ingest.from, "directory of user WAV files");
  ingest_cmd->add_option("--out", ingest.out, "output directory")->required();
  ingest_cmd->add_option("--songs", ingest.songs, "number of synthetic songs");
  ingest_cmd->add_option("--duration", ingest.duration, "synthetic song duration in seconds");

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train-encoder", "train the learned encoder");
  train_cmd->add_option("--songs", train.songs, "song directory")->required();
  train_cmd->add_option("--noise", train.noise, "noise pool directory")->required();
  train_cmd->add_option("--ir", train.ir, "impulse response pool directory")->required();
  train_cmd->add_option("--out", train.out, "model file (default <run-dir>/model.afpm)");
  train_cmd->add_option("--augment", train.augment, "proposed or baseline");
  train_cmd->add_option("--epochs", train.epochs, "training epochs");

  BuildIndexArgs build;
  auto* build_cmd = app.add_subcommand("build-index", "embed songs and build the PQ index");
  build_cmd->add_option("--model", build.model, "encoder file");
  build_cmd->add_option("--songs", build.songs, "song directory");
  build_cmd->add_option("--embeddings", build.embeddings_in, "precomputed embedding file");
  build_cmd->add_option("--export-embeddings", build.embeddings_out, "write the embeddings here");
  build_cmd->add_option("--out", build.out, "index file")->required();

  std::string peak_songs;
  std::string peak_out;
  auto* peak_cmd = app.add_subcommand("build-peak-index", "build the spectral-peak index");
  peak_cmd->add_option("--songs", peak_songs, "song directory")->required();
  peak_cmd->add_option("--out", peak_out, "peak index file")->required();

  QueryArgs query;
  auto* query_cmd = app.add_subcommand("query", "identify one audio clip");
  query_cmd->add_option("--index", query.index, "PQ index file");
  query_cmd->add_option("--peak-index", query.peak_index, "peak index file");
  query_cmd->add_option("--model", query.model, "encoder file (default: recorded by build-index)");
  query_cmd->add_option("--audio", query.audio, "query WAV")->required()->check(CLI::ExistingFile);
  query_cmd->add_option("--top-k", query.top_k, "neighbors per segment");
  query_cmd->add_option("--nprobe", query.nprobe, "coarse cells searched");

  auto add_eval = [&app](const std::string& name, const std::string& help, EvalArgs& e) {
    auto* cmd = app.add_subcommand(name, help);
    cmd->add_option("--index", e.index, "PQ index file");
    cmd->add_option("--peak-index", e.peak_index, "peak index file");
    cmd->add_option("--model", e.model, "encoder file");
    cmd->add_option("--songs", e.songs, "song directory")->required();
    cmd->add_option("--noise", e.noise, "noise pool directory");
    cmd->add_option("--ir", e.ir, "impulse response pool directory");
    cmd->add_option("--lens", e.lens, "query lengths in seconds")->delimiter(',');
    cmd->add_option("--queries", e.queries, "queries per cell");
    return cmd;
  };
  EvalArgs baseline;
  auto* baseline_cmd = add_eval("eval-baseline", "offline-SNR evaluation", baseline);
  baseline_cmd->add_option("--snr", baseline.snr, "SNR levels in dB")->delimiter(',');
  EvalArgs proposed;
  auto* proposed_cmd = add_eval("eval-proposed", "simulated-recording evaluation", proposed);
  proposed_cmd->add_option("--levels", proposed.levels, "low,mid,high")->delimiter(',');
  EvalArgs sweep;
  auto* sweep_cmd = add_eval("sweep-pq", "quantizer-count sweep", sweep);
  sweep_cmd->add_option("--m", sweep.m, "quantizer counts")->delimiter(',');
  sweep_cmd->add_option("--embeddings", sweep.embeddings, "precomputed embedding file");

  std::string inspect_path;
  auto* inspect_cmd = app.add_subcommand("inspect", "describe a model, index, embedding or WAV file");
  inspect_cmd->add_option("file", inspect_path, "file to describe")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*ingest_cmd) Ingest(common, ingest);
    else if (*train_cmd) TrainEncoderCommand(common, train);
    else if (*build_cmd) BuildIndexCommand(common, build);
    else if (*peak_cmd) BuildPeakIndexCommand(common, peak_songs, peak_out);
    else if (*query_cmd) Query(common, query);
    else if (*baseline_cmd) EvalBaseline(common, baseline);
    else if (*proposed_cmd) EvalProposed(common, proposed);
    else if (*sweep_cmd) SweepPq(common, sweep);
    else if (*inspect_cmd) {
      LoadConfig(common.config_path);
      Inspect(inspect_path);
    }
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace
}  // namespace afp::tool

int main(int argc, char** argv) { return afp::tool::Main(argc, argv); }
