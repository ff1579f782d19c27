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

#include "afp/dsp/wav.h"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>

#include "afp/common/binary_io.h"
#include "afp/common/error.h"

namespace afp {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatExtensible = 0xFFFE;

struct FormatChunk {
  uint16_t format = 0;
  uint16_t channels = 0;
  uint32_t sample_rate = 0;
  uint16_t bits_per_sample = 0;
};

std::string ReadTag(std::istream& in) {
  std::string tag(4, '\0');
  if (!in.read(tag.data(), 4)) throw FormatError("truncated chunk header");
  return tag;
}

}  // namespace

AudioBuffer ReadWav(std::istream& in) {
  if (ReadTag(in) != "RIFF") throw FormatError("not a RIFF file");
  io::ReadLE<uint32_t>(in);
  if (ReadTag(in) != "WAVE") throw FormatError("not a WAVE file");

  std::optional<FormatChunk> fmt;
  while (true) {
    std::string tag;
    try {
      tag = ReadTag(in);
    } catch (const FormatError&) {
      throw FormatError("no data chunk");
    }
    const uint32_t size = io::ReadLE<uint32_t>(in);
    if (tag == "fmt ") {
      if (size < 16) throw FormatError("truncated fmt chunk");
      FormatChunk f;
      f.format = io::ReadLE<uint16_t>(in);
      f.channels = io::ReadLE<uint16_t>(in);
      f.sample_rate = io::ReadLE<uint32_t>(in);
      io::ReadLE<uint32_t>(in);  // byte rate
      io::ReadLE<uint16_t>(in);  // block align
      f.bits_per_sample = io::ReadLE<uint16_t>(in);
      uint32_t remaining = size - 16;
      if (f.format == kFormatExtensible && remaining >= 10) {
        io::ReadLE<uint16_t>(in);  // cbSize
        io::ReadLE<uint16_t>(in);  // valid bits
        io::ReadLE<uint32_t>(in);  // channel mask
        f.format = io::ReadLE<uint16_t>(in);  // first two GUID bytes
        remaining -= 10;
      }
      remaining += size & 1u;
      if (!in.ignore(remaining)) throw FormatError("truncated fmt chunk");
      fmt = f;
    } else if (tag == "data") {
      if (!fmt) throw FormatError("data chunk before fmt chunk");
      if (fmt->format != kFormatPcm) {
        throw FormatError("unsupported codec (format tag " +
                          std::to_string(fmt->format) + ")");
      }
      if (fmt->bits_per_sample != 16) {
        throw FormatError("unsupported bit depth " +
                          std::to_string(fmt->bits_per_sample));
      }
      if (fmt->channels != 1 && fmt->channels != 2) {
        throw FormatError("unsupported channel count " +
                          std::to_string(fmt->channels));
      }
      if (fmt->sample_rate == 0) throw FormatError("zero sample rate");
      std::vector<char> raw(size);
      if (!in.read(raw.data(), static_cast<std::streamsize>(size))) {
        throw FormatError("truncated data chunk");
      }
      const size_t frame_bytes = 2u * fmt->channels;
      const size_t frames = size / frame_bytes;
      std::vector<float> samples(frames);
      auto sample_at = [&](size_t byte) {
        const auto lo = static_cast<uint8_t>(raw[byte]);
        const auto hi = static_cast<uint8_t>(raw[byte + 1]);
        return static_cast<int16_t>(static_cast<uint16_t>(lo | (hi << 8)));
      };
      for (size_t i = 0; i < frames; ++i) {
        if (fmt->channels == 1) {
          samples[i] = static_cast<float>(sample_at(2 * i) / 32768.0);
        } else {
          const double left = sample_at(4 * i) / 32768.0;
          const double right = sample_at(4 * i + 2) / 32768.0;
          samples[i] = static_cast<float>(0.5 * (left + right));
        }
      }
      return AudioBuffer(std::move(samples),
                         static_cast<int>(fmt->sample_rate));
    } else {
      if (!in.ignore(size + (size & 1u)) || in.gcount() != size + (size & 1u)) {
        throw FormatError("truncated chunk '" + tag + "'");
      }
    }
  }
}

AudioBuffer LoadWav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return ReadWav(in);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void SaveWav(const std::filesystem::path& path, const AudioBuffer& audio) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("cannot write " + path.string());
  const auto data_bytes = static_cast<uint32_t>(audio.size() * 2);
  io::WriteMagic(out, "RIFF");
  io::WriteLE<uint32_t>(out, 36 + data_bytes);
  io::WriteMagic(out, "WAVE");
  io::WriteMagic(out, "fmt ");
  io::WriteLE<uint32_t>(out, 16);
  io::WriteLE<uint16_t>(out, kFormatPcm);
  io::WriteLE<uint16_t>(out, 1);
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(audio.sample_rate_hz));
  io::WriteLE<uint32_t>(out, static_cast<uint32_t>(audio.sample_rate_hz * 2));
  io::WriteLE<uint16_t>(out, 2);
  io::WriteLE<uint16_t>(out, 16);
  io::WriteMagic(out, "data");
  io::WriteLE<uint32_t>(out, data_bytes);
  for (float s : audio.samples) {
    const double scaled = std::round(static_cast<double>(s) * 32768.0);
    io::WriteLE<int16_t>(
        out, static_cast<int16_t>(std::clamp(scaled, -32768.0, 32767.0)));
  }
  if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace afp
