// spkver/audio_io.hpp

// Copyright 2026  The spkver Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.


#ifndef SPKVER_AUDIO_IO_HPP_
#define SPKVER_AUDIO_IO_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <string>
#include <vector>

#include "spkver/common.hpp"

namespace spkver {

/// Mono signal with samples scaled to [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate_hz = 16000;

  std::size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
};

namespace wav_detail {

inline std::uint32_t ReadU32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t ReadU16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

inline void PutU32(std::string* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out->push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

inline void PutU16(std::string* out, std::uint16_t v) {
  out->push_back(static_cast<char>(v & 0xff));
  out->push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace wav_detail

/// Quantizes one unit-scaled sample to PCM16: round(x * 32768), saturated to
/// the symmetric range [-32767, 32767].
inline std::int16_t QuantizeSample(double x) {
  const double clipped = std::clamp(x, -1.0, 1.0);
  const double q = std::clamp(std::round(clipped * 32768.0), -32767.0, 32767.0);
  return static_cast<std::int16_t>(q);
}

inline double DequantizeSample(std::int16_t v) { return v / 32768.0; }

/// Parses a RIFF/WAVE byte buffer holding PCM 16-bit mono audio. Chunks other
/// than "fmt " and "data" are skipped.
inline AudioClip DecodeWav(const std::string& bytes) {
  using wav_detail::ReadU16;
  using wav_detail::ReadU32;
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();
  if (size < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0)
    Fail(ErrorCode::kNotWav, "missing RIFF/WAVE magic");

  bool have_fmt = false;
  int rate = 0;
  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const char* id = bytes.data() + pos;
    const std::uint32_t chunk_len = ReadU32(p + pos + 4);
    const std::size_t body = pos + 8;
    if (chunk_len > size - body)
      Fail(ErrorCode::kTruncatedFile, "chunk '" + std::string(id, 4) +
                                          "' declares " + std::to_string(chunk_len) +
                                          " bytes beyond end of file");
    if (std::memcmp(id, "fmt ", 4) == 0) {
      if (chunk_len < 16) Fail(ErrorCode::kTruncatedFile, "short fmt chunk");
      const std::uint16_t tag = ReadU16(p + body);
      const std::uint16_t channels = ReadU16(p + body + 2);
      const std::uint32_t sr = ReadU32(p + body + 4);
      const std::uint16_t bits = ReadU16(p + body + 14);
      if (tag != 1)
        Fail(ErrorCode::kUnsupportedFormat, "format tag " + std::to_string(tag) + " (only PCM=1)");
      if (channels != 1)
        Fail(ErrorCode::kUnsupportedFormat, std::to_string(channels) + " channels (only mono)");
      if (bits != 16)
        Fail(ErrorCode::kUnsupportedFormat, std::to_string(bits) + "-bit samples (only 16)");
      if (sr == 0) Fail(ErrorCode::kUnsupportedFormat, "zero sample rate");
      rate = static_cast<int>(sr);
      have_fmt = true;
    } else if (std::memcmp(id, "data", 4) == 0) {
      if (!have_fmt) Fail(ErrorCode::kUnsupportedFormat, "data chunk before fmt chunk");
      if (chunk_len == 0) Fail(ErrorCode::kTruncatedFile, "empty data chunk");
      if (chunk_len % 2 != 0) Fail(ErrorCode::kTruncatedFile, "odd data chunk length");
      AudioClip clip;
      clip.sample_rate_hz = rate;
      clip.samples.resize(chunk_len / 2);
      for (std::size_t i = 0; i < clip.samples.size(); ++i)
        clip.samples[i] = DequantizeSample(static_cast<std::int16_t>(ReadU16(p + body + 2 * i)));
      return clip;
    }
    pos = body + chunk_len + (chunk_len & 1u);
  }
  Fail(ErrorCode::kTruncatedFile, have_fmt ? "no data chunk" : "no fmt chunk");
}

inline std::string EncodeWav(const AudioClip& clip) {
  using wav_detail::PutU16;
  using wav_detail::PutU32;
  if (clip.sample_rate_hz <= 0)
    Fail(ErrorCode::kInvalidArgument, "sample rate must be positive");
  const auto data_len = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::string out;
  out.reserve(44 + data_len);
  out += "RIFF";
  PutU32(&out, 36 + data_len);
  out += "WAVEfmt ";
  PutU32(&out, 16);
  PutU16(&out, 1);  // PCM
  PutU16(&out, 1);  // mono
  PutU32(&out, static_cast<std::uint32_t>(clip.sample_rate_hz));
  PutU32(&out, static_cast<std::uint32_t>(clip.sample_rate_hz) * 2);
  PutU16(&out, 2);
  PutU16(&out, 16);
  out += "data";
  PutU32(&out, data_len);
  for (double s : clip.samples)
    PutU16(&out, static_cast<std::uint16_t>(QuantizeSample(s)));
  return out;
}

inline AudioClip ReadWav(const std::filesystem::path& path) {
  return DecodeWav(ReadFileText(path));
}

inline void WriteWav(const AudioClip& clip, const std::filesystem::path& path) {
  WriteFileAtomic(path, EncodeWav(clip));
}

}  // namespace spkver

#endif  // SPKVER_AUDIO_IO_HPP_
