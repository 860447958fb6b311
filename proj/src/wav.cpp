// Copyright 2026 The TGIF Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "tgif/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tgif/error.hpp"

namespace tgif {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint32_t le32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t le16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

void put16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xFF));
  out.push_back(static_cast<unsigned char>(v >> 8));
}

void put_tag(std::vector<unsigned char>& out, const char* tag) {
  out.insert(out.end(), tag, tag + 4);
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("asset-not-found", path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  const auto bad = [&](const std::string& why) {
    return Error("bad-wav", path.string() + ": " + why);
  };
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw bad("not a RIFF/WAVE file");
  }

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + pos;
    const std::uint32_t size = le32(chunk + 4);
    const std::size_t body = pos + 8;
    if (body + size > bytes.size()) {
      // Tolerate a truncated trailing data chunk.
      if (std::memcmp(chunk, "data", 4) != 0) throw bad("truncated chunk");
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (size < 16) throw bad("short fmt chunk");
      format = le16(bytes.data() + body);
      channels = le16(bytes.data() + body + 2);
      rate = le32(bytes.data() + body + 4);
      bits = le16(bytes.data() + body + 14);
      if (format == kFormatExtensible && size >= 26) {
        format = le16(bytes.data() + body + 24);
      }
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + body;
      data_size = static_cast<std::uint32_t>(
          std::min<std::size_t>(size, bytes.size() - body));
    }
    pos = body + size + (size & 1u);
  }
  if (data == nullptr || rate == 0) throw bad("missing fmt or data chunk");
  if (channels != 1) throw bad("expected mono, got " + std::to_string(channels) + " channels");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.source_id = path.stem().string();
  if (format == kFormatPcm && bits == 16) {
    const std::size_t n = data_size / 2;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = static_cast<std::int16_t>(le16(data + 2 * i));
      clip.samples[i] = static_cast<double>(v) / 32768.0;
    }
  } else if (format == kFormatFloat && bits == 32) {
    const std::size_t n = data_size / 4;
    clip.samples.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint32_t raw = le32(data + 4 * i);
      float f;
      std::memcpy(&f, &raw, sizeof f);
      clip.samples[i] = static_cast<double>(f);
    }
  } else {
    throw bad("unsupported encoding (format " + std::to_string(format) +
              ", " + std::to_string(bits) + " bits)");
  }
  check_finite(clip);
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip,
               WavFormat format) {
  const bool is_float = format == WavFormat::kFloat32;
  const std::uint16_t bytes_per_sample = is_float ? 4 : 2;
  const auto data_size =
      static_cast<std::uint32_t>(clip.samples.size() * bytes_per_sample);

  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put32(out, 16);
  put16(out, is_float ? kFormatFloat : kFormatPcm);
  put16(out, 1);
  put32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put32(out, static_cast<std::uint32_t>(clip.sample_rate) * bytes_per_sample);
  put16(out, bytes_per_sample);
  put16(out, static_cast<std::uint16_t>(8 * bytes_per_sample));
  put_tag(out, "data");
  put32(out, data_size);
  for (double v : clip.samples) {
    if (is_float) {
      const float f = static_cast<float>(v);
      std::uint32_t raw;
      std::memcpy(&raw, &f, sizeof raw);
      put32(out, raw);
    } else {
      const double scaled = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
      put16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(scaled)));
    }
  }

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw Error("io-error", "cannot open " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()),
             static_cast<std::streamsize>(out.size()));
  if (!file) throw Error("io-error", "write failed: " + path.string());
}

void quantize_float32(AudioClip& clip) {
  for (double& v : clip.samples) v = static_cast<double>(static_cast<float>(v));
}

}  // namespace tgif
