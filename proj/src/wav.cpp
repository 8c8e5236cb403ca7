#include "audioscript/wav.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace audioscript {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

[[noreturn]] void malformed(const std::string& why) {
  throw AudioError("MalformedWav", "malformed WAV: " + why);
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return pos_ + n <= bytes_.size(); }
  std::size_t pos() const { return pos_; }
  void seek(std::size_t pos) { pos_ = pos; }

  std::uint32_t u32() {
    if (!has(4)) malformed("truncated");
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | bytes_[pos_ + i];
    pos_ += 4;
    return v;
  }
  std::uint16_t u16() {
    if (!has(2)) malformed("truncated");
    const std::uint16_t v =
        static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::string tag() {
    if (!has(4)) malformed("truncated");
    std::string t(reinterpret_cast<const char*>(bytes_.data() + pos_), 4);
    pos_ += 4;
    return t;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

double decode_sample(const std::uint8_t* p, std::uint16_t format, int bits) {
  if (format == kFormatFloat) {
    if (bits == 32) {
      std::uint32_t raw = p[0] | (p[1] << 8) | (p[2] << 16) |
                          (static_cast<std::uint32_t>(p[3]) << 24);
      return std::bit_cast<float>(raw);
    }
    std::uint64_t raw = 0;
    for (int i = 7; i >= 0; --i) raw = (raw << 8) | p[i];
    return std::bit_cast<double>(raw);
  }
  switch (bits) {
    case 8:
      return (static_cast<int>(p[0]) - 128) / 128.0;
    case 16:
      return static_cast<std::int16_t>(p[0] | (p[1] << 8)) / 32768.0;
    case 24: {
      std::int32_t v = p[0] | (p[1] << 8) | (p[2] << 16);
      if (v & 0x800000) v -= 0x1000000;
      return v / 8388608.0;
    }
    default: {
      const auto v =
          static_cast<std::int32_t>(p[0] | (p[1] << 8) | (p[2] << 16) |
                                    (static_cast<std::uint32_t>(p[3]) << 24));
      return v / 2147483648.0;
    }
  }
}

}  // namespace

DecodedWav decode_wav(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (!r.has(12)) malformed("shorter than a RIFF header");
  if (r.tag() != "RIFF") malformed("missing RIFF tag");
  r.u32();
  if (r.tag() != "WAVE") malformed("missing WAVE tag");

  bool have_fmt = false;
  std::uint16_t format = 0;
  int channels = 0;
  int rate = 0;
  int bits = 0;
  int block_align = 0;

  while (r.has(8)) {
    const std::string id = r.tag();
    const std::uint32_t size = r.u32();
    const std::size_t body = r.pos();
    if (id == "fmt ") {
      if (size < 16 || !r.has(16)) malformed("short fmt chunk");
      format = r.u16();
      channels = r.u16();
      rate = static_cast<int>(r.u32());
      r.u32();  // byte rate
      block_align = r.u16();
      bits = r.u16();
      if (format == kFormatExtensible) {
        if (size < 40 || !r.has(24)) malformed("short extensible fmt chunk");
        r.u16();           // cbSize
        r.u16();           // valid bits
        r.u32();           // channel mask
        format = r.u16();  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (id == "data") {
      if (!have_fmt) malformed("data chunk before fmt chunk");
      const bool pcm_ok = format == kFormatPcm &&
                          (bits == 8 || bits == 16 || bits == 24 || bits == 32);
      const bool float_ok =
          format == kFormatFloat && (bits == 32 || bits == 64);
      if (!pcm_ok && !float_ok) {
        throw AudioError("UnsupportedEncoding",
                         "unsupported WAV encoding: format " +
                             std::to_string(format) + ", " +
                             std::to_string(bits) + " bits");
      }
      if (channels < 1 || rate <= 0 || block_align != channels * (bits / 8)) {
        malformed("inconsistent fmt fields");
      }
      // Tolerate a data size that overruns the file (streamed writers).
      const std::size_t available =
          std::min<std::size_t>(size, bytes.size() - body);
      const std::size_t frames =
          available / static_cast<std::size_t>(block_align);

      DecodedWav out;
      out.sample_rate = rate;
      out.channels = channels;
      out.samples.resize(frames);
      const int width = bits / 8;
      for (std::size_t f = 0; f < frames; ++f) {
        const std::uint8_t* frame = bytes.data() + body + f * block_align;
        double sum = 0.0;
        for (int c = 0; c < channels; ++c) {
          sum += decode_sample(frame + c * width, format, bits);
        }
        out.samples[f] = static_cast<float>(sum / channels);
      }
      for (float s : out.samples) {
        if (!std::isfinite(s)) malformed("non-finite float sample");
      }
      return out;
    }
    r.seek(body + size + (size & 1u));
  }
  malformed(have_fmt ? "no data chunk" : "no fmt chunk");
}

std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer) {
  const auto n = static_cast<std::uint32_t>(buffer.size());
  const std::uint32_t data_bytes = n * 2;
  std::vector<std::uint8_t> out;
  out.reserve(44 + data_bytes);
  auto put_tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  auto put32 = [&](std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
      out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  };
  auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
  };
  put_tag("RIFF");
  put32(36 + data_bytes);
  put_tag("WAVE");
  put_tag("fmt ");
  put32(16);
  put16(kFormatPcm);
  put16(1);
  put32(kEngineSampleRate);
  put32(kEngineSampleRate * 2);
  put16(2);
  put16(16);
  put_tag("data");
  put32(data_bytes);
  for (float s : buffer.samples()) {
    const long q =
        std::clamp(std::lround(double{s} * 32768.0), -32768L, 32767L);
    put16(static_cast<std::uint16_t>(static_cast<std::int16_t>(q)));
  }
  return out;
}

AudioBuffer wav_bytes_to_buffer(std::span<const std::uint8_t> bytes) {
  DecodedWav decoded = decode_wav(bytes);
  return resample_to_engine_rate(decoded.samples, decoded.sample_rate);
}

AudioBuffer read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw AudioError("FileNotFound", "cannot open " + path.string());
  }
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                        std::istreambuf_iterator<char>());
  return wav_bytes_to_buffer(bytes);
}

void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path) {
  const auto bytes = encode_wav(buffer);
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw AudioError("WriteFailed", "cannot write " + path.string());
  }
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw AudioError("WriteFailed", "short write to " + path.string());
}

}  // namespace audioscript
