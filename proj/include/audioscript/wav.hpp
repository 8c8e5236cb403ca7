#ifndef AUDIOSCRIPT_WAV_HPP_
#define AUDIOSCRIPT_WAV_HPP_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "audioscript/audio.hpp"

namespace audioscript {

// Mono samples at the file's own rate, before resampling.
struct DecodedWav {
  std::vector<float> samples;
  int sample_rate = 0;
  int channels = 0;
};

// Accepts PCM 8/16/24/32-bit and IEEE float 32/64-bit, plain or
// WAVE_FORMAT_EXTENSIBLE. Channels are averaged to mono.
// Throws AudioError(MalformedWav | UnsupportedEncoding).
DecodedWav decode_wav(std::span<const std::uint8_t> bytes);

// 16-bit PCM mono at the engine rate.
std::vector<std::uint8_t> encode_wav(const AudioBuffer& buffer);

// decode_wav followed by resample_to_engine_rate.
AudioBuffer read_wav(const std::filesystem::path& path);
AudioBuffer wav_bytes_to_buffer(std::span<const std::uint8_t> bytes);
void write_wav(const AudioBuffer& buffer, const std::filesystem::path& path);

}  // namespace audioscript

#endif  // AUDIOSCRIPT_WAV_HPP_
