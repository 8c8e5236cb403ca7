#ifndef AUDIOSCRIPT_AUDIO_HPP_
#define AUDIOSCRIPT_AUDIO_HPP_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "audioscript/timebase.hpp"

namespace audioscript {

class AudioError : public std::runtime_error {
 public:
  AudioError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Mono PCM at kEngineSampleRate.
class AudioBuffer {
 public:
  AudioBuffer() = default;
  // Throws AudioError(NonFinite) on NaN or infinite samples.
  explicit AudioBuffer(std::vector<float> samples);

  static AudioBuffer silence(SampleCount length);

  std::span<const float> samples() const { return samples_; }
  std::vector<float>& mutable_samples() { return samples_; }
  SampleCount size() const { return static_cast<SampleCount>(samples_.size()); }
  bool empty() const { return samples_.empty(); }
  double duration_seconds() const { return samples_to_seconds(size()); }
  static constexpr int sample_rate() { return kEngineSampleRate; }

  friend bool operator==(const AudioBuffer&, const AudioBuffer&) = default;

 private:
  std::vector<float> samples_;
};

// Outcome of an operation that may clamp samples into [-1, 1].
struct Clamped {
  AudioBuffer buffer;
  SampleCount clipped_samples = 0;
};

// Throws AudioError(EmptyInput) for an empty list.
AudioBuffer concat(std::span<const AudioBuffer> buffers);

// Adds overlay into base starting at round(offset * rate). The result is as
// long as whichever reaches further.
Clamped mix_at(const AudioBuffer& base, const AudioBuffer& overlay,
               double offset_seconds);
Clamped mix_at_samples(const AudioBuffer& base, const AudioBuffer& overlay,
                       SampleCount offset);

// Trims from or zero-pads the end to exactly round(target * rate) samples.
AudioBuffer trim_or_pad(const AudioBuffer& buffer, double target_seconds);
AudioBuffer trim_or_pad_samples(const AudioBuffer& buffer, SampleCount target);

Clamped apply_gain_db(const AudioBuffer& buffer, double gain_db);

inline constexpr int kMinSourceRate = 8000;
inline constexpr int kMaxSourceRate = 96000;

// Kaiser-windowed sinc resampler. Output length is
// round(input_length * kEngineSampleRate / src_rate).
// Throws AudioError(UnsupportedRate) outside [8000, 96000].
AudioBuffer resample_to_engine_rate(std::span<const float> samples,
                                    int src_rate);

double peak(const AudioBuffer& buffer);
double rms(std::span<const float> samples);

}  // namespace audioscript

#endif  // AUDIOSCRIPT_AUDIO_HPP_
