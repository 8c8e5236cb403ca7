#include "audioscript/audio.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace audioscript {

AudioBuffer::AudioBuffer(std::vector<float> samples)
    : samples_(std::move(samples)) {
  for (float s : samples_) {
    if (!std::isfinite(s)) {
      throw AudioError("NonFinite",
                       "audio buffer contains a non-finite sample");
    }
  }
}

AudioBuffer AudioBuffer::silence(SampleCount length) {
  return AudioBuffer(
      std::vector<float>(static_cast<std::size_t>(length), 0.0f));
}

AudioBuffer concat(std::span<const AudioBuffer> buffers) {
  if (buffers.empty()) {
    throw AudioError("EmptyInput", "concat needs at least one buffer");
  }
  std::size_t total = 0;
  for (const auto& b : buffers) total += b.samples().size();
  std::vector<float> out;
  out.reserve(total);
  for (const auto& b : buffers) {
    out.insert(out.end(), b.samples().begin(), b.samples().end());
  }
  return AudioBuffer(std::move(out));
}

namespace {

float clamp_unit(float v, SampleCount& clipped) {
  if (v > 1.0f) {
    ++clipped;
    return 1.0f;
  }
  if (v < -1.0f) {
    ++clipped;
    return -1.0f;
  }
  return v;
}

}  // namespace

Clamped mix_at_samples(const AudioBuffer& base, const AudioBuffer& overlay,
                       SampleCount offset) {
  if (offset < 0) {
    throw AudioError("NegativeOffset", "mix offset must be >= 0");
  }
  const auto base_len = static_cast<std::size_t>(base.size());
  const auto start = static_cast<std::size_t>(offset);
  const std::size_t length =
      std::max(base_len, start + overlay.samples().size());

  std::vector<float> out(length, 0.0f);
  std::copy(base.samples().begin(), base.samples().end(), out.begin());
  Clamped result;
  const auto over = overlay.samples();
  for (std::size_t i = 0; i < over.size(); ++i) {
    out[start + i] += over[i];
  }
  for (std::size_t i = start; i < start + over.size(); ++i) {
    out[i] = clamp_unit(out[i], result.clipped_samples);
  }
  result.buffer = AudioBuffer(std::move(out));
  return result;
}

Clamped mix_at(const AudioBuffer& base, const AudioBuffer& overlay,
               double offset_seconds) {
  if (offset_seconds < 0.0) {
    throw AudioError("NegativeOffset", "mix offset must be >= 0");
  }
  return mix_at_samples(base, overlay, seconds_to_samples(offset_seconds));
}

AudioBuffer trim_or_pad_samples(const AudioBuffer& buffer, SampleCount target) {
  if (target < 0) {
    throw AudioError("NegativeDuration", "target duration must be >= 0");
  }
  if (target == buffer.size()) return buffer;
  std::vector<float> out(
      buffer.samples().begin(),
      buffer.samples().begin() + std::min<SampleCount>(target, buffer.size()));
  out.resize(static_cast<std::size_t>(target), 0.0f);
  return AudioBuffer(std::move(out));
}

AudioBuffer trim_or_pad(const AudioBuffer& buffer, double target_seconds) {
  if (target_seconds < 0.0) {
    throw AudioError("NegativeDuration", "target duration must be >= 0");
  }
  return trim_or_pad_samples(buffer, seconds_to_samples(target_seconds));
}

Clamped apply_gain_db(const AudioBuffer& buffer, double gain_db) {
  const double gain = std::pow(10.0, gain_db / 20.0);
  Clamped result;
  std::vector<float> out(buffer.samples().begin(), buffer.samples().end());
  for (float& s : out) {
    s = clamp_unit(static_cast<float>(s * gain), result.clipped_samples);
  }
  result.buffer = AudioBuffer(std::move(out));
  return result;
}

namespace {

constexpr double kZeroCrossings = 32.0;
constexpr double kKaiserBeta = 9.0;

double sinc(double x) {
  if (std::fabs(x) < 1e-12) return 1.0;
  const double px = std::numbers::pi * x;
  return std::sin(px) / px;
}

// Kaiser window over |r| in [0, 1], tabulated and linearly interpolated.
class KaiserTable {
 public:
  static constexpr int kPoints = 8192;

  KaiserTable() {
    const double norm = std::cyl_bessel_i(0.0, kKaiserBeta);
    for (int i = 0; i <= kPoints; ++i) {
      const double r = static_cast<double>(i) / kPoints;
      table_[i] =
          std::cyl_bessel_i(0.0, kKaiserBeta * std::sqrt(1.0 - r * r)) / norm;
    }
  }

  double operator()(double r) const {
    r = std::fabs(r);
    if (r >= 1.0) return 0.0;
    const double pos = r * kPoints;
    const int i = static_cast<int>(pos);
    const double frac = pos - i;
    return table_[i] + frac * (table_[i + 1] - table_[i]);
  }

 private:
  std::array<double, kPoints + 1> table_{};
};

double kaiser(double x, double half_width) {
  static const KaiserTable table;
  return table(x / half_width);
}

}  // namespace

AudioBuffer resample_to_engine_rate(std::span<const float> samples,
                                    int src_rate) {
  if (src_rate < kMinSourceRate || src_rate > kMaxSourceRate) {
    throw AudioError(
        "UnsupportedRate",
        "sample rate " + std::to_string(src_rate) + " outside [8000, 96000]");
  }
  if (src_rate == kEngineSampleRate) {
    return AudioBuffer(std::vector<float>(samples.begin(), samples.end()));
  }

  const auto in_len = static_cast<std::int64_t>(samples.size());
  const std::int64_t out_len =
      (in_len * kEngineSampleRate + src_rate / 2) / src_rate;
  // Cutoff relative to the source Nyquist; below 1 when downsampling.
  const double cutoff =
      std::min(1.0, static_cast<double>(kEngineSampleRate) / src_rate);
  const double half_width = kZeroCrossings / cutoff;

  std::vector<float> out(static_cast<std::size_t>(out_len));
  for (std::int64_t n = 0; n < out_len; ++n) {
    // Output sample n sits at source position n * src / dst.
    const std::int64_t num = n * src_rate;
    const std::int64_t whole = num / kEngineSampleRate;
    const double t =
        static_cast<double>(whole) +
        static_cast<double>(num % kEngineSampleRate) / kEngineSampleRate;
    const auto lo = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::ceil(t - half_width)));
    const auto hi = std::min<std::int64_t>(
        in_len - 1, static_cast<std::int64_t>(std::floor(t + half_width)));
    double acc = 0.0;
    for (std::int64_t k = lo; k <= hi; ++k) {
      const double x = t - static_cast<double>(k);
      acc += samples[static_cast<std::size_t>(k)] * cutoff * sinc(cutoff * x) *
             kaiser(x, half_width);
    }
    out[static_cast<std::size_t>(n)] = static_cast<float>(acc);
  }
  return AudioBuffer(std::move(out));
}

double peak(const AudioBuffer& buffer) {
  double p = 0.0;
  for (float s : buffer.samples()) p = std::max(p, std::fabs(double{s}));
  return p;
}

double rms(std::span<const float> samples) {
  if (samples.empty()) return 0.0;
  double acc = 0.0;
  for (float s : samples) acc += double{s} * s;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

}  // namespace audioscript
