#include "audioscript/loudness.hpp"

#include <numbers>
#include <vector>

namespace audioscript {

KWeighting design_k_weighting(double sample_rate) {
  // Analog prototype parameters that reproduce the published 48 kHz
  // coefficients when bilinear-transformed at 48 kHz.
  KWeighting k;
  {
    const double f0 = 1681.974450955533;
    const double gain_db = 3.999843853973347;
    const double q = 0.7071752369554196;
    const double kk = std::tan(std::numbers::pi * f0 / sample_rate);
    const double vh = std::pow(10.0, gain_db / 20.0);
    const double vb = std::pow(vh, 0.4996667741545416);
    const double a0 = 1.0 + kk / q + kk * kk;
    k.shelf.b = {(vh + vb * kk / q + kk * kk) / a0, 2.0 * (kk * kk - vh) / a0,
                 (vh - vb * kk / q + kk * kk) / a0};
    k.shelf.a = {1.0, 2.0 * (kk * kk - 1.0) / a0,
                 (1.0 - kk / q + kk * kk) / a0};
  }
  {
    const double f0 = 38.13547087602444;
    const double q = 0.5003270373238773;
    const double kk = std::tan(std::numbers::pi * f0 / sample_rate);
    const double a0 = 1.0 + kk / q + kk * kk;
    // The published numerator is exactly [1, -2, 1] only at 48 kHz; keep
    // the same passband gain at other rates.
    const double k48 = std::tan(std::numbers::pi * f0 / 48000.0);
    const double g = (1.0 + k48 / q + k48 * k48) / a0;
    k.highpass.b = {g, -2.0 * g, g};
    k.highpass.a = {1.0, 2.0 * (kk * kk - 1.0) / a0,
                    (1.0 - kk / q + kk * kk) / a0};
  }
  return k;
}

namespace {

// Transposed direct form II, in place.
void run_biquad(const Biquad& f, std::vector<double>& x) {
  double z1 = 0.0;
  double z2 = 0.0;
  for (double& v : x) {
    const double in = v;
    const double out = f.b[0] * in + z1;
    z1 = f.b[1] * in - f.a[1] * out + z2;
    z2 = f.b[2] * in - f.a[2] * out;
    v = out;
  }
}

std::vector<double> k_weighted(const AudioBuffer& buffer) {
  static const KWeighting k = design_k_weighting(kEngineSampleRate);
  std::vector<double> x(buffer.samples().begin(), buffer.samples().end());
  run_biquad(k.shelf, x);
  run_biquad(k.highpass, x);
  return x;
}

double energy_to_lufs(double mean_square) {
  return -0.691 + 10.0 * std::log10(mean_square);
}

}  // namespace

Loudness measure_lufs(const AudioBuffer& buffer) {
  const SampleCount block = seconds_to_samples(kGatingBlockSeconds);
  const SampleCount hop = block / 4;
  if (buffer.size() < block) {
    throw AudioError("TooShort",
                     "loudness needs at least 400 ms of audio, got " +
                         std::to_string(buffer.duration_seconds()) + " s");
  }
  const std::vector<double> x = k_weighted(buffer);

  // Prefix sums of squares give each block's mean square in O(1).
  std::vector<double> prefix(x.size() + 1, 0.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    prefix[i + 1] = prefix[i] + x[i] * x[i];
  }
  const SampleCount blocks = (buffer.size() - block) / hop + 1;
  std::vector<double> block_energy;
  block_energy.reserve(static_cast<std::size_t>(blocks));
  for (SampleCount j = 0; j < blocks; ++j) {
    const auto start = static_cast<std::size_t>(j * hop);
    block_energy.push_back((prefix[start + block] - prefix[start]) /
                           static_cast<double>(block));
  }

  auto gated_mean = [&](double threshold_lufs) {
    double sum = 0.0;
    std::size_t count = 0;
    for (double e : block_energy) {
      if (e > 0.0 && energy_to_lufs(e) > threshold_lufs) {
        sum += e;
        ++count;
      }
    }
    return count == 0 ? 0.0 : sum / static_cast<double>(count);
  };

  const double absolute_mean = gated_mean(kAbsoluteGateLufs);
  if (absolute_mean <= 0.0) return {};
  const double relative_gate = energy_to_lufs(absolute_mean) + kRelativeGateLu;
  const double gated = gated_mean(std::max(relative_gate, kAbsoluteGateLufs));
  if (gated <= 0.0) return {};
  return {energy_to_lufs(gated)};
}

Loudness measure_lufs_ungated(const AudioBuffer& buffer) {
  if (buffer.empty()) return {};
  const std::vector<double> x = k_weighted(buffer);
  double sum = 0.0;
  for (double v : x) sum += v * v;
  const double mean = sum / static_cast<double>(x.size());
  if (mean <= 0.0 || energy_to_lufs(mean) <= kAbsoluteGateLufs) return {};
  return {energy_to_lufs(mean)};
}

Normalized normalize_lufs(const AudioBuffer& buffer, double target_lufs) {
  const Loudness measured = measure_lufs(buffer);
  if (measured.is_silent()) {
    throw AudioError("SilentInput", "cannot normalize silent audio");
  }
  Normalized out;
  out.measured = measured;
  out.gain_db = target_lufs - measured.lufs;
  Clamped scaled = apply_gain_db(buffer, out.gain_db);
  out.buffer = std::move(scaled.buffer);
  out.clipped_samples = scaled.clipped_samples;
  return out;
}

}  // namespace audioscript
