#ifndef AUDIOSCRIPT_LOUDNESS_HPP_
#define AUDIOSCRIPT_LOUDNESS_HPP_

#include <array>
#include <cmath>
#include <limits>
#include <span>

#include "audioscript/audio.hpp"

namespace audioscript {

// Integrated loudness in LUFS; -inf when every block is gated away.
struct Loudness {
  double lufs = -std::numeric_limits<double>::infinity();

  bool is_silent() const { return std::isinf(lufs) && lufs < 0; }
  friend bool operator==(const Loudness&, const Loudness&) = default;
};

struct Biquad {
  std::array<double, 3> b{};
  std::array<double, 3> a{};  // a[0] == 1
};

// The two K-weighting stages (high shelf, then high pass) designed for an
// arbitrary sample rate from their analog prototypes.
struct KWeighting {
  Biquad shelf;
  Biquad highpass;
};

KWeighting design_k_weighting(double sample_rate);

inline constexpr double kGatingBlockSeconds = 0.4;
inline constexpr double kAbsoluteGateLufs = -70.0;
inline constexpr double kRelativeGateLu = -10.0;

// BS.1770 gated integrated loudness at the engine rate: 400 ms blocks with
// 75% overlap, absolute gate at -70 LUFS, relative gate 10 LU under the
// absolute-gated mean. Throws AudioError(TooShort) below 400 ms.
Loudness measure_lufs(const AudioBuffer& buffer);

// K-weighted loudness of the whole clip as one block, absolute gate only.
// Used for clips too short to hold a gating block.
Loudness measure_lufs_ungated(const AudioBuffer& buffer);

struct Normalized {
  AudioBuffer buffer;
  Loudness measured;
  double gain_db = 0.0;
  SampleCount clipped_samples = 0;
};

// Scales by 10^((target - measured) / 20) and clamps into [-1, 1].
// Throws AudioError(SilentInput) when the input measures -inf.
Normalized normalize_lufs(const AudioBuffer& buffer, double target_lufs);

}  // namespace audioscript

#endif  // AUDIOSCRIPT_LOUDNESS_HPP_
