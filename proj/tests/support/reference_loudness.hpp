// Textbook integrated-loudness meter used as a cross-check for the engine.
// It shares no code with the library: the input is upsampled 3x to 48 kHz
// and measured with the published 48 kHz K-weighting coefficients.

#ifndef AUDIOSCRIPT_TESTS_REFERENCE_LOUDNESS_HPP_
#define AUDIOSCRIPT_TESTS_REFERENCE_LOUDNESS_HPP_

#include <vector>

namespace audioscript::testing {

// Published 48 kHz stage coefficients (b0 b1 b2 / a1 a2).
inline constexpr double kShelfB[3] = {1.53512485958697, -2.69169618940638,
                                      1.19839281085285};
inline constexpr double kShelfA[2] = {-1.69065929318241, 0.73248077421585};
inline constexpr double kHighpassB[3] = {1.0, -2.0, 1.0};
inline constexpr double kHighpassA[2] = {-1.99004745483398, 0.99007225036621};

// Band-limited 3x interpolation (windowed sinc, 64 zero crossings).
std::vector<double> upsample3(const std::vector<float>& x);

// Integrated loudness of a 48 kHz signal; -inf when every block is gated.
double reference_lufs_48k(const std::vector<double>& x);

// Convenience: 16 kHz input through upsample3 then reference_lufs_48k.
double reference_lufs_16k(const std::vector<float>& x);

}  // namespace audioscript::testing

#endif  // AUDIOSCRIPT_TESTS_REFERENCE_LOUDNESS_HPP_
