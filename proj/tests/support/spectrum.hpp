#ifndef AUDIOSCRIPT_TESTS_SPECTRUM_HPP_
#define AUDIOSCRIPT_TESTS_SPECTRUM_HPP_

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace audioscript::testing {

// Magnitude of the DTFT of `x` at `freq` Hz (Hann window applied).
inline double magnitude_at(std::span<const float> x, double rate, double freq) {
  const double w = 2.0 * std::numbers::pi * freq / rate;
  const double n = static_cast<double>(x.size());
  double re = 0.0;
  double im = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double hann =
        0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * i / (n - 1));
    re += hann * x[i] * std::cos(w * i);
    im -= hann * x[i] * std::sin(w * i);
  }
  return std::hypot(re, im);
}

// Frequencies (step `resolution`) in [lo, hi] that are local maxima of the
// magnitude spectrum and exceed `fraction` of the global maximum.
inline std::vector<double> spectral_peaks(std::span<const float> x, double rate,
                                          double lo, double hi,
                                          double resolution, double fraction) {
  std::vector<double> freqs;
  std::vector<double> mags;
  for (double f = lo; f <= hi; f += resolution) {
    freqs.push_back(f);
    mags.push_back(magnitude_at(x, rate, f));
  }
  double top = 0.0;
  for (double m : mags) top = std::max(top, m);
  std::vector<double> peaks;
  for (std::size_t i = 1; i + 1 < mags.size(); ++i) {
    if (mags[i] >= mags[i - 1] && mags[i] > mags[i + 1] &&
        mags[i] > fraction * top) {
      peaks.push_back(freqs[i]);
    }
  }
  return peaks;
}

}  // namespace audioscript::testing

#endif  // AUDIOSCRIPT_TESTS_SPECTRUM_HPP_
