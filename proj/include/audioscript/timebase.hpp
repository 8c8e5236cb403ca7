#ifndef AUDIOSCRIPT_TIMEBASE_HPP_
#define AUDIOSCRIPT_TIMEBASE_HPP_

#include <cmath>
#include <cstdint>

namespace audioscript {

// Every buffer the engine touches runs at this rate. Durations are carried
// as integer sample counts at this rate so long scripts do not drift.
inline constexpr int kEngineSampleRate = 16000;

using SampleCount = std::int64_t;

inline SampleCount seconds_to_samples(double seconds) {
  return static_cast<SampleCount>(std::llround(seconds * kEngineSampleRate));
}

inline double samples_to_seconds(SampleCount samples) {
  return static_cast<double>(samples) / kEngineSampleRate;
}

}  // namespace audioscript

#endif  // AUDIOSCRIPT_TIMEBASE_HPP_
