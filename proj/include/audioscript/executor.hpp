#ifndef AUDIOSCRIPT_EXECUTOR_HPP_
#define AUDIOSCRIPT_EXECUTOR_HPP_

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "audioscript/audio.hpp"
#include "audioscript/backend.hpp"
#include "audioscript/compiler.hpp"

namespace audioscript {

struct StepReport {
  int index = 0;
  std::string op;
  BufferId buf = 0;
  double seconds = 0.0;  // wall time spent on the step
  SampleCount samples = 0;
  std::optional<double> measured_lufs;  // before gain; nullopt if silent
  std::optional<double> target_lufs;
  double gain_db = 0.0;
  SampleCount clipped_samples = 0;
  std::vector<std::string> warnings;
};

struct RenderReport {
  std::vector<StepReport> steps;  // one per plan step, in plan order
  std::map<int, SampleCount> segment_samples;
  SampleCount total_samples = 0;
  SampleCount clipped_samples = 0;
  std::optional<double> master_target_lufs;
  double wall_seconds = 0.0;

  double total_seconds() const { return samples_to_seconds(total_samples); }
  // Timings vary run to run; leave them out to compare reports.
  std::string to_json(bool include_timings = true) const;
};

struct RenderResult {
  AudioBuffer audio;
  RenderReport report;
};

// Hook for speech restoration after TTS. Not implemented by this project;
// when set it receives each resampled speech clip before normalization.
using SpeechPostProcessor =
    std::function<AudioBuffer(const AudioBuffer&, const GenSpeech&)>;

struct ExecuteOptions {
  int jobs = 1;  // concurrent backend requests
  std::optional<double> master_lufs;
  SpeechPostProcessor speech_post_process;
};

// Runs the plan in two phases: foreground clips first (their lengths resolve
// every SegLen), then backgrounds, then Concat/MixAt in plan order. Each clip
// is trimmed/padded to its requested length and normalized to its target
// loudness before composition.
// Throws BackendError with step() set, or DurationError.
RenderResult execute(const ExecutionPlan& plan, GeneratorBackend& backend,
                     const ExecuteOptions& options = {});

}  // namespace audioscript

#endif  // AUDIOSCRIPT_EXECUTOR_HPP_
