#ifndef AUDIOSCRIPT_COMPILER_HPP_
#define AUDIOSCRIPT_COMPILER_HPP_

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "audioscript/script.hpp"
#include "audioscript/timebase.hpp"
#include "audioscript/voicecast.hpp"

namespace audioscript {

// Duration that may depend on foreground lengths only known after
// generation.
struct DurationExpr;

struct ConstDuration {
  double seconds = 0.0;
  friend bool operator==(const ConstDuration&, const ConstDuration&) = default;
};

struct SegLen {
  int segment = 0;
  friend bool operator==(const SegLen&, const SegLen&) = default;
};

struct SumDuration {
  std::vector<DurationExpr> terms;
  friend bool operator==(const SumDuration&, const SumDuration&);
};

struct DurationExpr {
  std::variant<ConstDuration, SegLen, SumDuration> value;

  static DurationExpr constant(double seconds) {
    return {ConstDuration{seconds}};
  }
  static DurationExpr segment(int index) { return {SegLen{index}}; }
  static DurationExpr sum(std::vector<DurationExpr> terms) {
    return {SumDuration{std::move(terms)}};
  }

  friend bool operator==(const DurationExpr&, const DurationExpr&) = default;
};

inline bool operator==(const SumDuration& a, const SumDuration& b) {
  return a.terms == b.terms;
}

class DurationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws DurationError (UnresolvedSegment) if a SegLen has no entry.
double eval_duration(const DurationExpr& expr,
                     const std::map<int, double>& resolved_seconds);
// Exact variant used by the executor: Const terms round to the nearest
// sample, segment lengths are already integral.
SampleCount eval_duration_samples(const DurationExpr& expr,
                                  const std::map<int, SampleCount>& resolved);

std::string duration_to_text(const DurationExpr& expr);

using BufferId = int;

struct GenSpeech {
  BufferId buf = 0;
  int segment = 0;
  std::string text;
  std::string character;
  std::string preset_id;
  double target_lufs = 0.0;
  friend bool operator==(const GenSpeech&, const GenSpeech&) = default;
};

enum class GenKind { kMusic, kSoundEffect };

struct GenAudio {
  BufferId buf = 0;
  int segment = -1;  // foreground segment index, -1 for backgrounds
  GenKind kind = GenKind::kSoundEffect;
  std::string desc;
  DurationExpr duration;
  double target_lufs = 0.0;
  friend bool operator==(const GenAudio&, const GenAudio&) = default;
};

struct Concat {
  BufferId buf = 0;
  std::vector<BufferId> inputs;
  friend bool operator==(const Concat&, const Concat&) = default;
};

struct MixAt {
  BufferId buf = 0;
  BufferId base = 0;
  BufferId overlay = 0;
  DurationExpr offset;
  friend bool operator==(const MixAt&, const MixAt&) = default;
};

struct Emit {
  BufferId buf = 0;
  friend bool operator==(const Emit&, const Emit&) = default;
};

using PlanStep = std::variant<GenSpeech, GenAudio, Concat, MixAt, Emit>;

struct ForegroundSegment {
  int index = 0;
  AudioNode node;
  DurationExpr symbolic_len;
  friend bool operator==(const ForegroundSegment&,
                         const ForegroundSegment&) = default;
};

struct BackgroundSpan {
  AudioType audio_type = AudioType::kMusic;
  long long id = 0;
  double vol = 0.0;
  std::string desc;
  int begin_foreground_id = 0;
  int end_foreground_id = 0;
  friend bool operator==(const BackgroundSpan&,
                         const BackgroundSpan&) = default;
};

struct ExecutionPlan {
  std::vector<ForegroundSegment> segments;
  std::vector<BackgroundSpan> spans;
  std::vector<PlanStep> steps;
  BufferId output_buffer = 0;

  friend bool operator==(const ExecutionPlan&, const ExecutionPlan&) = default;
};

class CompileError : public std::runtime_error {
 public:
  CompileError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// Throws CompileError: InvalidScript when validate() reports errors,
// UncoveredCharacter when a speaker has no voice.
ExecutionPlan compile(const AudioScript& script, const VoiceMap& voices);

BufferId step_buffer(const PlanStep& step);
std::string_view step_name(const PlanStep& step);

// One line per step, e.g.
//   b0 = gen_speech(segment=0, character="Host", voice="v2/en_speaker_9",
//                   lufs=-15, text="...")
std::string plan_to_text(const ExecutionPlan& plan);
// Reads the step list back (segments and spans are not part of the text).
std::vector<PlanStep> plan_steps_from_text(std::string_view text);

std::string plan_to_json(const ExecutionPlan& plan);
ExecutionPlan plan_from_json(std::string_view json_text);

// Structural checks on any plan: single assignment, define-before-use,
// one Emit, foreground generation before background generation.
std::vector<std::string> check_plan(const ExecutionPlan& plan);

}  // namespace audioscript

#endif  // AUDIOSCRIPT_COMPILER_HPP_
