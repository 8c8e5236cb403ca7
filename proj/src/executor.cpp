#include "audioscript/executor.hpp"

#include <atomic>
#include <chrono>
#include <exception>
#include <json.hpp>
#include <mutex>
#include <thread>

#include "audioscript/loudness.hpp"

namespace audioscript {

using nlohmann::json;

std::string RenderReport::to_json(bool include_timings) const {
  json steps_json = json::array();
  for (const auto& s : steps) {
    json j = {{"index", s.index},
              {"op", s.op},
              {"buf", s.buf},
              {"samples", s.samples},
              {"duration", samples_to_seconds(s.samples)},
              {"gain_db", s.gain_db},
              {"clipped_samples", s.clipped_samples},
              {"warnings", s.warnings}};
    j["measured_lufs"] =
        s.measured_lufs ? json(*s.measured_lufs) : json(nullptr);
    j["target_lufs"] = s.target_lufs ? json(*s.target_lufs) : json(nullptr);
    if (include_timings) j["seconds"] = s.seconds;
    steps_json.push_back(std::move(j));
  }
  json segments = json::object();
  for (const auto& [index, samples] : segment_samples) {
    segments[std::to_string(index)] = samples;
  }
  json root = {
      {"sample_rate", kEngineSampleRate}, {"total_samples", total_samples},
      {"total_seconds", total_seconds()}, {"clipped_samples", clipped_samples},
      {"segment_samples", segments},      {"steps", steps_json}};
  root["master_target_lufs"] =
      master_target_lufs ? json(*master_target_lufs) : json(nullptr);
  if (include_timings) root["wall_seconds"] = wall_seconds;
  return root.dump(2);
}

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Brings a generated clip to its target loudness. Clips shorter than one
// gating block fall back to the ungated measure.
void normalize_clip(AudioBuffer& clip, double target, StepReport& report) {
  report.target_lufs = target;
  const Loudness measured =
      clip.size() >= seconds_to_samples(kGatingBlockSeconds)
          ? measure_lufs(clip)
          : measure_lufs_ungated(clip);
  if (measured.is_silent()) {
    report.warnings.push_back("clip is silent; loudness left unchanged");
    return;
  }
  report.measured_lufs = measured.lufs;
  report.gain_db = target - measured.lufs;
  Clamped scaled = apply_gain_db(clip, report.gain_db);
  clip = std::move(scaled.buffer);
  report.clipped_samples = scaled.clipped_samples;
  if (scaled.clipped_samples > 0) {
    report.warnings.push_back(std::to_string(scaled.clipped_samples) +
                              " samples clipped after gain");
  }
}

AudioBuffer to_engine_rate(RawAudio raw) {
  return resample_to_engine_rate(raw.samples, raw.sample_rate);
}

// Runs fn(i) for i in [0, count) on up to `jobs` threads. Every task runs;
// the exception of the lowest failing index is rethrown.
template <typename Fn>
void run_bounded(std::size_t count, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(count);
  auto guarded = [&](std::size_t i) {
    try {
      fn(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  const auto workers =
      std::min<std::size_t>(count, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) guarded(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count; i = next++) guarded(i);
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

class Execution {
 public:
  Execution(const ExecutionPlan& plan, GeneratorBackend& backend,
            const ExecuteOptions& options)
      : plan_(plan), backend_(backend), options_(options) {
    report_.steps.resize(plan.steps.size());
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
      report_.steps[i].index = static_cast<int>(i);
      report_.steps[i].op = std::string(step_name(plan.steps[i]));
      report_.steps[i].buf = step_buffer(plan.steps[i]);
    }
  }

  RenderResult run() {
    const auto start = Clock::now();
    std::vector<std::size_t> foreground;
    std::vector<std::size_t> background;
    for (std::size_t i = 0; i < plan_.steps.size(); ++i) {
      if (std::holds_alternative<GenSpeech>(plan_.steps[i])) {
        foreground.push_back(i);
      } else if (const auto* g = std::get_if<GenAudio>(&plan_.steps[i])) {
        (g->segment >= 0 ? foreground : background).push_back(i);
      }
    }

    std::vector<AudioBuffer> clips(plan_.steps.size());
    run_bounded(foreground.size(), options_.jobs, [&](std::size_t k) {
      const std::size_t i = foreground[k];
      clips[i] = generate(i);
    });
    for (std::size_t i : foreground) {
      const PlanStep& step = plan_.steps[i];
      const int segment = std::holds_alternative<GenSpeech>(step)
                              ? std::get<GenSpeech>(step).segment
                              : std::get<GenAudio>(step).segment;
      report_.segment_samples[segment] = clips[i].size();
    }

    run_bounded(background.size(), options_.jobs, [&](std::size_t k) {
      const std::size_t i = background[k];
      clips[i] = generate(i);
    });

    std::map<BufferId, AudioBuffer> buffers;
    for (std::size_t i : foreground)
      buffers[step_buffer(plan_.steps[i])] = std::move(clips[i]);
    for (std::size_t i : background)
      buffers[step_buffer(plan_.steps[i])] = std::move(clips[i]);

    AudioBuffer output;
    for (std::size_t i = 0; i < plan_.steps.size(); ++i) {
      const auto step_start = Clock::now();
      StepReport& rep = report_.steps[i];
      std::visit(
          [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Concat>) {
              std::vector<AudioBuffer> inputs;
              inputs.reserve(s.inputs.size());
              for (BufferId id : s.inputs) inputs.push_back(buffers.at(id));
              buffers[s.buf] = concat(inputs);
            } else if constexpr (std::is_same_v<T, MixAt>) {
              const SampleCount offset =
                  eval_duration_samples(s.offset, report_.segment_samples);
              Clamped mixed = mix_at_samples(buffers.at(s.base),
                                             buffers.at(s.overlay), offset);
              rep.clipped_samples = mixed.clipped_samples;
              if (mixed.clipped_samples > 0) {
                rep.warnings.push_back(std::to_string(mixed.clipped_samples) +
                                       " samples clipped while mixing");
              }
              buffers[s.buf] = std::move(mixed.buffer);
            } else if constexpr (std::is_same_v<T, Emit>) {
              output = buffers.at(s.buf);
            }
          },
          plan_.steps[i]);
      if (!std::holds_alternative<GenSpeech>(plan_.steps[i]) &&
          !std::holds_alternative<GenAudio>(plan_.steps[i])) {
        rep.seconds = since(step_start);
        rep.samples = buffers.count(rep.buf) ? buffers.at(rep.buf).size() : 0;
      }
    }

    if (options_.master_lufs && output.size() > 0) {
      report_.master_target_lufs = options_.master_lufs;
      StepReport master;
      normalize_clip(output, *options_.master_lufs, master);
      report_.steps.back().warnings.insert(report_.steps.back().warnings.end(),
                                           master.warnings.begin(),
                                           master.warnings.end());
      report_.steps.back().clipped_samples += master.clipped_samples;
      report_.steps.back().gain_db = master.gain_db;
      report_.steps.back().measured_lufs = master.measured_lufs;
      report_.steps.back().target_lufs = master.target_lufs;
    }

    for (const auto& s : report_.steps)
      report_.clipped_samples += s.clipped_samples;
    report_.total_samples = output.size();
    report_.wall_seconds = since(start);
    return {std::move(output), std::move(report_)};
  }

 private:
  AudioBuffer generate(std::size_t index) {
    const auto start = Clock::now();
    StepReport& rep = report_.steps[index];
    AudioBuffer clip;
    try {
      clip = std::visit(
          [&](const auto& s) -> AudioBuffer {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GenSpeech>) {
              AudioBuffer speech =
                  to_engine_rate(backend_.gen_speech(s.text, s.preset_id));
              if (speech.empty()) {
                throw BackendError("EmptyAudio", "backend returned no speech");
              }
              if (options_.speech_post_process) {
                speech = options_.speech_post_process(speech, s);
              }
              normalize_clip(speech, s.target_lufs, rep);
              return speech;
            } else if constexpr (std::is_same_v<T, GenAudio>) {
              const SampleCount target = resolve(s.duration);
              const double seconds = samples_to_seconds(target);
              RawAudio raw = s.kind == GenKind::kMusic
                                 ? backend_.gen_music(s.desc, seconds)
                                 : backend_.gen_sfx(s.desc, seconds);
              AudioBuffer audio =
                  trim_or_pad_samples(to_engine_rate(std::move(raw)), target);
              normalize_clip(audio, s.target_lufs, rep);
              return audio;
            } else {
              return {};
            }
          },
          plan_.steps[index]);
    } catch (BackendError& e) {
      e.set_step(static_cast<int>(index));
      throw;
    } catch (const AudioError& e) {
      BackendError wrapped("BadAudio", e.what());
      wrapped.set_step(static_cast<int>(index));
      throw wrapped;
    }
    rep.seconds = since(start);
    rep.samples = clip.size();
    return clip;
  }

  SampleCount resolve(const DurationExpr& expr) {
    // Segment lengths are complete before any background generation starts.
    const SampleCount samples =
        eval_duration_samples(expr, report_.segment_samples);
    if (samples <= 0) {
      throw DurationError("DurationResolutionError: non-positive duration");
    }
    return samples;
  }

  const ExecutionPlan& plan_;
  GeneratorBackend& backend_;
  const ExecuteOptions& options_;
  RenderReport report_;
};

}  // namespace

RenderResult execute(const ExecutionPlan& plan, GeneratorBackend& backend,
                     const ExecuteOptions& options) {
  const auto problems = check_plan(plan);
  if (!problems.empty()) {
    throw std::invalid_argument("invalid plan: " + problems.front());
  }
  return Execution(plan, backend, options).run();
}

}  // namespace audioscript
