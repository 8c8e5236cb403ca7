#ifndef AUDIOSCRIPT_BACKEND_HPP_
#define AUDIOSCRIPT_BACKEND_HPP_

#include <atomic>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace audioscript {

// Audio as a backend hands it over: mono, at whatever rate it produced.
struct RawAudio {
  std::vector<float> samples;
  int sample_rate = 0;
};

struct BackendHealth {
  bool ok = false;
  std::string detail;
};

class BackendError : public std::runtime_error {
 public:
  BackendError(std::string code, const std::string& message, int status = 0)
      : std::runtime_error(message), code_(std::move(code)), status_(status) {}

  const std::string& code() const { return code_; }
  int status() const { return status_; }
  // Plan step that failed; -1 until the executor attaches it.
  int step() const { return step_; }
  void set_step(int step) { step_ = step; }

 private:
  std::string code_;
  int status_;
  int step_ = -1;
};

// Implementations must be safe to call from several threads at once.
class GeneratorBackend {
 public:
  virtual ~GeneratorBackend() = default;
  virtual RawAudio gen_speech(const std::string& text,
                              const std::string& preset_id) = 0;
  virtual RawAudio gen_music(const std::string& desc, double duration) = 0;
  virtual RawAudio gen_sfx(const std::string& desc, double duration) = 0;
  virtual BackendHealth health() = 0;
};

enum class BackendKind { kSynthetic, kHttp };

struct BackendConfig {
  BackendKind kind = BackendKind::kSynthetic;
  std::string tts_url;
  std::string music_url;
  std::string sfx_url;
  double timeout_seconds = 60.0;
  int retries = 2;
  double backoff_seconds = 0.5;  // first retry delay; doubles each retry
  std::uint64_t seed = 0;
};

// Throws std::invalid_argument when an http config lacks a URL.
void check_backend_config(const BackendConfig& config);
BackendConfig backend_config_from_json(std::string_view json_text);

std::uint64_t hash64(std::uint64_t seed, std::string_view tag,
                     std::string_view text);

// Deterministic stand-in for the generative models: a pure function of the
// request and the seed.
class SyntheticBackend : public GeneratorBackend {
 public:
  static constexpr double kSecondsPerWord = 0.4;
  static constexpr double kNoiseRms = 0.1;

  explicit SyntheticBackend(std::uint64_t seed = 0) : seed_(seed) {}

  // 0.4 s per whitespace-separated word, one tone burst per word.
  // Throws BackendError(EmptyText).
  RawAudio gen_speech(const std::string& text,
                      const std::string& preset_id) override;
  // Three seeded sinusoids in [110, 880] Hz with 10 ms fades.
  RawAudio gen_music(const std::string& desc, double duration) override;
  // Seeded uniform white noise at RMS 0.1.
  RawAudio gen_sfx(const std::string& desc, double duration) override;
  BackendHealth health() override { return {true, "synthetic"}; }

  static int word_count(std::string_view text);
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

// Speaks the uniform generation contract:
//   POST tts_url   {"text", "voice"}     -> audio/wav
//   POST music_url {"desc", "duration"}  -> audio/wav
//   POST sfx_url   {"desc", "duration"}  -> audio/wav
//   GET  <origin>/health                 -> {"status": "ok"}
class HttpBackend : public GeneratorBackend {
 public:
  explicit HttpBackend(BackendConfig config);

  RawAudio gen_speech(const std::string& text,
                      const std::string& preset_id) override;
  RawAudio gen_music(const std::string& desc, double duration) override;
  RawAudio gen_sfx(const std::string& desc, double duration) override;
  BackendHealth health() override;

  // Retries performed so far across all requests.
  int retries_performed() const { return retries_performed_.load(); }

 private:
  RawAudio post(const std::string& url, const std::string& body);

  BackendConfig config_;
  std::atomic<int> retries_performed_{0};
};

std::unique_ptr<GeneratorBackend> make_backend(const BackendConfig& config);

}  // namespace audioscript

#endif  // AUDIOSCRIPT_BACKEND_HPP_
