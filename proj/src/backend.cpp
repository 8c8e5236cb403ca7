#include "audioscript/backend.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "audioscript/audio.hpp"
#include "audioscript/timebase.hpp"
#include "audioscript/wav.hpp"

namespace audioscript {

using nlohmann::json;

void check_backend_config(const BackendConfig& config) {
  if (config.kind != BackendKind::kHttp) return;
  if (config.tts_url.empty() || config.music_url.empty() ||
      config.sfx_url.empty()) {
    throw std::invalid_argument(
        "http backend needs tts_url, music_url and sfx_url");
  }
  if (config.retries < 0 || config.timeout_seconds <= 0.0) {
    throw std::invalid_argument("retries must be >= 0 and timeout > 0");
  }
}

BackendConfig backend_config_from_json(std::string_view json_text) {
  const json j = json::parse(json_text.begin(), json_text.end());
  BackendConfig config;
  const std::string kind = j.value("kind", "synthetic");
  if (kind == "synthetic") {
    config.kind = BackendKind::kSynthetic;
  } else if (kind == "http") {
    config.kind = BackendKind::kHttp;
  } else {
    throw std::invalid_argument("unknown backend kind '" + kind + "'");
  }
  const json endpoints = j.value("endpoints", json::object());
  config.tts_url = endpoints.value("tts_url", "");
  config.music_url = endpoints.value("music_url", "");
  config.sfx_url = endpoints.value("sfx_url", "");
  config.timeout_seconds = j.value("timeout", config.timeout_seconds);
  config.retries = j.value("retries", config.retries);
  config.backoff_seconds = j.value("backoff", config.backoff_seconds);
  config.seed = j.value("seed", config.seed);
  check_backend_config(config);
  return config;
}

std::uint64_t hash64(std::uint64_t seed, std::string_view tag,
                     std::string_view text) {
  // FNV-1a over seed bytes, tag, a separator and the text.
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint8_t byte) {
    h ^= byte;
    h *= 0x100000001b3ull;
  };
  for (int i = 0; i < 8; ++i) mix(static_cast<std::uint8_t>(seed >> (8 * i)));
  for (char c : tag) mix(static_cast<std::uint8_t>(c));
  mix(0x1f);
  for (char c : text) mix(static_cast<std::uint8_t>(c));
  return h;
}

// ---------------------------------------------------------------------------
// Synthetic backend
// ---------------------------------------------------------------------------

namespace {

// [0, 1) from the top 53 bits; independent of the standard library's
// distribution implementations.
double unit(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

constexpr double kFadeSeconds = 0.01;

void apply_fades(std::span<float> x) {
  const auto fade = std::min<std::size_t>(
      static_cast<std::size_t>(seconds_to_samples(kFadeSeconds)), x.size() / 2);
  for (std::size_t i = 0; i < fade; ++i) {
    const float g = static_cast<float>(i) / static_cast<float>(fade);
    x[i] *= g;
    x[x.size() - 1 - i] *= g;
  }
}

std::vector<std::string_view> split_words(std::string_view text) {
  std::vector<std::string_view> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    const std::size_t start = i;
    while (i < text.size() &&
           !std::isspace(static_cast<unsigned char>(text[i])))
      ++i;
    if (i > start) words.push_back(text.substr(start, i - start));
  }
  return words;
}

}  // namespace

int SyntheticBackend::word_count(std::string_view text) {
  return static_cast<int>(split_words(text).size());
}

RawAudio SyntheticBackend::gen_speech(const std::string& text,
                                      const std::string& preset_id) {
  const auto words = split_words(text);
  if (words.empty()) {
    throw BackendError("EmptyText", "speech text has no words");
  }
  const SampleCount per_word = seconds_to_samples(kSecondsPerWord);
  RawAudio out;
  out.sample_rate = kEngineSampleRate;
  out.samples.assign(static_cast<std::size_t>(per_word) * words.size(), 0.0f);
  for (std::size_t w = 0; w < words.size(); ++w) {
    std::mt19937_64 rng(hash64(seed_, "speech:" + preset_id, words[w]));
    const double freq = 120.0 + 280.0 * unit(rng);
    const double phase = 2.0 * std::numbers::pi * unit(rng);
    std::span<float> burst(out.samples.data() + w * per_word,
                           static_cast<std::size_t>(per_word));
    for (std::size_t i = 0; i < burst.size(); ++i) {
      const double t = static_cast<double>(i) / kEngineSampleRate;
      burst[i] = static_cast<float>(
          0.3 * std::sin(2.0 * std::numbers::pi * freq * t + phase));
    }
    apply_fades(burst);
  }
  return out;
}

RawAudio SyntheticBackend::gen_music(const std::string& desc, double duration) {
  if (!(duration > 0.0)) {
    throw BackendError("BadDuration", "music duration must be > 0");
  }
  std::mt19937_64 rng(hash64(seed_, "music", desc));
  std::array<double, 3> freqs{};
  std::array<double, 3> phases{};
  for (int k = 0; k < 3; ++k) {
    freqs[k] = 110.0 + 770.0 * unit(rng);
    phases[k] = 2.0 * std::numbers::pi * unit(rng);
  }
  RawAudio out;
  out.sample_rate = kEngineSampleRate;
  out.samples.resize(static_cast<std::size_t>(seconds_to_samples(duration)));
  for (std::size_t i = 0; i < out.samples.size(); ++i) {
    const double t = static_cast<double>(i) / kEngineSampleRate;
    double v = 0.0;
    for (int k = 0; k < 3; ++k) {
      v += 0.2 * std::sin(2.0 * std::numbers::pi * freqs[k] * t + phases[k]);
    }
    out.samples[i] = static_cast<float>(v);
  }
  apply_fades(out.samples);
  return out;
}

RawAudio SyntheticBackend::gen_sfx(const std::string& desc, double duration) {
  if (!(duration > 0.0)) {
    throw BackendError("BadDuration", "sound effect duration must be > 0");
  }
  std::mt19937_64 rng(hash64(seed_, "sfx", desc));
  // Uniform on [-a, a] has RMS a / sqrt(3).
  const double amplitude = kNoiseRms * std::sqrt(3.0);
  RawAudio out;
  out.sample_rate = kEngineSampleRate;
  out.samples.resize(static_cast<std::size_t>(seconds_to_samples(duration)));
  for (float& s : out.samples) {
    s = static_cast<float>(amplitude * (2.0 * unit(rng) - 1.0));
  }
  return out;
}

// ---------------------------------------------------------------------------
// HTTP backend
// ---------------------------------------------------------------------------

namespace {

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  const std::size_t host_start =
      scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = url.find('/', host_start);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

HttpBackend::HttpBackend(BackendConfig config) : config_(std::move(config)) {
  check_backend_config(config_);
}

RawAudio HttpBackend::post(const std::string& url, const std::string& body) {
  const SplitUrl target = split_url(url);
  const auto timeout = std::chrono::duration<double>(config_.timeout_seconds);
  double delay = config_.backoff_seconds;
  for (int attempt = 0;; ++attempt) {
    std::string error_code;
    std::string message;
    int status = 0;
    bool retryable = true;
    {
      httplib::Client client(target.origin);
      client.set_connection_timeout(
          std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_read_timeout(
          std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      client.set_write_timeout(
          std::chrono::duration_cast<std::chrono::microseconds>(timeout));
      auto res = client.Post(target.path, body, "application/json");
      if (!res) {
        const auto err = res.error();
        // httplib reports a read timeout as a read failure.
        error_code = err == httplib::Error::ConnectionTimeout ||
                             err == httplib::Error::Read
                         ? "Timeout"
                         : "HttpError";
        message = url + ": " + httplib::to_string(err);
      } else if (res->status == 200) {
        const auto* data =
            reinterpret_cast<const std::uint8_t*>(res->body.data());
        DecodedWav decoded;
        try {
          decoded = decode_wav({data, res->body.size()});
        } catch (const AudioError& e) {
          throw BackendError("BadWav", url + ": " + e.what(), res->status);
        }
        return {std::move(decoded.samples), decoded.sample_rate};
      } else {
        status = res->status;
        error_code = "HttpError";
        message = url + ": HTTP " + std::to_string(status);
        retryable = status >= 500 || status == 429;
      }
    }
    if (!retryable || attempt >= config_.retries) {
      throw BackendError(error_code, message, status);
    }
    ++retries_performed_;
    std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    delay *= 2.0;
  }
}

RawAudio HttpBackend::gen_speech(const std::string& text,
                                 const std::string& preset_id) {
  const json body = {{"text", text}, {"voice", preset_id}};
  return post(config_.tts_url, body.dump());
}

RawAudio HttpBackend::gen_music(const std::string& desc, double duration) {
  const json body = {{"desc", desc}, {"duration", duration}};
  return post(config_.music_url, body.dump());
}

RawAudio HttpBackend::gen_sfx(const std::string& desc, double duration) {
  const json body = {{"desc", desc}, {"duration", duration}};
  return post(config_.sfx_url, body.dump());
}

BackendHealth HttpBackend::health() {
  std::set<std::string> origins;
  for (const auto* url :
       {&config_.tts_url, &config_.music_url, &config_.sfx_url}) {
    origins.insert(split_url(*url).origin);
  }
  for (const auto& origin : origins) {
    httplib::Client client(origin);
    client.set_connection_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(
            std::chrono::duration<double>(config_.timeout_seconds)));
    auto res = client.Get("/health");
    if (!res) return {false, origin + ": " + httplib::to_string(res.error())};
    if (res->status != 200) {
      return {false, origin + ": HTTP " + std::to_string(res->status)};
    }
    const json body = json::parse(res->body, nullptr, false);
    if (body.is_discarded() || body.value("status", "") != "ok") {
      return {false, origin + ": unexpected health body"};
    }
  }
  return {true, "ok"};
}

std::unique_ptr<GeneratorBackend> make_backend(const BackendConfig& config) {
  check_backend_config(config);
  if (config.kind == BackendKind::kHttp) {
    return std::make_unique<HttpBackend>(config);
  }
  return std::make_unique<SyntheticBackend>(config.seed);
}

}  // namespace audioscript
