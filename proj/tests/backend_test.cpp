#include "audioscript/backend.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "audioscript/audio.hpp"
#include "audioscript/wav.hpp"
#include "support/spectrum.hpp"
#include "support/stub_server.hpp"

namespace audioscript {
namespace {

// ---------------------------------------------------------------------------
// Synthetic backend
// ---------------------------------------------------------------------------

TEST(SyntheticSpeech, FourTenthsSecondPerWord) {
  SyntheticBackend backend(0);
  const RawAudio a =
      backend.gen_speech("Good evening, this is BBC News", "v2/en_speaker_1");
  EXPECT_EQ(a.sample_rate, 16000);
  EXPECT_EQ(a.samples.size(), 6u * 6400u);  // 2.4 s
  EXPECT_EQ(backend.gen_speech("Hello", "x").samples.size(), 6400u);
  EXPECT_EQ(SyntheticBackend::word_count("  spaced \t out\nwords  "), 3);
}

TEST(SyntheticSpeech, DeterministicPerTextAndPreset) {
  SyntheticBackend backend(3);
  const auto a = backend.gen_speech("same words here", "p1");
  EXPECT_EQ(a.samples, backend.gen_speech("same words here", "p1").samples);
  EXPECT_NE(a.samples, backend.gen_speech("same words here", "p2").samples);
}

TEST(SyntheticSpeech, EmptyText) {
  SyntheticBackend backend;
  try {
    backend.gen_speech("   ", "p");
    FAIL() << "expected EmptyText";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), "EmptyText");
  }
}

TEST(SyntheticSfx, ExactLengthNoiseAtTargetRms) {
  SyntheticBackend backend(1);
  const RawAudio a = backend.gen_sfx("door slam", 2.0);
  ASSERT_EQ(a.samples.size(), 32000u);
  EXPECT_NEAR(rms(a.samples), SyntheticBackend::kNoiseRms, 0.005);
  EXPECT_EQ(a.samples, backend.gen_sfx("door slam", 2.0).samples);
  EXPECT_NE(a.samples, backend.gen_sfx("door creak", 2.0).samples);
  EXPECT_NE(a.samples, SyntheticBackend(2).gen_sfx("door slam", 2.0).samples);
}

TEST(SyntheticMusic, ThreeTonesExactLengthWithFades) {
  SyntheticBackend backend(0);
  for (const char* desc : {"soft piano", "orchestral news outro music"}) {
    const RawAudio a = backend.gen_music(desc, 2.0);
    ASSERT_EQ(a.samples.size(), 32000u);
    EXPECT_EQ(a.samples, backend.gen_music(desc, 2.0).samples);
    const auto peaks =
        testing::spectral_peaks(a.samples, 16000.0, 100.0, 900.0, 1.0, 0.3);
    EXPECT_EQ(peaks.size(), 3u) << desc;
    for (double f : peaks) {
      EXPECT_GE(f, 109.0);
      EXPECT_LE(f, 881.0);
    }
    EXPECT_EQ(a.samples.front(), 0.0f);
    EXPECT_LT(std::abs(a.samples.back()), 0.01f);
  }
}

TEST(SyntheticMusic, BadDuration) {
  SyntheticBackend backend;
  EXPECT_THROW(backend.gen_music("x", 0.0), BackendError);
  EXPECT_THROW(backend.gen_sfx("x", -1.0), BackendError);
}

TEST(Hash64, DependsOnEveryInput) {
  EXPECT_EQ(hash64(1, "a", "b"), hash64(1, "a", "b"));
  EXPECT_NE(hash64(1, "a", "b"), hash64(2, "a", "b"));
  EXPECT_NE(hash64(1, "a", "b"), hash64(1, "ab", ""));
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

TEST(BackendConfig, HttpNeedsAllThreeUrls) {
  BackendConfig c;
  c.kind = BackendKind::kHttp;
  c.tts_url = "http://localhost:1/tts";
  EXPECT_THROW(check_backend_config(c), std::exception);
  c.music_url = c.sfx_url = c.tts_url;
  EXPECT_NO_THROW(check_backend_config(c));
}

TEST(BackendConfig, FromJson) {
  const BackendConfig c = backend_config_from_json(R"({
    "kind": "http",
    "endpoints": {"tts_url": "http://h/tts", "music_url": "http://h/music",
                  "sfx_url": "http://h/sfx"},
    "timeout": 5, "retries": 1, "seed": 9})");
  EXPECT_EQ(c.kind, BackendKind::kHttp);
  EXPECT_EQ(c.music_url, "http://h/music");
  EXPECT_EQ(c.timeout_seconds, 5.0);
  EXPECT_EQ(c.retries, 1);
  EXPECT_EQ(c.seed, 9u);
}

// ---------------------------------------------------------------------------
// HTTP backend against an in-process stub
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> as_bytes(const std::string& s) {
  return {s.begin(), s.end()};
}

TEST(HttpBackend, PassesFixturesThrough) {
  testing::StubServer stub;
  HttpBackend backend(stub.config());
  EXPECT_TRUE(backend.health().ok);

  const RawAudio speech = backend.gen_speech("hello there", "v2/en_speaker_1");
  const DecodedWav expected = decode_wav(as_bytes(stub.speech_wav()));
  EXPECT_EQ(speech.sample_rate, expected.sample_rate);
  EXPECT_EQ(speech.samples, expected.samples);

  const RawAudio music = backend.gen_music("calm", 2.0);
  EXPECT_EQ(music.samples, decode_wav(as_bytes(stub.music_wav())).samples);
  const RawAudio sfx = backend.gen_sfx("bang", 0.8);
  EXPECT_EQ(sfx.samples, decode_wav(as_bytes(stub.sfx_wav())).samples);
  EXPECT_EQ(backend.retries_performed(), 0);
}

TEST(HttpBackend, RequestBodiesFollowContract) {
  testing::StubServer stub;
  HttpBackend backend(stub.config());
  backend.gen_speech("hi", "v2/en_speaker_6");
  backend.gen_sfx("rain", 1.5);
  const auto requests = stub.requests();
  ASSERT_EQ(requests.size(), 2u);
  EXPECT_EQ(requests[0].path, "/tts");
  EXPECT_EQ(requests[0].body,
            (nlohmann::json{{"text", "hi"}, {"voice", "v2/en_speaker_6"}}));
  EXPECT_EQ(requests[1].path, "/sfx");
  EXPECT_EQ(requests[1].body,
            (nlohmann::json{{"desc", "rain"}, {"duration", 1.5}}));
}

TEST(HttpBackend, RetriesAfterServerError) {
  testing::StubServer stub;
  HttpBackend backend(stub.config());
  stub.fail_next(1, 500);
  EXPECT_NO_THROW(backend.gen_music("calm", 2.0));
  EXPECT_EQ(backend.retries_performed(), 1);
}

TEST(HttpBackend, GivesUpAfterRetries) {
  testing::StubServer stub;
  HttpBackend backend(stub.config());
  stub.fail_next(10, 503);
  try {
    backend.gen_sfx("x", 1.0);
    FAIL() << "expected HttpError";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), "HttpError");
    EXPECT_EQ(e.status(), 503);
  }
  EXPECT_EQ(backend.retries_performed(), 2);
}

TEST(HttpBackend, ClientErrorsAreNotRetried) {
  testing::StubServer stub;
  HttpBackend backend(stub.config());
  stub.fail_next(1, 404);
  EXPECT_THROW(backend.gen_sfx("x", 1.0), BackendError);
  EXPECT_EQ(backend.retries_performed(), 0);
}

TEST(HttpBackend, WrongContentIsBadWav) {
  testing::StubServer stub;
  HttpBackend backend(stub.config());
  stub.serve_garbage(true);
  try {
    backend.gen_speech("hello", "p");
    FAIL() << "expected BadWav";
  } catch (const BackendError& e) {
    EXPECT_EQ(e.code(), "BadWav");
  }
}

TEST(HttpBackend, UnreachableEndpoint) {
  BackendConfig c;
  c.kind = BackendKind::kHttp;
  c.tts_url = c.music_url = c.sfx_url = "http://127.0.0.1:9/x";
  c.retries = 0;
  c.timeout_seconds = 2.0;
  HttpBackend backend(c);
  EXPECT_FALSE(backend.health().ok);
  EXPECT_THROW(backend.gen_sfx("x", 1.0), BackendError);
}

}  // namespace
}  // namespace audioscript
