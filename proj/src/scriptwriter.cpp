#include "audioscript/scriptwriter.hpp"

#include <atomic>
#include <cmath>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "audioscript/compiler.hpp"
#include "audioscript/voicecast.hpp"

namespace audioscript {

const std::string& script_writer_prompt() {
  static const std::string prompt =
      "I want you to act as an audio script writer. I'll give you an "
      "instruction which is a general idea and you will make it an audio "
      "script in List format containing a series of JSON nodes.\n"
      "\n"
      "The script must follow the rules below:\n"
      "\n"
      "Each line represents an audio JSON node. There are three types of "
      "audio: sound effects, music, and speech. For each audio, there are two "
      "types of layouts: foreground and background. Foreground audios are "
      "played sequentially, and background audios are sound effects or music "
      "which are played while the foreground audio is being played.\n"
      "\n"
      "Sound effects can be foreground or background. For sound effects, you "
      "must provide its layout, volume (dB, LUFS standard), length (in "
      "seconds), and detailed description of the sound effect.\n"
      "Example: {\"audio_type\": \"sound_effect\", \"layout\": \"foreground\", "
      "\"vol\": -35, \"len\": 2, \"desc\": \"Airport beeping sound\"}\n"
      "\n"
      "Music can be foreground or background. For music, you must provide its "
      "layout, volume (dB, LUFS standard), length (in seconds), and detailed "
      "description of the music.\n"
      "Example: {\"audio_type\": \"music\", \"layout\": \"foreground\", "
      "\"vol\": -35, \"len\": 10, \"desc\": \"Uplifting newsroom music\"}\n"
      "\n"
      "Speech can only be foreground. For speech, you must provide the "
      "character, volume (dB, LUFS standard), and the character's line. You "
      "do not need to specify the length of the speech.\n"
      "Example: {\"audio_type\": \"speech\", \"layout\": \"foreground\", "
      "\"character\": \"News Anchor\", \"vol\": -15, \"text\": \"Good "
      "evening, this is BBC News\"}\n"
      "\n"
      "For background sound effects, you must specify the id of the "
      "background sound effect, and you must specify the beginning and the "
      "end of a background sound effect in separate lines, hence you do not "
      "need to specify the length of the audio.\n"
      "Example: {\"audio_type\": \"sound_effect\", \"layout\": \"background\", "
      "\"id\":1, \"action\": \"begin\", \"vol\": -35, \"desc\": \"Airport "
      "ambiance\"} ... {\"audio_type\": \"sound_effect\", \"layout\": "
      "\"background\", \"id\":1, \"action\": \"end\"}\n"
      "\n"
      "For background music, it's the same as background sound effects.\n"
      "\n"
      "The output format must be a list of the root node containing all the "
      "audio JSON nodes.";
  return prompt;
}

namespace {

std::string format_seconds(double seconds) {
  if (std::floor(seconds) == seconds && std::fabs(seconds) < 1e15) {
    return std::to_string(static_cast<long long>(seconds));
  }
  return nlohmann::json(seconds).dump();
}

}  // namespace

ScriptPrompt build_script_prompt(const WriteRequest& request) {
  if (request.instruction.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw std::invalid_argument("instruction must not be empty");
  }
  ScriptPrompt prompt{script_writer_prompt(), request.instruction};
  if (request.duration_hint) {
    prompt.user_message += " the duration of generated audio must be " +
                           format_seconds(*request.duration_hint) + " seconds.";
  }
  return prompt;
}

CheckedScript check_llm_output(const std::string& response) {
  CheckedScript out;
  AudioScript script;
  try {
    script = parse_script(extract_script(response));
  } catch (const ExtractionError&) {
    out.report.errors.push_back(
        {"NoJsonArrayFound", -1, "no parseable JSON array in the response"});
    return out;
  } catch (const ParseError& e) {
    out.report.errors.push_back(e.diagnostic());
    return out;
  }
  out.report = validate(script);
  if (!out.report.ok()) return out;
  try {
    AllocationOptions cast;
    cast.allow_reuse = true;
    compile(script, allocate_voices(script, default_voice_catalog(), cast));
  } catch (const std::exception& e) {
    out.report.errors.push_back({"CompileFailed", -1, e.what()});
    return out;
  }
  out.script = std::move(script);
  return out;
}

WriteResult write_script(const WriteRequest& request, LlmClient& client) {
  const ScriptPrompt prompt = build_script_prompt(request);
  WriteResult result;
  std::string message = prompt.user_message;
  const int max_attempts = 1 + std::max(request.max_retries, 0);
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    result.attempts = attempt;
    const std::string response =
        client.complete(prompt.system_prompt, message, request.temperature);
    CheckedScript checked = check_llm_output(response);
    result.history.push_back({message, response, checked.report});
    if (checked.script) {
      result.script = std::move(*checked.script);
      result.script.source_text = request.instruction;
      return result;
    }
    message = prompt.user_message +
              "\n\nYour previous output failed validation:\n" +
              checked.report.to_text() +
              "Output the complete corrected audio script.";
  }
  throw ScriptWritingFailed("no valid script after " +
                                std::to_string(result.attempts) + " attempt(s)",
                            result.history.back().report, result.attempts);
}

CsrResult batch_csr(const std::vector<std::string>& instructions,
                    LlmClient& client, int jobs) {
  CsrResult result;
  result.total = static_cast<int>(instructions.size());
  std::vector<char> ok(instructions.size(), 0);
  auto run_one = [&](std::size_t i) {
    WriteRequest request;
    request.instruction = instructions[i];
    request.max_retries = 0;
    try {
      write_script(request, client);
      ok[i] = 1;
    } catch (const std::exception&) {
      ok[i] = 0;
    }
  };
  const auto workers = std::min<std::size_t>(
      instructions.size(), static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < instructions.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < instructions.size(); i = next++) {
          run_one(i);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (char c : ok) {
    result.per_item.push_back(c != 0);
    result.success_count += c != 0 ? 1 : 0;
  }
  result.rate = result.total == 0
                    ? 0.0
                    : static_cast<double>(result.success_count) / result.total;
  return result;
}

}  // namespace audioscript
