#ifndef AUDIOSCRIPT_VOICECAST_HPP_
#define AUDIOSCRIPT_VOICECAST_HPP_

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "audioscript/llm.hpp"
#include "audioscript/script.hpp"

namespace audioscript {

struct VoicePreset {
  std::string preset_id;     // backend voice key, e.g. "v2/en_speaker_1"
  std::string display_name;  // the name the LLM sees, e.g. "Male1"
  std::string gender;
  std::string accent;
  std::string notes;

  friend bool operator==(const VoicePreset&, const VoicePreset&) = default;
};

using VoiceCatalog = std::vector<VoicePreset>;

// character -> preset_id
struct VoiceMap {
  std::map<std::string, std::string> assignments;

  friend bool operator==(const VoiceMap&, const VoiceMap&) = default;
};

class VoiceCastError : public std::runtime_error {
 public:
  VoiceCastError(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Four Bark presets paired with the Female1/Female2/Male1/Male2 roster.
VoiceCatalog default_voice_catalog();
VoiceCatalog parse_voice_catalog(std::string_view json_text);
VoiceCatalog load_voice_catalog(const std::filesystem::path& path);
std::string voice_catalog_to_json(const VoiceCatalog& catalog);

std::vector<std::string> list_characters(const AudioScript& script);

enum class Allocator { kDeterministic, kLlm };

struct AllocationOptions {
  Allocator allocator = Allocator::kDeterministic;
  bool allow_reuse = false;
  LlmClient* llm = nullptr;  // required for kLlm
  double temperature = 0.0;
};

struct AllocationResult {
  VoiceMap voices;
  std::vector<std::string> warnings;
  int llm_calls = 0;
  bool fell_back = false;
};

// System prompt asking the LLM to map characters to catalog voice types.
std::string build_voice_prompt(const VoiceCatalog& catalog);

AllocationResult allocate_voices_detailed(const AudioScript& script,
                                          const VoiceCatalog& catalog,
                                          const AllocationOptions& options);
VoiceMap allocate_voices(const AudioScript& script, const VoiceCatalog& catalog,
                         const AllocationOptions& options = {});

struct VoiceCsv {
  std::map<std::string, std::string> rows;  // character -> voice type
  std::vector<std::string> warnings;
};

VoiceCsv parse_voice_csv(std::string_view text);

}  // namespace audioscript

#endif  // AUDIOSCRIPT_VOICECAST_HPP_
