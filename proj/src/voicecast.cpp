#include "audioscript/voicecast.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace audioscript {

using nlohmann::json;

VoiceCatalog default_voice_catalog() {
  // The pairing of roster names to Bark preset ids is a project convention.
  return {
      {"v2/en_speaker_9", "Female1", "female", "British",
       "a normal female adult voice, British accent"},
      {"v2/de_speaker_3", "Female2", "female", "American",
       "a normal female adult voice, American accent"},
      {"v2/en_speaker_1", "Male1", "male", "British",
       "a normal male adult voice, British accent"},
      {"v2/en_speaker_6", "Male2", "male", "American",
       "a normal male adult voice, American accent"},
  };
}

VoiceCatalog parse_voice_catalog(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw VoiceCastError("MalformedCatalog", e.what());
  }
  if (!root.is_array() || root.empty()) {
    throw VoiceCastError("MalformedCatalog",
                         "voice catalog must be a nonempty JSON list");
  }
  VoiceCatalog catalog;
  std::set<std::string> seen;
  for (const auto& entry : root) {
    if (!entry.is_object() || !entry.contains("preset_id") ||
        !entry["preset_id"].is_string()) {
      throw VoiceCastError("MalformedCatalog",
                           "every preset needs a string 'preset_id'");
    }
    VoicePreset preset;
    preset.preset_id = entry["preset_id"].get<std::string>();
    preset.display_name = entry.value("display_name", preset.preset_id);
    preset.gender = entry.value("gender", "");
    preset.accent = entry.value("accent", "");
    preset.notes = entry.value("notes", "");
    if (!seen.insert(preset.preset_id).second) {
      throw VoiceCastError("MalformedCatalog",
                           "duplicate preset_id '" + preset.preset_id + "'");
    }
    catalog.push_back(std::move(preset));
  }
  return catalog;
}

VoiceCatalog load_voice_catalog(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw VoiceCastError("CatalogNotFound",
                         "cannot open voice catalog " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_voice_catalog(buffer.str());
}

std::string voice_catalog_to_json(const VoiceCatalog& catalog) {
  json arr = json::array();
  for (const auto& p : catalog) {
    json entry = json::object();
    entry["preset_id"] = p.preset_id;
    entry["display_name"] = p.display_name;
    entry["gender"] = p.gender;
    entry["accent"] = p.accent;
    entry["notes"] = p.notes;
    arr.push_back(std::move(entry));
  }
  return arr.dump(2);
}

std::vector<std::string> list_characters(const AudioScript& script) {
  std::vector<std::string> out;
  for (const auto& node : script.nodes) {
    if (node.audio_type != AudioType::kSpeech || !node.character) continue;
    if (std::find(out.begin(), out.end(), *node.character) == out.end()) {
      out.push_back(*node.character);
    }
  }
  return out;
}

std::string build_voice_prompt(const VoiceCatalog& catalog) {
  std::string prompt =
      "Given an audio script in json format, for each character that "
      "appeared in the \"character\" attribute, you should map the character "
      "to a \"voice type\" according to their lines and the \"voice types\" "
      "features. Each character must be mapped to a different voice type, "
      "and each \"voice type\" must be from one of the following:\n\n";
  for (const auto& p : catalog) {
    std::string traits = p.notes;
    if (traits.empty()) {
      traits = "a " + p.gender + " voice";
      if (!p.accent.empty()) traits += ", " + p.accent + " accent";
    }
    prompt += "- " + p.display_name + ": " + traits + "\n";
  }
  prompt +=
      "\nOutput should be in the format of CSV, like:\n"
      "```\n"
      "[character 1], [voice type 1]\n"
      "[character 2], [voice type 2]\n"
      "...\n"
      "```";
  return prompt;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n\"'`");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n\"'`");
  return std::string(s.substr(first, last - first + 1));
}

bool is_fence(std::string_view line) {
  const auto first = line.find_first_not_of(" \t");
  if (first == std::string_view::npos) return false;
  line.remove_prefix(first);
  return line.starts_with("```") || line.starts_with("'''");
}

}  // namespace

VoiceCsv parse_voice_csv(std::string_view text) {
  VoiceCsv csv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (is_fence(line)) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) continue;
    std::string character = trim(std::string_view(line).substr(0, comma));
    std::string voice = trim(std::string_view(line).substr(comma + 1));
    if (character.empty() || voice.empty()) continue;
    if (csv.rows.count(character) != 0) {
      csv.warnings.push_back("character '" + character +
                             "' mapped twice; keeping '" + voice + "'");
    }
    csv.rows[character] = voice;
  }
  if (csv.rows.empty()) {
    throw CsvError("no line of the form '<character>, <voice type>' found");
  }
  return csv;
}

namespace {

VoiceMap deterministic(const std::vector<std::string>& characters,
                       const VoiceCatalog& catalog, bool allow_reuse) {
  if (characters.size() > catalog.size() && !allow_reuse) {
    throw VoiceCastError("TooManyCharacters",
                         std::to_string(characters.size()) +
                             " characters but only " +
                             std::to_string(catalog.size()) + " voice presets");
  }
  VoiceMap map;
  for (std::size_t i = 0; i < characters.size(); ++i) {
    map.assignments[characters[i]] = catalog[i % catalog.size()].preset_id;
  }
  return map;
}

const VoicePreset* find_preset(const VoiceCatalog& catalog,
                               std::string_view name) {
  for (const auto& p : catalog) {
    if (p.display_name == name || p.preset_id == name) return &p;
  }
  return nullptr;
}

enum class LlmOutcome { kOk, kRetryable, kFallback };

LlmOutcome interpret(const std::string& response,
                     const std::vector<std::string>& characters,
                     const VoiceCatalog& catalog, bool allow_reuse,
                     VoiceMap& out, std::vector<std::string>& warnings) {
  VoiceCsv csv;
  try {
    csv = parse_voice_csv(response);
  } catch (const CsvError& e) {
    warnings.push_back(std::string("CsvError: ") + e.what());
    return LlmOutcome::kFallback;
  }
  warnings.insert(warnings.end(), csv.warnings.begin(), csv.warnings.end());

  VoiceMap map;
  std::set<std::string> used;
  for (const auto& character : characters) {
    auto row = csv.rows.find(character);
    if (row == csv.rows.end()) {
      warnings.push_back("LLM left character '" + character + "' unmapped");
      return LlmOutcome::kRetryable;
    }
    const VoicePreset* preset = find_preset(catalog, row->second);
    if (preset == nullptr) {
      warnings.push_back("UnknownVoiceType: '" + row->second + "'");
      return LlmOutcome::kRetryable;
    }
    if (!used.insert(preset->preset_id).second && !allow_reuse) {
      warnings.push_back("LLM reused voice '" + row->second + "'");
      return LlmOutcome::kRetryable;
    }
    map.assignments[character] = preset->preset_id;
  }
  out = std::move(map);
  return LlmOutcome::kOk;
}

}  // namespace

AllocationResult allocate_voices_detailed(const AudioScript& script,
                                          const VoiceCatalog& catalog,
                                          const AllocationOptions& options) {
  if (catalog.empty()) {
    throw VoiceCastError("EmptyCatalog", "voice catalog is empty");
  }
  const auto characters = list_characters(script);
  AllocationResult result;
  if (options.allocator == Allocator::kDeterministic || characters.empty()) {
    result.voices = deterministic(characters, catalog, options.allow_reuse);
    return result;
  }
  if (options.llm == nullptr) {
    throw VoiceCastError("NoLlmClient", "llm allocator needs an LLM client");
  }
  if (characters.size() > catalog.size() && !options.allow_reuse) {
    // The LLM cannot produce an injective map either.
    deterministic(characters, catalog, false);
  }

  const std::string system_prompt = build_voice_prompt(catalog);
  const std::string user_message = serialize_script(script);
  for (int attempt = 0; attempt < 2; ++attempt) {
    ++result.llm_calls;
    const std::string response =
        options.llm->complete(system_prompt, user_message, options.temperature);
    const LlmOutcome outcome =
        interpret(response, characters, catalog, options.allow_reuse,
                  result.voices, result.warnings);
    if (outcome == LlmOutcome::kOk) return result;
    if (outcome == LlmOutcome::kFallback) break;
  }
  result.fell_back = true;
  result.warnings.push_back("falling back to deterministic voice allocation");
  result.voices = deterministic(characters, catalog, options.allow_reuse);
  return result;
}

VoiceMap allocate_voices(const AudioScript& script, const VoiceCatalog& catalog,
                         const AllocationOptions& options) {
  return allocate_voices_detailed(script, catalog, options).voices;
}

}  // namespace audioscript
