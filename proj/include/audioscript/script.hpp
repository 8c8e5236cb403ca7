#ifndef AUDIOSCRIPT_SCRIPT_HPP_
#define AUDIOSCRIPT_SCRIPT_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace audioscript {

enum class AudioType { kSpeech, kMusic, kSoundEffect };
enum class Layout { kForeground, kBackground };
enum class Action { kBegin, kEnd };

std::string_view to_string(AudioType type);
std::string_view to_string(Layout layout);
std::string_view to_string(Action action);

// One element of an audio script. Fields a role does not use stay empty;
// which ones are required is decided by validate(), not by the parser.
struct AudioNode {
  AudioType audio_type = AudioType::kSoundEffect;
  Layout layout = Layout::kForeground;
  std::optional<double> vol;  // target integrated loudness, LUFS
  std::optional<double> len;  // seconds
  std::optional<std::string> desc;
  std::optional<std::string> character;
  std::optional<std::string> text;
  std::optional<long long> id;
  std::optional<Action> action;

  bool is_foreground() const { return layout == Layout::kForeground; }
  bool is_background_begin() const {
    return layout == Layout::kBackground && action == Action::kBegin;
  }
  bool is_background_end() const {
    return layout == Layout::kBackground && action == Action::kEnd;
  }

  friend bool operator==(const AudioNode&, const AudioNode&) = default;
};

struct AudioScript {
  std::vector<AudioNode> nodes;
  std::optional<std::string> source_text;

  std::size_t foreground_count() const;

  friend bool operator==(const AudioScript&, const AudioScript&) = default;
};

// A single finding. node_index is -1 for script-level findings.
struct Diagnostic {
  std::string code;
  int node_index = -1;
  std::string message;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

struct ValidationReport {
  std::vector<Diagnostic> errors;
  std::vector<Diagnostic> warnings;

  bool ok() const { return errors.empty(); }
  bool has_error(std::string_view code) const;
  std::string to_text() const;
  std::string to_json() const;
};

namespace codes {
// Parse-level.
inline constexpr std::string_view kMalformedJson = "MalformedJson";
inline constexpr std::string_view kNotAList = "NotAList";
inline constexpr std::string_view kNotAnObject = "NotAnObject";
inline constexpr std::string_view kUnknownAudioType = "UnknownAudioType";
inline constexpr std::string_view kInvalidFieldValue = "InvalidFieldValue";
inline constexpr std::string_view kUnknownKey = "UnknownKey";
// Shared by parse and validate.
inline constexpr std::string_view kMissingField = "MissingField";
// Validate-level.
inline constexpr std::string_view kSpeechNotForeground = "SpeechNotForeground";
inline constexpr std::string_view kMissingLen = "MissingLen";
inline constexpr std::string_view kNonPositiveLen = "NonPositiveLen";
inline constexpr std::string_view kUnbalancedBackground =
    "UnbalancedBackground";
inline constexpr std::string_view kEmptyBackgroundSpan = "EmptyBackgroundSpan";
inline constexpr std::string_view kNoForeground = "NoForeground";
inline constexpr std::string_view kVolOutOfRange = "VolOutOfRange";
// Warnings.
inline constexpr std::string_view kOverlappingBackgroundsSameType =
    "OverlappingBackgroundsSameType";
inline constexpr std::string_view kUnexpectedField = "UnexpectedField";
}  // namespace codes

class ParseError : public std::runtime_error {
 public:
  ParseError(std::string code, int node_index, const std::string& message)
      : std::runtime_error(message),
        code_(std::move(code)),
        node_index_(node_index) {}

  const std::string& code() const { return code_; }
  int node_index() const { return node_index_; }
  Diagnostic diagnostic() const { return {code_, node_index_, what()}; }

 private:
  std::string code_;
  int node_index_;
};

class ExtractionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParseOptions {
  // Unknown keys are errors unless lenient, in which case they are warnings.
  bool lenient = false;
};

struct ParseResult {
  AudioScript script;
  std::vector<Diagnostic> warnings;
};

inline constexpr double kMinVolLufs = -70.0;
inline constexpr double kMaxVolLufs = 0.0;

ParseResult parse_script_detailed(std::string_view raw_json,
                                  const ParseOptions& options = {});
AudioScript parse_script(std::string_view raw_json,
                         const ParseOptions& options = {});

// Pulls the first top-level JSON array out of free-form LLM output.
std::string extract_script(std::string_view llm_output);

ValidationReport validate(const AudioScript& script);

// Canonical form: one node per line, fixed key order, len always as a real.
std::string serialize_script(const AudioScript& script);

// Closes every still-open background right after the last foreground node.
AudioScript auto_close_backgrounds(const AudioScript& script);

}  // namespace audioscript

#endif  // AUDIOSCRIPT_SCRIPT_HPP_
