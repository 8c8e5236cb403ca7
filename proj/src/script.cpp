#include "audioscript/script.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <map>
#include <sstream>
#include <utility>

namespace audioscript {

using nlohmann::json;

std::string_view to_string(AudioType type) {
  switch (type) {
    case AudioType::kSpeech:
      return "speech";
    case AudioType::kMusic:
      return "music";
    case AudioType::kSoundEffect:
      return "sound_effect";
  }
  return "?";
}

std::string_view to_string(Layout layout) {
  return layout == Layout::kForeground ? "foreground" : "background";
}

std::string_view to_string(Action action) {
  return action == Action::kBegin ? "begin" : "end";
}

std::size_t AudioScript::foreground_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(),
                    [](const AudioNode& n) { return n.is_foreground(); }));
}

bool ValidationReport::has_error(std::string_view code) const {
  return std::any_of(errors.begin(), errors.end(),
                     [&](const Diagnostic& d) { return d.code == code; });
}

namespace {

void append_lines(std::ostringstream& out, std::string_view label,
                  const std::vector<Diagnostic>& items) {
  for (const auto& d : items) {
    out << label << " " << d.code;
    if (d.node_index >= 0) out << " (node " << d.node_index << ")";
    out << ": " << d.message << "\n";
  }
}

json diagnostics_json(const std::vector<Diagnostic>& items) {
  json arr = json::array();
  for (const auto& d : items) {
    arr.push_back({{"code", d.code},
                   {"node_index", d.node_index},
                   {"message", d.message}});
  }
  return arr;
}

}  // namespace

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  append_lines(out, "error", errors);
  append_lines(out, "warning", warnings);
  if (errors.empty()) out << "ok: script is compilable\n";
  return out.str();
}

std::string ValidationReport::to_json() const {
  json j = {{"ok", ok()},
            {"errors", diagnostics_json(errors)},
            {"warnings", diagnostics_json(warnings)}};
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace {

const std::vector<std::string_view>& known_keys() {
  static const std::vector<std::string_view> keys = {
      "audio_type", "layout", "vol", "len",   "desc",
      "character",  "text",   "id",  "action"};
  return keys;
}

[[noreturn]] void fail(std::string_view code, int index,
                       const std::string& message) {
  throw ParseError(std::string(code), index, message);
}

std::string require_string(const json& obj, const char* key, int index) {
  const auto& v = obj.at(key);
  if (!v.is_string()) {
    fail(codes::kInvalidFieldValue, index,
         std::string("field '") + key + "' must be a string");
  }
  return v.get<std::string>();
}

std::optional<std::string> optional_string(const json& obj, const char* key,
                                           int index) {
  if (!obj.contains(key)) return std::nullopt;
  return require_string(obj, key, index);
}

std::optional<double> optional_number(const json& obj, const char* key,
                                      int index) {
  if (!obj.contains(key)) return std::nullopt;
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    fail(codes::kInvalidFieldValue, index,
         std::string("field '") + key + "' must be a number");
  }
  const double value = v.get<double>();
  if (!std::isfinite(value)) {
    fail(codes::kInvalidFieldValue, index,
         std::string("field '") + key + "' must be finite");
  }
  return value;
}

AudioNode parse_node(const json& obj, int index, const ParseOptions& options,
                     std::vector<Diagnostic>& warnings) {
  if (!obj.is_object()) {
    fail(codes::kNotAnObject, index, "script entries must be JSON objects");
  }
  for (const auto& [key, _] : obj.items()) {
    const auto& keys = known_keys();
    if (std::find(keys.begin(), keys.end(), key) != keys.end()) continue;
    const std::string message = "unknown key '" + key + "'";
    if (!options.lenient) fail(codes::kUnknownKey, index, message);
    warnings.push_back({std::string(codes::kUnknownKey), index, message});
  }

  AudioNode node;
  if (!obj.contains("audio_type")) {
    fail(codes::kMissingField, index, "node has no 'audio_type'");
  }
  const std::string type = require_string(obj, "audio_type", index);
  if (type == "speech") {
    node.audio_type = AudioType::kSpeech;
  } else if (type == "music") {
    node.audio_type = AudioType::kMusic;
  } else if (type == "sound_effect") {
    node.audio_type = AudioType::kSoundEffect;
  } else {
    fail(codes::kUnknownAudioType, index,
         "undefined audio type '" + type +
             "' (expected speech, music or sound_effect)");
  }

  if (!obj.contains("layout")) {
    fail(codes::kMissingField, index, "node has no 'layout'");
  }
  const std::string layout = require_string(obj, "layout", index);
  if (layout == "foreground") {
    node.layout = Layout::kForeground;
  } else if (layout == "background") {
    node.layout = Layout::kBackground;
  } else {
    fail(codes::kInvalidFieldValue, index,
         "layout must be 'foreground' or 'background', got '" + layout + "'");
  }

  if (auto action = optional_string(obj, "action", index)) {
    if (*action == "begin") {
      node.action = Action::kBegin;
    } else if (*action == "end") {
      node.action = Action::kEnd;
    } else {
      fail(codes::kInvalidFieldValue, index,
           "action must be 'begin' or 'end', got '" + *action + "'");
    }
  }

  if (auto id = optional_number(obj, "id", index)) {
    if (std::floor(*id) != *id) {
      fail(codes::kInvalidFieldValue, index, "id must be an integer");
    }
    node.id = static_cast<long long>(*id);
  }

  node.vol = optional_number(obj, "vol", index);
  node.len = optional_number(obj, "len", index);
  node.desc = optional_string(obj, "desc", index);
  node.character = optional_string(obj, "character", index);
  node.text = optional_string(obj, "text", index);
  return node;
}

}  // namespace

ParseResult parse_script_detailed(std::string_view raw_json,
                                  const ParseOptions& options) {
  json root;
  try {
    root = json::parse(raw_json.begin(), raw_json.end());
  } catch (const json::parse_error& e) {
    fail(codes::kMalformedJson, -1, std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_array()) {
    fail(codes::kNotAList, -1, "top-level value must be a list of nodes");
  }

  ParseResult result;
  result.script.nodes.reserve(root.size());
  for (std::size_t i = 0; i < root.size(); ++i) {
    result.script.nodes.push_back(
        parse_node(root[i], static_cast<int>(i), options, result.warnings));
  }
  return result;
}

AudioScript parse_script(std::string_view raw_json,
                         const ParseOptions& options) {
  return parse_script_detailed(raw_json, options).script;
}

// ---------------------------------------------------------------------------
// Extraction
// ---------------------------------------------------------------------------

namespace {

// Index one past the bracket closing the array opened at `open`, or npos.
std::size_t match_bracket(std::string_view text, std::size_t open) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = open; i < text.size(); ++i) {
    const char c = text[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '[' || c == '{') {
      ++depth;
    } else if (c == ']' || c == '}') {
      if (--depth == 0) return i + 1;
      if (depth < 0) return std::string_view::npos;
    }
  }
  return std::string_view::npos;
}

}  // namespace

std::string extract_script(std::string_view llm_output) {
  for (std::size_t pos = llm_output.find('['); pos != std::string_view::npos;
       pos = llm_output.find('[', pos + 1)) {
    const std::size_t end = match_bracket(llm_output, pos);
    if (end == std::string_view::npos) continue;
    const std::string_view candidate = llm_output.substr(pos, end - pos);
    if (json::accept(candidate.begin(), candidate.end())) {
      return std::string(candidate);
    }
  }
  throw ExtractionError("NoJsonArrayFound: no parseable JSON array in text");
}

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

namespace {

struct OpenSpan {
  int begin_index;
  std::size_t begin_fg;
};

struct ClosedSpan {
  AudioType type;
  long long id;
  int begin_index;
  std::size_t begin_fg;
  std::size_t end_fg;
};

bool blank(const std::optional<std::string>& s) {
  return !s || s->find_first_not_of(" \t\r\n") == std::string::npos;
}

class Validator {
 public:
  explicit Validator(const AudioScript& script) : script_(script) {}

  ValidationReport run() {
    for (std::size_t i = 0; i < script_.nodes.size(); ++i) {
      check_node(static_cast<int>(i), script_.nodes[i]);
    }
    for (const auto& [key, open] : open_) {
      error(codes::kUnbalancedBackground, open.begin_index,
            "background " + describe(key) + " is never ended");
    }
    check_overlaps();
    if (foreground_seen_ == 0) {
      error(codes::kNoForeground, -1,
            "script has no foreground node; backgrounds cannot play alone");
    }
    return std::move(report_);
  }

 private:
  using SpanKey = std::pair<AudioType, long long>;

  static std::string describe(const SpanKey& key) {
    return std::string(to_string(key.first)) + " id " +
           std::to_string(key.second);
  }

  void error(std::string_view code, int index, std::string message) {
    report_.errors.push_back({std::string(code), index, std::move(message)});
  }
  void warning(std::string_view code, int index, std::string message) {
    report_.warnings.push_back({std::string(code), index, std::move(message)});
  }

  void require(bool present, int index, std::string_view field,
               std::string_view role) {
    if (!present) {
      error(codes::kMissingField, index,
            std::string(role) + " node requires '" + std::string(field) + "'");
    }
  }

  void unexpected(bool present, int index, std::string_view field,
                  std::string_view role) {
    if (present) {
      warning(codes::kUnexpectedField, index,
              std::string(role) + " node ignores '" + std::string(field) + "'");
    }
  }

  void check_vol(int index, const AudioNode& node, std::string_view role) {
    require(node.vol.has_value(), index, "vol", role);
    if (node.vol && (*node.vol < kMinVolLufs || *node.vol > kMaxVolLufs)) {
      std::ostringstream msg;
      msg << "vol " << *node.vol << " LUFS outside [" << kMinVolLufs << ", "
          << kMaxVolLufs << "]";
      error(codes::kVolOutOfRange, index, msg.str());
    }
  }

  void check_node(int index, const AudioNode& node) {
    if (node.audio_type == AudioType::kSpeech) {
      if (!node.is_foreground()) {
        error(codes::kSpeechNotForeground, index,
              "speech can only be foreground");
        return;
      }
      require(!blank(node.character), index, "character", "speech");
      require(!blank(node.text), index, "text", "speech");
      check_vol(index, node, "speech");
      unexpected(node.len.has_value(), index, "len", "speech");
      unexpected(node.id.has_value(), index, "id", "speech");
      unexpected(node.action.has_value(), index, "action", "speech");
      ++foreground_seen_;
      return;
    }

    if (node.is_foreground()) {
      const std::string_view role = to_string(node.audio_type);
      if (!node.len) {
        error(
            codes::kMissingLen, index,
            std::string("foreground ") + std::string(role) + " requires 'len'");
      } else if (*node.len <= 0.0) {
        error(codes::kNonPositiveLen, index, "len must be > 0 seconds");
      }
      require(!blank(node.desc), index, "desc", role);
      check_vol(index, node, role);
      unexpected(node.id.has_value(), index, "id", "foreground");
      unexpected(node.action.has_value(), index, "action", "foreground");
      ++foreground_seen_;
      return;
    }

    check_background(index, node);
  }

  void check_background(int index, const AudioNode& node) {
    require(node.id.has_value(), index, "id", "background");
    require(node.action.has_value(), index, "action", "background");
    unexpected(node.len.has_value(), index, "len", "background");
    if (!node.id || !node.action) return;

    const SpanKey key{node.audio_type, *node.id};
    if (*node.action == Action::kBegin) {
      require(!blank(node.desc), index, "desc", "background begin");
      check_vol(index, node, "background begin");
      if (open_.count(key) != 0 || used_.count(key) != 0) {
        error(codes::kUnbalancedBackground, index,
              "duplicate begin for background " + describe(key));
        return;
      }
      open_.emplace(key, OpenSpan{index, foreground_seen_});
      used_.emplace(key, true);
      return;
    }

    unexpected(node.vol.has_value(), index, "vol", "background end");
    unexpected(node.desc.has_value(), index, "desc", "background end");
    auto it = open_.find(key);
    if (it == open_.end()) {
      error(codes::kUnbalancedBackground, index,
            "end without matching begin for background " + describe(key));
      return;
    }
    if (it->second.begin_fg == foreground_seen_) {
      error(codes::kEmptyBackgroundSpan, index,
            "background " + describe(key) + " encloses no foreground node");
    } else {
      closed_.push_back({key.first, key.second, it->second.begin_index,
                         it->second.begin_fg, foreground_seen_});
    }
    open_.erase(it);
  }

  void check_overlaps() {
    for (std::size_t i = 0; i < closed_.size(); ++i) {
      for (std::size_t j = i + 1; j < closed_.size(); ++j) {
        const auto& a = closed_[i];
        const auto& b = closed_[j];
        if (a.type != b.type) continue;
        if (a.begin_fg < b.end_fg && b.begin_fg < a.end_fg) {
          const int later = std::max(a.begin_index, b.begin_index);
          warning(codes::kOverlappingBackgroundsSameType, later,
                  "background " + std::string(to_string(a.type)) + " ids " +
                      std::to_string(a.id) + " and " + std::to_string(b.id) +
                      " overlap");
        }
      }
    }
  }

  const AudioScript& script_;
  ValidationReport report_;
  std::size_t foreground_seen_ = 0;
  std::map<SpanKey, OpenSpan> open_;
  std::map<SpanKey, bool> used_;
  std::vector<ClosedSpan> closed_;
};

}  // namespace

ValidationReport validate(const AudioScript& script) {
  return Validator(script).run();
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string number_text(double value, bool force_real) {
  if (!force_real && std::floor(value) == value && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  // nlohmann emits the shortest text that round-trips, keeping ".0" on
  // integral reals.
  return json(value).dump();
}

std::string node_line(const AudioNode& node) {
  std::vector<std::pair<std::string, std::string>> fields;
  fields.emplace_back("audio_type", json(to_string(node.audio_type)).dump());
  fields.emplace_back("layout", json(to_string(node.layout)).dump());
  if (node.id) fields.emplace_back("id", std::to_string(*node.id));
  if (node.action) {
    fields.emplace_back("action", json(to_string(*node.action)).dump());
  }
  if (node.character) {
    fields.emplace_back("character", json(*node.character).dump());
  }
  if (node.vol) fields.emplace_back("vol", number_text(*node.vol, false));
  if (node.len) fields.emplace_back("len", number_text(*node.len, true));
  if (node.desc) fields.emplace_back("desc", json(*node.desc).dump());
  if (node.text) fields.emplace_back("text", json(*node.text).dump());

  std::string line = "{";
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i != 0) line += ", ";
    line += "\"" + fields[i].first + "\": " + fields[i].second;
  }
  line += "}";
  return line;
}

}  // namespace

std::string serialize_script(const AudioScript& script) {
  if (script.nodes.empty()) return "[]";
  std::string out = "[\n";
  for (std::size_t i = 0; i < script.nodes.size(); ++i) {
    out += "  " + node_line(script.nodes[i]);
    if (i + 1 != script.nodes.size()) out += ",";
    out += "\n";
  }
  out += "]";
  return out;
}

AudioScript auto_close_backgrounds(const AudioScript& script) {
  std::vector<std::pair<AudioType, long long>> open;
  std::ptrdiff_t last_fg = -1;
  for (std::size_t i = 0; i < script.nodes.size(); ++i) {
    const auto& node = script.nodes[i];
    if (node.is_foreground()) last_fg = static_cast<std::ptrdiff_t>(i);
    if (node.layout != Layout::kBackground || !node.id || !node.action) {
      continue;
    }
    const std::pair key{node.audio_type, *node.id};
    if (*node.action == Action::kBegin) {
      open.push_back(key);
    } else {
      auto it = std::find(open.begin(), open.end(), key);
      if (it != open.end()) open.erase(it);
    }
  }
  if (open.empty()) return script;

  AudioScript closed = script;
  std::vector<AudioNode> ends;
  for (const auto& [type, id] : open) {
    AudioNode end;
    end.audio_type = type;
    end.layout = Layout::kBackground;
    end.id = id;
    end.action = Action::kEnd;
    ends.push_back(end);
  }
  closed.nodes.insert(closed.nodes.begin() + (last_fg + 1), ends.begin(),
                      ends.end());
  return closed;
}

}  // namespace audioscript
