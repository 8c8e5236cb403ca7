#include "audioscript/compiler.hpp"

#include <cctype>
#include <cmath>
#include <json.hpp>
#include <numeric>
#include <set>
#include <sstream>

namespace audioscript {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Durations
// ---------------------------------------------------------------------------

double eval_duration(const DurationExpr& expr,
                     const std::map<int, double>& resolved_seconds) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstDuration>) {
          return v.seconds;
        } else if constexpr (std::is_same_v<T, SegLen>) {
          auto it = resolved_seconds.find(v.segment);
          if (it == resolved_seconds.end()) {
            throw DurationError("UnresolvedSegment: segment " +
                                std::to_string(v.segment));
          }
          return it->second;
        } else {
          double total = 0.0;
          for (const auto& term : v.terms) {
            total += eval_duration(term, resolved_seconds);
          }
          return total;
        }
      },
      expr.value);
}

SampleCount eval_duration_samples(const DurationExpr& expr,
                                  const std::map<int, SampleCount>& resolved) {
  return std::visit(
      [&](const auto& v) -> SampleCount {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstDuration>) {
          return seconds_to_samples(v.seconds);
        } else if constexpr (std::is_same_v<T, SegLen>) {
          auto it = resolved.find(v.segment);
          if (it == resolved.end()) {
            throw DurationError("UnresolvedSegment: segment " +
                                std::to_string(v.segment));
          }
          return it->second;
        } else {
          SampleCount total = 0;
          for (const auto& term : v.terms) {
            total += eval_duration_samples(term, resolved);
          }
          return total;
        }
      },
      expr.value);
}

namespace {

std::string real_text(double value) { return json(value).dump(); }

std::string lufs_text(double value) {
  if (std::floor(value) == value && std::fabs(value) < 1e15) {
    return std::to_string(static_cast<long long>(value));
  }
  return real_text(value);
}

}  // namespace

std::string duration_to_text(const DurationExpr& expr) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstDuration>) {
          return "const(" + real_text(v.seconds) + ")";
        } else if constexpr (std::is_same_v<T, SegLen>) {
          return "seg(" + std::to_string(v.segment) + ")";
        } else {
          std::string out = "sum(";
          for (std::size_t i = 0; i < v.terms.size(); ++i) {
            if (i != 0) out += ", ";
            out += duration_to_text(v.terms[i]);
          }
          return out + ")";
        }
      },
      expr.value);
}

// ---------------------------------------------------------------------------
// Compilation
// ---------------------------------------------------------------------------

namespace {

// Total length of segments [first, last): the empty sum for an empty range,
// the bare segment for a single one.
DurationExpr segment_range(int first, int last) {
  if (last - first == 1) return DurationExpr::segment(first);
  std::vector<DurationExpr> terms;
  for (int i = first; i < last; ++i) terms.push_back(DurationExpr::segment(i));
  return DurationExpr::sum(std::move(terms));
}

GenKind gen_kind(AudioType type) {
  return type == AudioType::kMusic ? GenKind::kMusic : GenKind::kSoundEffect;
}

}  // namespace

ExecutionPlan compile(const AudioScript& script, const VoiceMap& voices) {
  const ValidationReport report = validate(script);
  if (!report.ok()) {
    throw CompileError("InvalidScript",
                       "script has validation errors:\n" + report.to_text());
  }

  ExecutionPlan plan;

  // Node classification: walk the list once, numbering foreground nodes and
  // stamping each background with the foreground ids it starts and stops at.
  int next_foreground_id = 0;
  std::map<std::pair<AudioType, long long>, std::size_t> open_spans;
  for (const auto& node : script.nodes) {
    if (node.is_foreground()) {
      ForegroundSegment segment;
      segment.index = next_foreground_id;
      segment.node = node;
      segment.symbolic_len = node.audio_type == AudioType::kSpeech
                                 ? DurationExpr::segment(next_foreground_id)
                                 : DurationExpr::constant(*node.len);
      plan.segments.push_back(std::move(segment));
      ++next_foreground_id;
    } else if (node.is_background_begin()) {
      BackgroundSpan span;
      span.audio_type = node.audio_type;
      span.id = *node.id;
      span.vol = *node.vol;
      span.desc = *node.desc;
      span.begin_foreground_id = next_foreground_id;
      open_spans[{node.audio_type, *node.id}] = plan.spans.size();
      plan.spans.push_back(std::move(span));
    } else {
      const auto key = std::make_pair(node.audio_type, *node.id);
      plan.spans[open_spans.at(key)].end_foreground_id = next_foreground_id;
      open_spans.erase(key);
    }
  }

  BufferId next_buffer = 0;
  std::vector<BufferId> foreground_buffers;

  // Foreground generation.
  for (const auto& segment : plan.segments) {
    const AudioNode& node = segment.node;
    const BufferId buf = next_buffer++;
    foreground_buffers.push_back(buf);
    if (node.audio_type == AudioType::kSpeech) {
      auto voice = voices.assignments.find(*node.character);
      if (voice == voices.assignments.end()) {
        throw CompileError(
            "UncoveredCharacter",
            "no voice assigned to character '" + *node.character + "'");
      }
      plan.steps.emplace_back(GenSpeech{buf, segment.index, *node.text,
                                        *node.character, voice->second,
                                        *node.vol});
    } else {
      plan.steps.emplace_back(
          GenAudio{buf, segment.index, gen_kind(node.audio_type), *node.desc,
                   DurationExpr::constant(*node.len), *node.vol});
    }
  }

  // Background generation, each sized to the foreground run it covers.
  std::vector<BufferId> background_buffers;
  for (const auto& span : plan.spans) {
    const BufferId buf = next_buffer++;
    background_buffers.push_back(buf);
    plan.steps.emplace_back(GenAudio{
        buf, -1, gen_kind(span.audio_type), span.desc,
        segment_range(span.begin_foreground_id, span.end_foreground_id),
        span.vol});
  }

  // Composition.
  BufferId current = next_buffer++;
  plan.steps.emplace_back(Concat{current, foreground_buffers});
  for (std::size_t i = 0; i < plan.spans.size(); ++i) {
    const BufferId mixed = next_buffer++;
    plan.steps.emplace_back(
        MixAt{mixed, current, background_buffers[i],
              segment_range(0, plan.spans[i].begin_foreground_id)});
    current = mixed;
  }
  plan.steps.emplace_back(Emit{current});
  plan.output_buffer = current;
  return plan;
}

BufferId step_buffer(const PlanStep& step) {
  return std::visit([](const auto& s) { return s.buf; }, step);
}

std::string_view step_name(const PlanStep& step) {
  return std::visit(
      [](const auto& s) -> std::string_view {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, GenSpeech>) {
          return "gen_speech";
        } else if constexpr (std::is_same_v<T, GenAudio>) {
          return s.kind == GenKind::kMusic ? "gen_music" : "gen_sfx";
        } else if constexpr (std::is_same_v<T, Concat>) {
          return "concat";
        } else if constexpr (std::is_same_v<T, MixAt>) {
          return "mix_at";
        } else {
          return "emit";
        }
      },
      step);
}

// ---------------------------------------------------------------------------
// Plan checks
// ---------------------------------------------------------------------------

std::vector<std::string> check_plan(const ExecutionPlan& plan) {
  std::vector<std::string> problems;
  std::set<BufferId> defined;
  int emits = 0;
  bool background_seen = false;
  auto use = [&](BufferId id, std::size_t step) {
    if (defined.count(id) == 0) {
      problems.push_back("step " + std::to_string(step) + " uses b" +
                         std::to_string(id) + " before definition");
    }
  };
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const PlanStep& step = plan.steps[i];
    if (const auto* e = std::get_if<Emit>(&step)) {
      ++emits;
      use(e->buf, i);
      continue;
    }
    if (const auto* c = std::get_if<Concat>(&step)) {
      for (BufferId in : c->inputs) use(in, i);
    } else if (const auto* m = std::get_if<MixAt>(&step)) {
      use(m->base, i);
      use(m->overlay, i);
    } else if (const auto* g = std::get_if<GenAudio>(&step)) {
      if (g->segment < 0) {
        background_seen = true;
      } else if (background_seen) {
        problems.push_back("foreground generation at step " +
                           std::to_string(i) + " follows a background");
      }
    } else if (std::holds_alternative<GenSpeech>(step) && background_seen) {
      problems.push_back("foreground generation at step " + std::to_string(i) +
                         " follows a background");
    }
    if (!defined.insert(step_buffer(step)).second) {
      problems.push_back("b" + std::to_string(step_buffer(step)) +
                         " assigned twice");
    }
  }
  if (emits != 1) {
    problems.push_back("plan has " + std::to_string(emits) +
                       " emit steps, expected 1");
  }
  return problems;
}

// ---------------------------------------------------------------------------
// Text listing
// ---------------------------------------------------------------------------

std::string plan_to_text(const ExecutionPlan& plan) {
  std::ostringstream out;
  for (const auto& step : plan.steps) {
    std::visit(
        [&](const auto& s) {
          using T = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<T, GenSpeech>) {
            out << "b" << s.buf << " = gen_speech(segment=" << s.segment
                << ", character=" << json(s.character).dump()
                << ", voice=" << json(s.preset_id).dump()
                << ", lufs=" << lufs_text(s.target_lufs)
                << ", text=" << json(s.text).dump() << ")";
          } else if constexpr (std::is_same_v<T, GenAudio>) {
            out << "b" << s.buf << " = "
                << (s.kind == GenKind::kMusic ? "gen_music" : "gen_sfx") << "(";
            if (s.segment >= 0) out << "segment=" << s.segment << ", ";
            out << "duration=" << duration_to_text(s.duration)
                << ", lufs=" << lufs_text(s.target_lufs)
                << ", desc=" << json(s.desc).dump() << ")";
          } else if constexpr (std::is_same_v<T, Concat>) {
            out << "b" << s.buf << " = concat(";
            for (std::size_t i = 0; i < s.inputs.size(); ++i) {
              if (i != 0) out << ", ";
              out << "b" << s.inputs[i];
            }
            out << ")";
          } else if constexpr (std::is_same_v<T, MixAt>) {
            out << "b" << s.buf << " = mix_at(b" << s.base << ", b" << s.overlay
                << ", offset=" << duration_to_text(s.offset) << ")";
          } else {
            out << "emit(b" << s.buf << ")";
          }
        },
        step);
    out << "\n";
  }
  return out.str();
}

namespace {

class ListingParser {
 public:
  explicit ListingParser(std::string_view line) : s_(line) {}

  PlanStep parse_line() {
    skip_ws();
    if (peek_word() == "emit") {
      expect_word("emit");
      expect('(');
      Emit e{parse_buffer()};
      expect(')');
      finish();
      return e;
    }
    const BufferId buf = parse_buffer();
    expect('=');
    const std::string op = word();
    expect('(');
    PlanStep step = parse_op(op, buf);
    expect(')');
    finish();
    return step;
  }

 private:
  PlanStep parse_op(const std::string& op, BufferId buf) {
    if (op == "concat") {
      Concat c{buf, {}};
      if (!at(')')) {
        c.inputs.push_back(parse_buffer());
        while (consume(',')) c.inputs.push_back(parse_buffer());
      }
      return c;
    }
    if (op == "mix_at") {
      MixAt m;
      m.buf = buf;
      m.base = parse_buffer();
      expect(',');
      m.overlay = parse_buffer();
      expect(',');
      expect_word("offset");
      expect('=');
      m.offset = parse_duration();
      return m;
    }
    if (op == "gen_speech") {
      GenSpeech g;
      g.buf = buf;
      parse_args([&](const std::string& key) {
        if (key == "segment") {
          g.segment = static_cast<int>(number());
        } else if (key == "character") {
          g.character = quoted();
        } else if (key == "voice") {
          g.preset_id = quoted();
        } else if (key == "lufs") {
          g.target_lufs = number();
        } else if (key == "text") {
          g.text = quoted();
        } else {
          bad("unknown gen_speech argument '" + key + "'");
        }
      });
      return g;
    }
    if (op == "gen_music" || op == "gen_sfx") {
      GenAudio g;
      g.buf = buf;
      g.kind = op == "gen_music" ? GenKind::kMusic : GenKind::kSoundEffect;
      parse_args([&](const std::string& key) {
        if (key == "segment") {
          g.segment = static_cast<int>(number());
        } else if (key == "duration") {
          g.duration = parse_duration();
        } else if (key == "lufs") {
          g.target_lufs = number();
        } else if (key == "desc") {
          g.desc = quoted();
        } else {
          bad("unknown " + op + " argument '" + key + "'");
        }
      });
      return g;
    }
    bad("unknown operation '" + op + "'");
  }

  template <typename F>
  void parse_args(F&& on_key) {
    do {
      const std::string key = word();
      expect('=');
      on_key(key);
    } while (consume(','));
  }

  DurationExpr parse_duration() {
    const std::string kind = word();
    expect('(');
    DurationExpr expr;
    if (kind == "const") {
      expr = DurationExpr::constant(number());
    } else if (kind == "seg") {
      expr = DurationExpr::segment(static_cast<int>(number()));
    } else if (kind == "sum") {
      std::vector<DurationExpr> terms;
      if (!at(')')) {
        terms.push_back(parse_duration());
        while (consume(',')) terms.push_back(parse_duration());
      }
      expr = DurationExpr::sum(std::move(terms));
    } else {
      bad("unknown duration form '" + kind + "'");
    }
    expect(')');
    return expr;
  }

  BufferId parse_buffer() {
    skip_ws();
    if (pos_ >= s_.size() || s_[pos_] != 'b') bad("expected buffer name");
    ++pos_;
    return static_cast<BufferId>(number());
  }

  double number() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isdigit(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '-' || s_[pos_] == '+' || s_[pos_] == '.' ||
            s_[pos_] == 'e' || s_[pos_] == 'E')) {
      ++pos_;
    }
    if (start == pos_) bad("expected number");
    return std::stod(std::string(s_.substr(start, pos_ - start)));
  }

  std::string quoted() {
    skip_ws();
    if (!at('"')) bad("expected string");
    std::size_t i = pos_ + 1;
    for (; i < s_.size(); ++i) {
      if (s_[i] == '\\') {
        ++i;
      } else if (s_[i] == '"') {
        break;
      }
    }
    if (i >= s_.size()) bad("unterminated string");
    const auto literal = s_.substr(pos_, i + 1 - pos_);
    pos_ = i + 1;
    return json::parse(literal).get<std::string>();
  }

  std::string word() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) ||
            s_[pos_] == '_')) {
      ++pos_;
    }
    if (start == pos_) bad("expected identifier");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string_view peek_word() {
    std::size_t end = pos_;
    while (
        end < s_.size() &&
        (std::isalnum(static_cast<unsigned char>(s_[end])) || s_[end] == '_')) {
      ++end;
    }
    return s_.substr(pos_, end - pos_);
  }

  void expect_word(std::string_view w) {
    if (word() != w) bad("expected '" + std::string(w) + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() &&
           std::isspace(static_cast<unsigned char>(s_[pos_]))) {
      ++pos_;
    }
  }

  bool at(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  bool consume(char c) {
    if (!at(c)) return false;
    ++pos_;
    return true;
  }

  void expect(char c) {
    if (!consume(c)) bad(std::string("expected '") + c + "'");
  }

  void finish() {
    skip_ws();
    if (pos_ != s_.size()) bad("trailing characters");
  }

  [[noreturn]] void bad(const std::string& why) {
    throw std::invalid_argument("plan listing: " + why + " in '" +
                                std::string(s_) + "'");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<PlanStep> plan_steps_from_text(std::string_view text) {
  std::vector<PlanStep> steps;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    steps.push_back(ListingParser(line).parse_line());
  }
  return steps;
}

// ---------------------------------------------------------------------------
// JSON dump
// ---------------------------------------------------------------------------

namespace {

json duration_json(const DurationExpr& expr) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ConstDuration>) {
          return {{"const", v.seconds}};
        } else if constexpr (std::is_same_v<T, SegLen>) {
          return {{"seg", v.segment}};
        } else {
          json terms = json::array();
          for (const auto& t : v.terms) terms.push_back(duration_json(t));
          return {{"sum", terms}};
        }
      },
      expr.value);
}

DurationExpr duration_from_json(const json& j) {
  if (j.contains("const"))
    return DurationExpr::constant(j["const"].get<double>());
  if (j.contains("seg")) return DurationExpr::segment(j["seg"].get<int>());
  std::vector<DurationExpr> terms;
  for (const auto& t : j.at("sum")) terms.push_back(duration_from_json(t));
  return DurationExpr::sum(std::move(terms));
}

json step_json(const PlanStep& step) {
  return std::visit(
      [](const auto& s) -> json {
        using T = std::decay_t<decltype(s)>;
        json j = json::object();
        if constexpr (std::is_same_v<T, GenSpeech>) {
          j["op"] = "gen_speech";
          j["buf"] = s.buf;
          j["segment"] = s.segment;
          j["character"] = s.character;
          j["voice"] = s.preset_id;
          j["target_lufs"] = s.target_lufs;
          j["text"] = s.text;
        } else if constexpr (std::is_same_v<T, GenAudio>) {
          j["op"] = "gen_audio";
          j["buf"] = s.buf;
          j["segment"] = s.segment;
          j["kind"] = s.kind == GenKind::kMusic ? "music" : "sound_effect";
          j["duration"] = duration_json(s.duration);
          j["target_lufs"] = s.target_lufs;
          j["desc"] = s.desc;
        } else if constexpr (std::is_same_v<T, Concat>) {
          j["op"] = "concat";
          j["buf"] = s.buf;
          j["inputs"] = s.inputs;
        } else if constexpr (std::is_same_v<T, MixAt>) {
          j["op"] = "mix_at";
          j["buf"] = s.buf;
          j["base"] = s.base;
          j["overlay"] = s.overlay;
          j["offset"] = duration_json(s.offset);
        } else {
          j["op"] = "emit";
          j["buf"] = s.buf;
        }
        return j;
      },
      step);
}

PlanStep step_from_json(const json& j) {
  const std::string op = j.at("op").get<std::string>();
  const BufferId buf = j.at("buf").get<BufferId>();
  if (op == "gen_speech") {
    return GenSpeech{buf,
                     j.at("segment").get<int>(),
                     j.at("text").get<std::string>(),
                     j.at("character").get<std::string>(),
                     j.at("voice").get<std::string>(),
                     j.at("target_lufs").get<double>()};
  }
  if (op == "gen_audio") {
    return GenAudio{buf,
                    j.at("segment").get<int>(),
                    j.at("kind").get<std::string>() == "music"
                        ? GenKind::kMusic
                        : GenKind::kSoundEffect,
                    j.at("desc").get<std::string>(),
                    duration_from_json(j.at("duration")),
                    j.at("target_lufs").get<double>()};
  }
  if (op == "concat") {
    return Concat{buf, j.at("inputs").get<std::vector<BufferId>>()};
  }
  if (op == "mix_at") {
    return MixAt{buf, j.at("base").get<BufferId>(),
                 j.at("overlay").get<BufferId>(),
                 duration_from_json(j.at("offset"))};
  }
  if (op == "emit") return Emit{buf};
  throw std::invalid_argument("plan JSON: unknown op '" + op + "'");
}

}  // namespace

std::string plan_to_json(const ExecutionPlan& plan) {
  json segments = json::array();
  for (const auto& s : plan.segments) {
    AudioScript single{{s.node}, std::nullopt};
    segments.push_back({{"index", s.index},
                        {"node", json::parse(serialize_script(single))[0]},
                        {"symbolic_len", duration_json(s.symbolic_len)}});
  }
  json spans = json::array();
  for (const auto& s : plan.spans) {
    spans.push_back({{"audio_type", to_string(s.audio_type)},
                     {"id", s.id},
                     {"vol", s.vol},
                     {"desc", s.desc},
                     {"begin_foreground_id", s.begin_foreground_id},
                     {"end_foreground_id", s.end_foreground_id}});
  }
  json steps = json::array();
  for (const auto& step : plan.steps) steps.push_back(step_json(step));
  json root = {{"schema", "audioscript.plan/1"},
               {"output_buffer", plan.output_buffer},
               {"segments", segments},
               {"spans", spans},
               {"steps", steps}};
  return root.dump(2);
}

ExecutionPlan plan_from_json(std::string_view json_text) {
  const json root = json::parse(json_text.begin(), json_text.end());
  ExecutionPlan plan;
  plan.output_buffer = root.at("output_buffer").get<BufferId>();
  for (const auto& s : root.at("segments")) {
    json wrapped = json::array({s.at("node")});
    ForegroundSegment seg;
    seg.index = s.at("index").get<int>();
    seg.node = parse_script(wrapped.dump()).nodes.at(0);
    seg.symbolic_len = duration_from_json(s.at("symbolic_len"));
    plan.segments.push_back(std::move(seg));
  }
  for (const auto& s : root.at("spans")) {
    BackgroundSpan span;
    const std::string type = s.at("audio_type").get<std::string>();
    span.audio_type =
        type == "music" ? AudioType::kMusic : AudioType::kSoundEffect;
    span.id = s.at("id").get<long long>();
    span.vol = s.at("vol").get<double>();
    span.desc = s.at("desc").get<std::string>();
    span.begin_foreground_id = s.at("begin_foreground_id").get<int>();
    span.end_foreground_id = s.at("end_foreground_id").get<int>();
    plan.spans.push_back(std::move(span));
  }
  for (const auto& step : root.at("steps")) {
    plan.steps.push_back(step_from_json(step));
  }
  return plan;
}

}  // namespace audioscript
