#include "audioscript/script.hpp"

#include <gtest/gtest.h>

#include <json.hpp>
#include <random>

#include "support/fixtures.hpp"
#include "support/script_gen.hpp"

namespace audioscript {
namespace {

using testing::fixture_text;

std::vector<std::string> error_codes(const ValidationReport& report) {
  std::vector<std::string> codes;
  for (const auto& d : report.errors) codes.push_back(d.code);
  return codes;
}

std::string parse_error_code(const std::string& raw) {
  try {
    parse_script(raw);
  } catch (const ParseError& e) {
    return e.diagnostic().code;
  }
  return "";
}

// ---------------------------------------------------------------------------
// parse_script
// ---------------------------------------------------------------------------

TEST(ParseScript, ListingFirstNodeIsMusicBackgroundBegin) {
  const AudioScript script = parse_script(fixture_text("listing1_full.json"));
  ASSERT_EQ(script.nodes.size(), 7u);
  const AudioNode& first = script.nodes[0];
  EXPECT_EQ(first.audio_type, AudioType::kMusic);
  EXPECT_EQ(first.layout, Layout::kBackground);
  EXPECT_EQ(first.action, Action::kBegin);
  EXPECT_EQ(first.id, 1);
  EXPECT_EQ(first.vol, -30.0);
  EXPECT_EQ(first.desc, "Dramatic orchestral news theme");
}

TEST(ParseScript, PreservesNodeOrder) {
  const AudioScript script = parse_script(fixture_text("listing1.json"));
  ASSERT_EQ(script.nodes.size(), 6u);
  EXPECT_EQ(script.nodes[1].character, "News Anchor");
  EXPECT_EQ(script.nodes[3].audio_type, AudioType::kSoundEffect);
  EXPECT_EQ(script.nodes[4].character, "Reporter");
  EXPECT_EQ(script.nodes[5].len, 5.0);
}

TEST(ParseScript, EmptyListParsesButFailsValidation) {
  const AudioScript script = parse_script("[]");
  EXPECT_TRUE(script.nodes.empty());
  EXPECT_EQ(error_codes(validate(script)),
            std::vector<std::string>{"NoForeground"});
}

TEST(ParseScript, SpeechBackgroundParsesThenFailsValidation) {
  const AudioScript script = parse_script(
      R"([{"audio_type":"speech","layout":"background","character":"A",)"
      R"("vol":-15,"text":"hi"}])");
  const auto codes = error_codes(validate(script));
  EXPECT_NE(std::find(codes.begin(), codes.end(), "SpeechNotForeground"),
            codes.end());
}

TEST(ParseScript, IntegerAndFloatNumbersNormalize) {
  const AudioScript a = parse_script(
      R"([{"audio_type":"music","layout":"foreground","vol":-20,"len":2,"desc":"x"}])");
  const AudioScript b = parse_script(
      R"([{"audio_type":"music","layout":"foreground","vol":-20.0,"len":2.0,"desc":"x"}])");
  EXPECT_EQ(a.nodes, b.nodes);
}

TEST(ParseScript, ErrorCodes) {
  EXPECT_EQ(parse_error_code("[{"), "MalformedJson");
  EXPECT_EQ(parse_error_code(R"({"audio_type":"music"})"), "NotAList");
  EXPECT_EQ(parse_error_code("[1]"), "NotAnObject");
  EXPECT_EQ(parse_error_code(
                R"([{"audio_type":"child_laughter","layout":"foreground"}])"),
            "UnknownAudioType");
  EXPECT_EQ(parse_error_code(R"([{"layout":"foreground"}])"), "MissingField");
  EXPECT_EQ(parse_error_code(R"([{"audio_type":"music","layout":"sideways"}])"),
            "InvalidFieldValue");
}

TEST(ParseScript, UnknownKeyStrictRejectsLenientWarns) {
  const std::string raw =
      R"([{"audio_type":"sound_effect","layout":"foreground","vol":-20,)"
      R"("len":1,"desc":"door","pitch":3}])";
  EXPECT_EQ(parse_error_code(raw), "UnknownKey");
  const ParseResult lenient = parse_script_detailed(raw, {.lenient = true});
  ASSERT_EQ(lenient.script.nodes.size(), 1u);
  ASSERT_EQ(lenient.warnings.size(), 1u);
  EXPECT_EQ(lenient.warnings[0].code, "UnknownKey");
  EXPECT_EQ(lenient.warnings[0].node_index, 0);
}

// ---------------------------------------------------------------------------
// extract_script
// ---------------------------------------------------------------------------

TEST(ExtractScript, StripsFenceAndProse) {
  const std::string array =
      R"([{"audio_type":"sound_effect","layout":"foreground","vol":-20,"len":1,"desc":"x"}])";
  const std::string wrapped =
      "Here is your script:\n```json\n" + array + "\n```\nI hope you enjoy it.";
  EXPECT_EQ(extract_script(wrapped), array);
}

TEST(ExtractScript, BareArrayIsIdentity) {
  const std::string array = fixture_text("listing1.json");
  const std::string trimmed = array.substr(0, array.find_last_of(']') + 1);
  EXPECT_EQ(extract_script(trimmed), trimmed);
}

TEST(ExtractScript, BracketCommentWithoutArrayFails) {
  EXPECT_THROW(
      extract_script("[Background sound effect: rain falls] The narrator "
                     "speaks softly about the night."),
      ExtractionError);
}

TEST(ExtractScript, SkipsBracketCommentBeforeRealArray) {
  const std::string text =
      "[Background music: calm]\n[{\"audio_type\": \"music\", \"layout\": "
      "\"foreground\", \"vol\": -20, \"len\": 2, \"desc\": \"calm\"}]\nDone.";
  const std::string got = extract_script(text);
  EXPECT_EQ(got.front(), '[');
  EXPECT_EQ(parse_script(got).nodes.size(), 1u);
}

TEST(ExtractScript, BracketsInsideStringsDoNotConfuseMatching) {
  const std::string array =
      R"([{"audio_type":"speech","layout":"foreground","character":"A","vol":-15,"text":"a ] tricky [ line"}])";
  EXPECT_EQ(extract_script("prefix " + array + " suffix"), array);
}

TEST(ExtractScript, ListingWithAssignmentPrefix) {
  const std::string text = fixture_text("listing1_llm_output.txt");
  EXPECT_EQ(parse_script(extract_script(text)),
            parse_script(fixture_text("listing1.json")));
}

// ---------------------------------------------------------------------------
// validate
// ---------------------------------------------------------------------------

TEST(Validate, ListingFixturesHaveNoErrors) {
  for (const char* name : {"listing1.json", "listing1_full.json"}) {
    const ValidationReport report = validate(parse_script(fixture_text(name)));
    EXPECT_TRUE(report.ok()) << name << "\n" << report.to_text();
  }
}

TEST(Validate, LoneBackgroundBegin) {
  const AudioScript script = parse_script(
      R"([{"audio_type":"music","layout":"background","id":1,"action":"begin","vol":-30,"desc":"x"}])");
  auto codes = error_codes(validate(script));
  std::sort(codes.begin(), codes.end());
  EXPECT_EQ(codes,
            (std::vector<std::string>{"NoForeground", "UnbalancedBackground"}));
}

TEST(Validate, MalformedCorpusYieldsExpectedCodes) {
  const auto expected =
      nlohmann::json::parse(fixture_text("malformed_expected.json"));
  ASSERT_EQ(expected.size(), 10u);
  for (const auto& [file, code] : expected.items()) {
    const std::string raw = fixture_text("malformed/" + file);
    std::vector<std::string> codes;
    try {
      codes = error_codes(validate(parse_script(raw)));
    } catch (const ParseError& e) {
      codes = {e.diagnostic().code};
    }
    EXPECT_EQ(codes, std::vector<std::string>{code.get<std::string>()}) << file;
  }
}

TEST(Validate, EndBeforeBeginDuplicateBeginAndMissingEnd) {
  const std::string speech =
      R"({"audio_type":"speech","layout":"foreground","character":"A","vol":-15,"text":"hi"})";
  const std::string begin =
      R"({"audio_type":"music","layout":"background","id":1,"action":"begin","vol":-30,"desc":"x"})";
  const std::string end =
      R"({"audio_type":"music","layout":"background","id":1,"action":"end"})";
  for (const std::string& raw :
       {"[" + end + "," + speech + "," + begin + "," + speech + "," + end + "]",
        "[" + begin + "," + speech + "," + begin + "," + speech + "," + end +
            "]",
        "[" + speech + "," + begin + "," + speech + "]"}) {
    EXPECT_EQ(error_codes(validate(parse_script(raw))),
              std::vector<std::string>{"UnbalancedBackground"})
        << raw;
  }
}

TEST(Validate, IdNamespacesArePerAudioType) {
  const AudioScript script = parse_script(R"([
    {"audio_type":"music","layout":"background","id":1,"action":"begin","vol":-30,"desc":"m"},
    {"audio_type":"sound_effect","layout":"background","id":1,"action":"begin","vol":-30,"desc":"s"},
    {"audio_type":"speech","layout":"foreground","character":"A","vol":-15,"text":"hi"},
    {"audio_type":"music","layout":"background","id":1,"action":"end"},
    {"audio_type":"sound_effect","layout":"background","id":1,"action":"end"}
  ])");
  EXPECT_TRUE(validate(script).ok());
}

TEST(Validate, OverlappingSameTypeIsOnlyAWarning) {
  const AudioScript script = parse_script(R"([
    {"audio_type":"music","layout":"background","id":1,"action":"begin","vol":-30,"desc":"a"},
    {"audio_type":"music","layout":"background","id":2,"action":"begin","vol":-30,"desc":"b"},
    {"audio_type":"speech","layout":"foreground","character":"A","vol":-15,"text":"hi"},
    {"audio_type":"music","layout":"background","id":1,"action":"end"},
    {"audio_type":"music","layout":"background","id":2,"action":"end"}
  ])");
  const ValidationReport report = validate(script);
  EXPECT_TRUE(report.ok());
  ASSERT_FALSE(report.warnings.empty());
  EXPECT_EQ(report.warnings[0].code, "OverlappingBackgroundsSameType");
}

TEST(Validate, VolBounds) {
  auto with_vol = [](double vol) {
    AudioScript s;
    AudioNode n;
    n.audio_type = AudioType::kSoundEffect;
    n.vol = vol;
    n.len = 1.0;
    n.desc = "x";
    s.nodes.push_back(n);
    return validate(s);
  };
  EXPECT_TRUE(with_vol(0.0).ok());
  EXPECT_TRUE(with_vol(-70.0).ok());
  EXPECT_EQ(error_codes(with_vol(0.5)),
            std::vector<std::string>{"VolOutOfRange"});
  EXPECT_EQ(error_codes(with_vol(-70.5)),
            std::vector<std::string>{"VolOutOfRange"});
}

TEST(Validate, SpeechMissingCharacterIsMissingField) {
  const AudioScript script = parse_script(
      R"([{"audio_type":"speech","layout":"foreground","vol":-15,"text":"hi"}])");
  const ValidationReport report = validate(script);
  ASSERT_EQ(report.errors.size(), 1u);
  EXPECT_EQ(report.errors[0].code, "MissingField");
  EXPECT_EQ(report.errors[0].node_index, 0);
}

TEST(Validate, ReportJsonShape) {
  const ValidationReport report = validate(parse_script("[]"));
  const auto j = nlohmann::json::parse(report.to_json());
  ASSERT_TRUE(j.contains("errors"));
  ASSERT_TRUE(j.contains("warnings"));
  EXPECT_EQ(j["errors"][0]["code"], "NoForeground");
}

// ---------------------------------------------------------------------------
// auto_close_backgrounds
// ---------------------------------------------------------------------------

TEST(AutoClose, InsertsEndAfterLastForeground) {
  const AudioScript script = parse_script(R"([
    {"audio_type":"speech","layout":"foreground","character":"A","vol":-15,"text":"one"},
    {"audio_type":"music","layout":"background","id":3,"action":"begin","vol":-30,"desc":"bed"},
    {"audio_type":"speech","layout":"foreground","character":"A","vol":-15,"text":"two"}
  ])");
  EXPECT_FALSE(validate(script).ok());
  const AudioScript closed = auto_close_backgrounds(script);
  EXPECT_TRUE(validate(closed).ok());
  ASSERT_EQ(closed.nodes.size(), 4u);
  EXPECT_EQ(closed.nodes[3].action, Action::kEnd);
  EXPECT_EQ(closed.nodes[3].id, 3);
}

// ---------------------------------------------------------------------------
// serialize_script
// ---------------------------------------------------------------------------

TEST(Serialize, ListingRoundTrip) {
  const AudioScript script = parse_script(fixture_text("listing1_full.json"));
  EXPECT_EQ(parse_script(serialize_script(script)), script);
}

TEST(Serialize, FloatLenIsNormalized) {
  const AudioScript script = parse_script(
      R"([{"audio_type":"music","layout":"foreground","vol":-20,"len":2,"desc":"x"}])");
  EXPECT_NE(serialize_script(script).find("\"len\": 2.0"), std::string::npos);
}

TEST(Serialize, EmptyScript) { EXPECT_EQ(serialize_script({}), "[]"); }

TEST(Serialize, OneNodePerLineStableKeyOrder) {
  const std::string text =
      serialize_script(parse_script(fixture_text("listing1.json")));
  EXPECT_EQ(text.substr(0, 2), "[\n");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 7);
  EXPECT_NE(
      text.find(
          R"({"audio_type": "music", "layout": "background", "id": 1, "action": "begin", "vol": -30, "desc": "Dramatic orchestral news theme"})"),
      std::string::npos);
}

// ---------------------------------------------------------------------------
// Properties
// ---------------------------------------------------------------------------

TEST(ScriptProperties, ParseSerializeIdentityAndPureValidation) {
  std::mt19937 rng(1234);
  for (int i = 0; i < 300; ++i) {
    const AudioScript script = testing::random_valid_script(rng);
    const std::string text = serialize_script(script);
    const AudioScript again = parse_script(text);
    ASSERT_EQ(again, script) << text;
    EXPECT_EQ(serialize_script(again), text);
    const ValidationReport report = validate(script);
    EXPECT_TRUE(report.ok()) << text << "\n" << report.to_text();
    EXPECT_EQ(validate(script).to_json(), report.to_json());
  }
}

}  // namespace
}  // namespace audioscript
