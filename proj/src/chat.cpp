#include "audioscript/chat.hpp"

#include <json.hpp>
#include <sstream>

#include "audioscript/scriptwriter.hpp"

namespace audioscript {

using nlohmann::json;

std::string build_revision_message(const AudioScript& current,
                                   const std::string& instruction) {
  return "Here is the current audio script:\n" + serialize_script(current) +
         "\n\nRevise the script according to this instruction and output the "
         "complete revised audio script: " +
         instruction;
}

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    // Trailing commas depend on position, not content.
    if (!line.empty() && line.back() == ',') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

std::string diff_scripts(const AudioScript& before, const AudioScript& after) {
  const auto a = lines_of(serialize_script(before));
  const auto b = lines_of(serialize_script(after));
  // Longest common subsequence table, then walk it forwards.
  std::vector<std::vector<int>> lcs(a.size() + 1,
                                    std::vector<int>(b.size() + 1));
  for (std::size_t i = a.size(); i-- > 0;) {
    for (std::size_t j = b.size(); j-- > 0;) {
      lcs[i][j] = a[i] == b[j] ? lcs[i + 1][j + 1] + 1
                               : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }
  std::string out;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() || j < b.size()) {
    if (i < a.size() && j < b.size() && a[i] == b[j]) {
      ++i;
      ++j;
    } else if (j < b.size() &&
               (i == a.size() || lcs[i][j + 1] >= lcs[i + 1][j])) {
      out += "+ " + b[j++] + "\n";
    } else {
      out += "- " + a[i++] + "\n";
    }
  }
  return out;
}

ChatSession::ChatSession(LlmClient& client, std::optional<AudioScript> initial,
                         double temperature)
    : client_(client),
      initial_(initial),
      script_(std::move(initial)),
      temperature_(temperature) {}

const ChatTurn& ChatSession::submit(const std::string& instruction) {
  ChatTurn turn;
  turn.instruction = instruction;
  std::string system_prompt = script_writer_prompt();
  std::string message;
  if (script_) {
    message = build_revision_message(*script_, instruction);
  } else {
    message = build_script_prompt({instruction, std::nullopt, 0, temperature_})
                  .user_message;
  }
  try {
    turn.response = client_.complete(system_prompt, message, temperature_);
    CheckedScript checked = check_llm_output(turn.response);
    turn.report = checked.report;
    if (checked.script) {
      turn.diff = script_ ? diff_scripts(*script_, *checked.script)
                          : diff_scripts(AudioScript{}, *checked.script);
      script_ = std::move(checked.script);
      turn.accepted = true;
    }
  } catch (const LlmError& e) {
    turn.report.errors.push_back({"LlmError", -1, e.what()});
  }
  turns_.push_back(std::move(turn));
  return turns_.back();
}

std::string ChatSession::transcript_json() const {
  json turns = json::array();
  for (const auto& t : turns_) {
    turns.push_back({{"instruction", t.instruction},
                     {"response", t.response},
                     {"accepted", t.accepted},
                     {"report", json::parse(t.report.to_json())},
                     {"diff", t.diff}});
  }
  json root = {{"turns", turns}};
  root["initial_script"] =
      initial_ ? json::parse(serialize_script(*initial_)) : json(nullptr);
  root["final_script"] =
      script_ ? json::parse(serialize_script(*script_)) : json(nullptr);
  return root.dump(2);
}

}  // namespace audioscript
