#ifndef AUDIOSCRIPT_CHAT_HPP_
#define AUDIOSCRIPT_CHAT_HPP_

#include <optional>
#include <string>
#include <vector>

#include "audioscript/llm.hpp"
#include "audioscript/script.hpp"

namespace audioscript {

struct ChatTurn {
  std::string instruction;
  std::string response;
  bool accepted = false;
  ValidationReport report;
  std::string diff;
};

// Multi-round editing: every turn asks the LLM for a whole revised script
// and keeps it only if it passes the same checks as a freshly written one.
class ChatSession {
 public:
  explicit ChatSession(LlmClient& client,
                       std::optional<AudioScript> initial = std::nullopt,
                       double temperature = 0.0);

  const ChatTurn& submit(const std::string& instruction);

  const std::optional<AudioScript>& script() const { return script_; }
  const std::vector<ChatTurn>& turns() const { return turns_; }
  std::string transcript_json() const;

 private:
  LlmClient& client_;
  std::optional<AudioScript> initial_;
  std::optional<AudioScript> script_;
  double temperature_;
  std::vector<ChatTurn> turns_;
};

// User message asking for a full revision of `current`.
std::string build_revision_message(const AudioScript& current,
                                   const std::string& instruction);

// Line diff of two canonical serializations ("- " removed, "+ " added).
std::string diff_scripts(const AudioScript& before, const AudioScript& after);

}  // namespace audioscript

#endif  // AUDIOSCRIPT_CHAT_HPP_
