#ifndef AUDIOSCRIPT_SCRIPTWRITER_HPP_
#define AUDIOSCRIPT_SCRIPTWRITER_HPP_

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "audioscript/llm.hpp"
#include "audioscript/script.hpp"

namespace audioscript {

struct WriteRequest {
  std::string instruction;
  std::optional<double> duration_hint;  // seconds
  int max_retries = 2;
  double temperature = 0.0;
};

struct ScriptPrompt {
  std::string system_prompt;
  std::string user_message;
};

// The fixed script-writer system prompt.
const std::string& script_writer_prompt();

// Appends "the duration of generated audio must be N seconds." when a
// duration hint is set. Throws std::invalid_argument on empty instruction.
ScriptPrompt build_script_prompt(const WriteRequest& request);

struct AttemptRecord {
  std::string user_message;
  std::string response;
  ValidationReport report;
};

struct WriteResult {
  AudioScript script;
  int attempts = 0;
  std::vector<AttemptRecord> history;
};

class ScriptWritingFailed : public std::runtime_error {
 public:
  ScriptWritingFailed(const std::string& message, ValidationReport last,
                      int attempts)
      : std::runtime_error(message),
        last_report_(std::move(last)),
        attempts_(attempts) {}
  const ValidationReport& last_report() const { return last_report_; }
  int attempts() const { return attempts_; }

 private:
  ValidationReport last_report_;
  int attempts_;
};

// Full check an LLM response must pass: extract, parse, validate, and
// compile with a deterministic cast (presets reused if the cast is large).
// Never throws; problems are returned as a report.
struct CheckedScript {
  std::optional<AudioScript> script;
  ValidationReport report;
};
CheckedScript check_llm_output(const std::string& response);

// Asks for a script up to 1 + max_retries times. After a failure the next
// request carries the failure report as corrective feedback.
WriteResult write_script(const WriteRequest& request, LlmClient& client);

struct CsrResult {
  int success_count = 0;
  int total = 0;
  double rate = 0.0;
  std::vector<bool> per_item;
};

// Single-shot compilation success rate over a batch of instructions.
CsrResult batch_csr(const std::vector<std::string>& instructions,
                    LlmClient& client, int jobs = 1);

}  // namespace audioscript

#endif  // AUDIOSCRIPT_SCRIPTWRITER_HPP_
