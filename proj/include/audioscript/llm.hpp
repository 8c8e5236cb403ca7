#ifndef AUDIOSCRIPT_LLM_HPP_
#define AUDIOSCRIPT_LLM_HPP_

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace audioscript {

class LlmError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Pass-through completion interface. Retry policy lives in the callers.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string complete(const std::string& system_prompt,
                               const std::string& user_message,
                               double temperature) = 0;
};

// Serves canned responses from a JSON object {instruction: response}. A
// response may also be an array, consumed one element per call and then
// repeating the last. Lookup is by exact user message first, then by the
// longest key contained in the message, so suffixes and feedback still hit.
class ReplayLlmClient : public LlmClient {
 public:
  struct Call {
    std::string system_prompt;
    std::string user_message;
  };

  explicit ReplayLlmClient(
      std::map<std::string, std::vector<std::string>> responses);
  static std::unique_ptr<ReplayLlmClient> from_json(std::string_view json_text);
  static std::unique_ptr<ReplayLlmClient> from_file(
      const std::filesystem::path& path);

  std::string complete(const std::string& system_prompt,
                       const std::string& user_message,
                       double temperature) override;

  std::vector<Call> calls() const;

 private:
  std::map<std::string, std::vector<std::string>> responses_;
  std::map<std::string, std::size_t> cursor_;
  std::vector<Call> calls_;
  mutable std::mutex mutex_;
};

struct HttpLlmConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;
  std::string api_key;
  double timeout_seconds = 120.0;
};

// Reads AUDIOSCRIPT_LLM_BASE_URL, AUDIOSCRIPT_LLM_MODEL and
// AUDIOSCRIPT_LLM_API_KEY. The key is only ever taken from the environment.
HttpLlmConfig http_llm_config_from_env();

// Chat-completion style endpoint: POST {base_url}/chat/completions.
class HttpLlmClient : public LlmClient {
 public:
  explicit HttpLlmClient(HttpLlmConfig config);
  std::string complete(const std::string& system_prompt,
                       const std::string& user_message,
                       double temperature) override;

 private:
  HttpLlmConfig config_;
};

}  // namespace audioscript

#endif  // AUDIOSCRIPT_LLM_HPP_
