#include "audioscript/llm.hpp"

#include <httplib.h>

#include <cstdlib>
#include <fstream>
#include <json.hpp>
#include <sstream>

namespace audioscript {

using nlohmann::json;

ReplayLlmClient::ReplayLlmClient(
    std::map<std::string, std::vector<std::string>> responses)
    : responses_(std::move(responses)) {}

std::unique_ptr<ReplayLlmClient> ReplayLlmClient::from_json(
    std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text.begin(), json_text.end());
  } catch (const json::parse_error& e) {
    throw LlmError(std::string("replay file is not JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw LlmError("replay file must be an object of instruction -> response");
  }
  std::map<std::string, std::vector<std::string>> responses;
  for (const auto& [key, value] : root.items()) {
    if (value.is_string()) {
      responses[key] = {value.get<std::string>()};
    } else if (value.is_array() && !value.empty()) {
      responses[key] = value.get<std::vector<std::string>>();
    } else {
      throw LlmError("replay entry '" + key +
                     "' must be a string or a nonempty list of strings");
    }
  }
  return std::make_unique<ReplayLlmClient>(std::move(responses));
}

std::unique_ptr<ReplayLlmClient> ReplayLlmClient::from_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LlmError("cannot open replay file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_json(buffer.str());
}

std::string ReplayLlmClient::complete(const std::string& system_prompt,
                                      const std::string& user_message,
                                      double /*temperature*/) {
  std::lock_guard lock(mutex_);
  calls_.push_back({system_prompt, user_message});
  auto hit = responses_.find(user_message);
  if (hit == responses_.end()) {
    std::size_t best = 0;
    for (auto it = responses_.begin(); it != responses_.end(); ++it) {
      if (it->first.size() > best &&
          user_message.find(it->first) != std::string::npos) {
        best = it->first.size();
        hit = it;
      }
    }
  }
  if (hit == responses_.end()) {
    throw LlmError("no replay response for message: " +
                   user_message.substr(0, 80));
  }
  std::size_t& cursor = cursor_[hit->first];
  const auto& list = hit->second;
  const std::string& response = list[std::min(cursor, list.size() - 1)];
  ++cursor;
  return response;
}

std::vector<ReplayLlmClient::Call> ReplayLlmClient::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

HttpLlmConfig http_llm_config_from_env() {
  auto env = [](const char* name, const char* fallback) {
    const char* v = std::getenv(name);
    return std::string(v != nullptr ? v : fallback);
  };
  HttpLlmConfig config;
  config.base_url =
      env("AUDIOSCRIPT_LLM_BASE_URL", "https://api.openai.com/v1");
  config.model = env("AUDIOSCRIPT_LLM_MODEL", "gpt-4");
  config.api_key = env("AUDIOSCRIPT_LLM_API_KEY", "");
  return config;
}

HttpLlmClient::HttpLlmClient(HttpLlmConfig config)
    : config_(std::move(config)) {}

std::string HttpLlmClient::complete(const std::string& system_prompt,
                                    const std::string& user_message,
                                    double temperature) {
  const auto scheme_end = config_.base_url.find("://");
  const std::size_t host_start =
      scheme_end == std::string::npos ? 0 : scheme_end + 3;
  const auto path_start = config_.base_url.find('/', host_start);
  const std::string origin = config_.base_url.substr(0, path_start);
  std::string path = path_start == std::string::npos
                         ? std::string()
                         : config_.base_url.substr(path_start);
  if (!path.empty() && path.back() == '/') path.pop_back();
  path += "/chat/completions";

  httplib::Client client(origin);
  if (!client.is_valid()) {
    throw LlmError("unsupported LLM endpoint " + config_.base_url);
  }
  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(config_.timeout_seconds));
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const json body = {
      {"model", config_.model},
      {"temperature", temperature},
      {"messages",
       json::array({{{"role", "system"}, {"content", system_prompt}},
                    {{"role", "user"}, {"content", user_message}}})}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) {
    throw LlmError("LLM request failed: " + httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw LlmError("LLM endpoint returned HTTP " + std::to_string(res->status));
  }
  const json reply = json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) throw LlmError("LLM reply is not JSON");
  try {
    return reply.at("choices")
        .at(0)
        .at("message")
        .at("content")
        .get<std::string>();
  } catch (const json::exception& e) {
    throw LlmError(std::string("unexpected LLM reply shape: ") + e.what());
  }
}

}  // namespace audioscript
