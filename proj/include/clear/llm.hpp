#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "clear/evaluator.hpp"

namespace clear {

/// Retryable transport problem (timeout, 5xx, malformed envelope).
class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Sends one user message (text plus images) and returns the reply text.
/// Throws TransportError or AuthError.
class LlmTransport {
 public:
  virtual ~LlmTransport() = default;
  virtual std::string send(const std::string& prompt,
                           const std::vector<std::filesystem::path>& images) = 0;
};

struct HttpTransportOptions {
  std::string endpoint = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  std::string model = "gpt-4o";
  std::string api_key;
  double requests_per_minute = 60;
  int timeout_seconds = 120;
};

/// Fills endpoint and key from CLEAR_LLM_ENDPOINT / CLEAR_LLM_API_KEY.
/// Throws AuthError when no key is set.
HttpTransportOptions http_options_from_env();

/// Builds the chat-completion request body with images inlined as base64 data URLs.
std::string chat_request_body(const std::string& model, const std::string& prompt,
                              const std::vector<std::filesystem::path>& images);
/// Pulls choices[0].message.content out of a chat-completion response.
std::string chat_response_text(const std::string& body);
std::string base64_encode(std::string_view bytes);

/// Chat-completion client over HTTP(S). Requests are spaced to respect
/// `requests_per_minute` across threads.
class HttpTransport final : public LlmTransport {
 public:
  explicit HttpTransport(HttpTransportOptions options);
  std::string send(const std::string& prompt,
                   const std::vector<std::filesystem::path>& images) override;

 private:
  HttpTransportOptions options_;
  std::mutex pace_mutex_;
  std::chrono::steady_clock::time_point next_slot_{};
};

/// Evaluates cue sets with a vision model: assembles the item prompt, attaches
/// the building's image subset, extracts the ###-delimited answer and parses it.
/// Each building gets 1 + retry_limit attempts.
class LlmEvaluator final : public Evaluator {
 public:
  LlmEvaluator(std::shared_ptr<LlmTransport> transport, std::string region, int retry_limit,
               int current_year);

  DataEstimate evaluate(const EvaluationRequest& request) override;

  std::string prompt_for(const EvaluationRequest& request) const;
  std::uint64_t requests_sent() const { return requests_.load(); }

 private:
  std::shared_ptr<LlmTransport> transport_;
  std::string region_;
  int retry_limit_;
  int current_year_;
  std::atomic<std::uint64_t> requests_{0};
};

}  // namespace clear
