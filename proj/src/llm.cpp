#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "clear/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "clear/errors.hpp"
#include "clear/parsing.hpp"
#include "clear/prompts.hpp"

namespace clear {

using json = nlohmann::json;

namespace {

std::string mime_type(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".png") return "image/png";
  if (ext == ".webp") return "image/webp";
  if (ext == ".gif") return "image/gif";
  return "image/jpeg";
}

std::string read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PermanentFailure("cannot read image " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace

std::string base64_encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3) + 1, '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

HttpTransportOptions http_options_from_env() {
  HttpTransportOptions options;
  if (const char* key = std::getenv("CLEAR_LLM_API_KEY"); key && *key) options.api_key = key;
  else throw AuthError("CLEAR_LLM_API_KEY is not set");
  if (const char* endpoint = std::getenv("CLEAR_LLM_ENDPOINT"); endpoint && *endpoint)
    options.endpoint = endpoint;
  return options;
}

std::string chat_request_body(const std::string& model, const std::string& prompt,
                              const std::vector<std::filesystem::path>& images) {
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", prompt}});
  for (const auto& image : images) {
    const std::string url = "data:" + mime_type(image) + ";base64," + base64_encode(read_binary(image));
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
  }
  // Sampling parameters are left at provider defaults.
  json body{{"model", model}, {"messages", json::array({{{"role", "user"}, {"content", content}}})}};
  return body.dump();
}

std::string chat_response_text(const std::string& body) {
  try {
    const json doc = json::parse(body);
    const json& content = doc.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string text;
    for (const auto& part : content)
      if (part.value("type", "") == "text") text += part.value("text", "");
    return text;
  } catch (const json::exception& e) {
    throw TransportError(std::string("unexpected response body: ") + e.what());
  }
}

HttpTransport::HttpTransport(HttpTransportOptions options) : options_(std::move(options)) {}

std::string HttpTransport::send(const std::string& prompt,
                                const std::vector<std::filesystem::path>& images) {
  if (options_.requests_per_minute > 0) {
    const auto gap = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(60.0 / options_.requests_per_minute));
    std::chrono::steady_clock::time_point slot;
    {
      std::lock_guard lock(pace_mutex_);
      slot = std::max(next_slot_, std::chrono::steady_clock::now());
      next_slot_ = slot + gap;
    }
    std::this_thread::sleep_until(slot);
  }
  httplib::Client client(options_.endpoint);
  client.set_read_timeout(options_.timeout_seconds, 0);
  client.set_write_timeout(options_.timeout_seconds, 0);
  client.set_bearer_token_auth(options_.api_key);
  const auto res = client.Post(options_.path, chat_request_body(options_.model, prompt, images),
                               "application/json");
  if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()));
  if (res->status == 401 || res->status == 403)
    throw AuthError("endpoint rejected credentials (HTTP " + std::to_string(res->status) +
                    "); check CLEAR_LLM_API_KEY");
  if (res->status != 200)
    throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 300));
  return chat_response_text(res->body);
}

LlmEvaluator::LlmEvaluator(std::shared_ptr<LlmTransport> transport, std::string region,
                           int retry_limit, int current_year)
    : transport_(std::move(transport)),
      region_(std::move(region)),
      retry_limit_(retry_limit),
      current_year_(current_year) {}

std::string LlmEvaluator::prompt_for(const EvaluationRequest& request) const {
  const std::string& region = request.building.region.empty() ? region_ : request.building.region;
  return prompts::evaluation(request.item, region, render_cue_list(request.genotype));
}

DataEstimate LlmEvaluator::evaluate(const EvaluationRequest& request) {
  const std::string prompt = prompt_for(request);
  const auto& images = request.building.images_for(request.item);
  std::string last_problem;
  bool transport_only = true;
  for (int attempt = 0; attempt <= retry_limit_; ++attempt) {
    std::string reply;
    try {
      ++requests_;
      reply = transport_->send(prompt, images);
    } catch (const TransportError& e) {
      last_problem = e.what();
      continue;
    }
    transport_only = false;
    try {
      return parse_estimate(request.item, extract_delimited(reply), current_year_);
    } catch (const ParseError& e) {
      last_problem = e.what();
    } catch (const ValidationError& e) {
      last_problem = e.what();
    }
  }
  const std::string msg = "building " + request.building.id + ": gave up after " +
                          std::to_string(retry_limit_ + 1) + " attempts: " + last_problem;
  if (transport_only) throw BackendUnavailable(msg);
  throw PermanentFailure(msg);
}

}  // namespace clear
