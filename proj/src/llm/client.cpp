#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "faasim/llm/client.hpp"
#include "faasim/policy/lang.hpp"

namespace faasim::llm {

using nlohmann::json;

std::int64_t estimate_tokens(std::string_view text) {
  return (static_cast<std::int64_t>(text.size()) + 3) / 4;
}

double estimate_cost(std::int64_t tokens_in, std::int64_t tokens_out, const PriceTable& prices) {
  return static_cast<double>(tokens_in) / 1e6 * prices.usd_per_mtok_in +
         static_cast<double>(tokens_out) / 1e6 * prices.usd_per_mtok_out;
}

const char* to_string(ProviderErrorKind k) {
  switch (k) {
    case ProviderErrorKind::auth: return "auth";
    case ProviderErrorKind::timeout: return "timeout";
    case ProviderErrorKind::rate_limit: return "rate_limit";
    case ProviderErrorKind::malformed_response: return "malformed_response";
  }
  return "?";
}

namespace {

const char* role_name(ChatRole role) {
  switch (role) {
    case ChatRole::system: return "system";
    case ChatRole::user: return "user";
    case ChatRole::assistant: return "assistant";
  }
  return "user";
}

std::int64_t estimate_input_tokens(const std::vector<ChatMessage>& messages) {
  std::int64_t total = 0;
  for (const auto& message : messages) total += estimate_tokens(message.content);
  return total;
}

struct ParsedUrl {
  bool https = false;
  std::string host_port;  // host[:port]
  std::string path;
};

ParsedUrl parse_url(const std::string& url) {
  ParsedUrl out;
  std::string rest;
  if (url.rfind("https://", 0) == 0) {
    out.https = true;
    rest = url.substr(8);
  } else if (url.rfind("http://", 0) == 0) {
    rest = url.substr(7);
  } else {
    throw ProviderError(ProviderErrorKind::malformed_response,
                        "endpoint must start with http:// or https://: " + url);
  }
  const auto slash = rest.find('/');
  if (slash == std::string::npos) {
    out.host_port = rest;
    out.path = "/";
  } else {
    out.host_port = rest.substr(0, slash);
    out.path = rest.substr(slash);
  }
  return out;
}

}  // namespace

HttpChatProvider::HttpChatProvider(ProviderConfig config) : config_(std::move(config)) {}

CompletionResult HttpChatProvider::complete(const std::vector<ChatMessage>& messages,
                                            const GenerationParams& params) {
  if (config_.api_key_env_var.empty()) {
    throw ProviderError(ProviderErrorKind::auth, "api_key_env_var is not configured");
  }
  const char* key = std::getenv(config_.api_key_env_var.c_str());
  if (key == nullptr || *key == '\0') {
    throw ProviderError(ProviderErrorKind::auth,
                        "environment variable " + config_.api_key_env_var + " is not set");
  }

  json body;
  body["model"] = params.model.empty() ? config_.model : params.model;
  json jmessages = json::array();
  for (const auto& message : messages) {
    jmessages.push_back(json{{"role", role_name(message.role)}, {"content", message.content}});
  }
  body["messages"] = std::move(jmessages);
  if (params.temperature) body["temperature"] = *params.temperature;
  if (params.reasoning_effort) body["reasoning_effort"] = *params.reasoning_effort;
  const std::string payload = body.dump();

  const ParsedUrl url = parse_url(config_.endpoint);
  const std::string scheme_host = (url.https ? "https://" : "http://") + url.host_port;
  httplib::Client client(scheme_host);
  client.set_connection_timeout(std::chrono::milliseconds(
      static_cast<int>(config_.timeout_seconds * 1000)));
  client.set_read_timeout(
      std::chrono::milliseconds(static_cast<int>(config_.timeout_seconds * 1000)));
  client.set_bearer_token_auth(key);

  // Jitter only randomizes sleep lengths; it never affects results.
  std::mt19937 jitter_rng(0x5eedu);
  std::uniform_real_distribution<double> jitter(0.8, 1.2);

  const auto started = std::chrono::steady_clock::now();
  std::optional<ProviderError> last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      const double delay =
          config_.retry_base_seconds * std::pow(2.0, attempt - 1) * jitter(jitter_rng);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    httplib::Result response = client.Post(url.path, payload, "application/json");
    if (!response) {
      last_error = ProviderError(ProviderErrorKind::timeout,
                                 "request failed: " + httplib::to_string(response.error()));
      continue;  // transient: connection error or timeout
    }
    if (response->status == 429) {
      last_error = ProviderError(ProviderErrorKind::rate_limit, "rate limited (HTTP 429)");
      continue;
    }
    if (response->status >= 500) {
      last_error = ProviderError(ProviderErrorKind::malformed_response,
                                 "server error (HTTP " + std::to_string(response->status) + ")");
      continue;
    }
    if (response->status == 401 || response->status == 403) {
      throw ProviderError(ProviderErrorKind::auth,
                          "authentication rejected (HTTP " + std::to_string(response->status) +
                              ")");
    }
    if (response->status != 200) {
      throw ProviderError(ProviderErrorKind::malformed_response,
                          "unexpected HTTP " + std::to_string(response->status) + ": " +
                              response->body);
    }

    const json parsed = json::parse(response->body, nullptr, false);
    if (parsed.is_discarded() || !parsed.contains("choices") || !parsed["choices"].is_array() ||
        parsed["choices"].empty() || !parsed["choices"][0].contains("message")) {
      throw ProviderError(ProviderErrorKind::malformed_response,
                          "response body is not a chat completion");
    }
    CompletionResult result;
    try {
      result.text = parsed["choices"][0]["message"].at("content").get<std::string>();
    } catch (const json::exception&) {
      throw ProviderError(ProviderErrorKind::malformed_response, "missing message content");
    }
    if (parsed.contains("usage") && parsed["usage"].contains("prompt_tokens") &&
        parsed["usage"].contains("completion_tokens")) {
      result.tokens_in = parsed["usage"]["prompt_tokens"].get<std::int64_t>();
      result.tokens_out = parsed["usage"]["completion_tokens"].get<std::int64_t>();
    } else {
      result.tokens_in = estimate_input_tokens(messages);
      result.tokens_out = estimate_tokens(result.text);
      result.usage_estimated = true;
    }
    result.cost_usd = estimate_cost(result.tokens_in, result.tokens_out, config_.price_table);
    result.latency_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return result;
  }
  throw last_error.value_or(
      ProviderError(ProviderErrorKind::timeout, "retries exhausted with no response"));
}

ScriptedProvider::ScriptedProvider(ProviderConfig config) : config_(std::move(config)) {}

CompletionResult ScriptedProvider::complete(const std::vector<ChatMessage>& messages,
                                            const GenerationParams& params) {
  (void)params;
  char name[32];
  std::snprintf(name, sizeof(name), "response_%03d.txt", next_index_);
  const std::filesystem::path path = std::filesystem::path(config_.script_dir) / name;
  std::ifstream in(path);
  if (!in) {
    throw ScriptExhausted("no scripted response " + std::string(name) + " in " +
                          config_.script_dir);
  }
  std::ostringstream text;
  text << in.rdbuf();
  ++next_index_;

  CompletionResult result;
  result.text = text.str();
  result.tokens_in = estimate_input_tokens(messages);
  result.tokens_out = estimate_tokens(result.text);
  result.usage_estimated = true;
  result.cost_usd = estimate_cost(result.tokens_in, result.tokens_out, config_.price_table);
  result.latency_seconds = 0.0;
  return result;
}

std::unique_ptr<Provider> make_provider(ProviderConfig config) {
  if (config.kind == ProviderKind::http_chat) {
    return std::make_unique<HttpChatProvider>(std::move(config));
  }
  return std::make_unique<ScriptedProvider>(std::move(config));
}

std::variant<std::string, ExtractionError> extract_code_block(const std::string& response_text) {
  const std::string fence = "```";
  auto open = response_text.find(fence);
  if (open != std::string::npos) {
    auto line_end = response_text.find('\n', open);
    if (line_end == std::string::npos) {
      return ExtractionError{"opening code fence is never followed by content",
                             "wrap the policy in a fenced code block"};
    }
    auto close = response_text.find(fence, line_end + 1);
    if (close == std::string::npos) {
      return ExtractionError{"code fence is never closed",
                             "wrap the policy in a fenced code block"};
    }
    return response_text.substr(line_end + 1, close - line_end - 1);
  }
  // No fence: accept the raw text only if it already parses as a policy.
  if (std::holds_alternative<policy::PolicyProgram>(policy::parse(response_text))) {
    return response_text;
  }
  return ExtractionError{"no fenced code block found",
                         "wrap the policy in a fenced code block"};
}

}  // namespace faasim::llm
