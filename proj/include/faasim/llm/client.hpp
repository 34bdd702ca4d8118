#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace faasim::llm {

// ceil(characters / 4); the shared token estimate for budgets and costs.
std::int64_t estimate_tokens(std::string_view text);

enum class ProviderKind { http_chat, scripted };

struct PriceTable {
  double usd_per_mtok_in = 0.0;
  double usd_per_mtok_out = 0.0;
};

double estimate_cost(std::int64_t tokens_in, std::int64_t tokens_out, const PriceTable& prices);

struct ProviderConfig {
  ProviderKind kind = ProviderKind::scripted;
  std::string endpoint;         // http_chat: full chat-completions URL
  std::string api_key_env_var;  // http_chat: env var holding the key; never the key itself
  std::string model;
  double timeout_seconds = 60.0;
  int max_retries = 3;
  double retry_base_seconds = 1.0;  // exponential backoff base
  PriceTable price_table;
  std::string script_dir;  // scripted: directory of response_NNN.txt files
};

enum class ChatRole { system, user, assistant };

struct ChatMessage {
  ChatRole role = ChatRole::user;
  std::string content;
};

struct GenerationParams {
  std::string model;  // overrides ProviderConfig.model when non-empty
  std::optional<double> temperature;
  std::optional<std::string> reasoning_effort;  // passed through opaquely
};

struct CompletionResult {
  std::string text;
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  double cost_usd = 0.0;
  double latency_seconds = 0.0;
  bool usage_estimated = false;  // true when the provider reported no usage
};

enum class ProviderErrorKind { auth, timeout, rate_limit, malformed_response };

const char* to_string(ProviderErrorKind k);

class ProviderError : public std::runtime_error {
 public:
  ProviderError(ProviderErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind(kind) {}

  ProviderErrorKind kind;
};

class ScriptExhausted : public std::runtime_error {
 public:
  explicit ScriptExhausted(const std::string& msg) : std::runtime_error(msg) {}
};

class Provider {
 public:
  virtual ~Provider() = default;

  virtual CompletionResult complete(const std::vector<ChatMessage>& messages,
                                    const GenerationParams& params) = 0;
};

// OpenAI-compatible chat-completions client with exponential-backoff
// retries on timeouts, 429s, and 5xx responses.
class HttpChatProvider final : public Provider {
 public:
  explicit HttpChatProvider(ProviderConfig config);

  CompletionResult complete(const std::vector<ChatMessage>& messages,
                            const GenerationParams& params) override;

 private:
  ProviderConfig config_;
};

// Replays response_001.txt, response_002.txt, ... from a directory;
// deterministic stand-in for offline tests.
class ScriptedProvider final : public Provider {
 public:
  explicit ScriptedProvider(ProviderConfig config);

  CompletionResult complete(const std::vector<ChatMessage>& messages,
                            const GenerationParams& params) override;

  int calls_made() const { return next_index_ - 1; }

 private:
  ProviderConfig config_;
  int next_index_ = 1;
};

std::unique_ptr<Provider> make_provider(ProviderConfig config);

struct ExtractionError {
  std::string message;
  std::string hint;
};

// First fenced code block; or the whole text when it parses as a policy.
std::variant<std::string, ExtractionError> extract_code_block(const std::string& response_text);

}  // namespace faasim::llm
