#pragma once

#include <atomic>
#include <chrono>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "adgen/error.hpp"
#include "adgen/promptgen.hpp"

namespace adgen {

class BackendError : public Error {
 public:
  using Error::Error;
};

// A chat-completion model that accepts interleaved text and images.
// Implementations must be safe to call from several threads.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const PromptBundle& bundle) = 0;
};

struct MockBackendOptions {
  enum class Mode { echo, fixed, fail };
  Mode mode = Mode::echo;
  std::string fixed_text = "A person stands in a room.";
  // mode fail: the first fail_times calls throw, later calls echo.
  int fail_times = 0;
  // Calls for these clips always throw, whatever the mode.
  std::set<std::string> fail_clips;
  std::chrono::milliseconds latency{0};
};

// What the mock saw; enough to audit prompts after a run.
struct RecordedCall {
  std::string clip_id;
  PromptKind kind = PromptKind::one_stage;
  std::string system_text;
  std::string user_text;
  std::vector<int> frame_indices;
};

// Deterministic offline backend.
class MockBackend : public Backend {
 public:
  explicit MockBackend(MockBackendOptions options = {});
  std::string complete(const PromptBundle& bundle) override;

  std::vector<RecordedCall> calls() const;
  int call_count() const { return call_count_.load(); }
  int max_in_flight() const { return max_in_flight_.load(); }

  // First n words of the canned narration, cycling when n exceeds it.
  static std::string canned_words(int n);

 private:
  MockBackendOptions options_;
  mutable std::mutex mutex_;
  std::vector<RecordedCall> calls_;
  std::atomic<int> call_count_{0};
  std::atomic<int> in_flight_{0};
  std::atomic<int> max_in_flight_{0};
};

// Reads N from an "exactly N words" clause, if any.
std::optional<int> requested_word_count_from_text(const std::string& text);

struct HttpBackendOptions {
  std::string endpoint;  // full URL of the chat-completions route
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  // "bearer" -> Authorization: Bearer <key>; "api-key" -> api-key: <key>
  std::string auth_style = "bearer";
  double temperature = 0.0;
  int max_tokens = 300;
  int timeout_s = 120;
};

nlohmann::json build_chat_request(const PromptBundle& bundle,
                                  const HttpBackendOptions& options);
std::string parse_chat_response(const std::string& body);

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendOptions options);
  std::string complete(const PromptBundle& bundle) override;

 private:
  HttpBackendOptions options_;
  std::string scheme_host_port_;
  std::string path_;
  std::string api_key_;
};

}  // namespace adgen
