#include "adgen/backend.hpp"

#include <httplib.h>

#include <cstdlib>
#include <regex>
#include <sstream>
#include <thread>

#include "adgen/hashing.hpp"
#include "adgen/image_io.hpp"

namespace adgen {
namespace {

constexpr const char* kCannedNarration[] = {
    "He",    "turns",  "slowly", "toward", "the",     "window", "as",
    "rain",  "streaks", "the",   "glass",  "and",     "she",    "watches",
    "him",   "from",   "the",    "doorway", "in",     "silence"};
constexpr int kCannedLength = sizeof(kCannedNarration) / sizeof(kCannedNarration[0]);

// Keeps max_in_flight current for the lifetime of one call.
class InFlight {
 public:
  InFlight(std::atomic<int>& in_flight, std::atomic<int>& max_seen) : in_flight_(in_flight) {
    const int now = ++in_flight_;
    int prev = max_seen.load();
    while (now > prev && !max_seen.compare_exchange_weak(prev, now)) {
    }
  }
  ~InFlight() { --in_flight_; }
  InFlight(const InFlight&) = delete;
  InFlight& operator=(const InFlight&) = delete;

 private:
  std::atomic<int>& in_flight_;
};

}  // namespace

std::optional<int> requested_word_count_from_text(const std::string& text) {
  static const std::regex kClause(R"(exactly (\d+) words)");
  std::smatch m;
  if (!std::regex_search(text, m, kClause)) return std::nullopt;
  return std::stoi(m[1].str());
}

MockBackend::MockBackend(MockBackendOptions options) : options_(std::move(options)) {}

std::string MockBackend::canned_words(int n) {
  std::string out;
  for (int i = 0; i < n; ++i) {
    if (i > 0) out.push_back(' ');
    out += kCannedNarration[i % kCannedLength];
  }
  if (!out.empty()) out.push_back('.');
  return out;
}

std::string MockBackend::complete(const PromptBundle& bundle) {
  InFlight guard(in_flight_, max_in_flight_);
  const int call_index = call_count_++;
  {
    RecordedCall rec{bundle.clip_id, bundle.kind, bundle.system_text, bundle.user_text, {}};
    for (const auto& f : bundle.frames) rec.frame_indices.push_back(f.frame_idx);
    std::lock_guard lock(mutex_);
    calls_.push_back(std::move(rec));
  }
  if (options_.latency.count() > 0) std::this_thread::sleep_for(options_.latency);

  if (options_.fail_clips.contains(bundle.clip_id)) {
    throw BackendError("mock backend: clip " + bundle.clip_id + " always fails");
  }
  switch (options_.mode) {
    case MockBackendOptions::Mode::fixed:
      return options_.fixed_text;
    case MockBackendOptions::Mode::fail:
      if (call_index < options_.fail_times) {
        throw BackendError("mock backend: scripted failure " + std::to_string(call_index + 1));
      }
      [[fallthrough]];
    case MockBackendOptions::Mode::echo:
      break;
  }
  const auto n = requested_word_count_from_text(bundle.user_text);
  return canned_words(n.value_or(kCannedLength));
}

std::vector<RecordedCall> MockBackend::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

nlohmann::json build_chat_request(const PromptBundle& bundle, const HttpBackendOptions& options) {
  using nlohmann::json;
  json content = json::array();
  for (const auto& f : bundle.frames) {
    const auto png = encode_png(f.image);
    content.push_back({{"type", "image_url"},
                       {"image_url", {{"url", "data:image/png;base64," + base64_encode(png)}}}});
  }
  content.push_back({{"type", "text"}, {"text", bundle.user_text}});

  json req;
  req["model"] = options.model;
  req["temperature"] = options.temperature;
  req["max_tokens"] = options.max_tokens;
  req["messages"] = json::array({
      {{"role", "system"}, {"content", bundle.system_text}},
      {{"role", "user"}, {"content", content}},
  });
  return req;
}

std::string parse_chat_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw BackendError(std::string("chat response is not JSON: ") + e.what());
  }
  if (j.contains("error")) throw BackendError("chat endpoint error: " + j["error"].dump());
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    if (content.is_string()) return content.get<std::string>();
    std::string text;
    for (const auto& part : content) {
      if (part.value("type", "") == "text") text += part.at("text").get<std::string>();
    }
    return text;
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string("unexpected chat response shape: ") + e.what());
  }
}

HttpBackend::HttpBackend(HttpBackendOptions options) : options_(std::move(options)) {
  static const std::regex kUrl(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch m;
  if (!std::regex_match(options_.endpoint, m, kUrl)) {
    throw BackendError("invalid backend endpoint '" + options_.endpoint + "'");
  }
  scheme_host_port_ = m[1].str();
  path_ = m[2].matched ? m[2].str() : "/";
  if (!options_.api_key_env.empty()) {
    const char* key = std::getenv(options_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw BackendError("environment variable " + options_.api_key_env + " is not set");
    }
    api_key_ = key;
  }
}

std::string HttpBackend::complete(const PromptBundle& bundle) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(options_.timeout_s, 0);
  client.set_read_timeout(options_.timeout_s, 0);
  client.set_write_timeout(options_.timeout_s, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) {
    if (options_.auth_style == "api-key") {
      headers.emplace("api-key", api_key_);
    } else {
      headers.emplace("Authorization", "Bearer " + api_key_);
    }
  }
  const auto body = build_chat_request(bundle, options_).dump();
  auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    throw BackendError("request to " + scheme_host_port_ + " failed: " +
                       httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw BackendError("chat endpoint returned HTTP " + std::to_string(res->status) + ": " +
                       res->body.substr(0, 500));
  }
  return parse_chat_response(res->body);
}

}  // namespace adgen
