#include "adgen/config.hpp"

#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "text_util.hpp"

namespace adgen {

namespace fs = std::filesystem;

namespace {

// TOML-ish scalar: quoted string, or bare word with an optional trailing comment.
std::string unquote(std::string_view raw) {
  auto v = trim(raw);
  if (v.size() >= 2 && (v.front() == '"' || v.front() == '\'')) {
    const auto close = v.find(v.front(), 1);
    if (close == std::string_view::npos) throw ConfigError("unterminated string: " + std::string(raw));
    return std::string(v.substr(1, close - 1));
  }
  if (const auto hash = v.find(" #"); hash != std::string_view::npos) v = trim(v.substr(0, hash));
  return std::string(v);
}

std::vector<std::string> parse_list(const std::string& key, std::string_view raw) {
  auto v = trim(raw);
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') {
    throw ConfigError(key + ": expected a list like [\"a\", \"b\"]");
  }
  std::vector<std::string> out;
  std::stringstream items{std::string(v.substr(1, v.size() - 2))};
  for (std::string item; std::getline(items, item, ',');) {
    if (!trim(item).empty()) out.push_back(unquote(item));
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const int out = std::stoi(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected an integer, got '" + v + "'");
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double out = std::stod(v, &used);
    if (used == v.size()) return out;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + v + "'");
}

Rgb to_color(const std::string& key, const std::string& v) {
  auto channel = [&](int x) {
    if (x < 0 || x > 255) throw ConfigError(key + ": channel out of range");
    return static_cast<std::uint8_t>(x);
  };
  if (v.size() == 7 && v[0] == '#') {
    try {
      const auto rgb = std::stoul(v.substr(1), nullptr, 16);
      return {channel(static_cast<int>(rgb >> 16 & 0xff)), channel(static_cast<int>(rgb >> 8 & 0xff)),
              channel(static_cast<int>(rgb & 0xff))};
    } catch (const std::invalid_argument&) {
    }
  }
  std::vector<int> parts;
  std::stringstream ss(v);
  for (std::string p; std::getline(ss, p, ',');) parts.push_back(to_int(key, std::string(trim(p))));
  if (parts.size() != 3) throw ConfigError(key + ": expected '#rrggbb' or 'r,g,b'");
  return {channel(parts[0]), channel(parts[1]), channel(parts[2])};
}

template <typename F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const PreconditionError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

using Setter = std::function<void(RunConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"paths.frames_root", [](auto& c, auto&, auto& v) { c.frames_root = v; }},
      {"paths.clips", [](auto& c, auto&, auto& v) { c.clips = v; }},
      {"paths.detections", [](auto& c, auto&, auto& v) { c.detections = v; }},
      {"paths.gallery", [](auto& c, auto&, auto& v) { c.gallery = v; }},
      {"paths.subtitles", [](auto& c, auto&, auto& v) { c.subtitles = v; }},
      {"paths.cast", [](auto& c, auto&, auto& v) { c.cast = v; }},
      {"paths.ground_truth", [](auto& c, auto&, auto& v) { c.ground_truth = v; }},
      {"paths.boundaries_dir", [](auto& c, auto&, auto& v) { c.boundaries_dir = v; }},
      {"paths.output_dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
      {"paths.cache_dir", [](auto& c, auto&, auto& v) { c.cache_dir = v; }},
      {"paths.template", [](auto& c, auto&, auto& v) { c.template_path = v; }},
      {"paths.dump_annotated", [](auto& c, auto&, auto& v) { c.dump_annotated = v; }},
      {"movie.title", [](auto& c, auto&, auto& v) { c.movie_title = v; }},
      {"overlay.mode",
       [](auto& c, auto& k, auto& v) { c.overlay.mode = wrap(k, [&] { return parse_overlay_mode(v); }); }},
      {"overlay.color", [](auto& c, auto& k, auto& v) { c.overlay.box_color = to_color(k, v); }},
      {"overlay.thickness", [](auto& c, auto& k, auto& v) { c.overlay.box_thickness = to_int(k, v); }},
      {"overlay.label_scale", [](auto& c, auto& k, auto& v) { c.overlay.label_scale = to_int(k, v); }},
      {"context.T", [](auto& c, auto& k, auto& v) { c.context_T = to_int(k, v); }},
      {"context.context_ad", [](auto& c, auto& k, auto& v) { c.context_ad = to_bool(k, v); }},
      {"context.prev_ad_limit", [](auto& c, auto& k, auto& v) { c.context_ad_limit = to_int(k, v); }},
      {"faceid.K", [](auto& c, auto& k, auto& v) { c.exemplars.k = to_int(k, v); }},
      {"faceid.max_exemplar_distance",
       [](auto& c, auto& k, auto& v) { c.exemplars.max_distance = to_double(k, v); }},
      {"faceid.movie_level_mining", [](auto& c, auto& k, auto& v) { c.movie_level_mining = to_bool(k, v); }},
      {"faceid.frame_level_only", [](auto& c, auto& k, auto& v) { c.frame_level_only = to_bool(k, v); }},
      {"faceid.tau", [](auto& c, auto& k, auto& v) { c.tau = to_double(k, v); }},
      {"tracker.iou_min", [](auto& c, auto& k, auto& v) { c.tracker.iou_min = to_double(k, v); }},
      {"tracker.max_coast", [](auto& c, auto& k, auto& v) { c.tracker.max_coast = to_int(k, v); }},
      {"tracker.min_len", [](auto& c, auto& k, auto& v) { c.tracker.min_len = to_int(k, v); }},
      {"tracker.min_conf", [](auto& c, auto& k, auto& v) { c.tracker.min_conf = to_double(k, v); }},
      {"shots.min_shot_len", [](auto& c, auto& k, auto& v) { c.shots.min_shot_len = to_int(k, v); }},
      {"shots.k_sigma", [](auto& c, auto& k, auto& v) { c.shots.k_sigma = to_double(k, v); }},
      {"shots.absolute_floor", [](auto& c, auto& k, auto& v) { c.shots.absolute_floor = to_double(k, v); }},
      {"prompt.num_frames", [](auto& c, auto& k, auto& v) { c.num_frames = to_int(k, v); }},
      {"prompt.length_policy",
       [](auto& c, auto& k, auto& v) { c.policy = wrap(k, [&] { return parse_length_policy(v); }); }},
      {"prompt.ad_style", [](auto& c, auto& k, auto& v) { c.ad_style = to_bool(k, v); }},
      {"prompt.mode",
       [](auto& c, auto& k, auto& v) { c.mode = wrap(k, [&] { return parse_generation_mode(v); }); }},
      {"backend.kind", [](auto& c, auto&, auto& v) { c.backend.kind = v; }},
      {"backend.concurrency", [](auto& c, auto& k, auto& v) { c.concurrency = to_int(k, v); }},
      {"backend.max_retries", [](auto& c, auto& k, auto& v) { c.retry.max_retries = to_int(k, v); }},
      {"backend.retry_base_ms",
       [](auto& c, auto& k, auto& v) { c.retry.base_delay = std::chrono::milliseconds(to_int(k, v)); }},
      {"backend.endpoint", [](auto& c, auto&, auto& v) { c.backend.http.endpoint = v; }},
      {"backend.model", [](auto& c, auto&, auto& v) { c.backend.http.model = v; }},
      {"backend.api_key_env", [](auto& c, auto&, auto& v) { c.backend.http.api_key_env = v; }},
      {"backend.auth_style", [](auto& c, auto&, auto& v) { c.backend.http.auth_style = v; }},
      {"backend.temperature", [](auto& c, auto& k, auto& v) { c.backend.http.temperature = to_double(k, v); }},
      {"backend.max_tokens", [](auto& c, auto& k, auto& v) { c.backend.http.max_tokens = to_int(k, v); }},
      {"backend.timeout_s", [](auto& c, auto& k, auto& v) { c.backend.http.timeout_s = to_int(k, v); }},
      {"backend.mock_mode",
       [](auto& c, auto& k, auto& v) {
         using M = MockBackendOptions::Mode;
         if (v == "echo") c.backend.mock.mode = M::echo;
         else if (v == "fixed") c.backend.mock.mode = M::fixed;
         else if (v == "fail") c.backend.mock.mode = M::fail;
         else throw ConfigError(k + ": expected echo, fixed or fail");
       }},
      {"backend.mock_text", [](auto& c, auto&, auto& v) { c.backend.mock.fixed_text = v; }},
      {"backend.mock_fail_times", [](auto& c, auto& k, auto& v) { c.backend.mock.fail_times = to_int(k, v); }},
      {"backend.mock_latency_ms",
       [](auto& c, auto& k, auto& v) { c.backend.mock.latency = std::chrono::milliseconds(to_int(k, v)); }},
  };
  return table;
}

std::string mock_mode_name(MockBackendOptions::Mode m) {
  switch (m) {
    case MockBackendOptions::Mode::echo: return "echo";
    case MockBackendOptions::Mode::fixed: return "fixed";
    case MockBackendOptions::Mode::fail: return "fail";
  }
  return "echo";
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  if (key == "backend.mock_fail_clips") {
    const auto items = trim(value).starts_with("[") ? parse_list(key, value) : std::vector{unquote(value)};
    config.backend.mock.fail_clips = {items.begin(), items.end()};
    return;
  }
  const auto it = setters().find(key);
  if (it == setters().end()) throw ConfigError("unknown setting '" + key + "'");
  it->second(config, key, unquote(value));
}

RunConfig load_run_config(const fs::path& path) {
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::ini_parser::read_ini(path.string(), tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError(e.what());
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty()) throw ConfigError(path.string() + ": setting '" + section + "' outside a section");
    for (const auto& [key, node] : body) {
      apply_setting(config, section + "." + key, node.data());
    }
  }
  // Relative paths are taken from the config file's directory.
  const auto base = fs::absolute(path).parent_path();
  for (fs::path* p : {&config.frames_root, &config.clips, &config.detections, &config.gallery,
                      &config.subtitles, &config.cast, &config.ground_truth, &config.boundaries_dir,
                      &config.output_dir, &config.cache_dir, &config.template_path,
                      &config.dump_annotated}) {
    if (!p->empty() && p->is_relative()) *p = base / *p;
  }
  return config;
}

void validate(const RunConfig& c, ConfigUse use) {
  std::vector<std::string> problems;
  auto need_file = [&](const fs::path& p, const char* name) {
    if (p.empty()) problems.push_back(std::string(name) + " is not set");
    else if (!fs::exists(p)) problems.push_back(std::string(name) + " does not exist: " + p.string());
  };
  auto maybe_file = [&](const fs::path& p, const char* name) {
    if (!p.empty() && !fs::exists(p)) problems.push_back(std::string(name) + " does not exist: " + p.string());
  };
  auto check = [&](bool ok, const char* what) {
    if (!ok) problems.emplace_back(what);
  };

  if (use == ConfigUse::eval) {
    need_file(c.ground_truth, "paths.ground_truth");
    need_file(c.cast, "paths.cast");
  } else {
    need_file(c.frames_root, "paths.frames_root");
    need_file(c.clips, "paths.clips");
    need_file(c.detections, "paths.detections");
    need_file(c.gallery, "paths.gallery");
    need_file(c.cast, "paths.cast");
    maybe_file(c.boundaries_dir, "paths.boundaries_dir");
    if (use != ConfigUse::annotate && c.output_dir.empty()) problems.emplace_back("paths.output_dir is not set");
  }
  if (use == ConfigUse::generate) {
    maybe_file(c.subtitles, "paths.subtitles");
    maybe_file(c.template_path, "paths.template");
    if (c.policy.kind == LengthPolicy::Kind::gt_length) need_file(c.ground_truth, "paths.ground_truth");
    else maybe_file(c.ground_truth, "paths.ground_truth");
  }

  check(c.num_frames >= 1 && c.num_frames <= static_cast<int>(kMaxPromptFrames),
        "prompt.num_frames must be in [1, 10]");
  check(c.context_T >= 0, "context.T must be >= 0");
  check(c.context_ad_limit >= -1, "context.prev_ad_limit must be >= 0 (or -1 for T)");
  check(c.exemplars.k >= 0, "faceid.K must be >= 0");
  check(!c.exemplars.max_distance || (*c.exemplars.max_distance >= 0.0 && *c.exemplars.max_distance <= 2.0),
        "faceid.max_exemplar_distance must be in [0, 2]");
  check(c.tau >= 0.0 && c.tau <= 2.0, "faceid.tau must be in [0, 2]");
  check(c.tracker.iou_min > 0.0 && c.tracker.iou_min <= 1.0, "tracker.iou_min must be in (0, 1]");
  check(c.tracker.max_coast >= 0, "tracker.max_coast must be >= 0");
  check(c.tracker.min_len >= 1, "tracker.min_len must be >= 1");
  check(c.tracker.min_conf >= 0.0 && c.tracker.min_conf <= 1.0, "tracker.min_conf must be in [0, 1]");
  check(c.shots.min_shot_len >= 1, "shots.min_shot_len must be >= 1");
  check(c.shots.k_sigma >= 0.0, "shots.k_sigma must be >= 0");
  check(c.shots.absolute_floor >= 0.0 && c.shots.absolute_floor <= 1.0,
        "shots.absolute_floor must be in [0, 1]");
  check(c.overlay.box_thickness >= 1, "overlay.thickness must be >= 1");
  check(c.overlay.label_scale >= 1, "overlay.label_scale must be >= 1");
  check(c.policy.kind != LengthPolicy::Kind::fixed || c.policy.n >= 1, "prompt.length_policy: N must be >= 1");
  check(c.concurrency >= 1, "backend.concurrency must be >= 1");
  check(c.retry.max_retries >= 0, "backend.max_retries must be >= 0");
  check(c.retry.base_delay.count() >= 0, "backend.retry_base_ms must be >= 0");

  if (c.backend.kind == "http") {
    if (use == ConfigUse::generate) {
      check(!c.backend.http.endpoint.empty(), "backend.endpoint is not set");
      check(!c.backend.http.model.empty(), "backend.model is not set");
      check(c.backend.http.auth_style == "bearer" || c.backend.http.auth_style == "api-key",
            "backend.auth_style must be bearer or api-key");
      const char* key = std::getenv(c.backend.http.api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        problems.push_back("environment variable " + c.backend.http.api_key_env + " is not set");
      }
    }
  } else if (c.backend.kind != "mock") {
    problems.push_back("backend.kind must be mock or http, got '" + c.backend.kind + "'");
  }

  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ConfigError(msg);
  }
}

nlohmann::json to_json(const RunConfig& c) {
  nlohmann::json j;
  j["paths"] = {{"frames_root", c.frames_root.string()},   {"clips", c.clips.string()},
                {"detections", c.detections.string()},     {"gallery", c.gallery.string()},
                {"subtitles", c.subtitles.string()},       {"cast", c.cast.string()},
                {"ground_truth", c.ground_truth.string()}, {"boundaries_dir", c.boundaries_dir.string()},
                {"output_dir", c.output_dir.string()},     {"cache_dir", c.cache_dir.string()},
                {"template", c.template_path.string()}};
  j["movie"] = {{"title", c.movie_title}};
  j["overlay"] = {{"mode", std::string(to_string(c.overlay.mode))},
                  {"color", {c.overlay.box_color.r, c.overlay.box_color.g, c.overlay.box_color.b}},
                  {"thickness", c.overlay.box_thickness},
                  {"label_scale", c.overlay.label_scale}};
  j["context"] = {{"T", c.context_T}, {"context_ad", c.context_ad}, {"prev_ad_limit", c.context_ad_limit}};
  j["faceid"] = {{"K", c.exemplars.k},
                 {"max_exemplar_distance",
                  c.exemplars.max_distance ? nlohmann::json(*c.exemplars.max_distance) : nlohmann::json()},
                 {"movie_level_mining", c.movie_level_mining},
                 {"frame_level_only", c.frame_level_only},
                 {"tau", c.tau}};
  j["tracker"] = {{"iou_min", c.tracker.iou_min},
                  {"max_coast", c.tracker.max_coast},
                  {"min_len", c.tracker.min_len},
                  {"min_conf", c.tracker.min_conf}};
  j["shots"] = {{"min_shot_len", c.shots.min_shot_len},
                {"k_sigma", c.shots.k_sigma},
                {"absolute_floor", c.shots.absolute_floor}};
  j["prompt"] = {{"num_frames", c.num_frames},
                 {"length_policy", to_string(c.policy)},
                 {"ad_style", c.ad_style},
                 {"mode", std::string(to_string(c.mode))}};
  nlohmann::json backend = {{"kind", c.backend.kind},
                            {"concurrency", c.concurrency},
                            {"max_retries", c.retry.max_retries},
                            {"retry_base_ms", c.retry.base_delay.count()}};
  if (c.backend.kind == "http") {
    backend["endpoint"] = c.backend.http.endpoint;
    backend["model"] = c.backend.http.model;
    backend["api_key_env"] = c.backend.http.api_key_env;
    backend["auth_style"] = c.backend.http.auth_style;
    backend["temperature"] = c.backend.http.temperature;
    backend["max_tokens"] = c.backend.http.max_tokens;
  } else {
    backend["mock_mode"] = mock_mode_name(c.backend.mock.mode);
  }
  j["backend"] = backend;
  return j;
}

}  // namespace adgen
