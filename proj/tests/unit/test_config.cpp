#include <doctest.h>

#include <cstdlib>
#include <fstream>

#include "adgen/config.hpp"
#include "fixture.hpp"

using namespace adgen;
namespace fs = std::filesystem;

namespace {

fs::path write_config(const fs::path& dir, const std::string& body) {
  const auto path = dir / "run.toml";
  std::ofstream(path) << body;
  return path;
}

}  // namespace

TEST_CASE("load_run_config reads sections, quotes, comments and lists") {
  const auto dir = testing::scratch_dir("config_load");
  const auto path = write_config(dir, R"ini(# a run
[paths]
frames_root = "frames"
clips = /abs/clips.jsonl
output_dir = 'out'   # trailing comment

[movie]
title = "Gone Girl"

[context]
T = 50
context_ad = true

[faceid]
K = 3
tau = 0.55

[prompt]
length_policy = "fixed:12"
mode = two_stage

[overlay]
mode = bbox_and_name
color = "#ff8000"

[backend]
kind = mock
concurrency = 8
retry_base_ms = 0
mock_fail_clips = ["c1", "c7"]
)ini");
  const auto c = load_run_config(path);
  CHECK(c.frames_root == dir / "frames");
  CHECK(c.clips == fs::path("/abs/clips.jsonl"));
  CHECK(c.output_dir == dir / "out");
  CHECK(c.movie_title == "Gone Girl");
  CHECK(c.context_T == 50);
  CHECK(c.context_ad);
  CHECK(c.exemplars.k == 3);
  CHECK(c.tau == 0.55);
  CHECK(c.policy.kind == LengthPolicy::Kind::fixed);
  CHECK(c.policy.n == 12);
  CHECK(c.mode == GenerationMode::two_stage);
  CHECK(c.overlay.box_color.r == 255);
  CHECK(c.overlay.box_color.g == 128);
  CHECK(c.overlay.box_color.b == 0);
  CHECK(c.concurrency == 8);
  CHECK(c.retry.base_delay.count() == 0);
  CHECK(c.backend.mock.fail_clips == std::set<std::string>{"c1", "c7"});
}

TEST_CASE("bad settings are reported as ConfigError") {
  RunConfig c;
  CHECK_THROWS_WITH_AS(apply_setting(c, "faceid.k_typo", "3"), doctest::Contains("faceid.k_typo"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "context.T", "ten"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "context.context_ad", "maybe"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "overlay.color", "1,2"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "overlay.mode", "sparkles"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "prompt.length_policy", "fixed(x)"), ConfigError);
  CHECK_THROWS_AS(apply_setting(c, "backend.mock_mode", "loud"), ConfigError);
  apply_setting(c, "overlay.color", "10, 20, 30");
  CHECK(c.overlay.box_color.b == 30);

  const auto dir = testing::scratch_dir("config_bad");
  CHECK_THROWS_AS(load_run_config(write_config(dir, "[paths]\nnot a pair\n")), ConfigError);
  CHECK_THROWS_AS(load_run_config(write_config(dir, "[tracker]\nmystery = 1\n")), ConfigError);
  CHECK_THROWS_AS(load_run_config(dir / "missing.toml"), ConfigError);
}

TEST_CASE("validate collects every problem") {
  RunConfig c;
  c.num_frames = 11;
  c.tau = 3.0;
  c.concurrency = 0;
  try {
    validate(c, ConfigUse::generate);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("paths.frames_root is not set") != std::string::npos);
    CHECK(msg.find("paths.output_dir is not set") != std::string::npos);
    CHECK(msg.find("prompt.num_frames") != std::string::npos);
    CHECK(msg.find("faceid.tau") != std::string::npos);
    CHECK(msg.find("backend.concurrency") != std::string::npos);
  }
}

TEST_CASE("validate accepts the synthetic movie and checks per use") {
  const auto movie = testing::make_synthetic_movie(testing::scratch_dir("config_movie"));
  CHECK_NOTHROW(validate(movie.config, ConfigUse::generate));
  CHECK_NOTHROW(validate(movie.config, ConfigUse::identify));
  CHECK_NOTHROW(validate(movie.config, ConfigUse::annotate));
  CHECK_NOTHROW(validate(movie.config, ConfigUse::eval));

  auto c = movie.config;
  c.ground_truth.clear();
  CHECK_NOTHROW(validate(c, ConfigUse::generate));
  CHECK_THROWS_AS(validate(c, ConfigUse::eval), ConfigError);
  c.policy = LengthPolicy::gt_length();
  CHECK_THROWS_AS(validate(c, ConfigUse::generate), ConfigError);

  c = movie.config;
  c.backend.kind = "http";
  c.backend.http.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  c.backend.http.model = "m";
  c.backend.http.api_key_env = "ADGEN_TEST_UNSET_KEY_VAR";
  ::unsetenv("ADGEN_TEST_UNSET_KEY_VAR");
  CHECK_THROWS_WITH_AS(validate(c, ConfigUse::generate), doctest::Contains("ADGEN_TEST_UNSET_KEY_VAR"), ConfigError);
  // Only generation talks to the backend.
  CHECK_NOTHROW(validate(c, ConfigUse::identify));
  ::setenv("ADGEN_TEST_UNSET_KEY_VAR", "secret", 1);
  CHECK_NOTHROW(validate(c, ConfigUse::generate));
  ::unsetenv("ADGEN_TEST_UNSET_KEY_VAR");
}

TEST_CASE("to_json records the effective settings without secrets") {
  RunConfig c;
  c.backend.kind = "http";
  c.backend.http.api_key_env = "MY_KEY";
  const auto j = to_json(c);
  CHECK(j.at("prompt").at("length_policy") == "fixed:10");
  CHECK(j.at("context").at("T") == 100);
  CHECK(j.at("faceid").at("K") == c.exemplars.k);
  CHECK(j.at("backend").at("kind") == "http");
  CHECK(j.dump().find("secret") == std::string::npos);
}
