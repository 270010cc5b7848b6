// adgen: audio-description generation from clip frames, detections and a cast list.
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "adgen/config.hpp"
#include "adgen/error.hpp"
#include "adgen/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitPartial = 3;

struct Flag {
  const char* name;
  const char* key;
  const char* help;
};

// Every RunConfig field reachable from the command line.
const std::vector<Flag> kFlags = {
    {"--frames-root", "paths.frames_root", "directory holding <clip_id>/NNN.png frames"},
    {"--clips", "paths.clips", "clip manifest (JSON lines)"},
    {"--detections", "paths.detections", "detection records (JSON lines)"},
    {"--gallery", "paths.gallery", "cast profile embeddings (JSON lines)"},
    {"--subtitles", "paths.subtitles", "movie subtitles (.srt)"},
    {"--cast", "paths.cast", "cast list (JSON)"},
    {"--ground-truth", "paths.ground_truth", "ground-truth ADs (JSON lines)"},
    {"--boundaries-dir", "paths.boundaries_dir", "precomputed shot cuts, <clip_id>.json"},
    {"--output-dir", "paths.output_dir", "where outputs are written"},
    {"--cache-dir", "paths.cache_dir", "response cache directory"},
    {"--template", "paths.template", "prompt template (JSON)"},
    {"--movie-title", "movie.title", "movie title shown in prompts"},
    {"--overlay", "overlay.mode", "none | bbox | name | both"},
    {"--box-color", "overlay.color", "#rrggbb or r,g,b"},
    {"--box-thickness", "overlay.thickness", "box outline width in pixels"},
    {"--label-scale", "overlay.label_scale", "name label scale factor"},
    {"--context-T", "context.T", "number of preceding ADs bounding the subtitle window"},
    {"--context-ad", "context.context_ad", "two-pass run with previous ADs as context (true/false)"},
    {"--prev-ad-limit", "context.prev_ad_limit", "previous ADs per prompt (-1: same as T)"},
    {"--exemplars-k", "faceid.K", "exemplar faces mined per cast member"},
    {"--max-exemplar-distance", "faceid.max_exemplar_distance", "farthest face that may be mined"},
    {"--movie-level-mining", "faceid.movie_level_mining", "mine exemplars across the movie (true/false)"},
    {"--frame-level-only", "faceid.frame_level_only", "match faces one by one, no tracklets (true/false)"},
    {"--tau", "faceid.tau", "distance threshold for a cast match"},
    {"--iou-min", "tracker.iou_min", "minimum IoU to associate a detection"},
    {"--max-coast", "tracker.max_coast", "frames a track may go unmatched"},
    {"--min-len", "tracker.min_len", "shortest kept tracklet"},
    {"--min-conf", "tracker.min_conf", "lowest kept mean detection confidence"},
    {"--min-shot-len", "shots.min_shot_len", "shortest shot in frames"},
    {"--k-sigma", "shots.k_sigma", "cut threshold in standard deviations"},
    {"--num-frames", "prompt.num_frames", "frames sampled per clip (<= 10)"},
    {"--length-policy", "prompt.length_policy", "none | gt | fixed:N"},
    {"--ad-style", "prompt.ad_style", "ask for AD-style narration (true/false)"},
    {"--mode", "prompt.mode", "one-stage | two-stage"},
    {"--backend", "backend.kind", "mock | http"},
    {"--concurrency", "backend.concurrency", "maximum backend calls in flight"},
    {"--max-retries", "backend.max_retries", "retries per backend call"},
    {"--retry-base-ms", "backend.retry_base_ms", "first retry delay"},
    {"--endpoint", "backend.endpoint", "chat-completions URL"},
    {"--model", "backend.model", "model name"},
    {"--api-key-env", "backend.api_key_env", "environment variable holding the API key"},
    {"--auth-style", "backend.auth_style", "bearer | api-key"},
    {"--temperature", "backend.temperature", "sampling temperature"},
    {"--max-tokens", "backend.max_tokens", "completion token limit"},
    {"--timeout-s", "backend.timeout_s", "HTTP timeout"},
    {"--mock-mode", "backend.mock_mode", "echo | fixed | fail"},
    {"--mock-text", "backend.mock_text", "reply of the fixed mock"},
    {"--mock-fail-times", "backend.mock_fail_times", "calls the fail mock rejects first"},
    {"--mock-fail-clips", "backend.mock_fail_clips", "clips the mock always rejects, [\"a\", \"b\"]"},
};

struct CommonArgs {
  std::string config_file;
  std::map<std::string, std::string> values;  // setting key -> raw value
  std::vector<std::string> overrides;         // --set section.key=value
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_file, "TOML-style config file")->check(CLI::ExistingFile);
  for (const auto& f : kFlags) {
    cmd->add_option_function<std::string>(
        f.name, [&args, key = std::string(f.key)](const std::string& v) { args.values[key] = v; }, f.help);
  }
  cmd->add_option("--set", args.overrides, "extra setting as section.key=value");
}

adgen::RunConfig resolve(const CommonArgs& args) {
  adgen::RunConfig config;
  if (!args.config_file.empty()) config = adgen::load_run_config(args.config_file);
  for (const auto& [key, value] : args.values) adgen::apply_setting(config, key, value);
  for (const auto& kv : args.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw adgen::ConfigError("--set expects section.key=value, got '" + kv + "'");
    adgen::apply_setting(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

void print_scores(const adgen::EvalReport& r) {
  std::cout << std::fixed << std::setprecision(4) << "clips          " << r.per_clip.size() << "\n"
            << "CIDEr-D        " << r.cider_d << "\n"
            << "ROUGE-L        " << r.rouge_l << "\n"
            << "char recall    " << r.char_recall << "\n"
            << "char precision " << r.char_precision << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate and evaluate audio descriptions for movie clips"};
  app.require_subcommand(1);

  CommonArgs gen_args, eval_args, id_args, dump_args;
  std::string dump_annotated;
  auto* gen = app.add_subcommand("generate", "generate one AD per clip");
  add_common(gen, gen_args);
  gen->add_option("--dump-annotated", dump_annotated, "also write annotated prompt frames here");

  std::string outputs_path;
  auto* eval = app.add_subcommand("eval", "score generated ADs against ground truth");
  add_common(eval, eval_args);
  eval->add_option("outputs", outputs_path, "ad_outputs.jsonl to score")->required();

  auto* identify = app.add_subcommand("identify", "character recognition only; writes identities.jsonl");
  add_common(identify, id_args);

  std::string dump_dir;
  auto* dump = app.add_subcommand("annotate-dump", "write annotated prompt frames as PNG");
  add_common(dump, dump_args);
  dump->add_option("dir", dump_dir, "output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      auto config = resolve(gen_args);
      if (!dump_annotated.empty()) config.dump_annotated = dump_annotated;
      const auto result = adgen::run_pipeline(config);
      const auto& m = result.manifest;
      std::cout << "done " << m.count(adgen::ClipStatus::done) << ", cached "
                << m.count(adgen::ClipStatus::cached) << ", failed " << m.count(adgen::ClipStatus::failed)
                << " -> " << (config.output_dir / "ad_outputs.jsonl").string() << "\n";
      for (const auto& e : m.entries) {
        if (e.status == adgen::ClipStatus::failed) std::cerr << "failed " << e.clip_id << ": " << e.error << "\n";
      }
      return m.all_succeeded() ? kExitOk : kExitPartial;
    }
    if (eval->parsed()) {
      print_scores(adgen::run_eval(resolve(eval_args), outputs_path));
      return kExitOk;
    }
    if (identify->parsed()) {
      const auto result = adgen::run_identify(resolve(id_args));
      for (const auto& c : result.clips) {
        std::cout << c.clip_id << ":";
        for (const auto& id : c.cast_ids) std::cout << " " << id;
        std::cout << "\n";
      }
      if (result.against_ground_truth) {
        std::cout << std::fixed << std::setprecision(4) << "recall " << result.against_ground_truth->recall
                  << " precision " << result.against_ground_truth->precision << "\n";
      }
      return kExitOk;
    }
    if (dump->parsed()) {
      const int n = adgen::run_annotate_dump(resolve(dump_args), dump_dir);
      std::cout << "wrote " << n << " frames to " << dump_dir << "\n";
      return kExitOk;
    }
  } catch (const adgen::ConfigError& e) {
    std::cerr << "adgen: " << e.what() << "\n";
    return kExitConfig;
  } catch (const adgen::InputError& e) {
    std::cerr << "adgen: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "adgen: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
