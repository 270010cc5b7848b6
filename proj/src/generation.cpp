#include "adgen/generation.hpp"

#include <cmath>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "adgen/error.hpp"
#include "adgen/ingest.hpp"
#include "adgen/hashing.hpp"
#include "text_util.hpp"

namespace adgen {
namespace {

struct Attempt {
  std::optional<std::string> text;
  std::string error;
};

Attempt complete_with_retry(const PromptBundle& bundle, Backend& backend,
                            const RetryPolicy& retry, int& calls) {
  Attempt out;
  auto delay = std::chrono::duration<double, std::milli>(retry.base_delay);
  for (int attempt = 0; attempt <= retry.max_retries; ++attempt) {
    if (attempt > 0 && delay.count() > 0) {
      std::this_thread::sleep_for(delay);
      delay *= retry.multiplier;
    }
    ++calls;
    try {
      auto text = std::string(trim(backend.complete(bundle)));
      if (text.empty()) {
        out.error = "backend returned an empty completion";
        continue;
      }
      out.text = std::move(text);
      out.error.clear();
      return out;
    } catch (const std::exception& e) {
      out.error = e.what();
    }
  }
  return out;
}

}  // namespace

GenerationMode parse_generation_mode(std::string_view text) {
  if (text == "one-stage" || text == "one_stage") return GenerationMode::one_stage;
  if (text == "two-stage" || text == "two_stage") return GenerationMode::two_stage;
  throw PreconditionError("unknown pipeline mode '" + std::string(text) + "'");
}

std::string_view to_string(GenerationMode mode) {
  return mode == GenerationMode::one_stage ? "one-stage" : "two-stage";
}

std::string to_json_line(const ADOutput& o) {
  nlohmann::json j;
  j["clip_id"] = o.clip_id;
  j["text"] = o.text;
  j["word_count"] = o.word_count;
  j["mode"] = std::string(to_string(o.mode));
  j["prompt_hash"] = o.prompt_hash;
  return j.dump();
}

ADOutput ad_output_from_json(std::string_view line) {
  try {
    const auto j = nlohmann::json::parse(line);
    ADOutput o;
    o.clip_id = j.at("clip_id").get<std::string>();
    o.text = j.at("text").get<std::string>();
    o.word_count = j.at("word_count").get<int>();
    o.mode = parse_generation_mode(j.at("mode").get<std::string>());
    o.prompt_hash = j.at("prompt_hash").get<std::string>();
    if (o.word_count != count_words(o.text)) throw InputError("word_count does not match text");
    return o;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid AD output record: ") + e.what());
  } catch (const PreconditionError& e) {
    throw InputError(std::string("invalid AD output record: ") + e.what());
  }
}

std::vector<ADOutput> load_ad_outputs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<ADOutput> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(ad_output_from_json(line));
    } catch (const InputError& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

GenerationResult generate_ad(const PromptBundle& bundle, Backend& backend,
                             const RetryPolicy& retry) {
  GenerationResult result;
  auto attempt = complete_with_retry(bundle, backend, retry, result.backend_calls);
  if (!attempt.text) {
    result.error = attempt.error;
    return result;
  }
  ADOutput out;
  out.clip_id = bundle.clip_id;
  out.text = std::move(*attempt.text);
  out.word_count = count_words(out.text);
  out.mode = GenerationMode::one_stage;
  out.prompt_hash = prompt_hash(bundle);
  result.output = std::move(out);
  return result;
}

std::string two_stage_hash(const ClipPromptInput& clip, const ContextWindow& context,
                           const std::set<std::string>& character_names,
                           const PromptOptions& options) {
  Sha256 h;
  h.field("adgen-two-stage/1");
  std::vector<std::string> placeholders;
  for (const auto& f : clip.frames) {
    h.field(prompt_hash(build_frame_caption_prompt(clip.clip_id, f.frame_idx, f.image, options.tmpl)));
    placeholders.push_back("{caption " + std::to_string(placeholders.size() + 1) + "}");
  }
  h.field(prompt_hash(build_summary_prompt(clip, placeholders, clip.frames.size(), context,
                                           character_names, options)));
  return h.hex_digest();
}

GenerationResult generate_ad_two_stage(const ClipPromptInput& clip, const ContextWindow& context,
                                       const std::set<std::string>& character_names,
                                       const PromptOptions& options, Backend& backend,
                                       const RetryPolicy& retry) {
  GenerationResult result;
  // Validates the length policy before spending any backend call.
  requested_words(options.policy, clip.gt_word_count);

  std::vector<std::string> captions;
  captions.reserve(clip.frames.size());
  for (const auto& f : clip.frames) {
    const auto bundle = build_frame_caption_prompt(clip.clip_id, f.frame_idx, f.image, options.tmpl);
    auto attempt = complete_with_retry(bundle, backend, retry, result.backend_calls);
    if (!attempt.text) {
      result.error = "caption of frame " + std::to_string(f.frame_idx) + ": " + attempt.error;
      return result;
    }
    captions.push_back(std::move(*attempt.text));
  }
  const auto summary = build_summary_prompt(clip, captions, clip.frames.size(), context,
                                            character_names, options);
  auto attempt = complete_with_retry(summary, backend, retry, result.backend_calls);
  if (!attempt.text) {
    result.error = "summary: " + attempt.error;
    return result;
  }
  ADOutput out;
  out.clip_id = clip.clip_id;
  out.text = std::move(*attempt.text);
  out.word_count = count_words(out.text);
  out.mode = GenerationMode::two_stage;
  out.prompt_hash = two_stage_hash(clip, context, character_names, options);
  result.output = std::move(out);
  return result;
}

}  // namespace adgen
