#pragma once

#include <chrono>
#include <optional>
#include <set>
#include <string>
#include <string_view>

#include "adgen/backend.hpp"
#include "adgen/promptgen.hpp"

namespace adgen {

enum class GenerationMode { one_stage, two_stage };
GenerationMode parse_generation_mode(std::string_view text);
std::string_view to_string(GenerationMode mode);

struct ADOutput {
  std::string clip_id;
  std::string text;
  int word_count = 0;
  GenerationMode mode = GenerationMode::one_stage;
  std::string prompt_hash;
  bool operator==(const ADOutput&) const = default;
};

std::string to_json_line(const ADOutput& output);
ADOutput ad_output_from_json(std::string_view line);
std::vector<ADOutput> load_ad_outputs(const std::filesystem::path& path);

struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  double multiplier = 2.0;
};

struct GenerationResult {
  std::optional<ADOutput> output;
  int backend_calls = 0;
  std::string error;
};

GenerationResult generate_ad(const PromptBundle& bundle, Backend& backend,
                             const RetryPolicy& retry = {});

// Cache key of a two-stage run, computable before any backend call.
std::string two_stage_hash(const ClipPromptInput& clip, const ContextWindow& context,
                           const std::set<std::string>& character_names,
                           const PromptOptions& options = {});

// One caption call per frame, then one summary call.
GenerationResult generate_ad_two_stage(const ClipPromptInput& clip,
                                       const ContextWindow& context,
                                       const std::set<std::string>& character_names,
                                       const PromptOptions& options, Backend& backend,
                                       const RetryPolicy& retry = {});

}  // namespace adgen
