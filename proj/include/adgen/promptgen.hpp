#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "adgen/annotate.hpp"
#include "adgen/context.hpp"

namespace adgen {

inline constexpr std::size_t kMaxPromptFrames = 10;

struct LengthPolicy {
  enum class Kind { none, fixed, gt_length };
  Kind kind = Kind::fixed;
  int n = 10;

  static LengthPolicy none() { return {Kind::none, 0}; }
  static LengthPolicy fixed(int words) { return {Kind::fixed, words}; }
  static LengthPolicy gt_length() { return {Kind::gt_length, 0}; }
};

// "none", "gt", "fixed:N" or a bare integer N.
LengthPolicy parse_length_policy(std::string_view text);
std::string to_string(const LengthPolicy& policy);

// Text skeleton of every prompt. Placeholders: {title} {names} {frames} {n}.
struct PromptTemplate {
  std::string version;
  std::string system_text;
  std::string title_line;
  std::string subtitles_header;
  std::string previous_ads_header;
  std::string characters_line;
  std::string ad_instruction;
  std::string caption_instruction;
  std::string word_clause;
  std::string frame_caption_instruction;
  std::string summary_header;
  std::string summary_ad_instruction;
  std::string summary_caption_instruction;

  static const PromptTemplate& builtin();
  static PromptTemplate load(const std::filesystem::path& path);
};

enum class PromptKind { one_stage, frame_caption, summary };

struct PromptBundle {
  PromptKind kind = PromptKind::one_stage;
  std::string system_text;
  std::string user_text;
  std::vector<SampledFrame> frames;
  std::string clip_id;
  std::string movie_title;
  std::optional<int> requested_word_count;
  std::string template_version;
};

// Content hash over every field of the bundle, pixels included.
std::string prompt_hash(const PromptBundle& bundle);

struct ClipPromptInput {
  std::string clip_id;
  std::string movie_title;
  std::vector<SampledFrame> frames;  // annotated, sampled, <= 10
  std::optional<int> gt_word_count;
};

struct PromptOptions {
  LengthPolicy policy;
  bool ad_style = true;
  const PromptTemplate* tmpl = nullptr;  // builtin when null
};

// Throws PreconditionError for gt_length without a ground-truth word count.
std::optional<int> requested_words(const LengthPolicy& policy,
                                   std::optional<int> gt_word_count);

PromptBundle build_ad_prompt(const ClipPromptInput& clip, const ContextWindow& context,
                             const std::set<std::string>& character_names,
                             const PromptOptions& options = {});

PromptBundle build_frame_caption_prompt(const std::string& clip_id, int frame_idx,
                                        const FrameBuffer& frame,
                                        const PromptTemplate* tmpl = nullptr);

// expected_count is the number of frames the captions were produced from.
PromptBundle build_summary_prompt(const ClipPromptInput& clip,
                                  const std::vector<std::string>& captions,
                                  std::size_t expected_count, const ContextWindow& context,
                                  const std::set<std::string>& character_names,
                                  const PromptOptions& options = {});

}  // namespace adgen
