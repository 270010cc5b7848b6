#include "adgen/promptgen.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adgen/error.hpp"
#include "adgen/hashing.hpp"
#include "text_util.hpp"

namespace adgen {
namespace {

std::string join(const std::set<std::string>& items, std::string_view sep) {
  std::string out;
  for (const auto& s : items) {
    if (!out.empty()) out += sep;
    out += s;
  }
  return out;
}

std::string fill(std::string text, std::string_view key, std::string_view value) {
  return replace_all(std::move(text), key, value);
}

const PromptTemplate& resolve(const PromptTemplate* tmpl) {
  return tmpl != nullptr ? *tmpl : PromptTemplate::builtin();
}

// Title, context and character blocks shared by one-stage and summary prompts.
std::vector<std::string> preamble_blocks(const PromptTemplate& t, const std::string& title,
                                         const ContextWindow& context,
                                         const std::set<std::string>& names) {
  std::vector<std::string> blocks;
  if (!title.empty()) blocks.push_back(fill(t.title_line, "{title}", title));
  if (!context.subtitles.empty()) {
    std::string b = t.subtitles_header;
    for (const auto& s : context.subtitles) b += "\n- " + s.text;
    blocks.push_back(std::move(b));
  }
  if (!context.previous_ads.empty()) {
    std::string b = t.previous_ads_header;
    for (const auto& a : context.previous_ads) b += "\n- " + a.text;
    blocks.push_back(std::move(b));
  }
  if (!names.empty()) blocks.push_back(fill(t.characters_line, "{names}", join(names, ", ")));
  return blocks;
}

std::string instruction_clause(std::string base, const PromptTemplate& t,
                               std::optional<int> words, std::size_t frames) {
  base = fill(std::move(base), "{frames}", std::to_string(frames));
  if (words) base += fill(t.word_clause, "{n}", std::to_string(*words));
  return base + ".";
}

std::string join_blocks(const std::vector<std::string>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    if (!out.empty()) out += "\n\n";
    out += b;
  }
  return out;
}

}  // namespace

LengthPolicy parse_length_policy(std::string_view text) {
  auto positive = [&](std::string_view digits) {
    int n = 0;
    try {
      std::size_t used = 0;
      n = std::stoi(std::string(digits), &used);
      if (used != digits.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw PreconditionError("invalid length policy '" + std::string(text) + "'");
    }
    if (n < 1) throw PreconditionError("fixed word count must be >= 1");
    return LengthPolicy::fixed(n);
  };
  if (text == "none") return LengthPolicy::none();
  if (text == "gt" || text == "gt_length") return LengthPolicy::gt_length();
  if (text.starts_with("fixed:")) return positive(text.substr(6));
  return positive(text);
}

std::string to_string(const LengthPolicy& policy) {
  switch (policy.kind) {
    case LengthPolicy::Kind::none: return "none";
    case LengthPolicy::Kind::gt_length: return "gt_length";
    case LengthPolicy::Kind::fixed: return "fixed:" + std::to_string(policy.n);
  }
  return "none";
}

const PromptTemplate& PromptTemplate::builtin() {
  static const PromptTemplate t{
      "ad-prompt-v1",
      "You are a helpful assistant with a deep understanding of films. You will see image "
      "frames taken in temporal order from a movie clip, together with textual context.",
      "Movie: {title}",
      "Subtitles before this clip:",
      "Audio descriptions before this clip:",
      "Characters in this clip: {names}.",
      "The {frames} images are frames taken in temporal order from one movie clip; names "
      "written on a frame identify the characters. Analyze the details in each frame and the "
      "actions across frames as one video, then write the audio description for this clip, "
      "narrating the key visual events and referring to characters by name",
      "The {frames} images are frames taken in temporal order from one movie clip; names "
      "written on a frame identify the characters. Analyze the details in each frame and the "
      "actions across frames as one video, then write a caption describing what is visible, "
      "referring to characters by name",
      " in exactly {n} words",
      "Describe this movie frame in detail: the characters, with their names if written on "
      "the frame, their actions and expressions, and the setting.",
      "Detailed descriptions of {frames} frames taken in temporal order from one movie clip:",
      "Summarize these frame descriptions into the audio description for this clip, "
      "narrating the key visual events and referring to characters by name",
      "Summarize these frame descriptions into a caption describing what is visible",
  };
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open prompt template " + path.string());
  try {
    const auto j = nlohmann::json::parse(in);
    PromptTemplate t;
    t.version = j.at("version").get<std::string>();
    t.system_text = j.at("system_text").get<std::string>();
    t.title_line = j.at("title_line").get<std::string>();
    t.subtitles_header = j.at("subtitles_header").get<std::string>();
    t.previous_ads_header = j.at("previous_ads_header").get<std::string>();
    t.characters_line = j.at("characters_line").get<std::string>();
    t.ad_instruction = j.at("ad_instruction").get<std::string>();
    t.caption_instruction = j.at("caption_instruction").get<std::string>();
    t.word_clause = j.at("word_clause").get<std::string>();
    t.frame_caption_instruction = j.at("frame_caption_instruction").get<std::string>();
    t.summary_header = j.at("summary_header").get<std::string>();
    t.summary_ad_instruction = j.at("summary_ad_instruction").get<std::string>();
    t.summary_caption_instruction = j.at("summary_caption_instruction").get<std::string>();
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::optional<int> requested_words(const LengthPolicy& policy, std::optional<int> gt_word_count) {
  switch (policy.kind) {
    case LengthPolicy::Kind::none: return std::nullopt;
    case LengthPolicy::Kind::fixed:
      if (policy.n < 1) throw PreconditionError("fixed word count must be >= 1");
      return policy.n;
    case LengthPolicy::Kind::gt_length:
      if (!gt_word_count || *gt_word_count < 1) {
        throw PreconditionError("gt_length policy needs a ground-truth AD for the clip");
      }
      return *gt_word_count;
  }
  return std::nullopt;
}

std::string prompt_hash(const PromptBundle& b) {
  Sha256 h;
  h.field("adgen-prompt/1");
  h.field(std::to_string(static_cast<int>(b.kind)));
  h.field(b.template_version);
  h.field(b.system_text);
  h.field(b.user_text);
  h.field(b.clip_id);
  h.field(b.movie_title);
  h.field(b.requested_word_count ? std::to_string(*b.requested_word_count) : "-");
  h.field(std::to_string(b.frames.size()));
  for (const auto& f : b.frames) {
    h.field(std::to_string(f.frame_idx) + ":" + std::to_string(f.image.width) + "x" +
            std::to_string(f.image.height));
    h.update(f.image.pixels);
  }
  return h.hex_digest();
}

PromptBundle build_ad_prompt(const ClipPromptInput& clip, const ContextWindow& context,
                             const std::set<std::string>& character_names,
                             const PromptOptions& options) {
  if (clip.frames.size() > kMaxPromptFrames) {
    throw PreconditionError("a prompt carries at most 10 frames");
  }
  const auto& t = resolve(options.tmpl);
  const auto words = requested_words(options.policy, clip.gt_word_count);

  auto blocks = preamble_blocks(t, clip.movie_title, context, character_names);
  blocks.push_back(instruction_clause(options.ad_style ? t.ad_instruction : t.caption_instruction,
                                      t, words, clip.frames.size()));

  PromptBundle b;
  b.kind = PromptKind::one_stage;
  b.system_text = t.system_text;
  b.user_text = join_blocks(blocks);
  b.frames = clip.frames;
  b.clip_id = clip.clip_id;
  b.movie_title = clip.movie_title;
  b.requested_word_count = words;
  b.template_version = t.version;
  return b;
}

PromptBundle build_frame_caption_prompt(const std::string& clip_id, int frame_idx,
                                        const FrameBuffer& frame, const PromptTemplate* tmpl) {
  const auto& t = resolve(tmpl);
  PromptBundle b;
  b.kind = PromptKind::frame_caption;
  b.system_text = t.system_text;
  b.user_text = t.frame_caption_instruction;
  b.frames.push_back({frame_idx, frame});
  b.clip_id = clip_id;
  b.template_version = t.version;
  return b;
}

PromptBundle build_summary_prompt(const ClipPromptInput& clip,
                                  const std::vector<std::string>& captions,
                                  std::size_t expected_count, const ContextWindow& context,
                                  const std::set<std::string>& character_names,
                                  const PromptOptions& options) {
  if (captions.size() != expected_count) {
    throw PreconditionError("summary prompt needs one caption per frame: got " +
                            std::to_string(captions.size()) + ", expected " +
                            std::to_string(expected_count));
  }
  const auto& t = resolve(options.tmpl);
  const auto words = requested_words(options.policy, clip.gt_word_count);

  auto blocks = preamble_blocks(t, clip.movie_title, context, character_names);
  std::string described = fill(t.summary_header, "{frames}", std::to_string(captions.size()));
  for (std::size_t i = 0; i < captions.size(); ++i) {
    described += "\nFrame " + std::to_string(i + 1) + ": " + captions[i];
  }
  blocks.push_back(std::move(described));
  blocks.push_back(instruction_clause(
      options.ad_style ? t.summary_ad_instruction : t.summary_caption_instruction, t, words,
      captions.size()));

  PromptBundle b;
  b.kind = PromptKind::summary;
  b.system_text = t.system_text;
  b.user_text = join_blocks(blocks);
  b.clip_id = clip.clip_id;
  b.movie_title = clip.movie_title;
  b.requested_word_count = words;
  b.template_version = t.version;
  return b;
}

}  // namespace adgen
