#include "adgen/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <regex>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adgen/error.hpp"
#include "adgen/image_io.hpp"
#include "text_util.hpp"

namespace adgen {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string where(const fs::path& path, std::size_t line) {
  return path.string() + ":" + std::to_string(line) + ": ";
}

const json& require(const json& obj, const char* key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) throw InputError(ctx + "missing field '" + key + "'");
  return *it;
}

std::string require_string(const json& obj, const char* key, const std::string& ctx) {
  const auto& v = require(obj, key, ctx);
  if (!v.is_string()) throw InputError(ctx + "field '" + key + "' must be a string");
  return v.get<std::string>();
}

double require_number(const json& obj, const char* key, const std::string& ctx) {
  const auto& v = require(obj, key, ctx);
  if (!v.is_number()) throw InputError(ctx + "field '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw InputError(ctx + "field '" + key + "' is not finite");
  return d;
}

BoundingBox parse_box(const json& v, const char* key, const std::string& ctx) {
  if (!v.is_array() || v.size() != 4) {
    throw InputError(ctx + "field '" + key + "' must be [x1,y1,x2,y2]");
  }
  BoundingBox box;
  double* coords[] = {&box.x1, &box.y1, &box.x2, &box.y2};
  for (std::size_t i = 0; i < 4; ++i) {
    if (!v[i].is_number()) throw InputError(ctx + "field '" + key + "' must hold numbers");
    *coords[i] = v[i].get<double>();
    if (!std::isfinite(*coords[i])) throw InputError(ctx + "field '" + key + "' is not finite");
  }
  if (!box.valid()) throw InputError(ctx + "field '" + key + "' needs x2 > x1 and y2 > y1");
  return box;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Calls fn(json, line_number) for every non-blank line.
template <typename Fn>
void for_each_json_line(std::string_view text, const std::string& name, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    auto line = trim(text.substr(start, end - start));
    if (!line.empty()) {
      json record;
      try {
        record = json::parse(line);
      } catch (const json::parse_error& e) {
        throw InputError(name + ":" + std::to_string(line_no) + ": invalid JSON (" + e.what() + ")");
      }
      if (!record.is_object()) {
        throw InputError(name + ":" + std::to_string(line_no) + ": expected a JSON object");
      }
      fn(record, line_no);
    }
    start = end + 1;
  }
}

std::optional<long long> parse_int(std::string_view s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

int count_words(std::string_view text) {
  int n = 0;
  bool in_word = false;
  for (char c : text) {
    const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

std::vector<fs::path> list_frame_files(const fs::path& frame_dir) {
  if (!fs::is_directory(frame_dir)) {
    throw InputError("frame directory does not exist: " + frame_dir.string());
  }
  std::vector<std::pair<long long, fs::path>> indexed;
  for (const auto& entry : fs::directory_iterator(frame_dir)) {
    if (!entry.is_regular_file() || !is_supported_image(entry.path())) continue;
    const auto stem = entry.path().stem().string();
    auto idx = parse_int(stem);
    if (stem.empty() || !idx || *idx < 0) continue;
    indexed.emplace_back(*idx, entry.path());
  }
  std::sort(indexed.begin(), indexed.end());
  for (std::size_t i = 1; i < indexed.size(); ++i) {
    if (indexed[i].first == indexed[i - 1].first) {
      throw InputError("duplicate frame index " + std::to_string(indexed[i].first) + " in " +
                       frame_dir.string());
    }
  }
  std::vector<fs::path> out;
  out.reserve(indexed.size());
  for (auto& [idx, p] : indexed) out.push_back(std::move(p));
  return out;
}

std::vector<FrameBuffer> load_frames(const fs::path& frame_dir) {
  const auto files = list_frame_files(frame_dir);
  if (files.empty()) throw InputError("no frames in " + frame_dir.string());
  std::vector<FrameBuffer> frames;
  frames.reserve(files.size());
  for (const auto& f : files) {
    frames.push_back(read_image(f));
    if (frames.back().width != frames.front().width ||
        frames.back().height != frames.front().height) {
      throw InputError("mixed dimensions in " + frame_dir.string() + " at " +
                       f.filename().string());
    }
  }
  return frames;
}

std::vector<Subtitle> parse_srt(std::string_view text) {
  static const std::regex kTiming(
      R"(^\s*(\d+):(\d{1,2}):(\d{1,2})[,.](\d{1,3})\s*-->\s*(\d+):(\d{1,2}):(\d{1,2})[,.](\d{1,3}).*$)");
  if (text.starts_with("\xEF\xBB\xBF")) text.remove_prefix(3);

  std::vector<std::string> lines;
  {
    std::size_t start = 0;
    while (start <= text.size()) {
      auto end = text.find('\n', start);
      if (end == std::string_view::npos) end = text.size();
      auto line = text.substr(start, end - start);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.emplace_back(line);
      start = end + 1;
    }
  }

  auto to_seconds = [](const std::smatch& m, int base) {
    auto ms_text = m[base + 3].str();
    while (ms_text.size() < 3) ms_text.push_back('0');
    const long long total_ms = std::stoll(m[base].str()) * 3600000LL +
                               std::stoll(m[base + 1].str()) * 60000LL +
                               std::stoll(m[base + 2].str()) * 1000LL + std::stoll(ms_text);
    return static_cast<double>(total_ms) / 1000.0;
  };

  std::vector<Subtitle> subs;
  std::size_t i = 0;
  while (i < lines.size()) {
    if (trim(lines[i]).empty()) {
      ++i;
      continue;
    }
    const std::size_t index_line = i + 1;
    Subtitle sub;
    std::size_t timing_idx = i;
    // The index line is optional in practice; accept a block that starts
    // directly with its timing line.
    if (auto idx = parse_int(trim(lines[i]))) {
      sub.index = static_cast<int>(*idx);
      timing_idx = i + 1;
    } else if (!std::regex_match(lines[i], kTiming)) {
      throw InputError("line " + std::to_string(index_line) + ": expected subtitle index");
    }
    if (timing_idx >= lines.size()) {
      throw InputError("line " + std::to_string(timing_idx + 1) + ": missing timestamp line");
    }
    std::smatch m;
    if (!std::regex_match(lines[timing_idx], m, kTiming)) {
      throw InputError("line " + std::to_string(timing_idx + 1) + ": malformed timestamp '" +
                       lines[timing_idx] + "'");
    }
    sub.start_s = to_seconds(m, 1);
    sub.end_s = to_seconds(m, 5);
    if (sub.end_s < sub.start_s) {
      throw InputError("line " + std::to_string(timing_idx + 1) + ": subtitle ends before it starts");
    }
    i = timing_idx + 1;
    std::string body;
    while (i < lines.size() && !trim(lines[i]).empty()) {
      if (!body.empty()) body.push_back(' ');
      body += trim(lines[i]);
      ++i;
    }
    if (body.empty()) continue;
    sub.text = std::move(body);
    subs.push_back(std::move(sub));
  }
  std::stable_sort(subs.begin(), subs.end(),
                   [](const Subtitle& a, const Subtitle& b) { return a.start_s < b.start_s; });
  return subs;
}

std::vector<Subtitle> load_srt(const fs::path& path) {
  try {
    return parse_srt(read_file(path));
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::string format_srt(const std::vector<Subtitle>& subtitles) {
  auto stamp = [](double seconds) {
    const long long ms = std::llround(seconds * 1000.0);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%02lld:%02lld:%02lld,%03lld", ms / 3600000,
                  (ms / 60000) % 60, (ms / 1000) % 60, ms % 1000);
    return std::string(buf);
  };
  std::ostringstream out;
  for (const auto& s : subtitles) {
    out << s.index << "\n" << stamp(s.start_s) << " --> " << stamp(s.end_s) << "\n"
        << s.text << "\n\n";
  }
  return out.str();
}

std::vector<CastMember> load_cast(const fs::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw InputError(path.string() + ": invalid JSON (" + e.what() + ")");
  }
  if (!doc.is_array()) throw InputError(path.string() + ": cast list must be a JSON array");
  std::vector<CastMember> cast;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto ctx = path.string() + "[" + std::to_string(i) + "]: ";
    const auto& obj = doc[i];
    if (!obj.is_object()) throw InputError(ctx + "expected an object");
    CastMember m;
    m.cast_id = require_string(obj, "cast_id", ctx);
    m.character_name = std::string(trim(require_string(obj, "character_name", ctx)));
    if (m.character_name.empty()) throw InputError(ctx + "empty character_name");
    m.actor_name = obj.value("actor_name", std::string());
    m.profile_image = obj.value("profile_image", std::string());
    if (!seen.insert(m.cast_id).second) {
      throw InputError(ctx + "duplicate cast_id '" + m.cast_id + "'");
    }
    cast.push_back(std::move(m));
  }
  return cast;
}

std::vector<GroundTruthAD> load_ground_truth(const fs::path& path) {
  std::vector<GroundTruthAD> out;
  for_each_json_line(read_file(path), path.string(), [&](const json& obj, std::size_t line) {
    const auto ctx = where(path, line);
    GroundTruthAD gt;
    gt.clip_id = require_string(obj, "clip_id", ctx);
    gt.start_s = require_number(obj, "start_s", ctx);
    gt.end_s = require_number(obj, "end_s", ctx);
    gt.text = require_string(obj, "text", ctx);
    if (gt.end_s < gt.start_s) throw InputError(ctx + "end_s before start_s");
    gt.word_count = count_words(gt.text);
    out.push_back(std::move(gt));
  });
  return out;
}

std::vector<MovieClip> load_clips(const fs::path& path, const fs::path& frames_root) {
  std::vector<MovieClip> out;
  std::set<std::string> seen;
  for_each_json_line(read_file(path), path.string(), [&](const json& obj, std::size_t line) {
    const auto ctx = where(path, line);
    MovieClip clip;
    clip.clip_id = require_string(obj, "clip_id", ctx);
    clip.movie_id = obj.value("movie_id", std::string());
    clip.start_s = require_number(obj, "start_s", ctx);
    clip.end_s = require_number(obj, "end_s", ctx);
    if (obj.contains("fps")) clip.fps = require_number(obj, "fps", ctx);
    if (!(clip.end_s > clip.start_s)) throw InputError(ctx + "end_s must exceed start_s");
    if (!(clip.fps > 0)) throw InputError(ctx + "fps must be positive");
    if (obj.contains("frame_dir")) {
      fs::path dir = require_string(obj, "frame_dir", ctx);
      clip.frame_dir = dir.is_absolute() ? dir : frames_root / dir;
    } else {
      clip.frame_dir = frames_root / clip.clip_id;
    }
    if (!seen.insert(clip.clip_id).second) {
      throw InputError(ctx + "duplicate clip_id '" + clip.clip_id + "'");
    }
    out.push_back(std::move(clip));
  });
  return out;
}

DetectionsByClip parse_detections(std::string_view jsonl,
                                  const std::set<std::string>* known_clips) {
  DetectionsByClip out;
  for_each_json_line(jsonl, "detections", [&](const json& obj, std::size_t line) {
    const auto ctx = "detections:" + std::to_string(line) + ": ";
    const auto clip_id = require_string(obj, "clip_id", ctx);
    if (known_clips != nullptr && !known_clips->contains(clip_id)) {
      throw InputError(ctx + "unknown clip_id '" + clip_id + "'");
    }
    DetectionRecord rec;
    const auto& idx = require(obj, "frame_idx", ctx);
    if (!idx.is_number_integer() || idx.get<long long>() < 0) {
      throw InputError(ctx + "frame_idx must be a non-negative integer");
    }
    rec.frame_idx = idx.get<int>();
    rec.person_box = parse_box(require(obj, "person_box", ctx), "person_box", ctx);
    rec.confidence = require_number(obj, "confidence", ctx);
    if (rec.confidence < 0.0 || rec.confidence > 1.0) {
      throw InputError(ctx + "confidence outside [0,1]");
    }
    if (auto it = obj.find("face_box"); it != obj.end() && !it->is_null()) {
      rec.face_box = parse_box(*it, "face_box", ctx);
    }
    if (auto it = obj.find("face_embedding"); it != obj.end() && !it->is_null()) {
      if (!it->is_array() || it->size() != kEmbeddingDim) {
        throw InputError(ctx + "face_embedding must hold exactly " +
                         std::to_string(kEmbeddingDim) + " floats, got " +
                         std::to_string(it->is_array() ? it->size() : 0));
      }
      std::vector<float> emb;
      emb.reserve(kEmbeddingDim);
      for (const auto& x : *it) {
        if (!x.is_number() || !std::isfinite(x.get<double>())) {
          throw InputError(ctx + "face_embedding holds a non-finite value");
        }
        emb.push_back(x.get<float>());
      }
      rec.face_embedding = std::move(emb);
    }
    out[clip_id].push_back(std::move(rec));
  });
  return out;
}

DetectionsByClip load_detections(const fs::path& path,
                                 const std::set<std::string>* known_clips) {
  try {
    return parse_detections(read_file(path), known_clips);
  } catch (const InputError& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

std::vector<DetectionRecord> clamp_detections(std::vector<DetectionRecord> records, int width,
                                              int height) {
  auto clamp_box = [&](BoundingBox b) {
    b.x1 = std::clamp(b.x1, 0.0, static_cast<double>(width));
    b.x2 = std::clamp(b.x2, 0.0, static_cast<double>(width));
    b.y1 = std::clamp(b.y1, 0.0, static_cast<double>(height));
    b.y2 = std::clamp(b.y2, 0.0, static_cast<double>(height));
    return b;
  };
  std::vector<DetectionRecord> out;
  out.reserve(records.size());
  for (auto& r : records) {
    r.person_box = clamp_box(r.person_box);
    if (!r.person_box.valid()) continue;
    if (r.face_box) {
      r.face_box = clamp_box(*r.face_box);
      if (!r.face_box->valid()) r.face_box.reset();
    }
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace adgen
