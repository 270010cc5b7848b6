#include "fixture.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "adgen/image_io.hpp"

namespace adgen::testing {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path scratch_dir(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("adgen_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<float> random_unit(std::mt19937_64& rng, int dim) {
  std::normal_distribution<double> normal;
  std::vector<double> v(static_cast<std::size_t>(dim));
  double norm = 0.0;
  for (auto& x : v) {
    x = normal(rng);
    norm += x * x;
  }
  norm = std::sqrt(norm);
  std::vector<float> out;
  out.reserve(v.size());
  for (double x : v) out.push_back(static_cast<float>(x / norm));
  return out;
}

std::vector<float> jitter(const std::vector<float>& center, double scale, std::mt19937_64& rng) {
  const auto noise = random_unit(rng, static_cast<int>(center.size()));
  std::vector<double> v(center.size());
  double norm = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = center[i] + scale * noise[i];
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  std::vector<float> out;
  for (double x : v) out.push_back(static_cast<float>(x / norm));
  return out;
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string first_name(const std::string& name) { return name.substr(0, name.find(' ')); }

struct Person {
  int cast = 0;
  double x = 0.0, y = 0.0, vx = 0.0;
};

}  // namespace

SyntheticMovie make_synthetic_movie(const fs::path& root, const MovieSpec& spec) {
  std::mt19937_64 rng(spec.seed);
  SyntheticMovie m;
  m.root = root;
  fs::create_directories(root / "frames");

  m.cast = {{"c0", "Rosamund Pike", "Amy Dunne", ""},
            {"c1", "Ben Affleck", "Nick Dunne", ""},
            {"c2", "Carrie Coon", "Margo", ""}};
  std::vector<std::vector<float>> centers;
  for (std::size_t c = 0; c < m.cast.size(); ++c) centers.push_back(random_unit(rng));

  json cast_doc = json::array();
  for (const auto& c : m.cast) {
    cast_doc.push_back({{"cast_id", c.cast_id}, {"actor_name", c.actor_name}, {"character_name", c.character_name}});
  }
  write_text(root / "cast.json", cast_doc.dump(2));

  std::string gallery;
  for (std::size_t c = 0; c < m.cast.size(); ++c) {
    json row = {{"cast_id", m.cast[c].cast_id}, {"kind", "original"}, {"embedding", jitter(centers[c], 0.5, rng)}};
    gallery += row.dump() + "\n";
  }
  write_text(root / "gallery.jsonl", gallery);

  std::string clips_jsonl, detections, gt_jsonl;
  for (int k = 0; k < spec.num_clips; ++k) {
    MovieClip clip;
    char id[16];
    std::snprintf(id, sizeof id, "clip%02d", k);
    clip.clip_id = id;
    clip.movie_id = "movie";
    clip.start_s = 10.0 + 15.0 * k;
    clip.end_s = clip.start_s + 4.0;
    clip.frame_dir = root / "frames" / clip.clip_id;
    clip.fps = 10.0;
    fs::create_directories(clip.frame_dir);
    clips_jsonl += json({{"clip_id", clip.clip_id}, {"movie_id", clip.movie_id}, {"start_s", clip.start_s},
                         {"end_s", clip.end_s}, {"fps", clip.fps}})
                       .dump() +
                   "\n";

    // One or two cast members, walking left to right on separate rows.
    std::vector<Person> people;
    people.push_back({k % 3, 10.0, 20.0, 1.0});
    if (k % 2 == 0) people.push_back({(k + 1) % 3, 90.0, 60.0, -1.0});
    std::vector<std::string> present;
    for (const auto& p : people) present.push_back(m.cast[static_cast<std::size_t>(p.cast)].cast_id);
    m.present.push_back(present);

    for (int f = 0; f < spec.frames_per_clip; ++f) {
      const bool second = f >= spec.cut_at;
      FrameBuffer frame(spec.width, spec.height, second ? Rgb{220, 210, 190} : Rgb{20, 30, 70});
      for (const auto& p : people) {
        const double x1 = p.x + p.vx * f, y1 = p.y;
        const BoundingBox box{x1, y1, x1 + 30.0, y1 + 40.0};
        for (int y = static_cast<int>(box.y1); y < static_cast<int>(box.y2); ++y) {
          for (int x = static_cast<int>(box.x1); x < static_cast<int>(box.x2); ++x) {
            frame.set(x, y, second ? Rgb{180, 120, 90} : Rgb{60, 60, 110});
          }
        }
        const BoundingBox face{x1 + 8.0, y1 + 2.0, x1 + 22.0, y1 + 16.0};
        json rec = {{"clip_id", clip.clip_id},
                    {"frame_idx", f},
                    {"person_box", {box.x1, box.y1, box.x2, box.y2}},
                    {"confidence", 0.9},
                    {"face_box", {face.x1, face.y1, face.x2, face.y2}},
                    {"face_embedding", jitter(centers[static_cast<std::size_t>(p.cast)], 0.3, rng)}};
        detections += rec.dump() + "\n";
      }
      char name[16];
      std::snprintf(name, sizeof name, "%03d.png", f);
      write_png(clip.frame_dir / name, frame);
    }

    GroundTruthAD gt;
    gt.clip_id = clip.clip_id;
    gt.start_s = clip.start_s + 0.5;
    gt.end_s = clip.start_s + 3.0;
    gt.text = first_name(m.cast[static_cast<std::size_t>(people[0].cast)].character_name) +
              " walks across the room slowly.";
    if (people.size() > 1) {
      // First names only: a shared surname would name both Dunnes.
      gt.text = first_name(m.cast[static_cast<std::size_t>(people[0].cast)].character_name) + " passes " +
                first_name(m.cast[static_cast<std::size_t>(people[1].cast)].character_name) + " in the hall.";
    }
    gt.word_count = count_words(gt.text);
    gt_jsonl += json({{"clip_id", gt.clip_id}, {"start_s", gt.start_s}, {"end_s", gt.end_s}, {"text", gt.text}})
                    .dump() +
                "\n";
    m.ground_truth.push_back(gt);
    m.clips.push_back(std::move(clip));
  }
  write_text(root / "clips.jsonl", clips_jsonl);
  write_text(root / "detections.jsonl", detections);
  write_text(root / "gt.jsonl", gt_jsonl);

  // A subtitle line every 3 seconds, each with a unique marker word.
  for (int i = 0; i < 30; ++i) {
    Subtitle s;
    s.index = i + 1;
    s.start_s = 1.0 + 3.0 * i;
    s.end_s = s.start_s + 2.0;
    s.text = "Spoken line number " + std::to_string(i + 1) + " here.";
    m.subtitles.push_back(s);
  }
  write_text(root / "subs.srt", format_srt(m.subtitles));

  auto& c = m.config;
  c.frames_root = root / "frames";
  c.clips = root / "clips.jsonl";
  c.detections = root / "detections.jsonl";
  c.gallery = root / "gallery.jsonl";
  c.cast = root / "cast.json";
  c.subtitles = root / "subs.srt";
  c.ground_truth = root / "gt.jsonl";
  c.output_dir = root / "out";
  c.movie_title = "Gone Girl";
  c.backend.kind = "mock";
  c.retry.base_delay = std::chrono::milliseconds(0);
  return m;
}

}  // namespace adgen::testing
