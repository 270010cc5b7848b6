#include "adgen/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <thread>

#include "adgen/annotate.hpp"
#include "adgen/backend.hpp"
#include "adgen/cache.hpp"
#include "adgen/context.hpp"
#include "adgen/error.hpp"
#include "adgen/image_io.hpp"
#include "adgen/promptgen.hpp"
#include "adgen/shotseg.hpp"
#include "adgen/tracker.hpp"

namespace adgen {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Runs job(i) for i in [0, n) on at most `workers` threads.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& job) {
  const auto count = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(workers, 1)));
  if (count <= 1) {
    for (std::size_t i = 0; i < n; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(count);
  for (std::size_t w = 0; w < count; ++w) {
    pool.emplace_back([&] {
      for (auto i = next++; i < n; i = next++) job(i);
    });
  }
}

void write_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const auto tmp = fs::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw Error("cannot write " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string frame_name(int frame_idx) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%03d.png", frame_idx);
  return buf;
}

struct PreparedClip {
  MovieClip clip;
  std::vector<SampledFrame> frames;  // sampled, not yet annotated
  std::vector<Tracklet> tracklets;
  std::string error;
};

struct Prepared {
  std::vector<PreparedClip> clips;
  std::map<std::string, std::string> names;  // cast_id -> character name
  std::vector<CastMember> cast;
  CastGallery movie_gallery;                 // used when mining is movie-level
  std::vector<CastOriginals> originals;
  std::map<std::string, std::vector<GroundTruthAD>> ground_truth;
};

PreparedClip prepare_clip(const MovieClip& clip, const std::vector<DetectionRecord>& detections,
                          const RunConfig& config) {
  PreparedClip out;
  out.clip = clip;
  auto frames = load_frames(clip.frame_dir);
  const int length = static_cast<int>(frames.size());

  std::vector<Shot> shots;
  const auto boundary_file = config.boundaries_dir / (clip.clip_id + ".json");
  if (!config.boundaries_dir.empty() && fs::exists(boundary_file)) {
    shots = shots_from_boundaries(load_boundary_file(boundary_file), length);
  } else {
    shots = detect_shots(frames, config.shots);
  }

  auto records = clamp_detections(detections, frames.front().width, frames.front().height);
  for (const auto& r : records) {
    if (r.frame_idx < 0 || r.frame_idx >= length) {
      throw InputError("clip " + clip.clip_id + ": detection at frame " + std::to_string(r.frame_idx) +
                       " but the clip has " + std::to_string(length) + " frames");
    }
  }
  out.tracklets = track_clip(records, shots, config.tracker);

  for (int idx : sample_frames(length, config.num_frames)) {
    out.frames.push_back({idx, std::move(frames[static_cast<std::size_t>(idx)])});
  }
  return out;
}

Prepared prepare(const RunConfig& config) {
  Prepared p;
  p.cast = load_cast(config.cast);
  for (const auto& m : p.cast) p.names[m.cast_id] = m.character_name;

  const auto clips = load_clips(config.clips, config.frames_root);
  std::set<std::string> known;
  for (const auto& c : clips) known.insert(c.clip_id);
  const auto detections = load_detections(config.detections, &known);

  p.originals = load_gallery_originals(config.gallery);
  for (const auto& o : p.originals) {
    if (!p.names.contains(o.cast_id)) {
      throw InputError("gallery cast_id '" + o.cast_id + "' is not in the cast list");
    }
  }
  if (!config.ground_truth.empty()) {
    for (auto& g : load_ground_truth(config.ground_truth)) p.ground_truth[g.clip_id].push_back(std::move(g));
  }

  p.clips.resize(clips.size());
  static const std::vector<DetectionRecord> kNone;
  const int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  parallel_for(clips.size(), workers, [&](std::size_t i) {
    const auto it = detections.find(clips[i].clip_id);
    try {
      p.clips[i] = prepare_clip(clips[i], it == detections.end() ? kNone : it->second, config);
    } catch (const std::exception& e) {
      p.clips[i].clip = clips[i];
      p.clips[i].error = e.what();
    }
  });

  if (config.movie_level_mining && !config.frame_level_only) {
    std::vector<FaceEmbedding> queries;
    for (const auto& c : p.clips) {
      auto faces = all_tracklet_faces(c.tracklets);
      queries.insert(queries.end(), faces.begin(), faces.end());
    }
    p.movie_gallery = build_cast_gallery(p.originals, queries, config.exemplars);
  } else if (config.frame_level_only) {
    p.movie_gallery = build_cast_gallery(p.originals, {}, ExemplarOptions{0, std::nullopt});
  }
  return p;
}

struct IdentifiedClip {
  ClipIdentities ids;
  std::vector<Tracklet> overlay_tracklets;
  std::set<std::string> character_names;
};

IdentifiedClip identify_clip(const PreparedClip& clip, const Prepared& p, const RunConfig& config) {
  IdentifiedClip out;
  out.ids.clip_id = clip.clip.clip_id;
  if (p.originals.empty()) return out;

  if (config.frame_level_only) {
    std::set<int> sampled;
    for (const auto& f : clip.frames) sampled.insert(f.frame_idx);
    out.ids.face_matches = match_faces_frame_level(clip.tracklets, p.movie_gallery, config.tau, &sampled);
    out.ids.cast_ids = identity_set(out.ids.face_matches);
    std::map<int, const Tracklet*> by_id;
    for (const auto& t : clip.tracklets) by_id[t.tracklet_id] = &t;
    // One single-frame track per recognized face, so overlays follow the matches.
    for (const auto& m : out.ids.face_matches) {
      if (!m.cast_id) continue;
      Tracklet t;
      t.tracklet_id = static_cast<int>(out.overlay_tracklets.size());
      t.boxes[m.frame_idx] = by_id.at(m.tracklet_id)->boxes.at(m.frame_idx);
      t.cast_id = m.cast_id;
      t.name = p.names.at(*m.cast_id);
      out.overlay_tracklets.push_back(std::move(t));
    }
  } else {
    const CastGallery local = config.movie_level_mining
                                  ? CastGallery{}
                                  : build_cast_gallery(p.originals, all_tracklet_faces(clip.tracklets),
                                                       config.exemplars);
    const auto& gallery = config.movie_level_mining ? p.movie_gallery : local;
    out.ids.assignments = assign_identities(clip.tracklets, gallery, config.tau);
    out.ids.cast_ids = identity_set(out.ids.assignments);
    out.overlay_tracklets = clip.tracklets;
    for (std::size_t i = 0; i < out.overlay_tracklets.size(); ++i) {
      auto& t = out.overlay_tracklets[i];
      t.cast_id = out.ids.assignments[i].cast_id;
      if (t.cast_id) t.name = p.names.at(*t.cast_id);
    }
  }
  for (const auto& id : out.ids.cast_ids) out.character_names.insert(p.names.at(id));
  return out;
}

std::vector<SampledFrame> annotated_frames(const PreparedClip& clip, const IdentifiedClip& ids,
                                           const RunConfig& config) {
  return render_overlays(clip.frames, ids.overlay_tracklets, config.overlay);
}

void dump_frames(const fs::path& dir, const std::string& clip_id,
                 const std::vector<SampledFrame>& frames) {
  fs::create_directories(dir / clip_id);
  for (const auto& f : frames) write_png(dir / clip_id / frame_name(f.frame_idx), f.image);
}

// AD timestamp of a clip: its first ground-truth AD when known, else the clip start.
double ad_time(const PreparedClip& clip, const Prepared& p) {
  const auto it = p.ground_truth.find(clip.clip.clip_id);
  if (it == p.ground_truth.end()) return clip.clip.start_s;
  double t = it->second.front().start_s;
  for (const auto& g : it->second) t = std::min(t, g.start_s);
  return t;
}

struct ClipJob {
  std::vector<SampledFrame> frames;
  std::set<std::string> names;
  std::string error;
};

struct PassResult {
  std::vector<ManifestEntry> entries;
  std::vector<std::optional<ADOutput>> outputs;
};

PassResult run_pass(const RunConfig& config, const Prepared& p, const std::vector<ClipJob>& jobs,
                    const std::vector<Subtitle>& subtitles, const std::vector<double>& ad_times,
                    const std::vector<TimedText>* previous, const PromptTemplate& tmpl,
                    Backend& backend, const ResponseCache* cache) {
  const auto n = p.clips.size();
  PassResult result;
  result.entries.resize(n);
  result.outputs.resize(n);
  const int prev_limit = config.context_ad_limit < 0 ? config.context_T : config.context_ad_limit;

  parallel_for(n, config.concurrency, [&](std::size_t i) {
    const auto t0 = Clock::now();
    const auto& clip = p.clips[i];
    auto& entry = result.entries[i];
    entry.clip_id = clip.clip.clip_id;
    try {
      if (!clip.error.empty()) throw Error(clip.error);
      if (!jobs[i].error.empty()) throw Error(jobs[i].error);
      const double now = ad_time(clip, p);
      auto window = select_subtitle_window(subtitles, ad_times, now, config.context_T);
      std::vector<TimedText> prev;
      if (previous) prev = select_prev_ads(*previous, now, prev_limit);
      const auto context = build_context(std::move(window), std::move(prev), config.context_T);

      ClipPromptInput input{clip.clip.clip_id, config.movie_title, jobs[i].frames, std::nullopt};
      if (const auto gt = p.ground_truth.find(clip.clip.clip_id); gt != p.ground_truth.end()) {
        input.gt_word_count = gt->second.front().word_count;
      }
      const PromptOptions options{config.policy, config.ad_style, &tmpl};

      std::string hash;
      std::optional<PromptBundle> bundle;
      if (config.mode == GenerationMode::one_stage) {
        bundle = build_ad_prompt(input, context, jobs[i].names, options);
        hash = prompt_hash(*bundle);
      } else {
        hash = two_stage_hash(input, context, jobs[i].names, options);
      }
      entry.prompt_hash = hash;

      if (cache) {
        if (auto hit = cache->lookup(hash)) {
          hit->clip_id = clip.clip.clip_id;
          result.outputs[i] = std::move(*hit);
          entry.status = ClipStatus::cached;
          entry.seconds = seconds_since(t0);
          return;
        }
      }
      auto generated = bundle ? generate_ad(*bundle, backend, config.retry)
                              : generate_ad_two_stage(input, context, jobs[i].names, options,
                                                      backend, config.retry);
      entry.backend_calls = generated.backend_calls;
      if (!generated.output) throw Error(generated.error);
      if (cache) cache->store(*generated.output);
      result.outputs[i] = std::move(*generated.output);
      entry.status = ClipStatus::done;
    } catch (const std::exception& e) {
      entry.status = ClipStatus::failed;
      entry.error = e.what();
    }
    entry.seconds = seconds_since(t0);
  });
  return result;
}

nlohmann::json entries_json(const std::vector<ManifestEntry>& entries) {
  auto arr = nlohmann::json::array();
  for (const auto& e : entries) {
    nlohmann::json j = {{"clip_id", e.clip_id},
                        {"status", std::string(to_string(e.status))},
                        {"prompt_hash", e.prompt_hash},
                        {"backend_calls", e.backend_calls},
                        {"seconds", e.seconds}};
    if (!e.error.empty()) j["error"] = e.error;
    arr.push_back(std::move(j));
  }
  return arr;
}

std::string outputs_jsonl(const std::vector<std::optional<ADOutput>>& outputs) {
  std::string out;
  for (const auto& o : outputs) {
    if (o) out += to_json_line(*o) + "\n";
  }
  return out;
}

nlohmann::json distance_json(double d) {
  return std::isfinite(d) ? nlohmann::json(d) : nlohmann::json();
}

}  // namespace

std::string_view to_string(ClipStatus status) {
  switch (status) {
    case ClipStatus::done: return "done";
    case ClipStatus::failed: return "failed";
    case ClipStatus::cached: return "cached";
  }
  return "failed";
}

int RunManifest::count(ClipStatus status) const {
  return static_cast<int>(std::count_if(entries.begin(), entries.end(),
                                        [&](const ManifestEntry& e) { return e.status == status; }));
}

std::unique_ptr<Backend> make_backend(const BackendConfig& config) {
  if (config.kind == "mock") return std::make_unique<MockBackend>(config.mock);
  if (config.kind == "http") return std::make_unique<HttpBackend>(config.http);
  throw ConfigError("unknown backend kind '" + config.kind + "'");
}

RunResult run_pipeline(const RunConfig& config, Backend* backend) {
  const auto t0 = Clock::now();
  validate(config, ConfigUse::generate);
  const PromptTemplate tmpl =
      config.template_path.empty() ? PromptTemplate::builtin() : PromptTemplate::load(config.template_path);
  std::unique_ptr<Backend> owned;
  if (!backend) {
    owned = make_backend(config.backend);
    backend = owned.get();
  }
  const auto subtitles = config.subtitles.empty() ? std::vector<Subtitle>{} : load_srt(config.subtitles);

  const auto p = prepare(config);
  const auto n = p.clips.size();

  std::vector<ClipJob> jobs(n);
  parallel_for(n, static_cast<int>(std::max(1u, std::thread::hardware_concurrency())), [&](std::size_t i) {
    if (!p.clips[i].error.empty()) return;
    try {
      const auto ids = identify_clip(p.clips[i], p, config);
      jobs[i].frames = annotated_frames(p.clips[i], ids, config);
      jobs[i].names = ids.character_names;
      if (!config.dump_annotated.empty()) dump_frames(config.dump_annotated, p.clips[i].clip.clip_id, jobs[i].frames);
    } catch (const std::exception& e) {
      jobs[i].error = e.what();
    }
  });

  std::vector<double> ad_times;
  for (const auto& c : p.clips) ad_times.push_back(ad_time(c, p));
  std::sort(ad_times.begin(), ad_times.end());

  std::optional<ResponseCache> cache;
  if (!config.cache_dir.empty()) cache.emplace(config.cache_dir);
  const ResponseCache* cache_ptr = cache ? &*cache : nullptr;

  RunResult result;
  result.manifest.config = to_json(config);
  auto pass = run_pass(config, p, jobs, subtitles, ad_times, nullptr, tmpl, *backend, cache_ptr);
  nlohmann::json first_pass;
  if (config.context_ad) {
    // The second pass sees the first pass's ADs as context.
    std::vector<TimedText> previous;
    for (std::size_t i = 0; i < n; ++i) {
      if (pass.outputs[i]) previous.push_back({ad_time(p.clips[i], p), pass.outputs[i]->text});
    }
    std::stable_sort(previous.begin(), previous.end(),
                     [](const TimedText& a, const TimedText& b) { return a.timestamp_s < b.timestamp_s; });
    write_atomic(config.output_dir / "ad_outputs.pass1.jsonl", outputs_jsonl(pass.outputs));
    first_pass = entries_json(pass.entries);
    pass = run_pass(config, p, jobs, subtitles, ad_times, &previous, tmpl, *backend, cache_ptr);
    result.manifest.passes = 2;
  }
  result.manifest.entries = pass.entries;
  for (auto& o : pass.outputs) {
    if (o) result.outputs.push_back(std::move(*o));
  }

  std::string lines;
  for (const auto& o : result.outputs) lines += to_json_line(o) + "\n";
  write_atomic(config.output_dir / "ad_outputs.jsonl", lines);

  result.manifest.total_seconds = seconds_since(t0);
  nlohmann::json manifest = {{"config", result.manifest.config},
                             {"passes", result.manifest.passes},
                             {"clips", entries_json(result.manifest.entries)},
                             {"counts",
                              {{"done", result.manifest.count(ClipStatus::done)},
                               {"cached", result.manifest.count(ClipStatus::cached)},
                               {"failed", result.manifest.count(ClipStatus::failed)}}},
                             {"total_seconds", result.manifest.total_seconds}};
  if (config.context_ad) manifest["first_pass"] = first_pass;
  write_atomic(config.output_dir / "manifest.json", manifest.dump(2) + "\n");
  return result;
}

EvalReport run_eval(const RunConfig& config, const fs::path& outputs_path) {
  validate(config, ConfigUse::eval);
  if (!fs::exists(outputs_path)) throw InputError("outputs file does not exist: " + outputs_path.string());
  const auto outputs = load_ad_outputs(outputs_path);
  const auto gt = load_ground_truth(config.ground_truth);
  const auto cast = load_cast(config.cast);
  auto report = evaluate_run(outputs, gt, cast);
  const auto dir = config.output_dir.empty() ? outputs_path.parent_path() : config.output_dir;
  write_atomic(dir / "eval_report.json", report_to_json(report) + "\n");
  write_atomic(dir / "eval_per_clip.csv", report_to_csv(report));
  return report;
}

IdentifyResult run_identify(const RunConfig& config) {
  validate(config, ConfigUse::identify);
  const auto p = prepare(config);
  IdentifyResult result;
  std::string lines;
  ClipSets predicted, annotated;
  for (const auto& clip : p.clips) {
    if (!clip.error.empty()) {
      std::cerr << "warning: skipping clip " << clip.clip.clip_id << ": " << clip.error << "\n";
      continue;
    }
    auto ids = identify_clip(clip, p, config).ids;
    nlohmann::json j = {{"clip_id", ids.clip_id}, {"cast_ids", ids.cast_ids}};
    std::set<std::string> names;
    for (const auto& id : ids.cast_ids) names.insert(p.names.at(id));
    j["names"] = names;
    if (config.frame_level_only) {
      auto arr = nlohmann::json::array();
      for (const auto& m : ids.face_matches) {
        arr.push_back({{"tracklet_id", m.tracklet_id},
                       {"frame_idx", m.frame_idx},
                       {"cast_id", m.cast_id ? nlohmann::json(*m.cast_id) : nlohmann::json()},
                       {"distance", distance_json(m.distance)}});
      }
      j["faces"] = arr;
    } else {
      auto arr = nlohmann::json::array();
      for (const auto& a : ids.assignments) {
        arr.push_back({{"tracklet_id", a.tracklet_id},
                       {"cast_id", a.cast_id ? nlohmann::json(*a.cast_id) : nlohmann::json()},
                       {"mean_distance", distance_json(a.mean_distance)}});
      }
      j["tracklets"] = arr;
    }
    lines += j.dump() + "\n";

    if (const auto gt = p.ground_truth.find(ids.clip_id); gt != p.ground_truth.end()) {
      predicted[ids.clip_id] = ids.cast_ids;
      auto& truth = annotated[ids.clip_id];
      for (const auto& g : gt->second) {
        const auto found = ner_match(g.text, p.cast);
        truth.insert(found.begin(), found.end());
      }
    }
    result.clips.push_back(std::move(ids));
  }
  write_atomic(config.output_dir / "identities.jsonl", lines);
  if (!predicted.empty()) result.against_ground_truth = char_pr(predicted, annotated);
  return result;
}

int run_annotate_dump(const RunConfig& config, const fs::path& dir) {
  validate(config, ConfigUse::annotate);
  const auto p = prepare(config);
  int written = 0;
  for (const auto& clip : p.clips) {
    if (!clip.error.empty()) {
      std::cerr << "warning: skipping clip " << clip.clip.clip_id << ": " << clip.error << "\n";
      continue;
    }
    const auto frames = annotated_frames(clip, identify_clip(clip, p, config), config);
    dump_frames(dir, clip.clip.clip_id, frames);
    written += static_cast<int>(frames.size());
  }
  return written;
}

}  // namespace adgen
