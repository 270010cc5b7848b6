#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "adgen/config.hpp"
#include "adgen/ingest.hpp"

namespace adgen::testing {

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::vector<float> random_unit(std::mt19937_64& rng, int dim = kEmbeddingDim);
// normalize(center + scale * random unit direction)
std::vector<float> jitter(const std::vector<float>& center, double scale, std::mt19937_64& rng);

struct MovieSpec {
  int num_clips = 5;
  int frames_per_clip = 40;
  int cut_at = 20;  // second shot starts here
  int width = 160;
  int height = 120;
  unsigned seed = 7;
};

struct SyntheticMovie {
  std::filesystem::path root;
  RunConfig config;
  std::vector<MovieClip> clips;
  std::vector<Subtitle> subtitles;
  std::vector<GroundTruthAD> ground_truth;
  std::vector<CastMember> cast;
  // Cast ids visible in each clip, in clip order.
  std::vector<std::vector<std::string>> present;
};

// Writes frames, detections, gallery, cast, subtitles and ground truth for a
// small movie, and returns a mock-backend config pointing at them.
SyntheticMovie make_synthetic_movie(const std::filesystem::path& root, const MovieSpec& spec = {});

}  // namespace adgen::testing
