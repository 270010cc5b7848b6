#pragma once

#include <cstddef>
#include <filesystem>
#include <limits>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "adgen/tracker.hpp"

namespace adgen {

// Unit-length face descriptor of kEmbeddingDim floats.
class FaceEmbedding {
 public:
  // Scales `values` to unit L2 norm. Throws PreconditionError on a wrong
  // dimension, a zero vector or non-finite components.
  static FaceEmbedding normalized(std::span<const float> values);

  std::span<const float> values() const { return values_; }
  bool operator==(const FaceEmbedding&) const = default;

 private:
  explicit FaceEmbedding(std::vector<float> v) : values_(std::move(v)) {}
  std::vector<float> values_;
};

// Cosine distance 1 - a.b, accumulated in double.
double embed_distance(const FaceEmbedding& a, const FaceEmbedding& b);

struct ExemplarOptions {
  int k = 5;
  // Queries farther than this from every original are never mined.
  std::optional<double> max_distance;
};

// Indices into `queries` of the k nearest faces, where a query's distance is
// its minimum distance over `originals`. Ascending distance, ties by index.
std::vector<std::size_t> mine_exemplar_indices(std::span<const FaceEmbedding> originals,
                                               std::span<const FaceEmbedding> queries,
                                               const ExemplarOptions& options = {});
std::vector<FaceEmbedding> mine_exemplars(std::span<const FaceEmbedding> originals,
                                          std::span<const FaceEmbedding> queries,
                                          const ExemplarOptions& options = {});

struct CastOriginals {
  std::string cast_id;
  std::vector<FaceEmbedding> embeddings;
};

struct GalleryEntry {
  std::string cast_id;
  std::vector<FaceEmbedding> original;
  std::vector<FaceEmbedding> exemplars;

  std::vector<FaceEmbedding> combined() const;
};

class CastGallery {
 public:
  CastGallery() = default;
  explicit CastGallery(std::vector<GalleryEntry> entries);

  const std::vector<GalleryEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  // Gallery embeddings (original then exemplars) of entry i.
  std::span<const FaceEmbedding> combined(std::size_t i) const { return combined_[i]; }

 private:
  std::vector<GalleryEntry> entries_;
  std::vector<std::vector<FaceEmbedding>> combined_;
};

// A query may be mined as an exemplar for several casts.
CastGallery build_cast_gallery(const std::vector<CastOriginals>& casts,
                               std::span<const FaceEmbedding> all_queries,
                               const ExemplarOptions& options = {});

struct IdentityAssignment {
  int tracklet_id = 0;
  std::optional<std::string> cast_id;
  double mean_distance = std::numeric_limits<double>::infinity();
};

std::vector<FaceEmbedding> tracklet_faces(const Tracklet& tracklet);
std::vector<FaceEmbedding> all_tracklet_faces(std::span<const Tracklet> tracklets);

// Mean distance over every (gallery embedding, face) pair, per cast.
std::vector<double> cast_mean_distances(std::span<const FaceEmbedding> faces,
                                        const CastGallery& gallery);

IdentityAssignment match_faces(std::span<const FaceEmbedding> faces,
                               const CastGallery& gallery, double tau,
                               int tracklet_id = 0);
IdentityAssignment match_tracklet(const Tracklet& tracklet, const CastGallery& gallery,
                                  double tau = 0.6);
std::vector<IdentityAssignment> assign_identities(std::span<const Tracklet> tracklets,
                                                  const CastGallery& gallery,
                                                  double tau = 0.6);

// Face-recognition-only mode: each face is matched on its own.
struct FaceMatch {
  int tracklet_id = 0;
  int frame_idx = 0;
  std::optional<std::string> cast_id;
  double distance = std::numeric_limits<double>::infinity();
};

// Restricted to `frames` when given.
std::vector<FaceMatch> match_faces_frame_level(std::span<const Tracklet> tracklets,
                                               const CastGallery& gallery, double tau,
                                               const std::set<int>* frames = nullptr);
std::set<std::string> identity_set(std::span<const FaceMatch> matches);
std::set<std::string> identity_set(std::span<const IdentityAssignment> assignments);

// JSON-lines {cast_id, kind: "original"|"exemplar", embedding}.
void save_gallery(const std::filesystem::path& path, const CastGallery& gallery);
CastGallery load_gallery(const std::filesystem::path& path);
// Only the "original" rows, grouped by cast in first-appearance order.
std::vector<CastOriginals> load_gallery_originals(const std::filesystem::path& path);

}  // namespace adgen
