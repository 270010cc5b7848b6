#include "adgen/faceid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adgen/error.hpp"

namespace adgen {

FaceEmbedding FaceEmbedding::normalized(std::span<const float> values) {
  if (values.size() != kEmbeddingDim) {
    throw PreconditionError("face embedding must have " + std::to_string(kEmbeddingDim) +
                            " components, got " + std::to_string(values.size()));
  }
  double sq = 0.0;
  for (float v : values) {
    if (!std::isfinite(v)) throw PreconditionError("face embedding has a non-finite component");
    sq += static_cast<double>(v) * v;
  }
  if (sq <= 0.0) throw PreconditionError("face embedding is the zero vector");
  const double inv = 1.0 / std::sqrt(sq);
  std::vector<float> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = static_cast<float>(values[i] * inv);
  }
  return FaceEmbedding(std::move(out));
}

double embed_distance(const FaceEmbedding& a, const FaceEmbedding& b) {
  const auto x = a.values();
  const auto y = b.values();
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += static_cast<double>(x[i]) * y[i];
  return 1.0 - dot;
}

std::vector<std::size_t> mine_exemplar_indices(std::span<const FaceEmbedding> originals,
                                               std::span<const FaceEmbedding> queries,
                                               const ExemplarOptions& options) {
  if (options.k < 0) throw PreconditionError("mine_exemplars: K must be >= 0");
  if (options.k == 0 || queries.empty()) return {};
  if (originals.empty()) throw PreconditionError("mine_exemplars: no original embeddings");

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(queries.size());
  for (std::size_t q = 0; q < queries.size(); ++q) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& o : originals) best = std::min(best, embed_distance(o, queries[q]));
    if (options.max_distance && best > *options.max_distance) continue;
    scored.emplace_back(best, q);
  }
  const auto k = std::min(static_cast<std::size_t>(options.k), scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(k),
                    scored.end());
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<FaceEmbedding> mine_exemplars(std::span<const FaceEmbedding> originals,
                                          std::span<const FaceEmbedding> queries,
                                          const ExemplarOptions& options) {
  std::vector<FaceEmbedding> out;
  for (auto i : mine_exemplar_indices(originals, queries, options)) out.push_back(queries[i]);
  return out;
}

std::vector<FaceEmbedding> GalleryEntry::combined() const {
  std::vector<FaceEmbedding> all = original;
  all.insert(all.end(), exemplars.begin(), exemplars.end());
  return all;
}

CastGallery::CastGallery(std::vector<GalleryEntry> entries) : entries_(std::move(entries)) {
  combined_.reserve(entries_.size());
  for (const auto& e : entries_) {
    if (e.original.empty()) {
      throw PreconditionError("cast '" + e.cast_id + "' has no original face embedding");
    }
    combined_.push_back(e.combined());
  }
}

CastGallery build_cast_gallery(const std::vector<CastOriginals>& casts,
                               std::span<const FaceEmbedding> all_queries,
                               const ExemplarOptions& options) {
  std::vector<GalleryEntry> entries;
  entries.reserve(casts.size());
  for (const auto& c : casts) {
    if (c.embeddings.empty()) {
      throw PreconditionError("cast '" + c.cast_id + "' has no original face embedding");
    }
    entries.push_back({c.cast_id, c.embeddings, mine_exemplars(c.embeddings, all_queries, options)});
  }
  return CastGallery(std::move(entries));
}

std::vector<FaceEmbedding> tracklet_faces(const Tracklet& tracklet) {
  std::vector<FaceEmbedding> out;
  out.reserve(tracklet.face_embeddings.size());
  for (const auto& [frame, emb] : tracklet.face_embeddings) {
    out.push_back(FaceEmbedding::normalized(emb));
  }
  return out;
}

std::vector<FaceEmbedding> all_tracklet_faces(std::span<const Tracklet> tracklets) {
  std::vector<FaceEmbedding> out;
  for (const auto& t : tracklets) {
    auto faces = tracklet_faces(t);
    std::move(faces.begin(), faces.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<double> cast_mean_distances(std::span<const FaceEmbedding> faces,
                                        const CastGallery& gallery) {
  std::vector<double> d(gallery.size(), std::numeric_limits<double>::infinity());
  if (faces.empty()) return d;
  for (std::size_t i = 0; i < gallery.size(); ++i) {
    const auto refs = gallery.combined(i);
    double sum = 0.0;
    for (const auto& g : refs) {
      for (const auto& f : faces) sum += embed_distance(g, f);
    }
    d[i] = sum / static_cast<double>(refs.size() * faces.size());
  }
  return d;
}

IdentityAssignment match_faces(std::span<const FaceEmbedding> faces, const CastGallery& gallery,
                               double tau, int tracklet_id) {
  if (gallery.empty()) throw PreconditionError("match_tracklet: empty gallery");
  IdentityAssignment out;
  out.tracklet_id = tracklet_id;
  if (faces.empty()) return out;
  const auto d = cast_mean_distances(faces, gallery);
  std::size_t best = 0;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (d[i] < d[best]) best = i;
  }
  out.mean_distance = d[best];
  if (d[best] < tau) out.cast_id = gallery.entries()[best].cast_id;
  return out;
}

IdentityAssignment match_tracklet(const Tracklet& tracklet, const CastGallery& gallery,
                                  double tau) {
  return match_faces(tracklet_faces(tracklet), gallery, tau, tracklet.tracklet_id);
}

std::vector<IdentityAssignment> assign_identities(std::span<const Tracklet> tracklets,
                                                  const CastGallery& gallery, double tau) {
  std::vector<IdentityAssignment> out;
  out.reserve(tracklets.size());
  for (const auto& t : tracklets) out.push_back(match_tracklet(t, gallery, tau));
  return out;
}

std::vector<FaceMatch> match_faces_frame_level(std::span<const Tracklet> tracklets,
                                               const CastGallery& gallery, double tau,
                                               const std::set<int>* frames) {
  std::vector<FaceMatch> out;
  for (const auto& t : tracklets) {
    for (const auto& [frame, emb] : t.face_embeddings) {
      if (frames != nullptr && !frames->contains(frame)) continue;
      const FaceEmbedding face = FaceEmbedding::normalized(emb);
      const auto m = match_faces(std::span(&face, 1), gallery, tau, t.tracklet_id);
      out.push_back({t.tracklet_id, frame, m.cast_id, m.mean_distance});
    }
  }
  return out;
}

std::set<std::string> identity_set(std::span<const FaceMatch> matches) {
  std::set<std::string> out;
  for (const auto& m : matches) {
    if (m.cast_id) out.insert(*m.cast_id);
  }
  return out;
}

std::set<std::string> identity_set(std::span<const IdentityAssignment> assignments) {
  std::set<std::string> out;
  for (const auto& a : assignments) {
    if (a.cast_id) out.insert(*a.cast_id);
  }
  return out;
}

void save_gallery(const std::filesystem::path& path, const CastGallery& gallery) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  auto row = [&](const std::string& id, const char* kind, const FaceEmbedding& e) {
    nlohmann::json j;
    j["cast_id"] = id;
    j["kind"] = kind;
    j["embedding"] = std::vector<float>(e.values().begin(), e.values().end());
    out << j.dump() << "\n";
  };
  for (const auto& entry : gallery.entries()) {
    for (const auto& e : entry.original) row(entry.cast_id, "original", e);
    for (const auto& e : entry.exemplars) row(entry.cast_id, "exemplar", e);
  }
}

namespace {

std::vector<GalleryEntry> read_gallery_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<GalleryEntry> entries;
  std::map<std::string, std::size_t> index;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto ctx = path.string() + ":" + std::to_string(line_no) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      const auto id = j.at("cast_id").get<std::string>();
      const auto kind = j.at("kind").get<std::string>();
      const auto values = j.at("embedding").get<std::vector<float>>();
      if (kind != "original" && kind != "exemplar") {
        throw InputError(ctx + "kind must be original or exemplar");
      }
      auto [it, inserted] = index.emplace(id, entries.size());
      if (inserted) entries.push_back({id, {}, {}});
      auto& entry = entries[it->second];
      auto emb = FaceEmbedding::normalized(values);
      (kind == "original" ? entry.original : entry.exemplars).push_back(std::move(emb));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(ctx + e.what());
    } catch (const PreconditionError& e) {
      throw InputError(ctx + e.what());
    }
  }
  return entries;
}

}  // namespace

CastGallery load_gallery(const std::filesystem::path& path) {
  return CastGallery(read_gallery_rows(path));
}

std::vector<CastOriginals> load_gallery_originals(const std::filesystem::path& path) {
  std::vector<CastOriginals> out;
  for (auto& e : read_gallery_rows(path)) {
    if (e.original.empty()) {
      throw InputError(path.string() + ": cast '" + e.cast_id + "' has no original embedding");
    }
    out.push_back({e.cast_id, std::move(e.original)});
  }
  return out;
}

}  // namespace adgen
