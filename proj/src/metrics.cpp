#include "adgen/metrics.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "adgen/error.hpp"
#include "adgen/generation.hpp"

namespace adgen {

Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (u < 0x80 && (std::isspace(u) || std::ispunct(u))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(u < 0x80 ? static_cast<char>(std::tolower(u)) : c);
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::size_t lcs_len(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference,
               double beta) {
  if (candidate.empty() || reference.empty()) return 0.0;
  const auto lcs = static_cast<double>(lcs_len(candidate, reference));
  if (lcs == 0.0) return 0.0;
  const double recall = lcs / static_cast<double>(reference.size());
  const double precision = lcs / static_cast<double>(candidate.size());
  const double b2 = beta * beta;
  return (1.0 + b2) * recall * precision / (recall + b2 * precision);
}

double rouge_l(std::span<const std::string> candidate, const std::vector<Tokens>& references,
               double beta) {
  if (candidate.empty()) return 0.0;
  double best_p = 0.0, best_r = 0.0;
  for (const auto& ref : references) {
    if (ref.empty()) continue;
    const auto lcs = static_cast<double>(lcs_len(candidate, ref));
    best_p = std::max(best_p, lcs / static_cast<double>(candidate.size()));
    best_r = std::max(best_r, lcs / static_cast<double>(ref.size()));
  }
  if (best_p == 0.0 || best_r == 0.0) return 0.0;
  const double b2 = beta * beta;
  return (1.0 + b2) * best_r * best_p / (best_r + b2 * best_p);
}

NgramCounts ngrams(std::span<const std::string> tokens, int n) {
  NgramCounts out;
  if (n < 1 || static_cast<std::size_t>(n) > tokens.size()) return out;
  for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (int k = 1; k < n; ++k) key += " " + tokens[i + static_cast<std::size_t>(k)];
    ++out[key];
  }
  return out;
}

namespace {

std::set<std::string> clip_ngrams(const std::vector<Tokens>& refs, int n) {
  std::set<std::string> seen;
  for (const auto& r : refs) {
    for (auto& [g, c] : ngrams(r, n)) seen.insert(g);
  }
  return seen;
}

}  // namespace

CiderIdf::CiderIdf(const std::vector<std::vector<Tokens>>& reference_corpus)
    : corpus_size_(reference_corpus.size()) {
  if (reference_corpus.empty()) throw PreconditionError("idf: empty reference corpus");
  for (const auto& refs : reference_corpus) {
    for (int n = 1; n <= kMaxN; ++n) {
      for (const auto& g : clip_ngrams(refs, n)) ++df_[g];
    }
  }
}

double CiderIdf::idf(const std::string& ngram) const {
  const auto it = df_.find(ngram);
  // Unseen n-grams count as appearing in one clip.
  const double df = it == df_.end() ? 1.0 : static_cast<double>(it->second);
  return std::log(static_cast<double>(corpus_size_) / df);
}

std::map<std::string, double> idf(const std::vector<std::vector<Tokens>>& reference_corpus,
                                  int n) {
  if (reference_corpus.empty()) throw PreconditionError("idf: empty reference corpus");
  std::map<std::string, int> df;
  for (const auto& refs : reference_corpus) {
    for (const auto& g : clip_ngrams(refs, n)) ++df[g];
  }
  std::map<std::string, double> out;
  const double size = static_cast<double>(reference_corpus.size());
  for (const auto& [g, count] : df) out[g] = std::log(size / count);
  return out;
}

double cider_d(std::span<const std::string> candidate, const std::vector<Tokens>& references,
               const CiderIdf& corpus_idf, double sigma) {
  if (references.empty()) return 0.0;
  double total = 0.0;
  for (int n = 1; n <= CiderIdf::kMaxN; ++n) {
    const auto cand = ngrams(candidate, n);
    std::map<std::string, double> cand_vec;
    double cand_norm = 0.0;
    for (const auto& [g, c] : cand) {
      const double v = c * corpus_idf.idf(g);
      cand_vec[g] = v;
      cand_norm += v * v;
    }
    cand_norm = std::sqrt(cand_norm);

    double per_ref = 0.0;
    for (const auto& ref : references) {
      const auto counts = ngrams(ref, n);
      double ref_norm = 0.0;
      std::map<std::string, double> ref_vec;
      for (const auto& [g, c] : counts) {
        const double v = c * corpus_idf.idf(g);
        ref_vec[g] = v;
        ref_norm += v * v;
      }
      ref_norm = std::sqrt(ref_norm);
      if (cand_norm == 0.0 || ref_norm == 0.0) continue;
      double dot = 0.0;
      for (const auto& [g, v] : cand_vec) {
        if (auto it = ref_vec.find(g); it != ref_vec.end()) dot += std::min(v, it->second) * it->second;
      }
      const double delta =
          static_cast<double>(candidate.size()) - static_cast<double>(ref.size());
      per_ref += dot / (cand_norm * ref_norm) * std::exp(-(delta * delta) / (2.0 * sigma * sigma));
    }
    total += per_ref / static_cast<double>(references.size());
  }
  return 10.0 * total / CiderIdf::kMaxN;
}

std::set<std::string> ner_match(std::string_view ad_text, std::span<const CastMember> cast) {
  const auto tokens = tokenize(ad_text);
  auto contains = [&](const Tokens& needle) {
    if (needle.empty() || needle.size() > tokens.size()) return false;
    return std::search(tokens.begin(), tokens.end(), needle.begin(), needle.end()) != tokens.end();
  };
  std::set<std::string> out;
  for (const auto& member : cast) {
    bool hit = contains(tokenize(member.character_name));
    std::istringstream parts(member.character_name);
    for (std::string part; !hit && parts >> part;) {
      if (part.size() >= 3) hit = contains(tokenize(part));
    }
    if (hit) out.insert(member.cast_id);
  }
  return out;
}

PrecisionRecall char_pr(const ClipSets& predictions, const ClipSets& annotations) {
  if (predictions.size() != annotations.size() ||
      !std::equal(predictions.begin(), predictions.end(), annotations.begin(),
                  [](const auto& a, const auto& b) { return a.first == b.first; })) {
    throw PreconditionError("char_pr: predictions and annotations cover different clips");
  }
  PrecisionRecall pr;
  for (const auto& [clip, predicted] : predictions) {
    const auto& truth = annotations.at(clip);
    for (const auto& id : predicted) (truth.contains(id) ? pr.tp : pr.fp)++;
    for (const auto& id : truth) {
      if (!predicted.contains(id)) ++pr.fn;
    }
  }
  pr.recall = pr.tp + pr.fn > 0 ? static_cast<double>(pr.tp) / (pr.tp + pr.fn) : 0.0;
  pr.precision = pr.tp + pr.fp > 0 ? static_cast<double>(pr.tp) / (pr.tp + pr.fp) : 0.0;
  return pr;
}

EvalReport evaluate_run(std::span<const ADOutput> outputs,
                        std::span<const GroundTruthAD> ground_truth,
                        std::span<const CastMember> cast, const EvalOptions& options) {
  if (outputs.empty()) throw PreconditionError("evaluate_run: no outputs to evaluate");
  std::map<std::string, std::vector<const GroundTruthAD*>> gt_by_clip;
  for (const auto& g : ground_truth) gt_by_clip[g.clip_id].push_back(&g);

  std::vector<std::string> missing;
  std::set<std::string> seen;
  for (const auto& o : outputs) {
    if (!gt_by_clip.contains(o.clip_id)) missing.push_back(o.clip_id);
    if (!seen.insert(o.clip_id).second) {
      throw InputError("evaluate_run: duplicate output for clip " + o.clip_id);
    }
  }
  if (!missing.empty()) {
    std::string msg = "no ground truth for clip(s):";
    for (const auto& m : missing) msg += " " + m;
    throw InputError(msg);
  }

  std::vector<std::vector<Tokens>> corpus;
  corpus.reserve(outputs.size());
  for (const auto& o : outputs) {
    std::vector<Tokens> refs;
    for (const auto* g : gt_by_clip.at(o.clip_id)) refs.push_back(tokenize(g->text));
    corpus.push_back(std::move(refs));
  }
  const CiderIdf corpus_idf(corpus);

  EvalReport report;
  ClipSets predicted, annotated;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    const auto& o = outputs[i];
    const auto cand = tokenize(o.text);
    ClipScore score;
    score.clip_id = o.clip_id;
    score.rouge_l = rouge_l(cand, corpus[i], options.beta);
    score.cider_d = cider_d(cand, corpus[i], corpus_idf, options.sigma);
    score.predicted_characters = ner_match(o.text, cast);
    for (const auto* g : gt_by_clip.at(o.clip_id)) {
      auto names = ner_match(g->text, cast);
      score.annotated_characters.insert(names.begin(), names.end());
    }
    predicted[o.clip_id] = score.predicted_characters;
    annotated[o.clip_id] = score.annotated_characters;
    report.rouge_l += score.rouge_l;
    report.cider_d += score.cider_d;
    report.per_clip.push_back(std::move(score));
  }
  report.rouge_l /= static_cast<double>(outputs.size());
  report.cider_d /= static_cast<double>(outputs.size());
  const auto pr = char_pr(predicted, annotated);
  report.char_recall = pr.recall;
  report.char_precision = pr.precision;
  return report;
}

std::string report_to_json(const EvalReport& report, int indent) {
  nlohmann::json j;
  j["rouge_l"] = report.rouge_l;
  j["cider_d"] = report.cider_d;
  j["char_recall"] = report.char_recall;
  j["char_precision"] = report.char_precision;
  j["num_clips"] = report.per_clip.size();
  j["per_clip"] = nlohmann::json::array();
  for (const auto& c : report.per_clip) {
    j["per_clip"].push_back({{"clip_id", c.clip_id},
                             {"rouge_l", c.rouge_l},
                             {"cider_d", c.cider_d},
                             {"predicted_characters", c.predicted_characters},
                             {"annotated_characters", c.annotated_characters}});
  }
  return j.dump(indent);
}

std::string report_to_csv(const EvalReport& report) {
  auto joined = [](const std::set<std::string>& s) {
    std::string out;
    for (const auto& x : s) out += (out.empty() ? "" : ";") + x;
    return out;
  };
  std::ostringstream out;
  out << "clip_id,rouge_l,cider_d,predicted_characters,annotated_characters\n";
  out << std::setprecision(10);
  for (const auto& c : report.per_clip) {
    out << c.clip_id << "," << c.rouge_l << "," << c.cider_d << "," << joined(c.predicted_characters)
        << "," << joined(c.annotated_characters) << "\n";
  }
  return out.str();
}

}  // namespace adgen
