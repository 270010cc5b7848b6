#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adgen/ingest.hpp"

namespace adgen {

struct ADOutput;

using Tokens = std::vector<std::string>;

// Lowercase, ASCII punctuation to spaces, split on whitespace.
Tokens tokenize(std::string_view text);

std::size_t lcs_len(std::span<const std::string> a, std::span<const std::string> b);

double rouge_l(std::span<const std::string> candidate,
               std::span<const std::string> reference, double beta = 1.2);

// Several references: F-measure of the best precision and the best recall.
double rouge_l(std::span<const std::string> candidate, const std::vector<Tokens>& references,
               double beta = 1.2);

using NgramCounts = std::map<std::string, int>;
NgramCounts ngrams(std::span<const std::string> tokens, int n);

// Document frequencies over clips, each clip given as its reference set.
class CiderIdf {
 public:
  static constexpr int kMaxN = 4;
  explicit CiderIdf(const std::vector<std::vector<Tokens>>& reference_corpus);

  double idf(const std::string& ngram) const;
  std::size_t corpus_size() const { return corpus_size_; }

 private:
  std::size_t corpus_size_ = 0;
  std::map<std::string, int> df_;
};

// Natural-log idf table for n-grams of order n.
std::map<std::string, double> idf(const std::vector<std::vector<Tokens>>& reference_corpus,
                                  int n);

double cider_d(std::span<const std::string> candidate, const std::vector<Tokens>& references,
               const CiderIdf& corpus_idf, double sigma = 6.0);

std::set<std::string> ner_match(std::string_view ad_text, std::span<const CastMember> cast);

using ClipSets = std::map<std::string, std::set<std::string>>;
struct PrecisionRecall {
  double recall = 0.0;
  double precision = 0.0;
  int tp = 0;
  int fp = 0;
  int fn = 0;
};
// Throws PreconditionError when the clip keys differ.
PrecisionRecall char_pr(const ClipSets& predictions, const ClipSets& annotations);

struct ClipScore {
  std::string clip_id;
  double rouge_l = 0.0;
  double cider_d = 0.0;
  std::set<std::string> predicted_characters;
  std::set<std::string> annotated_characters;
};

struct EvalReport {
  double rouge_l = 0.0;
  double cider_d = 0.0;
  double char_recall = 0.0;
  double char_precision = 0.0;
  std::vector<ClipScore> per_clip;
};

struct EvalOptions {
  double beta = 1.2;
  double sigma = 6.0;
};

// Per-clip scores against all ground-truth lines of the clip; corpus scores
// are means over clips. The idf corpus is the evaluated clips' references.
EvalReport evaluate_run(std::span<const ADOutput> outputs,
                        std::span<const GroundTruthAD> ground_truth,
                        std::span<const CastMember> cast, const EvalOptions& options = {});

std::string report_to_json(const EvalReport& report, int indent = 2);
std::string report_to_csv(const EvalReport& report);

}  // namespace adgen
