#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace pman {

/// Lowercase word tokens produced by tokenize(); never holds an empty token.
class TokenSeq {
 public:
  TokenSeq() = default;

  const std::vector<std::string>& tokens() const noexcept { return tokens_; }
  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::string& operator[](std::size_t i) const { return tokens_[i]; }

  friend bool operator==(const TokenSeq&, const TokenSeq&) = default;
  friend TokenSeq tokenize(std::string_view text);

 private:
  std::vector<std::string> tokens_;
};

/// ASCII-lowercases, splits on whitespace, and emits every ASCII punctuation
/// character as its own token: "don't stop" -> [don, ', t, stop].
TokenSeq tokenize(std::string_view text);

namespace ngram {

inline constexpr int kMaxOrder = 4;
inline constexpr double kRougeBeta = 1.2;
inline constexpr double kMeteorAlpha = 0.9;
inline constexpr double kMeteorBeta = 3.0;
inline constexpr double kMeteorGamma = 0.5;
inline constexpr double kSentenceBleuEpsilon = 0.1;

/// Clipped k-gram matches and hypothesis k-gram count for one pair.
struct ModifiedPrecision {
  std::size_t matches = 0;
  std::size_t total = 0;
};

ModifiedPrecision modified_precision(const TokenSeq& hyp, const TokenSeq& ref, int k);

/// Sufficient statistics for corpus BLEU; additive across pairs.
struct BleuStats {
  std::array<std::size_t, kMaxOrder> matches{};
  std::array<std::size_t, kMaxOrder> totals{};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  BleuStats& operator+=(const BleuStats& o);
  friend bool operator==(const BleuStats&, const BleuStats&) = default;
};

BleuStats bleu_stats(const TokenSeq& hyp, const TokenSeq& ref);

/// BLEU-n from accumulated statistics: brevity penalty times the geometric
/// mean of modified precisions 1..n. Unsmoothed: any zero precision gives 0.
double bleu_from_stats(const BleuStats& stats, int n);

double brevity_penalty(std::size_t hyp_len, std::size_t ref_len);

/// Sentence-level BLEU-n with add-epsilon smoothing of zero-match orders.
double sentence_bleu(const TokenSeq& hyp, const TokenSeq& ref, int n,
                     double epsilon = kSentenceBleuEpsilon);

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b);

struct RougeL {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

/// LCS-based precision / recall / F-beta (beta = 1.2). Empty input scores 0
/// and logs a warning.
RougeL rouge_l_detail(const TokenSeq& hyp, const TokenSeq& ref, double beta = kRougeBeta);

/// One unigram alignment: hypothesis index, reference index.
using Alignment = std::vector<std::pair<std::size_t, std::size_t>>;

/// Exact-match stage, then Porter-stem stage, each one-to-one.
Alignment meteor_align(const TokenSeq& hyp, const TokenSeq& ref);

/// Contiguous runs of the alignment (adjacent in both sequences).
std::size_t count_chunks(Alignment alignment);

struct MeteorParams {
  double alpha = kMeteorAlpha;
  double beta = kMeteorBeta;
  double gamma = kMeteorGamma;
};

}  // namespace ngram

/// Corpus BLEU-n (n in 1..4). Throws DataError on an empty corpus, a length
/// mismatch, or n out of range.
double bleu(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references, int n);

/// ROUGE-L F-score of one pair.
double rouge_l(const TokenSeq& hypothesis, const TokenSeq& reference);

/// METEOR without the synonym stage: exact + stem alignment, recall-weighted
/// F-mean, fragmentation penalty. Zero matches give 0.
double meteor_lite(const TokenSeq& hypothesis, const TokenSeq& reference,
                   const ngram::MeteorParams& params = {});

struct MetricReport {
  std::array<double, ngram::kMaxOrder> bleu{};
  double rouge_l = 0.0;  // mean over pairs
  double meteor = 0.0;   // mean over pairs
  std::size_t corpus_size = 0;
};

struct TextPair {
  std::string id;
  std::string hypothesis;
  std::string reference;
};

enum class Execution { Serial, Parallel };

/// Corpus-level report. Parallel and serial execution give bit-identical
/// results: per-pair values are computed concurrently and reduced in input
/// order.
MetricReport corpus_report(std::span<const TokenSeq> hypotheses,
                           std::span<const TokenSeq> references,
                           Execution exec = Execution::Parallel);

MetricReport corpus_report(std::span<const TextPair> pairs, Execution exec = Execution::Parallel);

nlohmann::json to_json(const MetricReport& r);

/// One aligned row: BL-1..BL-4, RG-L, METEOR-lite, as percentages.
std::string render_metric_row(const std::string& name, const MetricReport& r, bool with_header);

}  // namespace pman
