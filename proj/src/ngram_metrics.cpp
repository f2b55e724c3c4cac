#include "pman/ngram_metrics.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "pman/error.hpp"
#include "pman/jsonl.hpp"
#include "pman/porter_stemmer.hpp"
#include "text_util.hpp"

namespace pman {

namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
         (c >= 123 && c <= 126);
}

using NgramCounts = std::map<std::span<const std::string>, std::size_t,
                             decltype([](std::span<const std::string> a, std::span<const std::string> b) {
                               return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
                             })>;

NgramCounts count_ngrams(const std::vector<std::string>& toks, int k) {
  NgramCounts counts;
  const auto n = static_cast<std::size_t>(k);
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) {
    ++counts[std::span<const std::string>(toks.data() + i, n)];
  }
  return counts;
}

void check_order(int n) {
  if (n < 1 || n > ngram::kMaxOrder) throw DataError("BLEU order must be in 1..4, got " + std::to_string(n));
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq seq;
  std::string current;
  const auto flush = [&] {
    if (!current.empty()) {
      seq.tokens_.push_back(detail::to_lower(current));
      current.clear();
    }
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (detail::is_space(ch)) {
      flush();
    } else if (is_ascii_punct(c)) {
      flush();
      seq.tokens_.emplace_back(1, ch);
    } else {
      current.push_back(ch);
    }
  }
  flush();
  return seq;
}

namespace ngram {

ModifiedPrecision modified_precision(const TokenSeq& hyp, const TokenSeq& ref, int k) {
  ModifiedPrecision p;
  const auto hyp_counts = count_ngrams(hyp.tokens(), k);
  const auto ref_counts = count_ngrams(ref.tokens(), k);
  for (const auto& [gram, count] : hyp_counts) {
    p.total += count;
    if (auto it = ref_counts.find(gram); it != ref_counts.end()) p.matches += std::min(count, it->second);
  }
  return p;
}

BleuStats& BleuStats::operator+=(const BleuStats& o) {
  for (int k = 0; k < kMaxOrder; ++k) {
    matches[k] += o.matches[k];
    totals[k] += o.totals[k];
  }
  hyp_len += o.hyp_len;
  ref_len += o.ref_len;
  return *this;
}

BleuStats bleu_stats(const TokenSeq& hyp, const TokenSeq& ref) {
  BleuStats s;
  for (int k = 1; k <= kMaxOrder; ++k) {
    const auto p = modified_precision(hyp, ref, k);
    s.matches[k - 1] = p.matches;
    s.totals[k - 1] = p.total;
  }
  s.hyp_len = hyp.size();
  s.ref_len = ref.size();
  return s;
}

double brevity_penalty(std::size_t hyp_len, std::size_t ref_len) {
  if (hyp_len == 0) return 0.0;
  if (hyp_len >= ref_len) return 1.0;
  return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

double bleu_from_stats(const BleuStats& stats, int n) {
  check_order(n);
  double log_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (stats.matches[k] == 0 || stats.totals[k] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(stats.matches[k]) / static_cast<double>(stats.totals[k]));
  }
  return brevity_penalty(stats.hyp_len, stats.ref_len) * std::exp(log_sum / n);
}

double sentence_bleu(const TokenSeq& hyp, const TokenSeq& ref, int n, double epsilon) {
  check_order(n);
  const BleuStats s = bleu_stats(hyp, ref);
  double log_sum = 0.0;
  for (int k = 0; k < n; ++k) {
    if (s.totals[k] == 0) return 0.0;
    const double num = s.matches[k] == 0 ? epsilon : static_cast<double>(s.matches[k]);
    log_sum += std::log(num / static_cast<double>(s.totals[k]));
  }
  return brevity_penalty(s.hyp_len, s.ref_len) * std::exp(log_sum / n);
}

std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
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

RougeL rouge_l_detail(const TokenSeq& hyp, const TokenSeq& ref, double beta) {
  RougeL r;
  if (hyp.empty() || ref.empty()) {
    spdlog::warn("ROUGE-L on an empty token sequence; scoring 0");
    return r;
  }
  const std::size_t lcs = lcs_length(hyp.tokens(), ref.tokens());
  if (lcs == 0) return r;
  r.precision = static_cast<double>(lcs) / static_cast<double>(hyp.size());
  r.recall = static_cast<double>(lcs) / static_cast<double>(ref.size());
  const double b2 = beta * beta;
  r.f = (1.0 + b2) * r.precision * r.recall / (r.recall + b2 * r.precision);
  return r;
}

Alignment meteor_align(const TokenSeq& hyp, const TokenSeq& ref) {
  std::vector<bool> hyp_used(hyp.size(), false), ref_used(ref.size(), false);
  // Reference position aligned to each hypothesis position, for continuing
  // an existing chunk.
  std::vector<std::ptrdiff_t> aligned_to(hyp.size(), -1);

  std::vector<std::string> hyp_stems, ref_stems;
  hyp_stems.reserve(hyp.size());
  ref_stems.reserve(ref.size());
  for (const auto& t : hyp.tokens()) hyp_stems.push_back(porter_stem(t));
  for (const auto& t : ref.tokens()) ref_stems.push_back(porter_stem(t));

  const auto stage = [&](const std::vector<std::string>& h, const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (hyp_used[i]) continue;
      std::ptrdiff_t pick = -1;
      if (i > 0 && aligned_to[i - 1] >= 0) {
        const auto next = static_cast<std::size_t>(aligned_to[i - 1] + 1);
        if (next < r.size() && !ref_used[next] && r[next] == h[i]) pick = static_cast<std::ptrdiff_t>(next);
      }
      if (pick < 0) {
        for (std::size_t j = 0; j < r.size(); ++j) {
          if (!ref_used[j] && r[j] == h[i]) {
            pick = static_cast<std::ptrdiff_t>(j);
            break;
          }
        }
      }
      if (pick >= 0) {
        hyp_used[i] = true;
        ref_used[static_cast<std::size_t>(pick)] = true;
        aligned_to[i] = pick;
      }
    }
  };
  stage(hyp.tokens(), ref.tokens());
  stage(hyp_stems, ref_stems);

  Alignment out;
  for (std::size_t i = 0; i < hyp.size(); ++i) {
    if (aligned_to[i] >= 0) out.emplace_back(i, static_cast<std::size_t>(aligned_to[i]));
  }
  return out;
}

std::size_t count_chunks(Alignment alignment) {
  if (alignment.empty()) return 0;
  std::sort(alignment.begin(), alignment.end());
  std::size_t chunks = 1;
  for (std::size_t m = 1; m < alignment.size(); ++m) {
    const bool contiguous = alignment[m].first == alignment[m - 1].first + 1 &&
                            alignment[m].second == alignment[m - 1].second + 1;
    if (!contiguous) ++chunks;
  }
  return chunks;
}

}  // namespace ngram

double bleu(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references, int n) {
  check_order(n);
  if (hypotheses.size() != references.size()) {
    throw DataError("BLEU needs equal numbers of hypotheses and references");
  }
  if (hypotheses.empty()) throw DataError("BLEU on an empty corpus");
  ngram::BleuStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) total += ngram::bleu_stats(hypotheses[i], references[i]);
  return ngram::bleu_from_stats(total, n);
}

double rouge_l(const TokenSeq& hypothesis, const TokenSeq& reference) {
  return ngram::rouge_l_detail(hypothesis, reference).f;
}

double meteor_lite(const TokenSeq& hypothesis, const TokenSeq& reference,
                   const ngram::MeteorParams& params) {
  if (hypothesis.empty() || reference.empty()) return 0.0;
  const auto alignment = ngram::meteor_align(hypothesis, reference);
  const std::size_t matches = alignment.size();
  if (matches == 0) return 0.0;
  const double p = static_cast<double>(matches) / static_cast<double>(hypothesis.size());
  const double r = static_cast<double>(matches) / static_cast<double>(reference.size());
  const double fmean = p * r / (params.alpha * p + (1.0 - params.alpha) * r);
  const double frag = static_cast<double>(ngram::count_chunks(alignment)) / static_cast<double>(matches);
  const double penalty = params.gamma * std::pow(frag, params.beta);
  return fmean * (1.0 - penalty);
}

MetricReport corpus_report(std::span<const TokenSeq> hypotheses, std::span<const TokenSeq> references,
                           Execution exec) {
  if (hypotheses.size() != references.size()) {
    throw DataError("metric report needs equal numbers of hypotheses and references");
  }
  if (hypotheses.empty()) throw DataError("metric report on an empty corpus");

  const auto n = static_cast<std::ptrdiff_t>(hypotheses.size());
  std::vector<ngram::BleuStats> stats(hypotheses.size());
  std::vector<double> rouge(hypotheses.size()), meteor(hypotheses.size());

  if (exec == Execution::Parallel) {
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      stats[i] = ngram::bleu_stats(hypotheses[i], references[i]);
      rouge[i] = rouge_l(hypotheses[i], references[i]);
      meteor[i] = meteor_lite(hypotheses[i], references[i]);
    }
  } else {
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      stats[i] = ngram::bleu_stats(hypotheses[i], references[i]);
      rouge[i] = rouge_l(hypotheses[i], references[i]);
      meteor[i] = meteor_lite(hypotheses[i], references[i]);
    }
  }

  ngram::BleuStats total;
  double rouge_sum = 0.0, meteor_sum = 0.0;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    total += stats[i];
    rouge_sum += rouge[i];
    meteor_sum += meteor[i];
  }

  MetricReport report;
  for (int k = 1; k <= ngram::kMaxOrder; ++k) report.bleu[k - 1] = ngram::bleu_from_stats(total, k);
  report.rouge_l = rouge_sum / static_cast<double>(hypotheses.size());
  report.meteor = meteor_sum / static_cast<double>(hypotheses.size());
  report.corpus_size = hypotheses.size();
  return report;
}

MetricReport corpus_report(std::span<const TextPair> pairs, Execution exec) {
  std::vector<TokenSeq> hyps(pairs.size()), refs(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    hyps[i] = tokenize(pairs[i].hypothesis);
    refs[i] = tokenize(pairs[i].reference);
  }
  return corpus_report(hyps, refs, exec);
}

nlohmann::json to_json(const MetricReport& r) {
  return nlohmann::json{{"schema_version", kSchemaVersion},
                        {"bleu", {{"1", r.bleu[0]}, {"2", r.bleu[1]}, {"3", r.bleu[2]}, {"4", r.bleu[3]}}},
                        {"rouge_l", r.rouge_l},
                        {"meteor_lite", r.meteor},
                        {"corpus_size", r.corpus_size},
                        {"tokenizer", "lowercase+whitespace+punct-split"},
                        {"rouge_beta", ngram::kRougeBeta},
                        {"meteor_params",
                         {{"alpha", ngram::kMeteorAlpha}, {"beta", ngram::kMeteorBeta}, {"gamma", ngram::kMeteorGamma}}},
                        {"bleu_smoothing", "none"}};
}

std::string render_metric_row(const std::string& name, const MetricReport& r, bool with_header) {
  const std::size_t w = std::max<std::size_t>(5, detail::display_width(name));
  const auto cell = [](double v) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.1f", v * 100.0);
    return detail::pad_left(buf, 6);
  };
  std::ostringstream os;
  if (with_header) {
    os << detail::pad_right("Model", w);
    for (const char* h : {"BL-1", "BL-2", "BL-3", "BL-4", "RG-L", "MTR-l"}) os << "  " << detail::pad_left(h, 6);
    os << "  " << detail::pad_left("n", 6) << '\n';
  }
  os << detail::pad_right(name, w);
  for (double b : r.bleu) os << "  " << cell(b);
  os << "  " << cell(r.rouge_l) << "  " << cell(r.meteor) << "  "
     << detail::pad_left(std::to_string(r.corpus_size), 6) << '\n';
  return os.str();
}

}  // namespace pman
