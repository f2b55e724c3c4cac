#include <gtest/gtest.h>

#include <bit>
#include <bitset>
#include <cmath>
#include <random>

#include "pman/error.hpp"
#include "pman/ngram_metrics.hpp"
#include "pman/porter_stemmer.hpp"

namespace pman {
namespace {

std::vector<std::string> toks(std::initializer_list<const char*> words) {
  return {words.begin(), words.end()};
}

TEST(Tokenize, Examples) {
  EXPECT_EQ(tokenize("Who directed Titanic?").tokens(), toks({"who", "directed", "titanic", "?"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t\n").empty());
  EXPECT_EQ(tokenize("don't stop").tokens(), toks({"don", "'", "t", "stop"}));
  EXPECT_EQ(tokenize("(1795-1861),").tokens(), toks({"(", "1795", "-", "1861", ")", ","}));
  EXPECT_EQ(tokenize("Café ÉTÉ").tokens(), toks({"café", "ÉtÉ"}));  // ASCII-only lowercasing
}

TEST(Tokenize, NeverEmitsEmptyTokens) {
  std::mt19937_64 rng(3);
  const std::string alphabet = "aB .,'\t\n-?xyz";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    for (int i = std::uniform_int_distribution<int>(0, 30)(rng); i > 0; --i) {
      s.push_back(alphabet[std::uniform_int_distribution<std::size_t>(0, alphabet.size() - 1)(rng)]);
    }
    for (const auto& t : tokenize(s).tokens()) EXPECT_FALSE(t.empty());
  }
}

TEST(Bleu, IdentityIsOne) {
  const std::vector<TokenSeq> h{tokenize("what school of music was weber associated with ?")};
  for (int n = 1; n <= 4; ++n) EXPECT_DOUBLE_EQ(bleu(h, h, n), 1.0);
}

TEST(Bleu, ClippedUnigramPrecision) {
  const auto p = ngram::modified_precision(tokenize("the the the"), tokenize("the cat"), 1);
  EXPECT_EQ(p.matches, 1u);
  EXPECT_EQ(p.total, 3u);
  const std::vector<TokenSeq> h{tokenize("the the the")}, r{tokenize("the cat")};
  EXPECT_DOUBLE_EQ(bleu(h, r, 1), 1.0 / 3.0);  // no brevity penalty: hyp is longer
}

TEST(Bleu, BrevityPenaltyAndDisjointPairs) {
  EXPECT_DOUBLE_EQ(ngram::brevity_penalty(2, 4), std::exp(-1.0));
  EXPECT_DOUBLE_EQ(ngram::brevity_penalty(5, 4), 1.0);
  const std::vector<TokenSeq> h{tokenize("the cat")}, r{tokenize("the cat sat down")};
  EXPECT_DOUBLE_EQ(bleu(h, r, 1), std::exp(-1.0));
  const std::vector<TokenSeq> d1{tokenize("alpha beta")}, d2{tokenize("gamma delta")};
  EXPECT_EQ(bleu(d1, d2, 1), 0.0);
}

TEST(Bleu, CorpusLevelPoolsCounts) {
  const std::vector<TokenSeq> h{tokenize("a b c d"), tokenize("x y")};
  const std::vector<TokenSeq> r{tokenize("a b c d"), tokenize("x z")};
  // Unigrams 5/6, bigrams 3/4 pooled; lengths equal.
  EXPECT_NEAR(bleu(h, r, 2), std::sqrt(5.0 / 6.0 * 3.0 / 4.0), 1e-12);
}

TEST(Bleu, Errors) {
  const std::vector<TokenSeq> none, one{tokenize("a")};
  EXPECT_THROW(bleu(none, none, 1), DataError);
  EXPECT_THROW(bleu(one, none, 1), DataError);
  EXPECT_THROW(bleu(one, one, 0), DataError);
  EXPECT_THROW(bleu(one, one, 5), DataError);
}

TEST(Bleu, SentenceLevelSmoothing) {
  const auto h = tokenize("the cat sat"), r = tokenize("the cat ran");
  // 2/3, 1/2, then eps/1 for the missing trigram.
  EXPECT_NEAR(ngram::sentence_bleu(h, r, 3), std::cbrt(2.0 / 3.0 * 0.5 * 0.1), 1e-12);
  EXPECT_DOUBLE_EQ(ngram::sentence_bleu(h, h, 3), 1.0);
}

TEST(Rouge, Examples) {
  const auto d = ngram::rouge_l_detail(tokenize("a b c"), tokenize("a x b y c"));
  EXPECT_DOUBLE_EQ(d.precision, 1.0);
  EXPECT_DOUBLE_EQ(d.recall, 0.6);
  const double b2 = 1.2 * 1.2;
  EXPECT_DOUBLE_EQ(d.f, (1 + b2) * 1.0 * 0.6 / (0.6 + b2 * 1.0));
  EXPECT_DOUBLE_EQ(rouge_l(tokenize("a b c"), tokenize("a b c")), 1.0);
  EXPECT_EQ(rouge_l(tokenize("a b"), tokenize("c d")), 0.0);
  EXPECT_EQ(rouge_l(tokenize(""), tokenize("c d")), 0.0);
}

// Every subsequence of a sequence over {a, b}, encoded as (1 << len) | bits.
std::bitset<512> subsequences(const std::vector<std::string>& s) {
  std::bitset<512> out;
  const std::size_t n = s.size();
  for (unsigned mask = 0; mask < (1u << n); ++mask) {
    unsigned code = 0, len = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) code |= (s[i] == "b" ? 1u : 0u) << len++;
    }
    out.set((1u << len) | code);
  }
  return out;
}

std::size_t brute_lcs(const std::bitset<512>& a, const std::bitset<512>& b) {
  const auto common = a & b;
  for (std::size_t id = 511; id > 0; --id) {
    if (common.test(id)) return static_cast<std::size_t>(std::bit_width(id) - 1);
  }
  return 0;
}

TEST(Rouge, LcsMatchesSubsequenceEnumeration) {
  // All binary sequences up to length 6 (the acceptance suite goes to 8).
  std::vector<std::vector<std::string>> seqs{{}};
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].size() == 6) continue;
    for (const char* c : {"a", "b"}) {
      auto next = seqs[i];
      next.push_back(c);
      seqs.push_back(next);
    }
  }
  std::vector<std::bitset<512>> subs;
  for (const auto& s : seqs) subs.push_back(subsequences(s));
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    for (std::size_t j = 0; j < seqs.size(); ++j) {
      ASSERT_EQ(ngram::lcs_length(seqs[i], seqs[j]), brute_lcs(subs[i], subs[j]));
    }
  }
}

TEST(Meteor, IdentityAndDisjoint) {
  const auto t = tokenize("what school of music was weber associated with");
  const double m = static_cast<double>(t.size());
  EXPECT_NEAR(meteor_lite(t, t), 1.0 - 0.5 * std::pow(1.0 / m, 3.0), 1e-12);
  EXPECT_EQ(ngram::count_chunks(ngram::meteor_align(t, t)), 1u);
  EXPECT_EQ(meteor_lite(tokenize("a b"), tokenize("c d")), 0.0);
  EXPECT_EQ(meteor_lite(tokenize(""), tokenize("c d")), 0.0);
}

TEST(Meteor, StemStageMatches) {
  ASSERT_EQ(porter_stem("running"), porter_stem("runs"));
  const auto align = ngram::meteor_align(tokenize("running"), tokenize("runs"));
  ASSERT_EQ(align.size(), 1u);
  EXPECT_GT(meteor_lite(tokenize("running"), tokenize("runs")), 0.0);
  // Exact matches win before stems are consulted.
  const auto a2 = ngram::meteor_align(tokenize("runs"), tokenize("running runs"));
  ASSERT_EQ(a2.size(), 1u);
  EXPECT_EQ(a2[0].second, 1u);
}

TEST(Meteor, HandComputedFragmentation) {
  // hyp "a b x c", ref "a b c": matches 3, chunks 2 ("a b", "c").
  const auto h = tokenize("a b x c"), r = tokenize("a b c");
  const double p = 3.0 / 4.0, rec = 1.0;
  const double fmean = p * rec / (0.9 * p + 0.1 * rec);
  EXPECT_EQ(ngram::count_chunks(ngram::meteor_align(h, r)), 2u);
  EXPECT_NEAR(meteor_lite(h, r), fmean * (1.0 - 0.5 * std::pow(2.0 / 3.0, 3.0)), 1e-12);
}

std::vector<TokenSeq> random_corpus(std::mt19937_64& rng, std::size_t n) {
  static const char* vocab[] = {"the", "a", "school", "music", "weber", "runs", "running", "of",
                                "?", "what", "was", "composer", "german", "romantic"};
  std::vector<TokenSeq> out;
  for (std::size_t i = 0; i < n; ++i) {
    std::string s;
    for (int k = std::uniform_int_distribution<int>(1, 15)(rng); k > 0; --k) {
      s += vocab[std::uniform_int_distribution<int>(0, 13)(rng)];
      s += ' ';
    }
    out.push_back(tokenize(s));
  }
  return out;
}

TEST(Metrics, RangesOnRandomPairs) {
  std::mt19937_64 rng(11);
  const auto h = random_corpus(rng, 500), r = random_corpus(rng, 500);
  for (std::size_t i = 0; i < h.size(); ++i) {
    for (double v : {rouge_l(h[i], r[i]), meteor_lite(h[i], r[i]), ngram::sentence_bleu(h[i], r[i], 4)}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
  for (int n = 1; n <= 4; ++n) {
    const double b = bleu(h, r, n);
    EXPECT_GE(b, 0.0);
    EXPECT_LE(b, 1.0);
  }
}

TEST(Metrics, ParallelEqualsSerial) {
  std::mt19937_64 rng(12);
  const auto h = random_corpus(rng, 3000), r = random_corpus(rng, 3000);
  const auto par = corpus_report(h, r, Execution::Parallel);
  const auto ser = corpus_report(h, r, Execution::Serial);
  EXPECT_EQ(par.bleu, ser.bleu);
  EXPECT_EQ(par.rouge_l, ser.rouge_l);
  EXPECT_EQ(par.meteor, ser.meteor);
  EXPECT_EQ(par.corpus_size, 3000u);
}

TEST(Metrics, ReportFromTextPairs) {
  const std::vector<TextPair> pairs{{"1", "What school was Weber in?", "What school was Weber in?"}};
  const auto rep = corpus_report(pairs);
  EXPECT_DOUBLE_EQ(rep.bleu[3], 1.0);
  EXPECT_DOUBLE_EQ(rep.rouge_l, 1.0);
  const auto j = to_json(rep);
  EXPECT_EQ(j["corpus_size"], 1);
  EXPECT_EQ(j["bleu_smoothing"], "none");
  const std::string row = render_metric_row("GQG", rep, true);
  EXPECT_NE(row.find("BL-4"), std::string::npos);
  EXPECT_NE(row.find("100.0"), std::string::npos);
  EXPECT_THROW(corpus_report(std::span<const TextPair>{}), DataError);
}

}  // namespace
}  // namespace pman
