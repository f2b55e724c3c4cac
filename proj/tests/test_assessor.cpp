#include <gtest/gtest.h>

#include <algorithm>
#include <cctype>
#include <random>

#include "pman/assessor.hpp"
#include "pman/error.hpp"
#include "pman/prompting.hpp"
#include "test_support.hpp"

namespace pman {
namespace {

using nlohmann::json;

// Independent oracle: split into [A-Za-z0-9_] runs, take the last exact
// YES/NO, otherwise the last case-insensitive one.
std::optional<Verdict> oracle(const std::string& text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text + " ") {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
      cur += c;
    } else if (!cur.empty()) {
      tokens.push_back(cur);
      cur.clear();
    }
  }
  std::optional<Verdict> exact, loose;
  for (const auto& t : tokens) {
    if (t == "YES") exact = Verdict::Yes;
    if (t == "NO") exact = Verdict::No;
    std::string low = t;
    std::transform(low.begin(), low.end(), low.begin(), [](unsigned char c) { return std::tolower(c); });
    if (low == "yes") loose = Verdict::Yes;
    if (low == "no") loose = Verdict::No;
  }
  return exact ? exact : loose;
}

Sample demo(const std::string& id = "s1") {
  return testing::sample(id, testing::kWeberPassage, testing::kWeberQuestion, "Romantic");
}

ChatClient client_for(const std::vector<std::pair<Sample, std::vector<std::string>>>& plan,
                      bool cot = true, std::shared_ptr<AuditLog> audit = nullptr) {
  BackendConfig cfg;
  for (const auto& [s, responses] : plan) {
    cfg.script.add_attempts("gpt-4-0613", render_assessment(s, cot), responses);
  }
  return ChatClient(std::move(cfg), std::move(audit));
}

TEST(Verdict, DocumentedExamples) {
  auto v = parse_verdict("…the reference answer is correct. YES");
  ASSERT_TRUE(v);
  EXPECT_EQ(v->value, Verdict::Yes);

  const std::string r = "My answer is Paris, not London. The reference answer is wrong. NO";
  v = parse_verdict(r);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->value, Verdict::No);
  EXPECT_EQ(v->tier, 1);
  EXPECT_EQ(v->position, r.size() - 2);

  EXPECT_FALSE(parse_verdict("I think the answer might be correct"));
}

TEST(Verdict, WordBoundariesAndTiers) {
  EXPECT_FALSE(parse_verdict("nobody noticed yesterday, NOT_NO, YESTERDAY"));
  EXPECT_FALSE(parse_verdict(""));
  auto v = parse_verdict("yes, I said no. Final: YES");
  EXPECT_EQ(v->value, Verdict::Yes);
  EXPECT_EQ(v->tier, 1);
  v = parse_verdict("answer: yes... or rather no");
  EXPECT_EQ(v->value, Verdict::No);
  EXPECT_EQ(v->tier, 2);
  // A lowercase later token does not override an exact uppercase one.
  v = parse_verdict("NO. well, yes");
  EXPECT_EQ(v->value, Verdict::No);
  EXPECT_EQ(v->tier, 1);
  EXPECT_EQ(parse_verdict("\"YES\"")->value, Verdict::Yes);
  EXPECT_EQ(parse_verdict("**No**")->value, Verdict::No);
}

TEST(Verdict, RandomTemplatesAgreeWithOracle) {
  const std::vector<std::string> words{"YES", "NO", "yes", "no", "Yes", "nO", "not", "nobody",
                                       "yesterday", "NOTE", "YESS", "answer", "correct", "x_no",
                                       "no1", "the", "Paris"};
  const std::vector<std::string> seps{" ", ", ", ". ", "\n", "\"", "*", "-", "(", ")", ": "};
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 5000; ++trial) {
    std::string text;
    const int n = std::uniform_int_distribution<int>(0, 12)(rng);
    for (int i = 0; i < n; ++i) {
      text += words[std::uniform_int_distribution<std::size_t>(0, words.size() - 1)(rng)];
      text += seps[std::uniform_int_distribution<std::size_t>(0, seps.size() - 1)(rng)];
    }
    const auto got = parse_verdict(text);
    const auto want = oracle(text);
    ASSERT_EQ(got.has_value(), want.has_value()) << text;
    if (got) ASSERT_EQ(got->value, *want) << text;
  }
}

TEST(Schedule, DefaultAndValidation) {
  EXPECT_EQ(EscalationSchedule().temperatures(), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(EscalationSchedule::parse("0, 0.5,1").temperatures(), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_THROW(EscalationSchedule(std::vector<double>{}), ConfigError);
  EXPECT_THROW(EscalationSchedule({0.25, 0.5}), ConfigError);
  EXPECT_THROW(EscalationSchedule({0.0, 0.5, 0.25}), ConfigError);
  EXPECT_THROW(EscalationSchedule({0.0, 2.5}), ConfigError);
  EXPECT_THROW(EscalationSchedule::parse("0,abc"), ConfigError);
  const EscalationSchedule s;
  EXPECT_EQ(EscalationSchedule::parse(s.to_string()).temperatures(), s.temperatures());
}

TEST(Assess, FirstAttemptValid) {
  auto client = client_for({{demo(), {"YES"}}});
  const auto rec = assess(demo(), client, {});
  EXPECT_EQ(rec.verdict, Verdict::Yes);
  ASSERT_EQ(rec.attempts.size(), 1u);
  EXPECT_EQ(rec.attempts[0].temperature, 0.0);
}

TEST(Assess, EscalatesUntilValid) {
  auto audit = std::make_shared<AuditLog>();
  auto client = client_for({{demo(), {"I am not sure.", "Hmm, hard to say.", "NO"}}}, true, audit);
  const auto rec = assess(demo(), client, {});
  EXPECT_EQ(rec.verdict, Verdict::No);
  ASSERT_EQ(rec.attempts.size(), 3u);
  EXPECT_EQ(rec.attempts.back().temperature, 0.5);
  EXPECT_FALSE(rec.attempts[0].parsed);
  ASSERT_EQ(audit->size(), 3u);
  EXPECT_DOUBLE_EQ(audit->entries()[1]["temperature"].get<double>(), 0.25);
}

TEST(Assess, AllInvalidAfterWholeSchedule) {
  auto client = client_for({{demo(), {"a", "b", "c", "d", "e"}}});
  const auto rec = assess(demo(), client, {});
  EXPECT_EQ(rec.verdict, Verdict::Invalid);
  ASSERT_EQ(rec.attempts.size(), 5u);
  std::vector<double> temps;
  for (const auto& a : rec.attempts) temps.push_back(a.temperature);
  EXPECT_EQ(temps, EscalationSchedule().temperatures());

  const std::vector<AssessmentRecord> recs{rec};
  const auto score = pman_score(recs);
  EXPECT_FALSE(score.score);
  EXPECT_EQ(format_percent(score), "no valid assessments");
}

TEST(Assess, CustomScheduleAndNoCot) {
  AssessOptions opts;
  opts.cot = false;
  opts.schedule = EscalationSchedule({0.0, 1.5});
  auto client = client_for({{demo(), {"??", "yes"}}}, false);
  const auto rec = assess(demo(), client, opts);
  EXPECT_EQ(rec.verdict, Verdict::Yes);
  EXPECT_FALSE(rec.cot);
  EXPECT_EQ(rec.attempts.back().temperature, 1.5);
}

class FailingBackend : public ChatBackend {
 public:
  ChatResponse send(const ChatRequest&) override { throw RetryableTransport("connection refused"); }
  std::string identity() const override { return "failing"; }
};

TEST(Assess, TransportFailureIsNotInvalid) {
  ChatClient client(std::make_unique<FailingBackend>(), RetryPolicy{{}}, 0.0);
  try {
    assess(demo("sample-9"), client, {});
    FAIL();
  } catch (const TransportError& e) {
    EXPECT_NE(std::string(e.what()).find("sample-9"), std::string::npos);
  }
}

TEST(Assess, BatchKeepsInputOrder) {
  std::vector<Sample> samples;
  std::vector<std::pair<Sample, std::vector<std::string>>> plan;
  for (int i = 0; i < 40; ++i) {
    samples.push_back(demo("s" + std::to_string(i)));
    samples.back().question = "Question number " + std::to_string(i) + "?";
    plan.push_back({samples.back(), {i % 3 ? "YES" : "NO"}});
  }
  auto client = client_for(plan);
  std::vector<std::string> ids;
  assess_batch(samples, client, {}, 4, [&](AssessmentRecord&& r) { ids.push_back(r.sample_id); });
  ASSERT_EQ(ids.size(), 40u);
  for (int i = 0; i < 40; ++i) EXPECT_EQ(ids[i], "s" + std::to_string(i));
}

TEST(Assess, BatchDeliversPrefixBeforeError) {
  std::vector<Sample> samples;
  std::vector<std::pair<Sample, std::vector<std::string>>> plan;
  for (int i = 0; i < 10; ++i) {
    samples.push_back(demo("s" + std::to_string(i)));
    samples.back().question = "Q" + std::to_string(i) + "?";
    if (i != 6) plan.push_back({samples.back(), {"YES"}});
  }
  auto client = client_for(plan);
  std::vector<std::string> ids;
  EXPECT_THROW(assess_batch(samples, client, {}, 3,
                            [&](AssessmentRecord&& r) { ids.push_back(r.sample_id); }),
               ConfigError);
  ASSERT_EQ(ids.size(), 6u);
  EXPECT_EQ(ids.back(), "s5");
}

TEST(Assess, RecordJsonRoundTrip) {
  auto client = client_for({{demo(), {"maybe", "The answer: YES"}}});
  const auto rec = assess(demo(), client, {});
  const json j = to_json(rec);
  EXPECT_EQ(j["verdict"], "YES");
  EXPECT_EQ(j["attempts"][1]["tier"], 1);
  const auto back = record_from_json(j);
  EXPECT_EQ(back.sample_id, rec.sample_id);
  EXPECT_EQ(back.verdict, rec.verdict);
  EXPECT_EQ(back.attempts.size(), 2u);
  EXPECT_EQ(back.attempts[1].parsed, rec.attempts[1].parsed);
  EXPECT_EQ(to_json(back), j);
}

std::vector<AssessmentRecord> records(std::size_t yes, std::size_t no, std::size_t invalid) {
  std::vector<AssessmentRecord> out;
  auto add = [&](std::size_t n, Verdict v) {
    for (std::size_t i = 0; i < n; ++i) {
      AssessmentRecord r;
      r.sample_id = "r" + std::to_string(out.size());
      r.verdict = v;
      out.push_back(r);
    }
  };
  add(yes, Verdict::Yes);
  add(no, Verdict::No);
  add(invalid, Verdict::Invalid);
  return out;
}

TEST(Pman, ScoreExamples) {
  EXPECT_DOUBLE_EQ(*pman_score(records(97, 3, 0)).score, 0.97);
  EXPECT_DOUBLE_EQ(*pman_score(records(100, 0, 0)).score, 1.0);
  EXPECT_DOUBLE_EQ(*pman_score(records(42, 58, 0)).score, 0.42);
  EXPECT_EQ(format_percent(pman_score(records(97, 3, 0))), "97%");
  // Invalid records leave the denominator.
  const auto s = pman_score(records(40, 8, 52));
  EXPECT_DOUBLE_EQ(*s.score, 40.0 / 48.0);
  EXPECT_EQ(s.total(), 100u);
  EXPECT_THROW(pman_score(std::vector<AssessmentRecord>{}), DataError);
}

TEST(Pman, BoundsAndPermutationInvariance) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<std::size_t> d(0, 30);
    auto recs = records(d(rng), d(rng), d(rng));
    if (recs.empty()) continue;
    const auto a = pman_score(recs);
    std::shuffle(recs.begin(), recs.end(), rng);
    const auto b = pman_score(recs);
    EXPECT_EQ(a.score, b.score);
    EXPECT_EQ(a.yes_count + a.no_count + a.invalid_count, recs.size());
    if (a.score) {
      EXPECT_GE(*a.score, 0.0);
      EXPECT_LE(*a.score, 1.0);
    }
  }
}

TEST(Pman, JsonAndRanking) {
  const auto s = pman_score(records(76, 24, 0));
  const json j = to_json(s);
  EXPECT_EQ(j["outcome"], "ok");
  EXPECT_EQ(j["yes"], 76);
  const auto back = pman_score_from_json(j);
  EXPECT_EQ(back.score, s.score);
  EXPECT_EQ(to_json(pman_score(records(0, 0, 3)))["outcome"], "no_valid_assessments");

  auto ranked = rank_by_pman({{"EQG", pman_score(records(42, 58, 0))},
                              {"NONE", pman_score(records(0, 0, 5))},
                              {"SQG", pman_score(records(41, 59, 0))},
                              {"CQG", s},
                              {"GQG", pman_score(records(97, 3, 0))}});
  std::vector<std::string> names;
  for (const auto& m : ranked) names.push_back(m.name);
  EXPECT_EQ(names, (std::vector<std::string>{"GQG", "CQG", "EQG", "SQG", "NONE"}));
  const std::string table = render_pman_table(ranked);
  EXPECT_NE(table.find("97%"), std::string::npos);
  EXPECT_NE(table.find("no valid assessments"), std::string::npos);
}

}  // namespace
}  // namespace pman
