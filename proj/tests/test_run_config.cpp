#include <gtest/gtest.h>

#include <cstdlib>

#include "pman/error.hpp"
#include "pman/jsonl.hpp"
#include "pman/run_config.hpp"
#include "test_support.hpp"

namespace pman {
namespace {

TEST(RunConfig, FileOverridesDefaults) {
  testing::TempDir dir;
  testing::spit(dir.file("pman.conf"),
                "# judge settings\n"
                "model = gpt-3.5-turbo\n"
                "schedule = 0, 0.5, 1.0   # shorter\n"
                "\n"
                "workers=2\n"
                "cot = false\n"
                "backoff_ms = 10,20\n");
  RunConfig cfg;
  cfg.load_file(dir.file("pman.conf"));
  EXPECT_EQ(cfg.model, "gpt-3.5-turbo");
  EXPECT_EQ(cfg.schedule.temperatures(), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(cfg.workers, 2u);
  EXPECT_FALSE(cfg.cot);
  EXPECT_EQ(cfg.backoff_ms, (std::vector<int>{10, 20}));
  EXPECT_EQ(cfg.backend_config().retry.backoff.size(), 2u);
}

TEST(RunConfig, RejectsBadInput) {
  RunConfig cfg;
  EXPECT_THROW(cfg.set("colour", "blue"), ConfigError);
  EXPECT_THROW(cfg.set("api_key", "sk-123"), ConfigError);
  EXPECT_THROW(cfg.set("workers", "0"), ConfigError);
  EXPECT_THROW(cfg.set("rate_limit", "fast"), ConfigError);
  EXPECT_THROW(cfg.set("schedule", "0.5,1"), ConfigError);
  EXPECT_THROW(cfg.set("backend", "carrier-pigeon"), ConfigError);
  testing::TempDir dir;
  testing::spit(dir.file("bad.conf"), "model gpt-4\n");
  try {
    cfg.load_file(dir.file("bad.conf"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find(":1:"), std::string::npos);
  }
}

TEST(RunConfig, ScriptedBackendNeedsScript) {
  RunConfig cfg;
  cfg.set("backend", "scripted");
  EXPECT_THROW(cfg.backend_config(), ConfigError);
}

TEST(RunConfig, HashTracksContentNotLocation) {
  testing::TempDir dir;
  testing::spit(dir.file("a.jsonl"), "{\"contains\": \"x\", \"responses\": [\"YES\"]}\n");
  testing::spit(dir.file("b.jsonl"), testing::slurp(dir.file("a.jsonl")));
  RunConfig a, b;
  a.set("backend", "scripted");
  a.set("script", dir.file("a.jsonl"));
  b.set("backend", "scripted");
  b.set("script", dir.file("b.jsonl"));
  EXPECT_EQ(a.hash(), b.hash());
  b.set("model", "other");
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_FALSE(a.to_json().contains("api_key_env"));
  EXPECT_TRUE(RunConfig{}.to_json().contains("api_key_env"));
}

TEST(RunManifest, DigestIgnoresTimestamp) {
  testing::TempDir dir;
  testing::spit(dir.file("in.json"), "[]");
  RunManifest m;
  m.command = "forge";
  m.inputs = {dir.file("in.json")};
  m.seed = 7;
  m.has_seed = true;

  ::setenv("SOURCE_DATE_EPOCH", "1700000000", 1);
  const auto d1 = m.document();
  ::setenv("SOURCE_DATE_EPOCH", "1800000000", 1);
  const auto d2 = m.document();
  ::unsetenv("SOURCE_DATE_EPOCH");
  EXPECT_EQ(d1["timestamp"], "2023-11-14T22:13:20Z");
  EXPECT_NE(d1["timestamp"], d2["timestamp"]);
  EXPECT_EQ(d1["digest"], d2["digest"]);
  EXPECT_EQ(d1["digest"], m.digest());
  EXPECT_EQ(d1["inputs"][0]["name"], "in.json");
  EXPECT_EQ(d1["seed"], 7);

  m.write(dir.file("m.json"));
  EXPECT_EQ(read_json(dir.file("m.json"))["digest"], m.digest());
}

}  // namespace
}  // namespace pman
