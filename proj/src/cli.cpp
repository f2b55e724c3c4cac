#include "pman/cli.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>

#include "pman/assessor.hpp"
#include "pman/corpus.hpp"
#include "pman/error.hpp"
#include "pman/generator.hpp"
#include "pman/jsonl.hpp"
#include "pman/ngram_metrics.hpp"
#include "pman/prompting.hpp"
#include "pman/run_config.hpp"
#include "pman/scoring.hpp"

namespace pman::cli {

using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// Seed offset for the forged half so it does not mirror the gold draw.
constexpr std::uint64_t kForgeSeedSalt = 0x9E3779B97F4A7C15ull;

void init_logging() {
  static std::once_flag once;
  std::call_once(once, [] {
    auto logger = spdlog::stderr_color_mt("pman");
    logger->set_pattern("%^%l%$: %v");
    spdlog::set_default_logger(std::move(logger));
  });
}

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

// Flags shared by every command that talks to a backend. Unset flags leave
// the config file (or default) value alone.
struct BackendFlags {
  std::string config_file;
  std::optional<std::string> model, backend, endpoint, api_key_env, script, schedule;
  std::optional<double> rate_limit;
  std::optional<unsigned> workers;
  std::optional<int> max_tokens;
  std::string audit;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", config_file, "Config file (key = value lines)")->check(CLI::ExistingFile);
    cmd.add_option("--model", model, "Model name sent to the backend");
    cmd.add_option("--backend", backend, "http or scripted")->check(CLI::IsMember({"http", "scripted"}));
    cmd.add_option("--endpoint", endpoint, "Chat-completions URL (http backend)");
    cmd.add_option("--api-key-env", api_key_env, "Environment variable holding the API key");
    cmd.add_option("--script", script, "Scripted responses (JSON Lines) or a recorded audit log");
    cmd.add_option("--rate-limit", rate_limit, "Requests per second, 0 = unlimited");
    cmd.add_option("--workers", workers, "Concurrent samples")->check(CLI::PositiveNumber);
    cmd.add_option("--max-tokens", max_tokens, "Completion token limit")->check(CLI::PositiveNumber);
    cmd.add_option("--audit", audit, "Append every backend exchange to this JSON Lines file");
  }

  RunConfig resolve() const {
    RunConfig cfg;
    if (!config_file.empty()) cfg.load_file(config_file);
    if (model) cfg.set("model", *model);
    if (backend) cfg.set("backend", *backend);
    if (endpoint) cfg.set("endpoint", *endpoint);
    if (api_key_env) cfg.set("api_key_env", *api_key_env);
    if (script) cfg.set("script", *script);
    if (schedule) cfg.set("schedule", *schedule);
    if (rate_limit) cfg.set("rate_limit", std::to_string(*rate_limit));
    if (workers) cfg.workers = *workers;
    if (max_tokens) cfg.max_tokens = *max_tokens;
    return cfg;
  }

  ChatClient client(const RunConfig& cfg) const {
    std::shared_ptr<AuditLog> log;
    if (!audit.empty()) log = std::make_shared<AuditLog>(audit, /*append=*/true);
    return ChatClient(cfg.backend_config(), std::move(log));
  }
};

// --- forge ------------------------------------------------------------------

struct ForgeArgs {
  std::string hotpot;
  long long n = 0;
  std::string qtype = "other";
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_forge(const ForgeArgs& a, std::ostream& out) {
  if (a.n <= 0) throw UsageError("--n must be a positive count");
  const auto n = static_cast<std::size_t>(a.n);

  RunManifest manifest;
  manifest.command = "forge";
  manifest.inputs = {a.hotpot};
  manifest.seed = a.seed;
  manifest.has_seed = true;
  manifest.extra = {{"n", n},
                    {"qtype", a.qtype},
                    {"passage_assembly", "all context paragraphs (distractors included), sentences space-joined, titles omitted"}};
  const std::string digest = manifest.digest();
  manifest.write(manifest_path(a.out));

  const Corpus all = load_hotpotqa(a.hotpot);
  const Corpus pool = stratify(all, parse_question_type(a.qtype));
  const Corpus gold = sample_random(pool, n, a.seed);
  const Corpus forged = forge_negatives(pool, n, a.seed ^ kForgeSeedSalt);

  JsonlWriter writer(a.out, /*append=*/false);
  for (const Corpus* part : {&gold, &forged}) {
    for (const auto& s : part->samples) {
      json j = sample_to_json(s);
      j["manifest"] = digest;
      writer.write(j);
    }
  }
  out << "wrote " << gold.size() + forged.size() << " samples (" << gold.size() << " gold, "
      << forged.size() << " forged, qtype " << a.qtype << ") to " << a.out << '\n';
  return kOk;
}

// --- generate ---------------------------------------------------------------

struct GenerateArgs {
  std::string input;
  std::string out;
  BackendFlags backend;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = a.backend.resolve();
  RunManifest manifest;
  manifest.command = "generate";
  manifest.config = cfg.to_json();
  manifest.config_hash = cfg.hash();
  manifest.inputs = {a.input};
  manifest.extra = {{"generation_temperature", 0.0}};
  const std::string digest = manifest.digest();
  manifest.write(manifest_path(a.out));

  const Corpus corpus = load_samples(a.input);
  ChatClient client = a.backend.client(cfg);

  JsonlWriter writer(a.out, /*append=*/false);
  std::optional<JsonlWriter> flagged_writer;
  std::size_t written = 0, flagged = 0;
  generate_batch(corpus.samples, client, cfg.model, cfg.workers,
                 [&](const Sample& s, GenerationOutcome&& outcome) {
                   if (auto* q = std::get_if<GeneratedQuestion>(&outcome)) {
                     json j = to_json(*q, s);
                     j["manifest"] = digest;
                     writer.write(j);
                     ++written;
                   } else {
                     const auto& e = std::get<GenerationError>(outcome);
                     if (!flagged_writer) flagged_writer.emplace(a.out + ".flagged.jsonl", false);
                     flagged_writer->write({{"schema_version", kSchemaVersion},
                                            {"id", s.id},
                                            {"error", e.what()},
                                            {"manifest", digest}});
                     err << "flagged: " << e.what() << '\n';
                     ++flagged;
                   }
                 });
  out << "generated " << written << " questions (" << flagged << " flagged) with " << cfg.model
      << ", template " << template_version() << '\n';
  return kOk;
}

// --- assess -----------------------------------------------------------------

struct AssessArgs {
  std::string input;
  std::string out;
  std::string score;
  std::optional<bool> cot;
  bool resume = false;
  BackendFlags backend;
};

int cmd_assess(AssessArgs a, std::ostream& out, std::ostream& err) {
  RunConfig cfg = a.backend.resolve();
  if (a.cot) cfg.cot = *a.cot;
  if (a.score.empty()) a.score = a.out + ".score.json";

  RunManifest manifest;
  manifest.command = "assess";
  manifest.config = cfg.to_json();
  manifest.config_hash = cfg.hash();
  manifest.inputs = {a.input};
  const std::string digest = manifest.digest();

  const Corpus corpus = load_samples(a.input);

  std::vector<AssessmentRecord> records;
  std::set<std::string> done;
  const bool resuming = a.resume && std::filesystem::exists(a.out);
  if (resuming) {
    for (const auto& j : read_jsonl(a.out)) {
      if (j.value("manifest", std::string()) != digest) {
        throw ConfigError(a.out + " was produced by a different configuration or input; "
                          "cannot resume");
      }
      records.push_back(record_from_json(j));
      done.insert(records.back().sample_id);
    }
  }
  // Resume bookkeeping stays out of the manifest: the digest must not change.
  if (resuming) out << "resuming: " << records.size() << " records already in " << a.out << '\n';
  manifest.write(manifest_path(a.out));

  std::vector<Sample> pending;
  for (const auto& s : corpus.samples) {
    if (!done.contains(s.id)) pending.push_back(s);
  }

  AssessOptions opts;
  opts.model = cfg.model;
  opts.cot = cfg.cot;
  opts.schedule = cfg.schedule;
  opts.max_tokens = cfg.max_tokens;

  ChatClient client = a.backend.client(cfg);
  JsonlWriter writer(a.out, /*append=*/resuming);
  try {
    assess_batch(pending, client, opts, cfg.workers, [&](AssessmentRecord&& r) {
      json j = to_json(r);
      j["manifest"] = digest;
      writer.write(j);
      records.push_back(std::move(r));
    });
  } catch (const TransportError& e) {
    err << "transport failure: " << e.what() << '\n'
        << records.size() << " of " << corpus.size() << " records kept in " << a.out
        << "; rerun with --resume to continue\n";
    return kTransport;
  }

  if (records.empty()) throw DataError(a.input + " contains no samples");
  const PmanScore score = pman_score(records);
  json sj = to_json(score);
  sj["manifest"] = digest;
  sj["model"] = cfg.model;
  sj["cot"] = cfg.cot;
  sj["template_version"] = std::string(template_version());
  write_json(a.score, sj);

  out << "PMAN " << format_percent(score) << "  (" << score.yes_count << " YES, " << score.no_count
      << " NO, " << score.invalid_count << " invalid; model " << cfg.model << ", "
      << (cfg.cot ? "CoT" : "no CoT") << ", template " << template_version() << ")\n";
  if (!score.score) {
    err << "0 valid responses: every assessment exhausted the escalation schedule\n";
    return kNoValidAssessments;
  }
  return kOk;
}

// --- reliability ------------------------------------------------------------

struct ReliabilityArgs {
  std::vector<std::string> records;
  std::vector<std::string> labels;
  std::vector<std::string> sets;
  std::string json_out;
};

int cmd_reliability(const ReliabilityArgs& a, std::ostream& out) {
  if (a.labels.size() != 1 && a.labels.size() != a.records.size()) {
    throw UsageError("give one --labels file, or one per --records file");
  }
  if (!a.sets.empty() && a.sets.size() != 1 && a.sets.size() != a.records.size()) {
    throw UsageError("give one --set name, or one per --records file");
  }

  ReliabilityInput rows;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    std::vector<AssessmentRecord> recs;
    for (const auto& j : read_jsonl(a.records[i])) recs.push_back(record_from_json(j));
    if (recs.empty()) throw DataError(a.records[i] + " has no assessment records");
    const auto labels = labels_of(load_samples(a.labels.size() == 1 ? a.labels[0] : a.labels[i]));

    ReliabilityConfig cfg;
    cfg.model = recs.front().model;
    cfg.cot = recs.front().cot;
    cfg.sample_set = a.sets.empty() ? std::filesystem::path(a.records[i]).stem().string()
                                    : (a.sets.size() == 1 ? a.sets[0] : a.sets[i]);
    rows.emplace_back(cfg, confusion(recs, labels));
  }

  out << render_reliability_table(rows);
  if (!a.json_out.empty()) write_json(a.json_out, reliability_json(rows));
  return kOk;
}

// --- ngram ------------------------------------------------------------------

struct NgramArgs {
  std::string input;
  std::string name = "model";
  std::string json_out;
  bool serial = false;
};

int cmd_ngram(const NgramArgs& a, std::ostream& out) {
  std::vector<TextPair> pairs;
  const auto lines = read_jsonl(a.input);
  pairs.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& j = lines[i];
    if (!j.contains("hypothesis") || !j.contains("reference")) {
      throw DataError(a.input + " line " + std::to_string(i + 1) + ": needs 'hypothesis' and 'reference'");
    }
    pairs.push_back({j.value("id", std::to_string(i)), j.at("hypothesis").get<std::string>(),
                     j.at("reference").get<std::string>()});
  }
  const MetricReport report = corpus_report(pairs, a.serial ? Execution::Serial : Execution::Parallel);
  out << render_metric_row(a.name, report, /*with_header=*/true);
  if (!a.json_out.empty()) {
    json j = to_json(report);
    j["name"] = a.name;
    write_json(a.json_out, j);
  }
  return kOk;
}

// --- rank -------------------------------------------------------------------

int cmd_rank(const std::vector<std::string>& scores, std::ostream& out) {
  std::vector<RankedModel> models;
  for (const auto& arg : scores) {
    const auto eq = arg.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--score expects NAME=score.json, got '" + arg + "'");
    models.push_back({arg.substr(0, eq), pman_score_from_json(read_json(arg.substr(eq + 1)))});
  }
  out << render_pman_table(rank_by_pman(std::move(models)));
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  init_logging();

  CLI::App app{"pman: prompting-based answerability evaluation for generated questions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion) + " (templates " +
                                        std::string(template_version()) + ")");

  ForgeArgs forge;
  auto* forge_cmd = app.add_subcommand("forge", "Build a balanced labeled test set with forged negatives");
  forge_cmd->add_option("--hotpot", forge.hotpot, "HotpotQA JSON file")->required()->check(CLI::ExistingFile);
  forge_cmd->add_option("--n", forge.n, "Gold samples (and as many forged ones)")->required();
  forge_cmd->add_option("--qtype", forge.qtype, "yesno or other")->check(CLI::IsMember({"yesno", "other"}));
  forge_cmd->add_option("--seed", forge.seed, "Random seed");
  forge_cmd->add_option("--out", forge.out, "Output JSON Lines")->required();

  GenerateArgs gen;
  auto* gen_cmd = app.add_subcommand("generate", "Generate questions by prompting a chat model");
  gen_cmd->add_option("--input", gen.input, "Samples JSON Lines (passage, answer)")->required()->check(CLI::ExistingFile);
  gen_cmd->add_option("--out", gen.out, "Output JSON Lines")->required();
  gen.backend.attach(*gen_cmd);

  AssessArgs assess_args;
  auto* assess_cmd = app.add_subcommand("assess", "Judge answerability and compute the PMAN score");
  assess_cmd->add_option("--input", assess_args.input, "Samples or generated-question JSON Lines")->required()->check(CLI::ExistingFile);
  assess_cmd->add_option("--out", assess_args.out, "Assessment records JSON Lines")->required();
  assess_cmd->add_option("--score", assess_args.score, "Score JSON (default: <out>.score.json)");
  assess_cmd->add_flag("--cot,!--no-cot", assess_args.cot, "Include the chain-of-thought section");
  assess_cmd->add_flag("--resume", assess_args.resume, "Skip samples already in --out");
  assess_args.backend.attach(*assess_cmd);
  assess_cmd->add_option("--schedule", assess_args.backend.schedule, "Escalation temperatures, e.g. 0,0.25,0.5,0.75,1");

  ReliabilityArgs rel;
  auto* rel_cmd = app.add_subcommand("reliability", "Confusion statistics of assessments against labels");
  rel_cmd->add_option("--records", rel.records, "Assessment records (repeatable)")->required()->check(CLI::ExistingFile);
  rel_cmd->add_option("--labels", rel.labels, "Labeled samples (one, or one per --records)")->required()->check(CLI::ExistingFile);
  rel_cmd->add_option("--set", rel.sets, "Sample-set name (one, or one per --records)");
  rel_cmd->add_option("--json", rel.json_out, "Write the report as JSON");

  NgramArgs ng;
  auto* ng_cmd = app.add_subcommand("ngram", "BLEU-1..4, ROUGE-L and METEOR-lite over text pairs");
  ng_cmd->add_option("--input", ng.input, "JSON Lines {id, hypothesis, reference}")->required()->check(CLI::ExistingFile);
  ng_cmd->add_option("--name", ng.name, "Row label");
  ng_cmd->add_option("--json", ng.json_out, "Write the report as JSON");
  ng_cmd->add_flag("--serial", ng.serial, "Use the single-threaded reference path");

  std::vector<std::string> rank_scores;
  auto* rank_cmd = app.add_subcommand("rank", "Rank models by PMAN score");
  rank_cmd->add_option("--score", rank_scores, "NAME=score.json (repeatable)")->required();

  auto* tpl_cmd = app.add_subcommand("template-version", "Print the prompt template version");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*forge_cmd) return cmd_forge(forge, out);
    if (*gen_cmd) return cmd_generate(gen, out, err);
    if (*assess_cmd) return cmd_assess(assess_args, out, err);
    if (*rel_cmd) return cmd_reliability(rel, out);
    if (*ng_cmd) return cmd_ngram(ng, out);
    if (*rank_cmd) return cmd_rank(rank_scores, out);
    if (*tpl_cmd) {
      out << template_version() << '\n';
      return kOk;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const TransportError& e) {
    err << "transport error: " << e.what() << '\n';
    return kTransport;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfig;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace pman::cli
