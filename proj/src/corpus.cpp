#include "pman/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <numeric>
#include <random>
#include <unordered_set>

#include "pman/error.hpp"
#include "pman/jsonl.hpp"
#include "text_util.hpp"

namespace pman {

namespace {

using nlohmann::json;

// std::uniform_int_distribution is implementation-defined; selections must be
// identical across standard libraries, so draw by rejection from the raw
// (standardized) mt19937_64 stream.
std::size_t uniform_below(std::mt19937_64& rng, std::size_t bound) {
  const std::uint64_t b = bound;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % b;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % b);
}

// Partial Fisher-Yates: the first n entries of a seeded shuffle of [0, size).
std::vector<std::size_t> draw_indices(std::size_t size, std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + uniform_below(rng, size - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  return idx;
}

std::string record_name(const json& rec, std::size_t index) {
  for (const char* key : {"_id", "id"}) {
    auto it = rec.find(key);
    if (it != rec.end() && it->is_string()) return "record '" + it->get<std::string>() + "'";
  }
  return "record #" + std::to_string(index);
}

std::string required_string(const json& rec, std::initializer_list<const char*> keys,
                            std::size_t index) {
  for (const char* key : keys) {
    auto it = rec.find(key);
    if (it != rec.end()) {
      if (!it->is_string()) {
        throw DataError(record_name(rec, index) + ": field '" + key + "' is not a string");
      }
      return it->get<std::string>();
    }
  }
  throw DataError(record_name(rec, index) + ": missing field '" + *keys.begin() + "'");
}

std::string assemble_passage(const json& context, const std::string& name) {
  if (!context.is_array()) throw DataError(name + ": 'context' is not a list");
  std::string passage;
  for (const auto& para : context) {
    if (!para.is_array() || para.size() != 2 || !para[1].is_array()) {
      throw DataError(name + ": context paragraph is not a [title, sentences] pair");
    }
    for (const auto& sent : para[1]) {
      if (!sent.is_string()) throw DataError(name + ": context sentence is not a string");
      const std::string_view s = detail::trim(sent.get_ref<const std::string&>());
      if (s.empty()) continue;
      if (!passage.empty()) passage.push_back(' ');
      passage.append(s);
    }
  }
  return passage;
}

}  // namespace

QuestionType classify_answer(std::string_view answer) {
  const std::string a = detail::to_lower(detail::trim(answer));
  return (a == "yes" || a == "no") ? QuestionType::YesNo : QuestionType::Other;
}

Sample make_sample(std::string id, std::string passage, std::string question, std::string answer,
                   std::optional<Label> label, Origin origin) {
  if (detail::trim(id).empty()) throw DataError("sample with empty id");
  const auto require = [&](const std::string& v, const char* field) {
    if (detail::trim(v).empty()) {
      throw DataError("sample '" + id + "': field '" + field + "' is empty");
    }
  };
  require(passage, "passage");
  require(question, "question");
  require(answer, "answer");
  Sample s;
  s.qtype = classify_answer(answer);
  s.id = std::move(id);
  s.passage = std::move(passage);
  s.question = std::move(question);
  s.answer = std::move(answer);
  s.label = label;
  s.origin = std::move(origin);
  return s;
}

void check_unique_ids(const Corpus& corpus) {
  std::unordered_set<std::string_view> seen;
  for (const auto& s : corpus.samples) {
    if (!seen.insert(s.id).second) {
      throw DataError(corpus.source + ": duplicate sample id '" + s.id + "'");
    }
  }
}

Corpus parse_hotpotqa(const json& records, std::string source) {
  if (!records.is_array()) throw DataError(source + ": expected a JSON array of records");
  Corpus corpus;
  corpus.source = std::move(source);
  corpus.samples.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& rec = records[i];
    if (!rec.is_object()) throw DataError(record_name(rec, i) + ": not a JSON object");
    std::string id = required_string(rec, {"_id", "id"}, i);
    std::string question = required_string(rec, {"question"}, i);
    std::string answer = required_string(rec, {"answer"}, i);
    auto ctx = rec.find("context");
    if (ctx == rec.end()) throw DataError(record_name(rec, i) + ": missing field 'context'");
    std::string passage = assemble_passage(*ctx, record_name(rec, i));
    corpus.samples.push_back(make_sample(std::move(id), std::move(passage), std::move(question),
                                         std::move(answer), Label::Answerable, Origin::gold()));
  }
  check_unique_ids(corpus);
  return corpus;
}

Corpus load_hotpotqa(const std::string& path) { return parse_hotpotqa(read_json(path), path); }

Corpus stratify(const Corpus& corpus, QuestionType qtype) {
  Corpus out{{}, corpus.source, corpus.seed};
  std::copy_if(corpus.samples.begin(), corpus.samples.end(), std::back_inserter(out.samples),
               [qtype](const Sample& s) { return s.qtype == qtype; });
  return out;
}

Corpus sample_random(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (n > corpus.size()) {
    throw DataError("cannot sample " + std::to_string(n) + " from a corpus of " +
                    std::to_string(corpus.size()));
  }
  std::mt19937_64 rng(seed);
  Corpus out{{}, corpus.source, seed};
  out.samples.reserve(n);
  for (std::size_t i : draw_indices(corpus.size(), n, rng)) out.samples.push_back(corpus.samples[i]);
  return out;
}

Corpus forge_negatives(const Corpus& corpus, std::size_t n, std::uint64_t seed) {
  if (corpus.size() < 2) {
    throw DataError("forging needs at least 2 samples, corpus has " +
                    std::to_string(corpus.size()));
  }
  if (n > corpus.size()) {
    throw DataError("cannot forge " + std::to_string(n) + " negatives from a corpus of " +
                    std::to_string(corpus.size()));
  }
  std::mt19937_64 rng(seed);
  const auto bases = draw_indices(corpus.size(), n, rng);

  Corpus out{{}, corpus.source, seed};
  out.samples.reserve(n);
  std::vector<std::size_t> donors;
  for (std::size_t b : bases) {
    const Sample& base = corpus.samples[b];
    donors.clear();
    for (std::size_t k = 0; k < corpus.size(); ++k) {
      const Sample& d = corpus.samples[k];
      if (k == b || d.qtype != base.qtype) continue;
      if (d.question == base.question && d.answer == base.answer) continue;
      donors.push_back(k);
    }
    if (donors.empty()) {
      throw DataError("no same-type donor available for sample '" + base.id + "'");
    }
    const Sample& donor = corpus.samples[donors[uniform_below(rng, donors.size())]];
    out.samples.push_back(make_sample("forged:" + base.id + ":" + donor.id, base.passage,
                                      donor.question, donor.answer, Label::NonAnswerable,
                                      Origin::forged()));
  }
  return out;
}

Corpus parse_generated(const std::vector<json>& records, const std::string& model,
                       std::string source) {
  Corpus corpus;
  corpus.source = std::move(source);
  corpus.samples.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const json& rec = records[i];
    if (!rec.is_object()) throw DataError(record_name(rec, i) + ": not a JSON object");
    std::string id = required_string(rec, {"id"}, i);
    std::string passage = required_string(rec, {"passage"}, i);
    std::string answer = required_string(rec, {"answer"}, i);
    std::string question = required_string(rec, {"generated_question"}, i);
    std::optional<Label> label;
    if (auto it = rec.find("human_label"); it != rec.end() && !it->is_null()) {
      if (!it->is_string()) throw DataError(record_name(rec, i) + ": 'human_label' is not a string");
      try {
        label = parse_label(it->get<std::string>());
      } catch (const DataError& e) {
        throw DataError(record_name(rec, i) + ": " + e.what());
      }
    }
    corpus.samples.push_back(make_sample(std::move(id), std::move(passage), std::move(question),
                                         std::move(answer), label, Origin::generated(model)));
  }
  check_unique_ids(corpus);
  return corpus;
}

Corpus load_generated(const std::string& path, const std::string& model) {
  return parse_generated(read_jsonl(path), model, path);
}

json sample_to_json(const Sample& s) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["id"] = s.id;
  j["passage"] = s.passage;
  j["question"] = s.question;
  j["answer"] = s.answer;
  j["qtype"] = to_string(s.qtype);
  j["label"] = s.label ? json(to_string(*s.label)) : json(nullptr);
  j["origin"] = to_string(s.origin);
  return j;
}

Sample sample_from_json(const json& j, std::size_t index) {
  if (!j.is_object()) throw DataError(record_name(j, index) + ": not a JSON object");
  std::optional<Label> label;
  if (auto it = j.find("label"); it != j.end() && !it->is_null()) {
    label = parse_label(it->get<std::string>());
  }
  Origin origin = Origin::gold();
  if (auto it = j.find("origin"); it != j.end()) {
    const std::string o = it->get<std::string>();
    if (o == "forged") {
      origin = Origin::forged();
    } else if (o.rfind("model:", 0) == 0) {
      origin = Origin::generated(o.substr(6));
    } else if (o != "gold") {
      throw DataError(record_name(j, index) + ": unknown origin '" + o + "'");
    }
  }
  return make_sample(required_string(j, {"id"}, index), required_string(j, {"passage"}, index),
                     required_string(j, {"question"}, index), required_string(j, {"answer"}, index),
                     label, std::move(origin));
}

Corpus load_samples(const std::string& path) {
  const auto records = read_jsonl(path);
  if (!records.empty() && records.front().contains("generated_question")) {
    std::string model = records.front().value("model", std::string("unknown"));
    return parse_generated(records, model, path);
  }
  Corpus corpus;
  corpus.source = path;
  corpus.samples.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    corpus.samples.push_back(sample_from_json(records[i], i));
  }
  check_unique_ids(corpus);
  return corpus;
}

std::string to_string(QuestionType t) { return t == QuestionType::YesNo ? "yesno" : "other"; }

std::string to_string(Label l) {
  return l == Label::Answerable ? "answerable" : "non-answerable";
}

std::string to_string(const Origin& o) {
  switch (o.kind) {
    case Origin::Kind::Gold: return "gold";
    case Origin::Kind::Forged: return "forged";
    case Origin::Kind::ModelGenerated: return "model:" + o.model;
  }
  return "gold";
}

QuestionType parse_question_type(std::string_view s) {
  const std::string v = detail::to_lower(detail::trim(s));
  if (v == "yesno" || v == "yes/no" || v == "yes-no") return QuestionType::YesNo;
  if (v == "other" || v == "non-yesno") return QuestionType::Other;
  throw DataError("unknown question type '" + std::string(s) + "'");
}

Label parse_label(std::string_view s) {
  std::string v = detail::to_lower(detail::trim(s));
  std::erase_if(v, [](char c) { return c == '-' || c == '_' || c == ' '; });
  if (v == "answerable" || v == "yes") return Label::Answerable;
  if (v == "nonanswerable" || v == "unanswerable" || v == "no") return Label::NonAnswerable;
  throw DataError("unknown answerability label '" + std::string(s) + "'");
}

}  // namespace pman
