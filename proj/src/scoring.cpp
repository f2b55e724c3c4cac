#include "pman/scoring.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pman/error.hpp"
#include "pman/jsonl.hpp"
#include "text_util.hpp"

namespace pman {

using nlohmann::json;

namespace {

Metric ratio(std::size_t num, std::size_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(std::size_t hits, std::size_t false_alarms, std::size_t misses) {
  ClassMetrics m;
  m.precision = ratio(hits, hits + false_alarms);
  m.recall = ratio(hits, hits + misses);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0) {
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  }
  return m;
}

json metric_json(const Metric& m) { return m ? json(*m) : json(nullptr); }

std::string config_key(const ReliabilityConfig& c) {
  return c.sample_set + "|" + c.model + "|" + (c.cot ? "cot" : "nocot");
}

}  // namespace

ClassMetrics ConfusionStats::answerable() const { return class_metrics(tp, fp, fn); }

ClassMetrics ConfusionStats::non_answerable() const { return class_metrics(tn, fn, fp); }

Metric ConfusionStats::accuracy() const { return ratio(tp + tn, n_valid()); }

ConfusionStats confusion(std::span<const AssessmentRecord> records,
                         const std::map<std::string, Label>& labels) {
  ConfusionStats s;
  for (const auto& r : records) {
    if (r.verdict == Verdict::Invalid) {
      ++s.invalid;
      continue;
    }
    const auto it = labels.find(r.sample_id);
    if (it == labels.end()) throw DataError("no answerability label for sample '" + r.sample_id + "'");
    const bool said_yes = r.verdict == Verdict::Yes;
    const bool answerable = it->second == Label::Answerable;
    if (said_yes && answerable) ++s.tp;
    else if (said_yes) ++s.fp;
    else if (answerable) ++s.fn;
    else ++s.tn;
  }
  return s;
}

std::map<std::string, Label> labels_of(const Corpus& corpus) {
  std::map<std::string, Label> out;
  for (const auto& s : corpus.samples) {
    if (s.label) out.emplace(s.id, *s.label);
  }
  return out;
}

std::string format_metric(const Metric& m) {
  if (!m) return "—";
  // The epsilon keeps exact halves such as 0.8805 (stored as 0.88049999...)
  // rounding up.
  const double rounded = std::floor(*m * 1000.0 + 0.5 + 1e-9) / 1000.0;
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.3f", rounded);
  return buf.data();
}

std::string render_reliability_table(const ReliabilityInput& rows) {
  const std::vector<std::string> header = {"Test sample set", "Assessing model", "CoT",
                                           "Ans P", "Ans R", "Ans F1",
                                           "Non P", "Non R", "Non F1",
                                           "Accuracy", "# of valid responses"};
  std::vector<std::vector<std::string>> cells;
  cells.push_back(header);
  bool any_starred = false;
  for (const auto& [cfg, st] : rows) {
    const auto ans = st.answerable();
    const auto non = st.non_answerable();
    const bool starred = st.invalid > 0;
    any_starred = any_starred || starred;
    cells.push_back({cfg.sample_set, cfg.model + (starred ? "*" : ""), cfg.cot ? "✓" : "",
                     format_metric(ans.precision), format_metric(ans.recall), format_metric(ans.f1),
                     format_metric(non.precision), format_metric(non.recall), format_metric(non.f1),
                     format_metric(st.accuracy()), std::to_string(st.n_valid())});
  }

  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], detail::display_width(row[c]));
  }

  std::ostringstream os;
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      if (c) os << "  ";
      // Text columns left-aligned, numbers right-aligned.
      os << (c < 3 ? detail::pad_right(cells[r][c], width[c]) : detail::pad_left(cells[r][c], width[c]));
    }
    os << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      os << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  if (any_starred) {
    for (const auto& [cfg, st] : rows) {
      if (st.invalid > 0) {
        os << "* " << cfg.model << " (" << cfg.sample_set << ", " << (cfg.cot ? "CoT" : "no CoT")
           << ") was evaluated only on " << st.n_valid() << " valid responses\n";
      }
    }
  }
  return os.str();
}

json reliability_json(const ReliabilityInput& rows) {
  json out = json::object();
  out["schema_version"] = kSchemaVersion;
  json configs = json::object();
  for (const auto& [cfg, st] : rows) {
    const auto ans = st.answerable();
    const auto non = st.non_answerable();
    configs[config_key(cfg)] = json{
        {"sample_set", cfg.sample_set},
        {"model", cfg.model},
        {"cot", cfg.cot},
        {"tp", st.tp},
        {"fp", st.fp},
        {"fn", st.fn},
        {"tn", st.tn},
        {"invalid", st.invalid},
        {"n_valid", st.n_valid()},
        {"answerable", {{"precision", metric_json(ans.precision)}, {"recall", metric_json(ans.recall)}, {"f1", metric_json(ans.f1)}}},
        {"non_answerable", {{"precision", metric_json(non.precision)}, {"recall", metric_json(non.recall)}, {"f1", metric_json(non.f1)}}},
        {"accuracy", metric_json(st.accuracy())}};
  }
  out["configs"] = std::move(configs);
  return out;
}

}  // namespace pman
