#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "pman/assessor.hpp"
#include "pman/corpus.hpp"

namespace pman {

/// A metric that may be undefined (zero denominator). Never 0 or NaN in
/// place of "undefined".
using Metric = std::optional<double>;

struct ClassMetrics {
  Metric precision;
  Metric recall;
  Metric f1;
};

/// Confusion counts with Answerable (verdict YES) as the positive class.
struct ConfusionStats {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;
  /// Records with an Invalid verdict; excluded from every metric.
  std::size_t invalid = 0;

  std::size_t n_valid() const noexcept { return tp + fp + fn + tn; }

  ClassMetrics answerable() const;
  /// Non-answerable class: tn plays the role of true positives.
  ClassMetrics non_answerable() const;
  Metric accuracy() const;

  friend bool operator==(const ConfusionStats&, const ConfusionStats&) = default;
};

/// Tallies records against ground-truth labels. Throws DataError naming the
/// first valid record whose sample has no label.
ConfusionStats confusion(std::span<const AssessmentRecord> records,
                         const std::map<std::string, Label>& labels);

/// Labels keyed by sample id; samples without a label are skipped.
std::map<std::string, Label> labels_of(const Corpus& corpus);

struct ReliabilityConfig {
  std::string sample_set;
  std::string model;
  bool cot = false;
};

/// One row per config, in the order given.
using ReliabilityInput = std::vector<std::pair<ReliabilityConfig, ConfusionStats>>;

/// Half-up rounding to 3 decimals, or an em dash for undefined.
std::string format_metric(const Metric& m);

/// Aligned plain-text table: set, model, CoT, answerable P/R/F1,
/// non-answerable P/R/F1, accuracy, number of valid responses. Models with
/// invalid responses are starred and footnoted.
std::string render_reliability_table(const ReliabilityInput& rows);

/// Same rows at full precision, keyed by "set|model|cot" / "nocot".
nlohmann::json reliability_json(const ReliabilityInput& rows);

}  // namespace pman
