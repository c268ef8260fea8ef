#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "emobench/dataset.hpp"

namespace emobench {

struct ConfusionCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  std::size_t total() const { return tp + fp + fn + tn; }
};

struct PrecisionRecallF1 {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

// P = TP/(TP+FP), R = TP/(TP+FN), F1 = 2PR/(P+R); any 0/0 is defined as 0.
PrecisionRecallF1 f1_score(const ConfusionCounts& counts);

struct MicroMacro {
  double micro_f1 = 0.0;  // TP/FP/FN pooled across emotions, then F1
  double macro_f1 = 0.0;  // unweighted mean of the six per-emotion F1s
};

MicroMacro micro_macro(const std::array<ConfusionCounts, kNumEmotions>& counts);

using LabelVector = std::array<bool, kNumEmotions>;

std::array<ConfusionCounts, kNumEmotions> confusion_from_pairs(
    const std::vector<LabelVector>& gold, const std::vector<LabelVector>& predicted);

struct EvalReport {
  std::string dataset;
  std::string mode;  // baseline | polarity
  std::uint64_t seed = 0;
  std::string config_hash;
  std::array<PrecisionRecallF1, kNumEmotions> per_emotion{};
  std::array<ConfusionCounts, kNumEmotions> counts{};
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;

  std::string to_json() const;
  static EvalReport from_json(const std::string& content);
  static EvalReport from_json_file(const std::string& path);
  // Aligned plain-text table: per-emotion F1 columns plus micro/macro.
  std::string to_table() const;
};

EvalReport evaluate(const std::vector<LabelVector>& gold, const std::vector<LabelVector>& pred,
                    std::string dataset, std::string mode, std::uint64_t seed,
                    std::string config_hash);

struct ReferenceRow {
  std::string key;  // e.g. "sentimoji-github"
  std::array<double, kNumEmotions> per_emotion{};
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  std::string citation;
};

// Published full-scale reference results, shipped as a versioned JSON
// resource. Read-only; every row carries its citation string.
class ReferenceTable {
 public:
  static ReferenceTable from_json(const std::string& content);
  static ReferenceTable from_json_file(const std::string& path);
  static ReferenceTable embedded();  // compiled-in copy of the resource

  const ReferenceRow& row(const std::string& key) const;  // LookupError w/ keys
  std::vector<std::string> keys() const;
  int version() const { return version_; }

 private:
  int version_ = 0;
  std::map<std::string, ReferenceRow> rows_;
};

struct DeltaEntry {
  std::string metric;
  double ours = 0.0;
  double reference = 0.0;
  double delta_percent = 0.0;  // (ours - reference) / reference * 100
};

struct DeltaTable {
  std::string reference_key;
  std::vector<DeltaEntry> entries;
  std::string to_text() const;  // carries the not-a-reproduction-claim label
};

DeltaTable compare_to_reference(const EvalReport& report, const ReferenceTable& table,
                                const std::string& key);

// --- error analysis ---------------------------------------------------------

struct PredictionSet {
  std::string model;
  // id -> predicted labels; every set must cover the same ids
  std::map<std::string, LabelVector> predictions;
};

enum class ErrorDirection { FalsePositive, FalseNegative };

struct ErrorCase {
  std::string utterance_id;
  std::size_t emotion = 0;
  ErrorDirection direction = ErrorDirection::FalseNegative;
  LabelVector gold{};
  std::vector<std::pair<std::string, bool>> model_predictions;  // per model, same value

  std::string case_id() const;  // "<utterance_id>:<emotion name>"
};

// Emits one case per (utterance, emotion) where every model predicts the same
// value and it differs from gold. Grouped per utterance (sorted by id, then
// emotion). With a single model this degenerates to a plain error listing.
std::vector<ErrorCase> unanimous_errors(const std::map<std::string, LabelVector>& gold,
                                        const std::vector<PredictionSet>& models);

std::string error_cases_to_jsonl(const std::vector<ErrorCase>& cases);

inline const std::vector<std::string>& error_taxonomy() {
  static const std::vector<std::string> categories = {
      "general-error", "implicit-sentiment-polarity", "figurative-language", "pragmatics",
      "politeness"};
  return categories;
}

struct CategoryReport {
  std::map<std::string, std::size_t> counts;  // per category
  std::map<std::string, std::array<std::size_t, kNumEmotions>> per_emotion;
  std::vector<std::string> unannotated;  // case ids without annotation
  std::size_t annotated_total = 0;

  std::string to_text() const;
};

// Annotations are human-assigned (case id -> category from the closed
// taxonomy); the tool never auto-categorizes. Unknown category strings are a
// validation error.
CategoryReport category_report(const std::vector<ErrorCase>& cases,
                               const std::map<std::string, std::string>& annotations);

std::map<std::string, std::string> load_annotations_csv(const std::string& path);

struct ResolutionReport {
  std::vector<std::string> resolved;    // case ids with >= 1 model now correct
  std::vector<std::string> persistent;  // case ids still unanimous-wrong or wrong
  std::map<std::string, std::pair<std::size_t, std::size_t>>
      per_category;  // category -> (resolved, total), when annotations given

  std::string to_text() const;
};

ResolutionReport resolved_errors(const std::vector<ErrorCase>& before,
                                 const std::vector<PredictionSet>& after,
                                 const std::map<std::string, std::string>& annotations = {});

}  // namespace emobench
