#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace emobench {

// Fixed Shaver-order label set used by every table and report in the project.
inline constexpr std::size_t kNumEmotions = 6;
inline constexpr std::array<const char*, kNumEmotions> kEmotionNames = {
    "anger", "love", "fear", "joy", "sadness", "surprise"};

std::size_t emotion_index(const std::string& name);

struct Utterance {
  std::string id;
  std::string text;
  std::array<bool, kNumEmotions> labels{};  // all-false == neutral

  bool neutral() const {
    for (bool b : labels) {
      if (b) {
        return false;
      }
    }
    return true;
  }
};

struct DatasetManifest {
  std::string name;
  std::size_t expected_total = 0;
  std::array<std::size_t, kNumEmotions> expected_counts{};

  static DatasetManifest from_json_file(const std::string& path);
  std::string to_json() const;
};

enum class DatasetFormat { Csv, Jsonl };

// CSV header: id,text,anger,love,fear,joy,sadness,surprise with RFC-4180
// quoting; JSONL carries the same fields per object. Duplicate ids are
// rejected. When a manifest is given, total and per-emotion counts must match
// exactly.
std::vector<Utterance> load_dataset(const std::string& path, DatasetFormat format,
                                    const std::optional<DatasetManifest>& manifest = {});

void save_dataset_csv(const std::string& path, const std::vector<Utterance>& data);

std::array<std::size_t, kNumEmotions> label_counts(const std::vector<Utterance>& data);

enum class SplitTag : std::uint8_t { Train, Test };

struct SplitAssignment {
  std::vector<SplitTag> tags;  // aligned with the input utterance order
  std::uint64_t seed = 0;
  double train_fraction = 0.8;

  std::vector<std::size_t> indices_of(SplitTag tag) const;
  std::string to_json(const std::vector<Utterance>& data) const;
  static SplitAssignment from_json(const std::string& content,
                                   const std::vector<Utterance>& data);
};

// Iterative multi-label stratification: labels processed rarest first, each
// label's remaining utterances distributed proportionally with seeded
// randomness, neutral utterances distributed last to hit the overall target.
// Deterministic function of (ids, seed): rows are sorted by id internally, so
// input order never matters.
SplitAssignment stratified_split(const std::vector<Utterance>& data, double train_frac,
                                 std::uint64_t seed);

}  // namespace emobench
