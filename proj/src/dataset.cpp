#include "emobench/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "emobench/csv.hpp"
#include "emobench/error.hpp"
#include "emobench/rng.hpp"

namespace emobench {
namespace {

using nlohmann::json;

// RFC-4180 record reader: quoted fields may contain commas, doubled quotes,
// and newlines. Returns false at end of input.
bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line_no) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  int c;
  while ((c = in.get()) != EOF) {
    any = true;
    const char ch = static_cast<char>(c);
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          field.push_back('"');
          in.get();
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') {
          ++line_no;
        }
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\n') {
      ++line_no;
      if (!field.empty() && field.back() == '\r') {
        field.pop_back();
      }
      fields.push_back(std::move(field));
      return true;
    } else {
      field.push_back(ch);
    }
  }
  if (in_quotes) {
    throw ParseError("csv: unterminated quoted field", line_no);
  }
  if (!any) {
    return false;
  }
  if (!field.empty() && field.back() == '\r') {
    field.pop_back();
  }
  fields.push_back(std::move(field));
  return true;
}

bool parse_label(const std::string& field, std::size_t row) {
  if (field == "0" || field == "false") {
    return false;
  }
  if (field == "1" || field == "true") {
    return true;
  }
  throw ParseError("dataset: label must be 0/1, got '" + field + "'", row);
}

void validate_manifest(const std::vector<Utterance>& data, const DatasetManifest& manifest) {
  std::ostringstream problems;
  if (data.size() != manifest.expected_total) {
    problems << "total: expected " << manifest.expected_total << ", found " << data.size()
             << "; ";
  }
  const auto counts = label_counts(data);
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    if (counts[e] != manifest.expected_counts[e]) {
      problems << kEmotionNames[e] << ": expected " << manifest.expected_counts[e] << ", found "
               << counts[e] << "; ";
    }
  }
  const std::string msg = problems.str();
  if (!msg.empty()) {
    throw ValidationError("dataset does not match manifest '" + manifest.name + "': " + msg);
  }
}

std::vector<Utterance> load_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("dataset: cannot open: " + path);
  }
  std::vector<std::string> fields;
  std::size_t line_no = 1;
  if (!read_csv_record(in, fields, line_no)) {
    throw ParseError("dataset: empty file", 1);
  }
  const std::vector<std::string> expected_header = {"id",  "text",    "anger",   "love",
                                                    "fear", "joy", "sadness", "surprise"};
  if (fields != expected_header) {
    throw ParseError("dataset: bad header; expected id,text,anger,love,fear,joy,sadness,surprise",
                     1);
  }
  std::vector<Utterance> data;
  std::size_t row = 1;
  while (read_csv_record(in, fields, line_no)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty()) {
      continue;  // trailing blank line
    }
    if (fields.size() != 8) {
      throw ParseError("dataset: expected 8 fields, got " + std::to_string(fields.size()), row);
    }
    Utterance u;
    u.id = fields[0];
    u.text = fields[1];
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      u.labels[e] = parse_label(fields[2 + e], row);
    }
    data.push_back(std::move(u));
  }
  return data;
}

std::vector<Utterance> load_jsonl(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("dataset: cannot open: " + path);
  }
  std::vector<Utterance> data;
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty() || line == "\r") {
      continue;
    }
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      throw ParseError(std::string("dataset: invalid json: ") + e.what(), row);
    }
    Utterance u;
    try {
      u.id = obj.at("id").get<std::string>();
      u.text = obj.at("text").get<std::string>();
      for (std::size_t e = 0; e < kNumEmotions; ++e) {
        const auto& v = obj.at(kEmotionNames[e]);
        u.labels[e] = v.is_boolean() ? v.get<bool>() : (v.get<int>() != 0);
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("dataset: missing or bad field: ") + e.what(), row);
    }
    data.push_back(std::move(u));
  }
  return data;
}

}  // namespace

std::size_t emotion_index(const std::string& name) {
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    if (name == kEmotionNames[e]) {
      return e;
    }
  }
  throw LookupError("unknown emotion '" + name + "'");
}

DatasetManifest DatasetManifest::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("manifest: cannot open: " + path);
  }
  json obj;
  try {
    in >> obj;
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: invalid json: ") + e.what());
  }
  DatasetManifest manifest;
  try {
    manifest.name = obj.at("name").get<std::string>();
    manifest.expected_total = obj.at("expected_total").get<std::size_t>();
    const auto& counts = obj.at("expected_counts");
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      manifest.expected_counts[e] = counts.at(kEmotionNames[e]).get<std::size_t>();
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("manifest: missing or bad field: ") + e.what());
  }
  std::size_t sum = 0;
  for (std::size_t c : manifest.expected_counts) {
    if (c > manifest.expected_total) {
      throw ValidationError("manifest: per-emotion count exceeds total");
    }
    sum += c;
  }
  (void)sum;  // multi-label: counts may sum past the total
  return manifest;
}

std::string DatasetManifest::to_json() const {
  json obj;
  obj["name"] = name;
  obj["expected_total"] = expected_total;
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    obj["expected_counts"][kEmotionNames[e]] = expected_counts[e];
  }
  return obj.dump(2);
}

std::vector<Utterance> load_dataset(const std::string& path, DatasetFormat format,
                                    const std::optional<DatasetManifest>& manifest) {
  std::vector<Utterance> data =
      format == DatasetFormat::Csv ? load_csv(path) : load_jsonl(path);
  std::unordered_set<std::string> ids;
  for (const auto& u : data) {
    if (u.id.empty() || u.id.find_first_of("\n\r") != std::string::npos) {
      throw ValidationError("dataset: ids must be non-empty and free of line breaks");
    }
    if (!ids.insert(u.id).second) {
      throw ValidationError("dataset: duplicate id '" + u.id + "'");
    }
  }
  if (manifest) {
    validate_manifest(data, *manifest);
  }
  return data;
}

void save_dataset_csv(const std::string& path, const std::vector<Utterance>& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("dataset: cannot open for writing: " + path);
  }
  out << "id,text,anger,love,fear,joy,sadness,surprise\n";
  for (const auto& u : data) {
    out << csv_escape(u.id) << ',' << csv_escape(u.text);
    for (bool b : u.labels) {
      out << ',' << (b ? '1' : '0');
    }
    out << '\n';
  }
}

std::array<std::size_t, kNumEmotions> label_counts(const std::vector<Utterance>& data) {
  std::array<std::size_t, kNumEmotions> counts{};
  for (const auto& u : data) {
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      counts[e] += u.labels[e] ? 1 : 0;
    }
  }
  return counts;
}

std::vector<std::size_t> SplitAssignment::indices_of(SplitTag tag) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (tags[i] == tag) {
      out.push_back(i);
    }
  }
  return out;
}

std::string SplitAssignment::to_json(const std::vector<Utterance>& data) const {
  if (data.size() != tags.size()) {
    throw ContractError("split: size mismatch with dataset");
  }
  json obj;
  obj["seed"] = seed;
  obj["train_fraction"] = train_fraction;
  json assignment = json::object();
  for (std::size_t i = 0; i < tags.size(); ++i) {
    assignment[data[i].id] = tags[i] == SplitTag::Train ? "train" : "test";
  }
  obj["assignment"] = std::move(assignment);
  return obj.dump(2);
}

SplitAssignment SplitAssignment::from_json(const std::string& content,
                                           const std::vector<Utterance>& data) {
  json obj;
  try {
    obj = json::parse(content);
  } catch (const json::exception& e) {
    throw ParseError(std::string("split: invalid json: ") + e.what());
  }
  SplitAssignment split;
  split.seed = obj.at("seed").get<std::uint64_t>();
  split.train_fraction = obj.at("train_fraction").get<double>();
  const auto& assignment = obj.at("assignment");
  split.tags.resize(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto it = assignment.find(data[i].id);
    if (it == assignment.end()) {
      throw ValidationError("split: no assignment for id '" + data[i].id + "'");
    }
    split.tags[i] = *it == "train" ? SplitTag::Train : SplitTag::Test;
  }
  return split;
}

SplitAssignment stratified_split(const std::vector<Utterance>& data, double train_frac,
                                 std::uint64_t seed) {
  if (data.empty()) {
    throw ValidationError("stratified_split: empty dataset");
  }
  if (train_frac <= 0.0 || train_frac >= 1.0) {
    throw ConfigError("stratified_split: train fraction must be in (0,1)");
  }
  const std::size_t n = data.size();
  // Work on id-sorted positions so the result depends only on (ids, seed).
  std::vector<std::size_t> sorted(n);
  std::iota(sorted.begin(), sorted.end(), 0);
  std::sort(sorted.begin(), sorted.end(),
            [&](std::size_t a, std::size_t b) { return data[a].id < data[b].id; });

  const auto totals = label_counts(data);
  std::vector<std::size_t> label_order(kNumEmotions);
  std::iota(label_order.begin(), label_order.end(), 0);
  std::sort(label_order.begin(), label_order.end(), [&](std::size_t a, std::size_t b) {
    if (totals[a] != totals[b]) {
      return totals[a] < totals[b];  // rarest first
    }
    return a < b;
  });

  constexpr std::uint8_t kUnassigned = 0xFF;
  std::vector<std::uint8_t> assigned(n, kUnassigned);
  const auto target_train =
      static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(n)));

  for (std::size_t rank = 0; rank < kNumEmotions; ++rank) {
    const std::size_t e = label_order[rank];
    std::vector<std::size_t> remaining;
    std::size_t already_train = 0;
    for (std::size_t pos : sorted) {
      if (!data[pos].labels[e]) {
        continue;
      }
      if (assigned[pos] == kUnassigned) {
        remaining.push_back(pos);
      } else if (assigned[pos] == 0) {
        ++already_train;
      }
    }
    if (remaining.empty()) {
      continue;
    }
    // Proportional target over the whole label, minus whatever a rarer label
    // already placed in train.
    const auto desired =
        static_cast<std::size_t>(std::llround(train_frac * static_cast<double>(totals[e])));
    const std::size_t take =
        std::min(remaining.size(), desired > already_train ? desired - already_train : 0);
    Rng rng(derive_seed(seed, "split-label", e));
    rng.shuffle(remaining);
    for (std::size_t i = 0; i < remaining.size(); ++i) {
      assigned[remaining[i]] = i < take ? 0 : 1;
    }
  }

  // Neutral (and any unassigned) rows fill the overall target last.
  std::vector<std::size_t> leftover;
  std::size_t train_so_far = 0;
  for (std::size_t pos : sorted) {
    if (assigned[pos] == kUnassigned) {
      leftover.push_back(pos);
    } else if (assigned[pos] == 0) {
      ++train_so_far;
    }
  }
  Rng rng(derive_seed(seed, "split-neutral"));
  rng.shuffle(leftover);
  for (std::size_t pos : leftover) {
    if (train_so_far < target_train) {
      assigned[pos] = 0;
      ++train_so_far;
    } else {
      assigned[pos] = 1;
    }
  }

  SplitAssignment split;
  split.seed = seed;
  split.train_fraction = train_frac;
  split.tags.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    split.tags[i] = assigned[i] == 0 ? SplitTag::Train : SplitTag::Test;
  }
  return split;
}

}  // namespace emobench
