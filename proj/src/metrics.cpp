#include "emobench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emobench/error.hpp"
#include "emobench/reference_embedded.hpp"

namespace emobench {
namespace {

using nlohmann::json;

double ratio_or_zero(double num, double denom) { return denom == 0.0 ? 0.0 : num / denom; }

json labels_to_json(const LabelVector& labels) {
  json obj = json::object();
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    obj[kEmotionNames[e]] = labels[e];
  }
  return obj;
}

}  // namespace

PrecisionRecallF1 f1_score(const ConfusionCounts& counts) {
  PrecisionRecallF1 out;
  out.precision = ratio_or_zero(static_cast<double>(counts.tp),
                                static_cast<double>(counts.tp + counts.fp));
  out.recall = ratio_or_zero(static_cast<double>(counts.tp),
                             static_cast<double>(counts.tp + counts.fn));
  out.f1 = ratio_or_zero(2.0 * out.precision * out.recall, out.precision + out.recall);
  return out;
}

MicroMacro micro_macro(const std::array<ConfusionCounts, kNumEmotions>& counts) {
  ConfusionCounts pooled;
  double macro_sum = 0.0;
  for (const auto& c : counts) {
    pooled.tp += c.tp;
    pooled.fp += c.fp;
    pooled.fn += c.fn;
    pooled.tn += c.tn;
    macro_sum += f1_score(c).f1;
  }
  MicroMacro out;
  out.micro_f1 = f1_score(pooled).f1;
  out.macro_f1 = macro_sum / static_cast<double>(kNumEmotions);
  return out;
}

std::array<ConfusionCounts, kNumEmotions> confusion_from_pairs(
    const std::vector<LabelVector>& gold, const std::vector<LabelVector>& predicted) {
  if (gold.size() != predicted.size()) {
    throw InputError("confusion_from_pairs: gold/predicted size mismatch");
  }
  std::array<ConfusionCounts, kNumEmotions> counts{};
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      const bool g = gold[i][e], p = predicted[i][e];
      if (g && p) {
        ++counts[e].tp;
      } else if (!g && p) {
        ++counts[e].fp;
      } else if (g && !p) {
        ++counts[e].fn;
      } else {
        ++counts[e].tn;
      }
    }
  }
  return counts;
}

std::string EvalReport::to_json() const {
  json obj;
  obj["dataset"] = dataset;
  obj["mode"] = mode;
  obj["seed"] = seed;
  obj["config_hash"] = config_hash;
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    json entry;
    entry["precision"] = per_emotion[e].precision;
    entry["recall"] = per_emotion[e].recall;
    entry["f1"] = per_emotion[e].f1;
    entry["tp"] = counts[e].tp;
    entry["fp"] = counts[e].fp;
    entry["fn"] = counts[e].fn;
    entry["tn"] = counts[e].tn;
    obj["emotions"][kEmotionNames[e]] = std::move(entry);
  }
  obj["micro_f1"] = micro_f1;
  obj["macro_f1"] = macro_f1;
  return obj.dump(2);
}

EvalReport EvalReport::from_json(const std::string& content) {
  json obj;
  try {
    obj = json::parse(content);
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: invalid json: ") + e.what());
  }
  EvalReport report;
  try {
    report.dataset = obj.at("dataset").get<std::string>();
    report.mode = obj.at("mode").get<std::string>();
    report.seed = obj.at("seed").get<std::uint64_t>();
    report.config_hash = obj.value("config_hash", "");
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      const auto& entry = obj.at("emotions").at(kEmotionNames[e]);
      report.per_emotion[e].precision = entry.at("precision").get<double>();
      report.per_emotion[e].recall = entry.at("recall").get<double>();
      report.per_emotion[e].f1 = entry.at("f1").get<double>();
      report.counts[e].tp = entry.value("tp", 0u);
      report.counts[e].fp = entry.value("fp", 0u);
      report.counts[e].fn = entry.value("fn", 0u);
      report.counts[e].tn = entry.value("tn", 0u);
    }
    report.micro_f1 = obj.at("micro_f1").get<double>();
    report.macro_f1 = obj.at("macro_f1").get<double>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("report: missing or bad field: ") + e.what());
  }
  return report;
}

EvalReport EvalReport::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("report: cannot open: " + path);
  }
  std::ostringstream content;
  content << in.rdbuf();
  return from_json(content.str());
}

std::string EvalReport::to_table() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  out << std::left << std::setw(22) << (dataset + "/" + mode);
  for (const char* name : kEmotionNames) {
    out << std::right << std::setw(9) << name;
  }
  out << std::setw(9) << "micro" << std::setw(9) << "macro" << '\n';
  out << std::left << std::setw(22) << ("seed " + std::to_string(seed));
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    out << std::right << std::setw(9) << per_emotion[e].f1;
  }
  out << std::setw(9) << micro_f1 << std::setw(9) << macro_f1 << '\n';
  return out.str();
}

EvalReport evaluate(const std::vector<LabelVector>& gold, const std::vector<LabelVector>& pred,
                    std::string dataset, std::string mode, std::uint64_t seed,
                    std::string config_hash) {
  EvalReport report;
  report.dataset = std::move(dataset);
  report.mode = std::move(mode);
  report.seed = seed;
  report.config_hash = std::move(config_hash);
  report.counts = confusion_from_pairs(gold, pred);
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    report.per_emotion[e] = f1_score(report.counts[e]);
  }
  const auto agg = micro_macro(report.counts);
  report.micro_f1 = agg.micro_f1;
  report.macro_f1 = agg.macro_f1;
  return report;
}

// --- reference table ---------------------------------------------------------

ReferenceTable ReferenceTable::from_json(const std::string& content) {
  json obj;
  try {
    obj = json::parse(content);
  } catch (const json::exception& e) {
    throw ParseError(std::string("reference table: invalid json: ") + e.what());
  }
  ReferenceTable table;
  table.version_ = obj.value("version", 0);
  for (const auto& row : obj.at("rows")) {
    ReferenceRow entry;
    entry.key = row.at("key").get<std::string>();
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      entry.per_emotion[e] = row.at(kEmotionNames[e]).get<double>();
    }
    entry.micro_f1 = row.at("micro_f1").get<double>();
    entry.macro_f1 = row.at("macro_f1").get<double>();
    entry.citation = row.value("citation", "");
    table.rows_.emplace(entry.key, std::move(entry));
  }
  return table;
}

ReferenceTable ReferenceTable::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("reference table: cannot open: " + path);
  }
  std::ostringstream content;
  content << in.rdbuf();
  return from_json(content.str());
}

ReferenceTable ReferenceTable::embedded() { return from_json(kEmbeddedReferenceJson); }

const ReferenceRow& ReferenceTable::row(const std::string& key) const {
  auto it = rows_.find(key);
  if (it == rows_.end()) {
    std::string available;
    for (const auto& [k, v] : rows_) {
      available += available.empty() ? k : ", " + k;
    }
    throw LookupError("reference table: unknown key '" + key + "'; available: " + available);
  }
  return it->second;
}

std::vector<std::string> ReferenceTable::keys() const {
  std::vector<std::string> out;
  out.reserve(rows_.size());
  for (const auto& [k, v] : rows_) {
    out.push_back(k);
  }
  return out;
}

DeltaTable compare_to_reference(const EvalReport& report, const ReferenceTable& table,
                                const std::string& key) {
  const ReferenceRow& ref = table.row(key);
  DeltaTable out;
  out.reference_key = key;
  auto push = [&](const std::string& metric, double ours, double reference) {
    DeltaEntry entry;
    entry.metric = metric;
    entry.ours = ours;
    entry.reference = reference;
    entry.delta_percent = reference == 0.0 ? 0.0 : (ours - reference) / reference * 100.0;
    out.entries.push_back(std::move(entry));
  };
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    push(kEmotionNames[e], report.per_emotion[e].f1, ref.per_emotion[e]);
  }
  push("micro_f1", report.micro_f1, ref.micro_f1);
  push("macro_f1", report.macro_f1, ref.macro_f1);
  return out;
}

std::string DeltaTable::to_text() const {
  // Emotions as columns, micro/macro at the right, a signed (+/-) row under
  // the scores -- the layout of the published tables.
  std::ostringstream out;
  out << "desk-scale model vs. published full-scale reference '" << reference_key
      << "' -- not a reproduction claim\n";
  out << std::left << std::setw(11) << "";
  for (const auto& entry : entries) {
    std::string label = entry.metric;
    if (label == "micro_f1") {
      label = "micro";
    } else if (label == "macro_f1") {
      label = "macro";
    }
    out << std::right << std::setw(10) << label;
  }
  out << '\n' << std::fixed << std::setprecision(3);
  out << std::left << std::setw(11) << "reference";
  for (const auto& entry : entries) {
    out << std::right << std::setw(10) << entry.reference;
  }
  out << '\n' << std::left << std::setw(11) << "ours";
  for (const auto& entry : entries) {
    out << std::right << std::setw(10) << entry.ours;
  }
  out << '\n' << std::left << std::setw(11) << "(+/-)" << std::setprecision(2);
  for (const auto& entry : entries) {
    std::ostringstream cell;
    cell << std::fixed << std::setprecision(2) << std::showpos << entry.delta_percent << "%";
    out << std::right << std::setw(10) << cell.str();
  }
  out << '\n';
  return out.str();
}

// --- error analysis ----------------------------------------------------------

std::string ErrorCase::case_id() const {
  return utterance_id + ":" + kEmotionNames[emotion];
}

std::vector<ErrorCase> unanimous_errors(const std::map<std::string, LabelVector>& gold,
                                        const std::vector<PredictionSet>& models) {
  if (models.empty()) {
    throw InputError("unanimous_errors: no prediction sets");
  }
  for (const auto& model : models) {
    if (model.predictions.size() != gold.size()) {
      throw InputError("unanimous_errors: id coverage mismatch for model '" + model.model + "'");
    }
    for (const auto& [id, labels] : gold) {
      if (!model.predictions.count(id)) {
        throw InputError("unanimous_errors: model '" + model.model + "' missing id '" + id +
                         "'");
      }
    }
  }
  std::vector<ErrorCase> cases;
  for (const auto& [id, gold_labels] : gold) {  // std::map: sorted by id
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      const bool first = models.front().predictions.at(id)[e];
      bool agree = true;
      for (const auto& model : models) {
        if (model.predictions.at(id)[e] != first) {
          agree = false;
          break;
        }
      }
      if (!agree || first == gold_labels[e]) {
        continue;
      }
      ErrorCase c;
      c.utterance_id = id;
      c.emotion = e;
      c.direction = first ? ErrorDirection::FalsePositive : ErrorDirection::FalseNegative;
      c.gold = gold_labels;
      for (const auto& model : models) {
        c.model_predictions.emplace_back(model.model, first);
      }
      cases.push_back(std::move(c));
    }
  }
  return cases;
}

std::string error_cases_to_jsonl(const std::vector<ErrorCase>& cases) {
  std::ostringstream out;
  for (const auto& c : cases) {
    json obj;
    obj["case_id"] = c.case_id();
    obj["utterance_id"] = c.utterance_id;
    obj["emotion"] = kEmotionNames[c.emotion];
    obj["direction"] =
        c.direction == ErrorDirection::FalsePositive ? "false-positive" : "false-negative";
    obj["gold"] = labels_to_json(c.gold);
    json preds = json::object();
    for (const auto& [model, value] : c.model_predictions) {
      preds[model] = value;
    }
    obj["predictions"] = std::move(preds);
    out << obj.dump() << '\n';
  }
  return out.str();
}

CategoryReport category_report(const std::vector<ErrorCase>& cases,
                               const std::map<std::string, std::string>& annotations) {
  const auto& taxonomy = error_taxonomy();
  for (const auto& [case_id, category] : annotations) {
    if (std::find(taxonomy.begin(), taxonomy.end(), category) == taxonomy.end()) {
      std::string allowed;
      for (const auto& c : taxonomy) {
        allowed += allowed.empty() ? c : ", " + c;
      }
      throw ValidationError("category_report: unknown category '" + category +
                            "' (allowed: " + allowed + ")");
    }
  }
  CategoryReport report;
  for (const auto& c : cases) {
    auto it = annotations.find(c.case_id());
    if (it == annotations.end()) {
      report.unannotated.push_back(c.case_id());
      continue;
    }
    ++report.counts[it->second];
    ++report.annotated_total;
    auto& per = report.per_emotion[it->second];
    ++per[c.emotion];
  }
  return report;
}

std::string CategoryReport::to_text() const {
  std::ostringstream out;
  out << "error categories (" << annotated_total << " annotated, " << unannotated.size()
      << " unannotated)\n";
  out << std::fixed << std::setprecision(1);
  for (const auto& [category, count] : counts) {
    const double pct =
        annotated_total == 0 ? 0.0
                             : 100.0 * static_cast<double>(count) / static_cast<double>(annotated_total);
    out << "  " << std::left << std::setw(30) << category << std::right << std::setw(5) << count
        << std::setw(8) << pct << "%";
    const auto& per = per_emotion.at(category);
    out << "  [";
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      out << (e ? " " : "") << kEmotionNames[e] << ":" << per[e];
    }
    out << "]\n";
  }
  return out.str();
}

std::map<std::string, std::string> load_annotations_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("annotations: cannot open: " + path);
  }
  std::map<std::string, std::string> annotations;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty() || (line_no == 1 && line == "case_id,category")) {
      continue;
    }
    const std::size_t comma = line.rfind(',');
    if (comma == std::string::npos) {
      throw ParseError("annotations: expected case_id,category", line_no);
    }
    annotations[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return annotations;
}

ResolutionReport resolved_errors(const std::vector<ErrorCase>& before,
                                 const std::vector<PredictionSet>& after,
                                 const std::map<std::string, std::string>& annotations) {
  if (after.empty()) {
    throw InputError("resolved_errors: no prediction sets");
  }
  ResolutionReport report;
  for (const auto& c : before) {
    bool any_correct = false;
    for (const auto& model : after) {
      auto it = model.predictions.find(c.utterance_id);
      if (it == model.predictions.end()) {
        throw InputError("resolved_errors: model '" + model.model + "' missing id '" +
                         c.utterance_id + "'");
      }
      if (it->second[c.emotion] == c.gold[c.emotion]) {
        any_correct = true;
        break;
      }
    }
    (any_correct ? report.resolved : report.persistent).push_back(c.case_id());
    auto it = annotations.find(c.case_id());
    if (it != annotations.end()) {
      auto& [resolved, total] = report.per_category[it->second];
      ++total;
      if (any_correct) {
        ++resolved;
      }
    }
  }
  return report;
}

std::string ResolutionReport::to_text() const {
  std::ostringstream out;
  const std::size_t total = resolved.size() + persistent.size();
  out << "resolved " << resolved.size() << " of " << total << " prior unanimous errors ("
      << persistent.size() << " persistent)\n";
  for (const auto& [category, pair] : per_category) {
    out << "  " << std::left << std::setw(30) << category << pair.first << "/" << pair.second
        << " resolved\n";
  }
  return out.str();
}

}  // namespace emobench
