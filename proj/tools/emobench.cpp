// emobench: emotion-classification workbench CLI.
//
// Subcommands cover the pipeline end to end: prepare (validate a dataset),
// extract-polarity, train, evaluate, compare, errors. Option precedence is
// command line > EMOBENCH_* environment > --config JSON file > defaults.
// Exit codes: 0 ok, 2 validation/config/parse, 3 training, 4 compatibility.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "emobench/checkpoint.hpp"
#include "emobench/csv.hpp"
#include "emobench/dataset.hpp"
#include "emobench/encoder.hpp"
#include "emobench/error.hpp"
#include "emobench/lexicon.hpp"
#include "emobench/metrics.hpp"
#include "emobench/text.hpp"
#include "emobench/train.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace emobench;

namespace {

struct ExitCode {
  static constexpr int kOk = 0;
  static constexpr int kValidation = 2;
  static constexpr int kTraining = 3;
  static constexpr int kCompatibility = 4;
};

void emit_error(const std::string& kind, const std::string& message) {
  json obj;
  obj["error"] = kind;
  obj["message"] = message;
  std::cerr << obj.dump() << std::endl;
}

DatasetFormat parse_format(const std::string& name) {
  if (name == "csv") {
    return DatasetFormat::Csv;
  }
  if (name == "jsonl") {
    return DatasetFormat::Jsonl;
  }
  throw ConfigError("unknown --format '" + name + "' (expected csv or jsonl)");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ValidationError("cannot open: " + path);
  }
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw ValidationError("cannot write: " + path.string());
  }
  out << content;
}

// Config-file merge: any option the user did not pass (flag or env) picks up
// the value from the JSON file, keyed by the long flag name without the
// leading dashes (e.g. "d-model": 32, "seeds": [1, 2]).
void apply_config_file(CLI::App* cmd, const std::string& config_path) {
  if (config_path.empty()) {
    return;
  }
  json config;
  try {
    config = json::parse(read_file(config_path));
  } catch (const json::exception& e) {
    throw ConfigError("config file: " + std::string(e.what()));
  }
  for (const auto& [key, value] : config.items()) {
    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr || opt->count() > 0) {
      continue;
    }
    if (value.is_array()) {
      for (const auto& element : value) {
        opt->add_result(element.is_string() ? element.get<std::string>() : element.dump());
      }
    } else {
      opt->add_result(value.is_string() ? value.get<std::string>() : value.dump());
    }
    opt->run_callback();
  }
}

std::vector<Utterance> load_with_optional_manifest(const std::string& dataset_path,
                                                   const std::string& format,
                                                   const std::string& manifest_path) {
  std::optional<DatasetManifest> manifest;
  if (!manifest_path.empty()) {
    manifest = DatasetManifest::from_json_file(manifest_path);
  }
  return load_dataset(dataset_path, parse_format(format), manifest);
}

std::string predictions_csv(const std::vector<std::string>& ids,
                            const std::vector<std::array<double, kNumEmotions>>& probabilities,
                            const std::vector<LabelVector>& predicted) {
  std::ostringstream out;
  out << "id";
  for (const char* name : kEmotionNames) {
    out << ",p_" << name;
  }
  for (const char* name : kEmotionNames) {
    out << ',' << name;
  }
  out << '\n';
  out.precision(17);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << csv_escape(ids[i]);
    for (double p : probabilities[i]) {
      out << ',' << p;
    }
    for (bool b : predicted[i]) {
      out << ',' << (b ? 1 : 0);
    }
    out << '\n';
  }
  return out.str();
}

// Reads a predictions CSV back into id -> label vector (boolean columns).
PredictionSet load_prediction_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ValidationError("cannot open predictions: " + path);
  }
  PredictionSet set;
  set.model = fs::path(path).stem().string();
  std::string line;
  if (!std::getline(in, line)) {
    throw ParseError("predictions: empty file " + path);
  }
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) {
      continue;
    }
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    const std::vector<std::string> fields = parse_csv_line(line);
    if (fields.size() != 1 + 2 * kNumEmotions) {
      throw ParseError("predictions: expected 13 columns", row);
    }
    LabelVector labels{};
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      labels[e] = fields[1 + kNumEmotions + e] == "1";
    }
    set.predictions[fields[0]] = labels;
  }
  return set;
}

struct TrainOptions {
  std::string dataset_path;
  std::string format = "csv";
  std::string manifest_path;
  std::string lexicon_path;
  std::string mode = "baseline";
  std::string blend = "pooled-concat";
  double w_primary = 0.75;
  double w_polarity = 0.25;
  double tau = kDefaultTau;
  std::vector<std::uint64_t> seeds = {42};
  std::string out_dir;
  std::size_t jobs = 1;
  double train_frac = 0.8;
  std::size_t vocab_min_freq = 2;
  std::size_t vocab_max_size = 8000;
  EncoderConfig encoder;
  TrainConfig train;
};

json resolved_config_json(const TrainOptions& options) {
  json obj;
  obj["dataset"] = options.dataset_path;
  obj["format"] = options.format;
  obj["manifest"] = options.manifest_path;
  obj["lexicon"] = options.lexicon_path;
  obj["mode"] = options.mode;
  obj["blend"] = options.blend;
  obj["w_primary"] = options.w_primary;
  obj["w_polarity"] = options.w_polarity;
  obj["tau"] = options.tau;
  obj["seeds"] = options.seeds;
  obj["jobs"] = options.jobs;
  obj["train_frac"] = options.train_frac;
  obj["vocab_min_freq"] = options.vocab_min_freq;
  obj["vocab_max_size"] = options.vocab_max_size;
  obj["encoder"] = json::parse(options.encoder.to_json());
  obj["train"] = json::parse(options.train.to_json());
  return obj;
}

fs::path default_run_dir(const std::string& mode) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%S", std::gmtime(&t));
  return fs::path("runs") / (std::string(stamp) + "-" + mode);
}

int cmd_prepare(const std::string& dataset_path, const std::string& format,
                const std::string& manifest_path) {
  const auto data = load_with_optional_manifest(dataset_path, format, manifest_path);
  const auto counts = label_counts(data);
  std::size_t neutral = 0;
  for (const auto& u : data) {
    neutral += u.neutral() ? 1 : 0;
  }
  for (std::size_t e = 0; e < kNumEmotions; ++e) {
    const double pct =
        data.empty() ? 0.0
                     : 100.0 * static_cast<double>(counts[e]) / static_cast<double>(data.size());
    std::printf("  %-10s %6zu  %5.1f%%\n", kEmotionNames[e], counts[e], pct);
  }
  std::printf("  %-10s %6zu\n", "neutral", neutral);
  std::printf("%zu rows, OK\n", data.size());
  return ExitCode::kOk;
}

int cmd_extract_polarity(const std::string& dataset_path, const std::string& format,
                         const std::string& lexicon_path, double tau,
                         const std::string& out_path) {
  const auto data = load_with_optional_manifest(dataset_path, format, "");
  const PolarityLexicon lexicon = PolarityLexicon::parse_file(lexicon_path);
  std::vector<std::vector<PolarityWord>> per_utterance;
  per_utterance.reserve(data.size());
  std::ostringstream rows;
  for (const auto& u : data) {
    const auto words = polarity_words_for(u.text, lexicon, tau);
    json obj;
    obj["id"] = u.id;
    obj["polarity_words"] = json::array();
    for (const auto& w : words) {
      json entry;
      entry["word"] = w.word;
      entry["sign"] = w.positive ? "pos" : "neg";
      entry["score"] = w.score;
      obj["polarity_words"].push_back(std::move(entry));
    }
    rows << obj.dump() << '\n';
    per_utterance.push_back(words);
  }
  if (out_path.empty() || out_path == "-") {
    std::cout << rows.str();
  } else {
    write_file(out_path, rows.str());
  }
  const PolarityStats stats = polarity_stats(per_utterance);
  std::printf("utterances %zu, mean polarity words %.3f, coverage %.3f\n", stats.utterances,
              stats.mean_words_per_utterance, stats.coverage);
  return ExitCode::kOk;
}

int cmd_train(TrainOptions options) {
  if (options.mode != "baseline" && options.mode != "polarity") {
    throw ConfigError("--mode must be baseline or polarity");
  }
  BlendConfig blend;
  blend.mode = options.mode == "baseline" ? BlendMode::None
                                          : blend_mode_from_string(options.blend);
  blend.w_primary = options.w_primary;
  blend.w_polarity = options.w_polarity;
  blend.validate();
  if (options.mode == "polarity" && options.lexicon_path.empty()) {
    throw ConfigError("--mode polarity requires --lexicon");
  }

  const auto data = load_with_optional_manifest(options.dataset_path, options.format,
                                                options.manifest_path);
  std::optional<PolarityLexicon> lexicon;
  if (options.mode == "polarity") {
    lexicon = PolarityLexicon::parse_file(options.lexicon_path);
  }

  const fs::path run_dir =
      options.out_dir.empty() ? default_run_dir(options.mode) : fs::path(options.out_dir);
  fs::create_directories(run_dir);

  for (const std::uint64_t seed : options.seeds) {
    const SplitAssignment split = stratified_split(data, options.train_frac, seed);
    std::vector<Utterance> train_rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (split.tags[i] == SplitTag::Train) {
        train_rows.push_back(data[i]);
      }
    }
    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(train_rows.size());
    for (const auto& u : train_rows) {
      corpus.push_back(tokenize(preprocess(u.text)));
    }
    const Vocabulary vocab =
        Vocabulary::build(corpus, options.vocab_min_freq, options.vocab_max_size);

    EncoderConfig encoder_cfg = options.encoder;
    encoder_cfg.vocab_size = vocab.size();
    TrainConfig train_cfg = options.train;
    train_cfg.seed = derive_seed(seed, "train");
    train_cfg.jobs = options.jobs;

    const EncodedDataset train_encoded =
        encode_dataset(train_rows, vocab, lexicon ? &*lexicon : nullptr, options.tau,
                       encoder_cfg.max_len);
    const auto classifiers = train_one_vs_all(train_encoded, encoder_cfg, blend, train_cfg);

    const fs::path seed_dir = run_dir / ("seed_" + std::to_string(seed));
    fs::create_directories(seed_dir);
    write_file(seed_dir / "split.json", split.to_json(data));
    vocab.save((seed_dir / "vocab.txt").string());
    write_file(seed_dir / "train_log.jsonl", training_log_jsonl(classifiers, seed));
    for (const auto& classifier : classifiers) {
      const std::string stem = kEmotionNames[classifier.emotion];
      save_checkpoint((seed_dir / (stem + ".patn")).string(), classifier.params.named());
      json sidecar;
      sidecar["emotion"] = stem;
      sidecar["seed"] = seed;
      sidecar["encoder"] = json::parse(encoder_cfg.to_json());
      sidecar["blend"] = json::parse(blend.to_json());
      sidecar["vocab_hash"] = hash_hex(vocab.content_hash());
      sidecar["train_seed"] = train_cfg.seed;
      sidecar["best_epoch"] = classifier.best_epoch;
      sidecar["best_val_f1"] = classifier.best_val_f1;
      write_file(seed_dir / (stem + ".sidecar.json"), sidecar.dump(2));
    }
    std::printf("seed %llu: trained 6 classifiers -> %s\n",
                static_cast<unsigned long long>(seed), seed_dir.string().c_str());
  }
  write_file(run_dir / "resolved_config.json", resolved_config_json(options).dump(2));
  std::printf("run directory: %s\n", run_dir.string().c_str());
  return ExitCode::kOk;
}

int cmd_evaluate(const std::string& run_dir_path, std::string dataset_path, std::string format,
                 std::size_t jobs) {
  const fs::path run_dir(run_dir_path);
  const json config = json::parse(read_file((run_dir / "resolved_config.json").string()));
  if (dataset_path.empty()) {
    dataset_path = config.at("dataset").get<std::string>();
  }
  if (format.empty()) {
    format = config.value("format", "csv");
  }
  const std::string mode = config.at("mode").get<std::string>();
  const double tau = config.value("tau", kDefaultTau);
  const auto data = load_with_optional_manifest(dataset_path, format, "");

  std::optional<PolarityLexicon> lexicon;
  if (mode == "polarity") {
    lexicon = PolarityLexicon::parse_file(config.at("lexicon").get<std::string>());
  }

  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (!entry.is_directory() ||
        entry.path().filename().string().rfind("seed_", 0) != 0) {
      continue;
    }
    const fs::path seed_dir = entry.path();
    const std::uint64_t seed =
        std::stoull(seed_dir.filename().string().substr(5));
    const Vocabulary vocab = Vocabulary::load((seed_dir / "vocab.txt").string());
    const SplitAssignment split =
        SplitAssignment::from_json(read_file((seed_dir / "split.json").string()), data);
    std::vector<Utterance> test_rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (split.tags[i] == SplitTag::Test) {
        test_rows.push_back(data[i]);
      }
    }

    EncoderConfig encoder_cfg;
    BlendConfig blend;
    std::vector<TrainedClassifier> classifiers(kNumEmotions);
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      const std::string stem = kEmotionNames[e];
      const json sidecar =
          json::parse(read_file((seed_dir / (stem + ".sidecar.json")).string()));
      if (sidecar.at("vocab_hash").get<std::string>() != hash_hex(vocab.content_hash())) {
        throw CompatibilityError("vocabulary hash mismatch for " + stem +
                                 " checkpoint; retrain or use the original vocab");
      }
      encoder_cfg = EncoderConfig::from_json(sidecar.at("encoder").dump());
      blend = BlendConfig::from_json(sidecar.at("blend").dump());
      classifiers[e].emotion = e;
      classifiers[e].params = EncoderParams::from_named(
          load_checkpoint((seed_dir / (stem + ".patn")).string()), encoder_cfg);
    }

    const EncodedDataset test_encoded = encode_dataset(
        test_rows, vocab, lexicon ? &*lexicon : nullptr, tau, encoder_cfg.max_len);
    const auto probabilities =
        predict_probabilities(classifiers, test_encoded, encoder_cfg, blend, jobs);
    const auto predicted = probabilities_to_labels(probabilities);
    const EvalReport report =
        evaluate(test_encoded.labels, predicted, fs::path(dataset_path).stem().string(), mode,
                 seed, hash_hex(vocab.content_hash()));

    write_file(seed_dir / "predictions.csv",
               predictions_csv(test_encoded.ids, probabilities, predicted));
    write_file(seed_dir / "report.json", report.to_json());
    write_file(seed_dir / "report.txt", report.to_table());
    std::printf("seed %llu: micro %.3f macro %.3f -> %s\n",
                static_cast<unsigned long long>(seed), report.micro_f1, report.macro_f1,
                (seed_dir / "report.json").string().c_str());
  }
  return ExitCode::kOk;
}

int cmd_compare(const std::vector<std::string>& report_paths, const std::string& reference_key,
                const std::string& reference_file) {
  const ReferenceTable table = reference_file.empty()
                                   ? ReferenceTable::embedded()
                                   : ReferenceTable::from_json_file(reference_file);
  const ReferenceRow& row = table.row(reference_key);
  std::printf("reference %s: micro %.3f macro %.3f (%s)\n", row.key.c_str(), row.micro_f1,
              row.macro_f1, row.citation.c_str());
  for (const auto& path : report_paths) {
    const EvalReport report = EvalReport::from_json_file(path);
    const DeltaTable deltas = compare_to_reference(report, table, reference_key);
    std::printf("\n%s (seed %llu)\n", path.c_str(),
                static_cast<unsigned long long>(report.seed));
    std::cout << deltas.to_text();
  }
  return ExitCode::kOk;
}

int cmd_errors(const std::string& gold_path, const std::string& format,
               const std::vector<std::string>& prediction_paths,
               const std::vector<std::string>& after_paths, const std::string& annotations_path,
               const std::string& out_dir) {
  const auto data = load_with_optional_manifest(gold_path, format, "");
  std::map<std::string, LabelVector> gold;
  for (const auto& u : data) {
    gold[u.id] = u.labels;
  }
  std::vector<PredictionSet> models;
  for (const auto& path : prediction_paths) {
    models.push_back(load_prediction_csv(path));
  }
  // error analysis runs on the ids the models actually predicted (the test
  // split); restrict gold to that id set
  if (!models.empty()) {
    std::map<std::string, LabelVector> restricted;
    for (const auto& [id, labels] : models.front().predictions) {
      auto it = gold.find(id);
      if (it == gold.end()) {
        throw InputError("prediction id '" + id + "' not present in the gold dataset");
      }
      restricted[id] = it->second;
    }
    gold = std::move(restricted);
  }
  const auto cases = unanimous_errors(gold, models);
  std::size_t fp = 0, fn = 0;
  for (const auto& c : cases) {
    (c.direction == ErrorDirection::FalsePositive ? fp : fn) += 1;
  }
  std::printf("%zu unanimous error cases (%zu false positives, %zu false negatives)\n",
              cases.size(), fp, fn);

  std::map<std::string, std::string> annotations;
  if (!annotations_path.empty()) {
    annotations = load_annotations_csv(annotations_path);
  }
  const CategoryReport categories = category_report(cases, annotations);
  std::cout << categories.to_text();

  std::string resolution_text;
  if (!after_paths.empty()) {
    std::vector<PredictionSet> after;
    for (const auto& path : after_paths) {
      after.push_back(load_prediction_csv(path));
    }
    const ResolutionReport resolution = resolved_errors(cases, after, annotations);
    resolution_text = resolution.to_text();
    std::cout << resolution_text;
  }

  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    write_file(fs::path(out_dir) / "cases.jsonl", error_cases_to_jsonl(cases));
    write_file(fs::path(out_dir) / "category_report.txt", categories.to_text());
    if (!resolution_text.empty()) {
      write_file(fs::path(out_dir) / "resolution.txt", resolution_text);
    }
  }
  return ExitCode::kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"emotion-classification workbench"};
  app.require_subcommand(1);

  // prepare ------------------------------------------------------------
  auto* prepare = app.add_subcommand("prepare", "load and validate a dataset");
  std::string prep_dataset, prep_format = "csv", prep_manifest;
  prepare->add_option("--dataset", prep_dataset, "dataset file")
      ->required()
      ->envname("EMOBENCH_DATASET");
  prepare->add_option("--format", prep_format, "csv or jsonl")->envname("EMOBENCH_FORMAT");
  prepare->add_option("--manifest", prep_manifest, "expected-count manifest json")
      ->envname("EMOBENCH_MANIFEST");

  // extract-polarity ----------------------------------------------------
  auto* extract = app.add_subcommand("extract-polarity",
                                     "extract per-utterance polarity word lists");
  std::string ext_dataset, ext_format = "csv", ext_lexicon, ext_out;
  double ext_tau = kDefaultTau;
  extract->add_option("--dataset", ext_dataset)->required()->envname("EMOBENCH_DATASET");
  extract->add_option("--format", ext_format)->envname("EMOBENCH_FORMAT");
  extract->add_option("--lexicon", ext_lexicon, "sentiment lexicon TSV")
      ->required()
      ->envname("EMOBENCH_LEXICON");
  extract->add_option("--tau", ext_tau, "polarity threshold");
  extract->add_option("--out", ext_out, "output jsonl ('-' for stdout)");

  // train ----------------------------------------------------------------
  auto* train = app.add_subcommand("train", "train one-vs-all classifiers");
  TrainOptions to;
  std::string train_config_file;
  train->add_option("--config", train_config_file, "json config file (flags win)");
  train->add_option("--dataset", to.dataset_path)->envname("EMOBENCH_DATASET");
  train->add_option("--format", to.format)->envname("EMOBENCH_FORMAT");
  train->add_option("--manifest", to.manifest_path)->envname("EMOBENCH_MANIFEST");
  train->add_option("--lexicon", to.lexicon_path)->envname("EMOBENCH_LEXICON");
  train->add_option("--mode", to.mode, "baseline or polarity")->envname("EMOBENCH_MODE");
  train->add_option("--blend", to.blend, "pooled-concat or attention-keys");
  train->add_option("--w-primary", to.w_primary);
  train->add_option("--w-polarity", to.w_polarity);
  train->add_option("--tau", to.tau);
  train->add_option("--seeds,--seed", to.seeds, "split seeds")->delimiter(',');
  train->add_option("--out", to.out_dir, "run directory");
  train->add_option("--jobs", to.jobs, "parallel trainings");
  train->add_option("--train-frac", to.train_frac);
  train->add_option("--vocab-min-freq", to.vocab_min_freq);
  train->add_option("--vocab-max-size", to.vocab_max_size);
  train->add_option("--d-model", to.encoder.d_model);
  train->add_option("--n-layers", to.encoder.n_layers);
  train->add_option("--n-heads", to.encoder.n_heads);
  train->add_option("--d-ff", to.encoder.d_ff);
  train->add_option("--max-len", to.encoder.max_len);
  train->add_option("--dropout", to.encoder.dropout_rate);
  train->add_option("--epochs", to.train.epochs);
  train->add_option("--batch-size", to.train.batch_size);
  train->add_option("--lr", to.train.learning_rate);
  train->add_option("--patience", to.train.patience);

  // evaluate ---------------------------------------------------------------
  auto* evaluate_cmd = app.add_subcommand("evaluate", "predict and score a trained run");
  std::string eval_run, eval_dataset, eval_format;
  std::size_t eval_jobs = 1;
  evaluate_cmd->add_option("--run", eval_run, "run directory from train")->required();
  evaluate_cmd->add_option("--dataset", eval_dataset, "defaults to the training dataset");
  evaluate_cmd->add_option("--format", eval_format);
  evaluate_cmd->add_option("--jobs", eval_jobs);

  // compare ------------------------------------------------------------------
  auto* compare = app.add_subcommand("compare", "delta table against a published reference");
  std::vector<std::string> cmp_reports;
  std::string cmp_reference, cmp_reference_file;
  compare->add_option("--report", cmp_reports, "report json files")->required();
  compare->add_option("--reference", cmp_reference, "reference row key")->required();
  compare->add_option("--reference-file", cmp_reference_file, "override the bundled table");

  // errors ---------------------------------------------------------------------
  auto* errors = app.add_subcommand("errors", "unanimous-error extraction and reports");
  std::string err_gold, err_format = "csv", err_annotations, err_out;
  std::vector<std::string> err_preds, err_after;
  errors->add_option("--gold", err_gold, "gold dataset")->required();
  errors->add_option("--format", err_format);
  errors->add_option("--pred", err_preds, "prediction csv files")->required();
  errors->add_option("--after", err_after, "post-change prediction csv files");
  errors->add_option("--annotations", err_annotations, "case_id,category csv");
  errors->add_option("--out", err_out, "output directory");

  try {
    app.parse(argc, argv);
    if (train->parsed()) {
      apply_config_file(train, train_config_file);
      if (to.dataset_path.empty()) {
        throw ConfigError("train: --dataset required (flag, env, or config file)");
      }
    }
    if (prepare->parsed()) {
      return cmd_prepare(prep_dataset, prep_format, prep_manifest);
    }
    if (extract->parsed()) {
      return cmd_extract_polarity(ext_dataset, ext_format, ext_lexicon, ext_tau, ext_out);
    }
    if (train->parsed()) {
      return cmd_train(to);
    }
    if (evaluate_cmd->parsed()) {
      return cmd_evaluate(eval_run, eval_dataset, eval_format, eval_jobs);
    }
    if (compare->parsed()) {
      return cmd_compare(cmp_reports, cmp_reference, cmp_reference_file);
    }
    if (errors->parsed()) {
      return cmd_errors(err_gold, err_format, err_preds, err_after, err_annotations, err_out);
    }
    return ExitCode::kOk;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const TrainingError& e) {
    emit_error("training", e.what());
    return ExitCode::kTraining;
  } catch (const CompatibilityError& e) {
    emit_error("compatibility", e.what());
    return ExitCode::kCompatibility;
  } catch (const Error& e) {
    emit_error("validation", e.what());
    return ExitCode::kValidation;
  } catch (const std::exception& e) {
    emit_error("internal", e.what());
    return ExitCode::kValidation;
  }
}
