#include "emobench/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "emobench/error.hpp"

namespace emobench {
namespace {

using nlohmann::json;

double binary_f1(const std::vector<bool>& gold, const std::vector<bool>& pred) {
  ConfusionCounts counts;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] && pred[i]) {
      ++counts.tp;
    } else if (!gold[i] && pred[i]) {
      ++counts.fp;
    } else if (gold[i] && !pred[i]) {
      ++counts.fn;
    } else {
      ++counts.tn;
    }
  }
  return f1_score(counts).f1;
}

std::vector<double> snapshot_values(const EncoderParams& params) {
  std::vector<double> out;
  for (const Tensor& t : params.all()) {
    out.insert(out.end(), t.values().begin(), t.values().end());
  }
  return out;
}

void restore_values(EncoderParams& params, const std::vector<double>& snapshot) {
  std::size_t offset = 0;
  for (Tensor t : params.all()) {
    auto values = t.values_mut();
    std::copy(snapshot.begin() + static_cast<std::ptrdiff_t>(offset),
              snapshot.begin() + static_cast<std::ptrdiff_t>(offset + values.size()),
              values.begin());
    offset += values.size();
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0 || batch_size == 0 || learning_rate <= 0.0) {
    throw ConfigError("train config: epochs, batch size and learning rate must be positive");
  }
  if (patience == 0 || patience > epochs) {
    throw ConfigError("train config: patience must be in [1, epochs]");
  }
  if (jobs == 0) {
    throw ConfigError("train config: jobs must be >= 1");
  }
}

std::string TrainConfig::to_json() const {
  json obj;
  obj["epochs"] = epochs;
  obj["batch_size"] = batch_size;
  obj["learning_rate"] = learning_rate;
  obj["adam_beta1"] = adam_beta1;
  obj["adam_beta2"] = adam_beta2;
  obj["adam_epsilon"] = adam_epsilon;
  obj["patience"] = patience;
  obj["seed"] = seed;
  obj["jobs"] = jobs;
  return obj.dump(2);
}

TrainConfig TrainConfig::from_json(const std::string& content) {
  json obj;
  try {
    obj = json::parse(content);
  } catch (const json::exception& e) {
    throw ParseError(std::string("train config: invalid json: ") + e.what());
  }
  TrainConfig config;
  config.epochs = obj.value("epochs", config.epochs);
  config.batch_size = obj.value("batch_size", config.batch_size);
  config.learning_rate = obj.value("learning_rate", config.learning_rate);
  config.adam_beta1 = obj.value("adam_beta1", config.adam_beta1);
  config.adam_beta2 = obj.value("adam_beta2", config.adam_beta2);
  config.adam_epsilon = obj.value("adam_epsilon", config.adam_epsilon);
  config.patience = obj.value("patience", config.patience);
  config.seed = obj.value("seed", config.seed);
  config.jobs = obj.value("jobs", config.jobs);
  return config;
}

AdamOptimizer::AdamOptimizer(std::vector<Tensor> params, const TrainConfig& config)
    : params_(std::move(params)),
      lr_(config.learning_rate),
      beta1_(config.adam_beta1),
      beta2_(config.adam_beta2),
      eps_(config.adam_epsilon) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Tensor& p : params_) {
    m_.emplace_back(p.numel(), 0.0);
    v_.emplace_back(p.numel(), 0.0);
  }
}

void AdamOptimizer::step() {
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t pi = 0; pi < params_.size(); ++pi) {
    Tensor& p = params_[pi];
    auto values = p.values_mut();
    const auto grads = p.grad();
    auto& m = m_[pi];
    auto& v = v_[pi];
    for (std::size_t i = 0; i < values.size(); ++i) {
      const double g = grads[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      values[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
  }
}

EncodedDataset encode_dataset(const std::vector<Utterance>& data, const Vocabulary& vocab,
                              const PolarityLexicon* lexicon, double tau, std::size_t max_len) {
  EncodedDataset encoded;
  encoded.ids.reserve(data.size());
  encoded.pairs.reserve(data.size());
  encoded.labels.reserve(data.size());
  for (const auto& utterance : data) {
    const auto tokens = tokenize(preprocess(utterance.text));
    std::vector<std::string> polarity_words;
    if (lexicon != nullptr) {
      const auto tags = pos_tag(tokens, *lexicon);
      for (const auto& pw : extract_polarity_words(tokens, tags, *lexicon, tau)) {
        polarity_words.push_back(pw.word);
      }
    }
    encoded.ids.push_back(utterance.id);
    encoded.pairs.push_back(encode(tokens, vocab, polarity_words, max_len));
    encoded.labels.push_back(utterance.labels);
  }
  return encoded;
}

TrainedClassifier train_single_classifier(const EncodedDataset& data,
                                          const std::vector<std::size_t>& train_indices,
                                          const std::vector<std::size_t>& val_indices,
                                          std::size_t emotion, const EncoderConfig& encoder_cfg,
                                          const BlendConfig& blend,
                                          const TrainConfig& train_cfg) {
  encoder_cfg.validate();
  train_cfg.validate();
  if (train_indices.empty()) {
    throw TrainingError("training set empty for emotion " +
                        std::string(kEmotionNames[emotion]));
  }

  TrainedClassifier result;
  result.emotion = emotion;
  result.params = init_params(encoder_cfg, derive_seed(train_cfg.seed, "params", emotion));
  AdamOptimizer optimizer(result.params.all(), train_cfg);
  Rng shuffle_rng(derive_seed(train_cfg.seed, "shuffle", emotion));
  Rng dropout_rng(derive_seed(train_cfg.seed, "dropout", emotion));

  const bool early_stopping = !val_indices.empty();
  std::vector<double> best_snapshot;
  double best_val = -1.0;
  std::size_t since_best = 0;

  std::vector<bool> val_gold;
  val_gold.reserve(val_indices.size());
  for (std::size_t idx : val_indices) {
    val_gold.push_back(data.labels[idx][emotion]);
  }

  std::vector<std::size_t> order = train_indices;
  ForwardOptions train_options;
  train_options.training = encoder_cfg.dropout_rate > 0.0;
  train_options.dropout_rng = &dropout_rng;

  for (std::size_t epoch = 1; epoch <= train_cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += train_cfg.batch_size) {
      const std::size_t end = std::min(order.size(), start + train_cfg.batch_size);
      result.params.zero_grad();
      double batch_loss = 0.0;
      for (std::size_t i = start; i < end; ++i) {
        const std::size_t idx = order[i];
        const Tensor logit = encoder_logit(data.pairs[idx], result.params, encoder_cfg, blend,
                                           train_options);
        const Tensor loss =
            bce_loss(logit, data.labels[idx][emotion] ? 1.0 : 0.0);
        backward(loss);
        batch_loss += loss.item();
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      if (!std::isfinite(batch_loss)) {
        throw TrainingError("loss diverged for emotion " +
                            std::string(kEmotionNames[emotion]) + " at epoch " +
                            std::to_string(epoch));
      }
      for (Tensor p : result.params.all()) {
        for (double& g : p.grad()) {
          g *= inv;
        }
      }
      optimizer.step();
      loss_sum += batch_loss;
    }

    EpochRecord record;
    record.epoch = epoch;
    record.train_loss = loss_sum / static_cast<double>(order.size());
    if (early_stopping) {
      NoGradGuard no_grad;
      std::vector<bool> val_pred;
      val_pred.reserve(val_indices.size());
      for (std::size_t idx : val_indices) {
        const double logit =
            encoder_logit(data.pairs[idx], result.params, encoder_cfg, blend).item();
        val_pred.push_back(predict_positive(sigmoid_value(logit)));
      }
      record.val_f1 = binary_f1(val_gold, val_pred);
    }
    result.log.push_back(record);

    if (early_stopping) {
      if (record.val_f1 > best_val) {
        best_val = record.val_f1;
        best_snapshot = snapshot_values(result.params);
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
        if (since_best >= train_cfg.patience) {
          break;
        }
      }
    }
  }

  if (early_stopping && !best_snapshot.empty()) {
    restore_values(result.params, best_snapshot);
    result.best_val_f1 = best_val;
  } else {
    result.best_epoch = result.log.empty() ? 0 : result.log.back().epoch;
  }
  return result;
}

std::vector<TrainedClassifier> train_one_vs_all(const EncodedDataset& train_set,
                                                const EncoderConfig& encoder_cfg,
                                                const BlendConfig& blend,
                                                const TrainConfig& train_cfg) {
  train_cfg.validate();
  // Validation carve-out uses the stratification routine on the training rows.
  std::vector<Utterance> view(train_set.size());
  for (std::size_t i = 0; i < train_set.size(); ++i) {
    view[i].id = train_set.ids[i];
    view[i].labels = train_set.labels[i];
  }
  const SplitAssignment carve =
      stratified_split(view, 0.9, derive_seed(train_cfg.seed, "val-carve"));
  const std::vector<std::size_t> train_indices = carve.indices_of(SplitTag::Train);
  const std::vector<std::size_t> val_indices = carve.indices_of(SplitTag::Test);

  std::vector<TrainedClassifier> classifiers(kNumEmotions);
  std::string failure;
#pragma omp parallel for schedule(dynamic) num_threads(static_cast<int>(train_cfg.jobs)) \
    if (train_cfg.jobs > 1)
  for (std::int64_t e = 0; e < static_cast<std::int64_t>(kNumEmotions); ++e) {
    try {
      classifiers[static_cast<std::size_t>(e)] = train_single_classifier(
          train_set, train_indices, val_indices, static_cast<std::size_t>(e), encoder_cfg,
          blend, train_cfg);
    } catch (const std::exception& ex) {
#pragma omp critical
      failure = ex.what();
    }
  }
  if (!failure.empty()) {
    throw TrainingError(failure);
  }
  return classifiers;
}

std::vector<std::array<double, kNumEmotions>> predict_probabilities(
    const std::vector<TrainedClassifier>& classifiers, const EncodedDataset& data,
    const EncoderConfig& encoder_cfg, const BlendConfig& blend, std::size_t jobs) {
  if (classifiers.size() != kNumEmotions) {
    throw CompatibilityError("predict: expected six classifiers, got " +
                             std::to_string(classifiers.size()));
  }
  std::vector<std::array<double, kNumEmotions>> probabilities(data.size());
#pragma omp parallel for schedule(static) num_threads(static_cast<int>(jobs)) if (jobs > 1)
  for (std::int64_t i = 0; i < static_cast<std::int64_t>(data.size()); ++i) {
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      const double logit = predict_logit(data.pairs[static_cast<std::size_t>(i)],
                                         classifiers[e].params, encoder_cfg, blend);
      probabilities[static_cast<std::size_t>(i)][e] = sigmoid_value(logit);
    }
  }
  return probabilities;
}

std::vector<LabelVector> probabilities_to_labels(
    const std::vector<std::array<double, kNumEmotions>>& probabilities) {
  std::vector<LabelVector> labels(probabilities.size());
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    for (std::size_t e = 0; e < kNumEmotions; ++e) {
      labels[i][e] = predict_positive(probabilities[i][e]);
    }
  }
  return labels;
}

std::string training_log_jsonl(const std::vector<TrainedClassifier>& classifiers,
                               std::uint64_t seed) {
  std::ostringstream out;
  for (const auto& classifier : classifiers) {
    for (const auto& record : classifier.log) {
      json obj;
      obj["seed"] = seed;
      obj["emotion"] = kEmotionNames[classifier.emotion];
      obj["epoch"] = record.epoch;
      obj["train_loss"] = record.train_loss;
      obj["val_f1"] = record.val_f1;
      out << obj.dump() << '\n';
    }
  }
  return out.str();
}

ExperimentResult run_experiment(const std::vector<Utterance>& data,
                                const std::string& dataset_name, const std::string& mode,
                                const std::vector<std::uint64_t>& seeds,
                                const ExperimentConfig& config, const PolarityLexicon* lexicon) {
  if (mode != "baseline" && mode != "polarity") {
    throw ConfigError("run_experiment: mode must be baseline or polarity");
  }
  if (mode == "polarity" && lexicon == nullptr) {
    throw ConfigError("run_experiment: polarity mode requires a lexicon");
  }
  if (seeds.empty()) {
    throw ConfigError("run_experiment: at least one seed required");
  }
  BlendConfig blend = config.blend;
  if (mode == "baseline") {
    blend.mode = BlendMode::None;
  } else if (blend.mode == BlendMode::None) {
    blend.mode = BlendMode::PooledConcat;
  }
  blend.validate();

  ExperimentResult result;
  for (const std::uint64_t seed : seeds) {
    const SplitAssignment split = stratified_split(data, config.train_fraction, seed);
    std::vector<Utterance> train_rows, test_rows;
    for (std::size_t i = 0; i < data.size(); ++i) {
      (split.tags[i] == SplitTag::Train ? train_rows : test_rows).push_back(data[i]);
    }

    std::vector<std::vector<std::string>> corpus;
    corpus.reserve(train_rows.size());
    for (const auto& u : train_rows) {
      corpus.push_back(tokenize(preprocess(u.text)));
    }
    const Vocabulary vocab =
        Vocabulary::build(corpus, config.vocab_min_freq, config.vocab_max_size);

    EncoderConfig encoder_cfg = config.encoder;
    encoder_cfg.vocab_size = vocab.size();

    const PolarityLexicon* active_lexicon = mode == "polarity" ? lexicon : nullptr;
    const EncodedDataset train_encoded =
        encode_dataset(train_rows, vocab, active_lexicon, config.tau, encoder_cfg.max_len);
    const EncodedDataset test_encoded =
        encode_dataset(test_rows, vocab, active_lexicon, config.tau, encoder_cfg.max_len);

    TrainConfig train_cfg = config.train;
    train_cfg.seed = derive_seed(seed, "train");
    const auto classifiers = train_one_vs_all(train_encoded, encoder_cfg, blend, train_cfg);

    const auto probabilities = predict_probabilities(classifiers, test_encoded, encoder_cfg,
                                                     blend, train_cfg.jobs);
    const auto predicted = probabilities_to_labels(probabilities);

    const std::string config_hash = hash_hex(
        fnv1a64(encoder_cfg.to_json() + blend.to_json() + train_cfg.to_json() +
                hash_hex(vocab.content_hash())));

    SeedRun run;
    run.report = evaluate(test_encoded.labels, predicted, dataset_name, mode, seed, config_hash);
    run.test_gold = test_encoded.labels;
    run.test_pred = predicted;
    run.test_ids = test_encoded.ids;
    result.runs.push_back(std::move(run));
  }

  const auto mean_std = [](const std::vector<double>& xs) {
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) /
                        static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) {
      var += (x - mean) * (x - mean);
    }
    var /= static_cast<double>(xs.size());
    return std::make_pair(mean, std::sqrt(var));
  };
  std::vector<double> micros, macros;
  for (const auto& run : result.runs) {
    micros.push_back(run.report.micro_f1);
    macros.push_back(run.report.macro_f1);
  }
  std::tie(result.mean_micro, result.std_micro) = mean_std(micros);
  std::tie(result.mean_macro, result.std_macro) = mean_std(macros);
  return result;
}

}  // namespace emobench
