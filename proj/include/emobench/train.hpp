#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emobench/dataset.hpp"
#include "emobench/encoder.hpp"
#include "emobench/lexicon.hpp"
#include "emobench/metrics.hpp"
#include "emobench/text.hpp"

namespace emobench {

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 16;
  double learning_rate = 3e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::size_t patience = 5;  // early stop on validation F1, <= epochs
  std::uint64_t seed = 42;
  std::size_t jobs = 1;

  void validate() const;
  std::string to_json() const;
  static TrainConfig from_json(const std::string& content);
};

class AdamOptimizer {
 public:
  AdamOptimizer(std::vector<Tensor> params, const TrainConfig& config);
  // Applies the accumulated gradients with bias-corrected moments. Gradients
  // are left untouched; the caller zeroes them between batches.
  void step();

 private:
  std::vector<Tensor> params_;
  std::vector<std::vector<double>> m_, v_;
  double lr_, beta1_, beta2_, eps_;
  std::size_t t_ = 0;
};

struct EncodedDataset {
  std::vector<std::string> ids;
  std::vector<TokenizedPair> pairs;
  std::vector<LabelVector> labels;
  std::size_t size() const { return pairs.size(); }
};

// Tokenizes, extracts polarity words (when a lexicon is given), and encodes
// every utterance against the vocabulary. Pass lexicon == nullptr for the
// baseline: every polarity list stays empty.
EncodedDataset encode_dataset(const std::vector<Utterance>& data, const Vocabulary& vocab,
                              const PolarityLexicon* lexicon, double tau, std::size_t max_len);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_f1 = 0.0;
};

struct TrainedClassifier {
  std::size_t emotion = 0;
  EncoderParams params;
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  double best_val_f1 = 0.0;
};

// Trains one binary classifier. Per-emotion seed streams are derived from
// (config.seed, emotion) only, so retraining one emotion never perturbs the
// others. Empty val_indices disables early stopping (all epochs run).
// Diverging loss raises TrainingError naming the emotion and epoch.
TrainedClassifier train_single_classifier(const EncodedDataset& data,
                                          const std::vector<std::size_t>& train_indices,
                                          const std::vector<std::size_t>& val_indices,
                                          std::size_t emotion, const EncoderConfig& encoder_cfg,
                                          const BlendConfig& blend, const TrainConfig& train_cfg);

// Six independent one-vs-all classifiers; may run in parallel (config.jobs),
// bit-identical results for any worker count. Carves 10% of the training
// rows off as validation using the stratification routine.
std::vector<TrainedClassifier> train_one_vs_all(const EncodedDataset& train_set,
                                                const EncoderConfig& encoder_cfg,
                                                const BlendConfig& blend,
                                                const TrainConfig& train_cfg);

// Per-utterance, per-emotion sigmoid probabilities; parallel over utterances.
std::vector<std::array<double, kNumEmotions>> predict_probabilities(
    const std::vector<TrainedClassifier>& classifiers, const EncodedDataset& data,
    const EncoderConfig& encoder_cfg, const BlendConfig& blend, std::size_t jobs = 1);

std::vector<LabelVector> probabilities_to_labels(
    const std::vector<std::array<double, kNumEmotions>>& probabilities);

std::string training_log_jsonl(const std::vector<TrainedClassifier>& classifiers,
                               std::uint64_t seed);

struct ExperimentConfig {
  EncoderConfig encoder;
  BlendConfig blend;
  TrainConfig train;
  double train_fraction = 0.8;
  std::size_t vocab_min_freq = 2;
  std::size_t vocab_max_size = 8000;
  double tau = kDefaultTau;
};

struct SeedRun {
  EvalReport report;
  std::vector<LabelVector> test_gold;
  std::vector<LabelVector> test_pred;
  std::vector<std::string> test_ids;
};

struct ExperimentResult {
  std::vector<SeedRun> runs;
  double mean_micro = 0.0, std_micro = 0.0;
  double mean_macro = 0.0, std_macro = 0.0;
};

// Full per-seed pipeline: split, vocabulary, polarity extraction, one-vs-all
// training, prediction, evaluation. mode "baseline" forces blend mode none;
// mode "polarity" requires a lexicon.
ExperimentResult run_experiment(const std::vector<Utterance>& data,
                                const std::string& dataset_name, const std::string& mode,
                                const std::vector<std::uint64_t>& seeds,
                                const ExperimentConfig& config, const PolarityLexicon* lexicon);

}  // namespace emobench
