#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "emobench/checkpoint.hpp"
#include "emobench/tensor.hpp"
#include "emobench/text.hpp"

namespace emobench {

struct EncoderConfig {
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t d_ff = 128;
  std::size_t max_len = 64;
  std::size_t vocab_size = 0;
  double dropout_rate = 0.1;

  void validate() const;  // d_model divisible by n_heads, all positive
  std::string to_json() const;
  static EncoderConfig from_json(const std::string& content);
};

enum class BlendMode { None, PooledConcat, AttentionKeys };

BlendMode blend_mode_from_string(const std::string& name);
std::string blend_mode_to_string(BlendMode mode);

struct BlendConfig {
  BlendMode mode = BlendMode::None;
  double w_primary = 0.75;
  double w_polarity = 0.25;

  void validate() const;  // weights in [0,1], summing to 1
  std::string to_json() const;
  static BlendConfig from_json(const std::string& content);
};

struct LayerParams {
  Tensor ln1_gain, ln1_bias;
  // no key bias: softmax is invariant to per-row constant score shifts, so a
  // key bias is a dead parameter
  Tensor wq, bq, wk, wv, bv, wo, bo;
  Tensor ln2_gain, ln2_bias;
  Tensor ffn_w1, ffn_b1, ffn_w2, ffn_b2;
};

// All trainable tensors of one binary classifier. The classifier input is
// always 2*d_model wide: primary pooled half plus polarity pooled half (the
// polarity half is zero for the baseline and for empty polarity lists).
struct EncoderParams {
  Tensor token_embedding;     // [vocab x d]
  Tensor position_embedding;  // [max_len x d]
  Tensor segment_offset;      // [d], added to polarity word embeddings
  std::vector<LayerParams> layers;
  Tensor final_ln_gain, final_ln_bias;
  Tensor pool_query_primary;   // [d x 1]
  Tensor pool_query_polarity;  // [d x 1]
  Tensor classifier_w;         // [2d x 1]
  Tensor classifier_b;         // [1]

  NamedTensors named() const;
  std::vector<Tensor> all() const;
  void zero_grad();
  static EncoderParams from_named(const NamedTensors& tensors, const EncoderConfig& config);
};

// Embeddings and projections ~ N(0, 0.02^2) from the named PRNG
// (xoshiro256**), layer-norm gains 1, biases 0.
EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed);

// When training, dropout draws masks from `dropout_rng`; evaluation and
// gradient checks run with dropout disabled.
struct ForwardOptions {
  bool training = false;
  Rng* dropout_rng = nullptr;
};

// Standard pre-norm transformer stack over the primary token sequence.
// PAD key positions are masked out of every attention row (additive -1e9
// before softmax). In attention-keys mode the final layer consumes the
// polarity states as extra keys/values via the block-softmax blend.
Tensor encode_primary(const TokenizedPair& pair, const EncoderParams& params,
                      const EncoderConfig& config, const BlendConfig& blend,
                      const ForwardOptions& options = {});

// Polarity word embeddings plus the learned segment offset; the polarity list
// is a set, so no positional embeddings. Empty list yields a 0-row matrix.
Tensor encode_polarity(const TokenizedPair& pair, const EncoderParams& params,
                       const EncoderConfig& config);

// Attention pooling into the 2*d_model classifier input.
//   pooled-concat: concat(w_primary * pool(H_p), w_polarity * pool(H_s));
//     an empty polarity list degrades to scale 1.0 with a zero polarity half.
//   none / attention-keys: primary pooled half at scale 1.0, zero half.
Tensor blend_pool(const Tensor& hidden_primary, const std::optional<Tensor>& hidden_polarity,
                  const TokenizedPair& pair, const BlendConfig& blend,
                  const EncoderParams& params);

// Affine map to the scalar logit. Sigmoid is applied only at prediction time;
// probability exactly 0.5 counts as a positive prediction.
Tensor classify(const Tensor& pooled, const EncoderParams& params);

// Full forward pass: primary encoding, polarity stream, blend, classify.
Tensor encoder_logit(const TokenizedPair& pair, const EncoderParams& params,
                     const EncoderConfig& config, const BlendConfig& blend,
                     const ForwardOptions& options = {});

// Inference convenience: logit and probability without building a graph.
double predict_logit(const TokenizedPair& pair, const EncoderParams& params,
                     const EncoderConfig& config, const BlendConfig& blend);

inline bool predict_positive(double probability) { return probability >= 0.5; }

// Row-wise block softmax used by the attention-keys blend: softmax over the
// primary block (with additive mask) scaled by w_primary/(w_primary+w_polarity)
// concatenated with softmax over the polarity block scaled by the complement.
// Each output row sums to exactly 1 when both blocks are non-empty.
Tensor blend_block_softmax(const Tensor& scores, std::size_t primary_cols,
                           const Tensor& primary_mask, double w_primary, double w_polarity);

}  // namespace emobench
