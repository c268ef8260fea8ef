#include "emobench/encoder.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

#include "emobench/error.hpp"

namespace emobench {
namespace {

using nlohmann::json;

constexpr double kMaskValue = -1e9;

// Additive key mask: 0 for real positions, -1e9 for PAD columns. exp of the
// masked scores underflows to exactly 0, so PAD content never leaks.
Tensor key_mask(std::size_t query_rows, std::size_t key_cols, std::size_t valid) {
  std::vector<double> mask(query_rows * key_cols, 0.0);
  for (std::size_t i = 0; i < query_rows; ++i) {
    for (std::size_t j = valid; j < key_cols; ++j) {
      mask[i * key_cols + j] = kMaskValue;
    }
  }
  return Tensor::from_vector({query_rows, key_cols}, std::move(mask));
}

Tensor maybe_dropout(const Tensor& x, const EncoderConfig& config,
                     const ForwardOptions& options) {
  if (!options.training || config.dropout_rate == 0.0) {
    return x;
  }
  if (options.dropout_rng == nullptr) {
    throw ConfigError("forward: training mode requires a dropout rng");
  }
  return dropout(x, config.dropout_rate, *options.dropout_rng);
}

// Multi-head self attention of one layer. `extra_kv` (attention-keys mode,
// final layer only) appends polarity states to keys/values; queries always
// come from the primary positions.
Tensor attention_block(const Tensor& normed_primary, const std::optional<Tensor>& extra_kv,
                       const LayerParams& layer, const EncoderConfig& config,
                       std::size_t primary_valid, const BlendConfig& blend) {
  const std::size_t n_heads = config.n_heads;
  const std::size_t d_head = config.d_model / n_heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(d_head));

  Tensor kv_source = normed_primary;
  std::size_t polarity_rows = 0;
  if (extra_kv && extra_kv->rows() > 0) {
    kv_source = concat_rows(normed_primary, *extra_kv);
    polarity_rows = extra_kv->rows();
  }

  const Tensor q = add_row_bias(matmul(normed_primary, layer.wq), layer.bq);
  const Tensor k = matmul(kv_source, layer.wk);
  const Tensor v = add_row_bias(matmul(kv_source, layer.wv), layer.bv);

  const std::size_t rows = normed_primary.rows();
  const Tensor primary_mask = key_mask(rows, rows, primary_valid);

  std::vector<Tensor> head_outputs;
  head_outputs.reserve(n_heads);
  for (std::size_t h = 0; h < n_heads; ++h) {
    const std::size_t c0 = h * d_head, c1 = (h + 1) * d_head;
    const Tensor qh = slice_cols(q, c0, c1);
    const Tensor kh = slice_cols(k, c0, c1);
    const Tensor vh = slice_cols(v, c0, c1);
    const Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
    Tensor attn;
    if (polarity_rows > 0) {
      attn = blend_block_softmax(scores, rows, primary_mask, blend.w_primary, blend.w_polarity);
    } else {
      attn = softmax(add(scores, primary_mask), 1);
    }
    head_outputs.push_back(matmul(attn, vh));
  }
  const Tensor merged = concat_cols(head_outputs);
  return add_row_bias(matmul(merged, layer.wo), layer.bo);
}

Tensor pool_with_query(const Tensor& hidden, const Tensor& query, std::size_t valid) {
  // scores: [1 x rows], masked softmax over the valid prefix, then a
  // weighted sum of rows.
  const Tensor scores = transpose(matmul(hidden, query));
  const Tensor mask = key_mask(1, hidden.rows(), valid);
  const Tensor weights = softmax(add(scores, mask), 1);
  return matmul(weights, hidden);
}

}  // namespace

void EncoderConfig::validate() const {
  if (d_model == 0 || n_layers == 0 || n_heads == 0 || d_ff == 0 || max_len == 0 ||
      vocab_size == 0) {
    throw ConfigError("encoder config: all dimensions must be positive");
  }
  if (d_model % n_heads != 0) {
    throw ConfigError("encoder config: d_model must be divisible by n_heads");
  }
  if (dropout_rate < 0.0 || dropout_rate >= 1.0) {
    throw ConfigError("encoder config: dropout_rate must be in [0,1)");
  }
}

std::string EncoderConfig::to_json() const {
  json obj;
  obj["d_model"] = d_model;
  obj["n_layers"] = n_layers;
  obj["n_heads"] = n_heads;
  obj["d_ff"] = d_ff;
  obj["max_len"] = max_len;
  obj["vocab_size"] = vocab_size;
  obj["dropout_rate"] = dropout_rate;
  return obj.dump(2);
}

EncoderConfig EncoderConfig::from_json(const std::string& content) {
  json obj;
  try {
    obj = json::parse(content);
  } catch (const json::exception& e) {
    throw ParseError(std::string("encoder config: invalid json: ") + e.what());
  }
  EncoderConfig config;
  config.d_model = obj.value("d_model", config.d_model);
  config.n_layers = obj.value("n_layers", config.n_layers);
  config.n_heads = obj.value("n_heads", config.n_heads);
  config.d_ff = obj.value("d_ff", config.d_ff);
  config.max_len = obj.value("max_len", config.max_len);
  config.vocab_size = obj.value("vocab_size", config.vocab_size);
  config.dropout_rate = obj.value("dropout_rate", config.dropout_rate);
  return config;
}

BlendMode blend_mode_from_string(const std::string& name) {
  if (name == "none") {
    return BlendMode::None;
  }
  if (name == "pooled-concat") {
    return BlendMode::PooledConcat;
  }
  if (name == "attention-keys") {
    return BlendMode::AttentionKeys;
  }
  throw ConfigError("unknown blend mode '" + name +
                    "' (expected none, pooled-concat, attention-keys)");
}

std::string blend_mode_to_string(BlendMode mode) {
  switch (mode) {
    case BlendMode::None:
      return "none";
    case BlendMode::PooledConcat:
      return "pooled-concat";
    case BlendMode::AttentionKeys:
      return "attention-keys";
  }
  return "none";
}

void BlendConfig::validate() const {
  if (w_primary < 0.0 || w_primary > 1.0 || w_polarity < 0.0 || w_polarity > 1.0) {
    throw ConfigError("blend config: weights must be in [0,1]");
  }
  if (std::abs(w_primary + w_polarity - 1.0) > 1e-9) {
    throw ConfigError("blend config: w_primary + w_polarity must equal 1");
  }
}

std::string BlendConfig::to_json() const {
  json obj;
  obj["mode"] = blend_mode_to_string(mode);
  obj["w_primary"] = w_primary;
  obj["w_polarity"] = w_polarity;
  return obj.dump(2);
}

BlendConfig BlendConfig::from_json(const std::string& content) {
  json obj;
  try {
    obj = json::parse(content);
  } catch (const json::exception& e) {
    throw ParseError(std::string("blend config: invalid json: ") + e.what());
  }
  BlendConfig config;
  config.mode = blend_mode_from_string(obj.value("mode", "none"));
  config.w_primary = obj.value("w_primary", config.w_primary);
  config.w_polarity = obj.value("w_polarity", config.w_polarity);
  return config;
}

NamedTensors EncoderParams::named() const {
  NamedTensors out;
  out.emplace_back("token_embedding", token_embedding);
  out.emplace_back("position_embedding", position_embedding);
  out.emplace_back("segment_offset", segment_offset);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    const LayerParams& layer = layers[l];
    out.emplace_back(prefix + "ln1_gain", layer.ln1_gain);
    out.emplace_back(prefix + "ln1_bias", layer.ln1_bias);
    out.emplace_back(prefix + "wq", layer.wq);
    out.emplace_back(prefix + "bq", layer.bq);
    out.emplace_back(prefix + "wk", layer.wk);
    out.emplace_back(prefix + "wv", layer.wv);
    out.emplace_back(prefix + "bv", layer.bv);
    out.emplace_back(prefix + "wo", layer.wo);
    out.emplace_back(prefix + "bo", layer.bo);
    out.emplace_back(prefix + "ln2_gain", layer.ln2_gain);
    out.emplace_back(prefix + "ln2_bias", layer.ln2_bias);
    out.emplace_back(prefix + "ffn_w1", layer.ffn_w1);
    out.emplace_back(prefix + "ffn_b1", layer.ffn_b1);
    out.emplace_back(prefix + "ffn_w2", layer.ffn_w2);
    out.emplace_back(prefix + "ffn_b2", layer.ffn_b2);
  }
  out.emplace_back("final_ln_gain", final_ln_gain);
  out.emplace_back("final_ln_bias", final_ln_bias);
  out.emplace_back("pool_query_primary", pool_query_primary);
  out.emplace_back("pool_query_polarity", pool_query_polarity);
  out.emplace_back("classifier_w", classifier_w);
  out.emplace_back("classifier_b", classifier_b);
  return out;
}

std::vector<Tensor> EncoderParams::all() const {
  std::vector<Tensor> out;
  for (auto& [name, tensor] : named()) {
    out.push_back(tensor);
  }
  return out;
}

void EncoderParams::zero_grad() {
  for (Tensor t : all()) {
    t.zero_grad();
  }
}

EncoderParams EncoderParams::from_named(const NamedTensors& tensors,
                                        const EncoderConfig& config) {
  auto find = [&](const std::string& name) -> Tensor {
    for (const auto& [n, t] : tensors) {
      if (n == name) {
        return t;
      }
    }
    throw CompatibilityError("checkpoint missing tensor '" + name + "'");
  };
  EncoderParams params;
  params.token_embedding = find("token_embedding");
  params.position_embedding = find("position_embedding");
  params.segment_offset = find("segment_offset");
  params.layers.resize(config.n_layers);
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    const std::string prefix = "layer" + std::to_string(l) + ".";
    LayerParams& layer = params.layers[l];
    layer.ln1_gain = find(prefix + "ln1_gain");
    layer.ln1_bias = find(prefix + "ln1_bias");
    layer.wq = find(prefix + "wq");
    layer.bq = find(prefix + "bq");
    layer.wk = find(prefix + "wk");
    layer.wv = find(prefix + "wv");
    layer.bv = find(prefix + "bv");
    layer.wo = find(prefix + "wo");
    layer.bo = find(prefix + "bo");
    layer.ln2_gain = find(prefix + "ln2_gain");
    layer.ln2_bias = find(prefix + "ln2_bias");
    layer.ffn_w1 = find(prefix + "ffn_w1");
    layer.ffn_b1 = find(prefix + "ffn_b1");
    layer.ffn_w2 = find(prefix + "ffn_w2");
    layer.ffn_b2 = find(prefix + "ffn_b2");
  }
  params.final_ln_gain = find("final_ln_gain");
  params.final_ln_bias = find("final_ln_bias");
  params.pool_query_primary = find("pool_query_primary");
  params.pool_query_polarity = find("pool_query_polarity");
  params.classifier_w = find("classifier_w");
  params.classifier_b = find("classifier_b");
  return params;
}

EncoderParams init_params(const EncoderConfig& config, std::uint64_t seed) {
  config.validate();
  Rng rng(derive_seed(seed, "init-params"));
  const std::size_t d = config.d_model;
  EncoderParams params;
  params.token_embedding = Tensor::randn({config.vocab_size, d}, rng);
  params.position_embedding = Tensor::randn({config.max_len, d}, rng);
  params.segment_offset = Tensor::randn({d}, rng);
  params.layers.resize(config.n_layers);
  for (auto& layer : params.layers) {
    layer.ln1_gain = Tensor::full({d}, 1.0, true);
    layer.ln1_bias = Tensor::zeros({d}, true);
    layer.wq = Tensor::randn({d, d}, rng);
    layer.bq = Tensor::zeros({d}, true);
    layer.wk = Tensor::randn({d, d}, rng);
    layer.wv = Tensor::randn({d, d}, rng);
    layer.bv = Tensor::zeros({d}, true);
    layer.wo = Tensor::randn({d, d}, rng);
    layer.bo = Tensor::zeros({d}, true);
    layer.ln2_gain = Tensor::full({d}, 1.0, true);
    layer.ln2_bias = Tensor::zeros({d}, true);
    layer.ffn_w1 = Tensor::randn({d, config.d_ff}, rng);
    layer.ffn_b1 = Tensor::zeros({config.d_ff}, true);
    layer.ffn_w2 = Tensor::randn({config.d_ff, d}, rng);
    layer.ffn_b2 = Tensor::zeros({d}, true);
  }
  params.final_ln_gain = Tensor::full({d}, 1.0, true);
  params.final_ln_bias = Tensor::zeros({d}, true);
  params.pool_query_primary = Tensor::randn({d, 1}, rng);
  params.pool_query_polarity = Tensor::randn({d, 1}, rng);
  params.classifier_w = Tensor::randn({2 * d, 1}, rng);
  params.classifier_b = Tensor::zeros({1}, true);
  return params;
}

Tensor blend_block_softmax(const Tensor& scores, std::size_t primary_cols,
                           const Tensor& primary_mask, double w_primary, double w_polarity) {
  if (primary_cols > scores.cols()) {
    throw DimensionError("blend_block_softmax: primary block wider than score matrix");
  }
  const std::size_t polarity_cols = scores.cols() - primary_cols;
  const Tensor primary_block = slice_cols(scores, 0, primary_cols);
  const Tensor primary_attn = softmax(add(primary_block, primary_mask), 1);
  if (polarity_cols == 0) {
    // Degenerate rule: without polarity keys the primary block carries all
    // the mass, scaled by exactly 1.
    return scale(primary_attn, 1.0);
  }
  // Row depends only on the ratio: joint rescaling of the weights followed by
  // this renormalization leaves it unchanged.
  const double total = w_primary + w_polarity;
  if (total <= 0.0) {
    throw ConfigError("blend_block_softmax: weights must not both be zero");
  }
  const Tensor polarity_attn = softmax(slice_cols(scores, primary_cols, scores.cols()), 1);
  return concat_cols(
      {scale(primary_attn, w_primary / total), scale(polarity_attn, w_polarity / total)});
}

Tensor encode_primary(const TokenizedPair& pair, const EncoderParams& params,
                      const EncoderConfig& config, const BlendConfig& blend,
                      const ForwardOptions& options) {
  if (pair.primary_ids.size() != config.max_len) {
    throw ContractError("encode_primary: sequence length " +
                        std::to_string(pair.primary_ids.size()) + " does not match max_len " +
                        std::to_string(config.max_len));
  }
  if (pair.primary_len < 1 || pair.primary_len > config.max_len) {
    throw ContractError("encode_primary: invalid primary_len");
  }
  Tensor hidden = add(embed(params.token_embedding, pair.primary_ids),
                      params.position_embedding);
  std::optional<Tensor> polarity_states;
  if (blend.mode == BlendMode::AttentionKeys && pair.polarity_len > 0) {
    polarity_states = encode_polarity(pair, params, config);
  }
  for (std::size_t l = 0; l < config.n_layers; ++l) {
    const LayerParams& layer = params.layers[l];
    const bool blend_here = polarity_states.has_value() && l + 1 == config.n_layers;
    Tensor normed = layer_norm(hidden, layer.ln1_gain, layer.ln1_bias);
    std::optional<Tensor> extra;
    if (blend_here) {
      // Polarity states pass through the same pre-attention norm as the
      // primary stream before projection.
      extra = layer_norm(*polarity_states, layer.ln1_gain, layer.ln1_bias);
    }
    Tensor attn_out =
        attention_block(normed, extra, layer, config, pair.primary_len, blend);
    attn_out = maybe_dropout(attn_out, config, options);
    hidden = add(hidden, attn_out);

    Tensor ff_in = layer_norm(hidden, layer.ln2_gain, layer.ln2_bias);
    Tensor ff = add_row_bias(matmul(ff_in, layer.ffn_w1), layer.ffn_b1);
    ff = gelu(ff);
    ff = add_row_bias(matmul(ff, layer.ffn_w2), layer.ffn_b2);
    ff = maybe_dropout(ff, config, options);
    hidden = add(hidden, ff);
  }
  return layer_norm(hidden, params.final_ln_gain, params.final_ln_bias);
}

Tensor encode_polarity(const TokenizedPair& pair, const EncoderParams& params,
                       const EncoderConfig& config) {
  (void)config;
  if (pair.polarity_len != pair.polarity_ids.size()) {
    throw ContractError("encode_polarity: polarity_len mismatch");
  }
  if (pair.polarity_ids.empty()) {
    return Tensor::zeros({0, params.token_embedding.cols()});
  }
  return add_row_bias(embed(params.token_embedding, pair.polarity_ids), params.segment_offset);
}

Tensor blend_pool(const Tensor& hidden_primary, const std::optional<Tensor>& hidden_polarity,
                  const TokenizedPair& pair, const BlendConfig& blend,
                  const EncoderParams& params) {
  const Tensor pooled_primary =
      pool_with_query(hidden_primary, params.pool_query_primary, pair.primary_len);
  const std::size_t d = hidden_primary.cols();
  const bool use_polarity = blend.mode == BlendMode::PooledConcat && hidden_polarity &&
                            hidden_polarity->rows() > 0;
  if (!use_polarity) {
    // Baseline, attention-keys, and the empty-polarity degenerate rule: the
    // primary half keeps its full scale and the polarity half is zero.
    return concat_cols({scale(pooled_primary, 1.0), Tensor::zeros({1, d})});
  }
  const Tensor pooled_polarity =
      pool_with_query(*hidden_polarity, params.pool_query_polarity, hidden_polarity->rows());
  return concat_cols(
      {scale(pooled_primary, blend.w_primary), scale(pooled_polarity, blend.w_polarity)});
}

Tensor classify(const Tensor& pooled, const EncoderParams& params) {
  if (pooled.cols() != params.classifier_w.rows()) {
    throw DimensionError("classify: pooled width " + std::to_string(pooled.cols()) +
                         " does not match classifier input " +
                         std::to_string(params.classifier_w.rows()));
  }
  return add_row_bias(matmul(pooled, params.classifier_w), params.classifier_b);
}

Tensor encoder_logit(const TokenizedPair& pair, const EncoderParams& params,
                     const EncoderConfig& config, const BlendConfig& blend,
                     const ForwardOptions& options) {
  const Tensor hidden = encode_primary(pair, params, config, blend, options);
  std::optional<Tensor> polarity;
  if (blend.mode == BlendMode::PooledConcat) {
    polarity = encode_polarity(pair, params, config);
  }
  const Tensor pooled = blend_pool(hidden, polarity, pair, blend, params);
  return classify(pooled, params);
}

double predict_logit(const TokenizedPair& pair, const EncoderParams& params,
                     const EncoderConfig& config, const BlendConfig& blend) {
  NoGradGuard no_grad;
  return encoder_logit(pair, params, config, blend).item();
}

}  // namespace emobench
