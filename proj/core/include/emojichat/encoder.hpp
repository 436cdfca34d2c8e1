#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emojichat/tensor.hpp"
#include "emojichat/text.hpp"

namespace emojichat {

enum class EncoderKind { BagOfEmbeddings, Transformer };

std::string_view to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(std::string_view s);

struct EncoderConfig {
  EncoderKind kind = EncoderKind::Transformer;
  std::size_t model_dim = 64;
  std::size_t layers = 2;
  std::size_t heads = 2;
  std::size_t feedforward_dim = 128;
  std::size_t max_len = kDefaultMaxLen;
  std::size_t vocab_size = 0;
  std::uint64_t seed = 0;

  void validate() const;  // throws ValidationError
  nlohmann::json to_json() const;
  static EncoderConfig from_json(const nlohmann::json& j);
};

struct TransformerLayer {
  Matrix ln1_gain, ln1_bias;          // 1 x d
  Matrix query, key, value, output;   // d x d
  Matrix ln2_gain, ln2_bias;          // 1 x d
  Matrix ff_in, ff_in_bias;           // d x f, 1 x f
  Matrix ff_out, ff_out_bias;         // f x d, 1 x d
};

// Trainable weights of one encoder. `positional` is the fixed sinusoidal
// table and is never exposed through tensors().
struct EncoderParams {
  EncoderConfig config;
  Matrix token_embedding;  // vocab_size x d
  Matrix positional;       // max_len x d
  std::vector<TransformerLayer> layers;

  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;

  // Same shapes, all trainable tensors zero.
  EncoderParams zeros_like() const;
  void set_zero();
};

Matrix sinusoidal_table(std::size_t max_len, std::size_t dim);

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights from a seeded generator,
// layer-norm gains 1, all biases 0.
EncoderParams init_params(const EncoderConfig& config);

// Activations kept by a forward pass for the matching backward pass.
struct EncoderTrace {
  struct Norm {
    Matrix normalized;
    Vector inv_std;
  };
  struct Layer {
    Matrix input;
    Norm norm1;
    Matrix attn_in, q, k, v;
    std::vector<Matrix> probs;  // per head, L x L
    Matrix context;             // concatenated head outputs
    Matrix mid;
    Norm norm2;
    Matrix ff_in, ff_pre, ff_act;
  };
  std::vector<TokenId> ids;
  std::vector<Layer> layers;
  Matrix final_states;
};

// Pooled representation h. Only the first true_length positions take part;
// PAD positions are masked out of attention and pooling. Throws
// ValidationError on an all-PAD sequence or an id >= vocab_size.
Vector encode(const EncoderParams& params, const TokenSequence& seq);
Vector encode(const EncoderParams& params, const TokenSequence& seq, EncoderTrace& trace);

// Accumulates dL/dparams into grads given upstream = dL/dh.
void backprop(const EncoderParams& params, const EncoderTrace& trace, const Vector& upstream,
              EncoderParams& grads);

// Gradient of sum_i upstream_i . h(seq_i), batch accumulated.
EncoderParams encoder_grad(const EncoderParams& params, std::span<const TokenSequence> seqs,
                           std::span<const Vector> upstream);

Checkpoint to_checkpoint(const EncoderParams& params);
EncoderParams encoder_from_checkpoint(const Checkpoint& ckpt);
void save_encoder(const EncoderParams& params, const std::filesystem::path& path);
EncoderParams load_encoder(const std::filesystem::path& path);

}  // namespace emojichat
