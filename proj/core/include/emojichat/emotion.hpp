#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "emojichat/embeddings.hpp"
#include "emojichat/tensor.hpp"
#include "emojichat/text.hpp"

namespace emojichat {

// Defaults are the standard recipe: Adam at 0.001 with 1e-6 decay,
// two epochs, batches of 128.
struct CnnConfig {
  std::vector<std::size_t> filter_widths{2, 3, 4};
  std::size_t filters_per_width = 32;
  std::size_t embedding_dim = 0;  // 0: take the word-vector dimension
  std::size_t num_classes = 10;
  bool dropout = true;
  double keep_probability = 0.5;
  double learning_rate = 1e-3;
  double decay = 1e-6;
  std::size_t epochs = 2;
  std::size_t batch_size = 128;
  std::size_t max_len = kDefaultMaxLen;
  std::uint64_t seed = 0;

  void validate() const;
  std::size_t max_width() const;
  std::size_t total_filters() const { return filters_per_width * filter_widths.size(); }
  nlohmann::json to_json() const;
  static CnnConfig from_json(const nlohmann::json& j);
};

struct CnnParams {
  CnnConfig config;
  Matrix embedding;             // vocab x D, frozen
  std::vector<Matrix> kernels;  // per width: (width * D) x filters
  std::vector<Matrix> biases;   // per width: 1 x filters
  Matrix output;                // total_filters x classes
  Matrix output_bias;           // 1 x classes

  // Trainable tensors only; the embedding is excluded.
  std::vector<TensorRef> tensors();
  std::vector<ConstTensorRef> tensors() const;
  CnnParams zeros_like() const;
  void set_zero();
};

// Rows from the table; PAD, UNK, the separator and words missing from the
// table get zero rows.
Matrix embedding_from_table(const Vocabulary& vocab, const WordVectorTable& table);

CnnParams init_cnn(const CnnConfig& config, Matrix embedding);

// Convolution over valid positions only, ReLU, max over time, affine.
// Throws ValidationError when true_length < the widest filter.
Vector cnn_forward(const CnnParams& params, const TokenSequence& seq);

// Mean cross-entropy over the batch, dropout off.
double cnn_loss(const CnnParams& params, std::span<const TokenSequence> seqs,
                std::span<const std::size_t> labels);
CnnParams cnn_grad(const CnnParams& params, std::span<const TokenSequence> seqs,
                   std::span<const std::size_t> labels);

struct LabeledText {
  std::string text;
  std::string label;
};

struct EmotionPrediction {
  std::string label;
  std::size_t index = 0;
  Vector probabilities;
};

class EmotionClassifier {
 public:
  EmotionClassifier() = default;
  EmotionClassifier(CnnParams params, Vocabulary vocab, std::vector<std::string> labels);

  const CnnParams& params() const { return params_; }
  CnnParams& mutable_params() { return params_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t label_index(std::string_view label) const;  // throws ValidationError

  // Inputs shorter than the widest filter are PAD-extended instead of rejected.
  EmotionPrediction predict(std::string_view text) const;

 private:
  CnnParams params_;
  Vocabulary vocab_;
  std::vector<std::string> labels_;
};

struct ClassifierTrainResult {
  EmotionClassifier classifier;
  std::vector<double> step_losses;
  std::vector<double> epoch_losses;
};

// Builds the vocabulary from the training texts and freezes word-vector
// embeddings. Every label must belong to `labels`.
ClassifierTrainResult train_classifier(std::span<const LabeledText> data, std::vector<std::string> labels,
                                       const WordVectorTable& table, CnnConfig config);

// Continues training existing parameters (used by train_classifier).
ClassifierTrainResult train_classifier(std::span<const LabeledText> data, EmotionClassifier initial);

EmotionPrediction predict_emotion(const EmotionClassifier& classifier, std::string_view text);

Checkpoint to_checkpoint(const CnnParams& params, std::span<const std::string> labels);
CnnParams cnn_from_checkpoint(const Checkpoint& ckpt);

}  // namespace emojichat
