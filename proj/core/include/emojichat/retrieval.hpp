#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "emojichat/corpus.hpp"
#include "emojichat/encoder.hpp"
#include "emojichat/optim.hpp"
#include "emojichat/tensor.hpp"
#include "emojichat/text.hpp"

namespace emojichat {

struct TrainConfig {
  std::size_t epochs = 25;
  std::size_t batch_size = 128;
  double learning_rate = 8e-4;
  OptimizerKind optimizer = OptimizerKind::Adamax;
  std::uint64_t seed = 0;

  void validate() const;  // epochs >= 1, batch_size >= 2, lr >= 0
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// score_i = h_x . h_y_i for every row of `candidates`.
Vector score_candidates(const Vector& context, const Matrix& candidates);

// Max-subtracted softmax.
Vector softmax(const Vector& scores);

struct NllResult {
  double loss = 0.0;
  Vector grad;  // softmax(scores) - one_hot(gold)
};

NllResult nll_loss(const Vector& scores, std::size_t gold);

// Response texts with candidate-encoder vectors, one row per response.
struct CandidatePool {
  std::vector<std::string> texts;
  Matrix vectors;
  bool stale = true;
};

// Bi-encoder: separate context and candidate encoders over one vocabulary.
class RetrievalModel {
 public:
  RetrievalModel() = default;
  RetrievalModel(EncoderParams context_encoder, EncoderParams candidate_encoder, Vocabulary vocab);

  const EncoderParams& context_encoder() const { return context_; }
  const EncoderParams& candidate_encoder() const { return candidate_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  const CandidatePool& pool() const { return pool_; }
  std::size_t max_len() const { return context_.config.max_len; }

  EncoderParams& mutable_context_encoder() { return context_; }
  // Any access through here may change h_y, so the pool is marked stale.
  EncoderParams& mutable_candidate_encoder();

  // Replaces the pool texts (duplicates removed, first occurrence kept) and
  // re-encodes them.
  void set_candidates(std::span<const std::string> texts);
  void restore_pool(std::vector<std::string> texts, Matrix vectors);
  void refresh_pool();

  TokenSequence sequence(std::string_view text) const;
  Vector encode_context(std::string_view text) const;
  Vector encode_candidate(std::string_view text) const;

 private:
  EncoderParams context_;
  EncoderParams candidate_;
  Vocabulary vocab_;
  CandidatePool pool_;
};

// Mean in-batch NLL: context i is scored against every response in the batch
// with response i as gold. Gradients are accumulated into the non-null outputs.
double in_batch_loss(const EncoderParams& context_encoder, const EncoderParams& candidate_encoder,
                     std::span<const TokenSequence> contexts, std::span<const TokenSequence> responses,
                     EncoderParams* context_grad = nullptr, EncoderParams* candidate_grad = nullptr);

struct RetrievalTrainResult {
  RetrievalModel model;
  std::vector<double> epoch_losses;
};

// Called after each epoch; `epoch` counts from 1.
using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

// In-batch-negative softmax NLL over dot-product scores. The returned model's
// pool holds every distinct training response.
RetrievalTrainResult train_retriever(std::span<const ContextResponsePair> pairs, RetrievalModel model,
                                     const TrainConfig& config, const EpochCallback& on_epoch = {});

struct RankedResponse {
  std::string text;
  double probability = 0.0;  // softmax over the full pool
  double score = 0.0;
  std::size_t pool_index = 0;
};

std::vector<RankedResponse> retrieve(const RetrievalModel& model, std::string_view context, std::size_t k);

// Vocabulary over the tokens of contexts and responses.
Vocabulary build_retrieval_vocabulary(std::span<const ContextResponsePair> pairs, std::size_t min_count);

}  // namespace emojichat
