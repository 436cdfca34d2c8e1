#include "emojichat/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <unordered_set>

#include "emojichat/error.hpp"

namespace emojichat {

void TrainConfig::validate() const {
  if (epochs < 1) throw ValidationError("epochs must be at least 1");
  if (batch_size < 2) throw ValidationError("batch_size must be at least 2 for in-batch negatives");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning_rate must be finite and non-negative");
  }
}

nlohmann::json TrainConfig::to_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"learning_rate", learning_rate},
          {"optimizer", to_string(optimizer)},
          {"seed", seed}};
}

TrainConfig TrainConfig::from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

Vector score_candidates(const Vector& context, const Matrix& candidates) {
  if (candidates.rows() == 0) throw ValidationError("no candidates to score");
  if (candidates.cols() != context.size()) throw ValidationError("candidate dimension mismatch");
  return candidates * context;
}

Vector softmax(const Vector& scores) {
  if (scores.size() == 0) throw ValidationError("softmax of an empty vector");
  Vector p = (scores.array() - scores.maxCoeff()).exp();
  return p / p.sum();
}

NllResult nll_loss(const Vector& scores, std::size_t gold) {
  if (gold >= static_cast<std::size_t>(scores.size())) throw ValidationError("gold index out of range");
  const double mx = scores.maxCoeff();
  const double log_z = mx + std::log((scores.array() - mx).exp().sum());
  NllResult r;
  r.loss = log_z - scores[static_cast<Eigen::Index>(gold)];
  r.grad = (scores.array() - log_z).exp();
  r.grad[static_cast<Eigen::Index>(gold)] -= 1.0;
  return r;
}

RetrievalModel::RetrievalModel(EncoderParams context_encoder, EncoderParams candidate_encoder,
                               Vocabulary vocab)
    : context_(std::move(context_encoder)), candidate_(std::move(candidate_encoder)), vocab_(std::move(vocab)) {
  if (context_.config.model_dim != candidate_.config.model_dim) {
    throw ValidationError("context and candidate encoders must share model_dim");
  }
  if (context_.config.max_len != candidate_.config.max_len) {
    throw ValidationError("context and candidate encoders must share max_len");
  }
  if (context_.config.vocab_size != vocab_.size() || candidate_.config.vocab_size != vocab_.size()) {
    throw ValidationError("encoder vocab_size does not match the vocabulary");
  }
}

EncoderParams& RetrievalModel::mutable_candidate_encoder() {
  pool_.stale = true;
  return candidate_;
}

TokenSequence RetrievalModel::sequence(std::string_view text) const {
  return encode_text(text, vocab_, max_len());
}

Vector RetrievalModel::encode_context(std::string_view text) const {
  return encode(context_, sequence(text));
}

Vector RetrievalModel::encode_candidate(std::string_view text) const {
  return encode(candidate_, sequence(text));
}

void RetrievalModel::set_candidates(std::span<const std::string> texts) {
  std::unordered_set<std::string> seen;
  pool_.texts.clear();
  for (const auto& t : texts) {
    if (seen.insert(t).second) pool_.texts.push_back(t);
  }
  refresh_pool();
}

void RetrievalModel::restore_pool(std::vector<std::string> texts, Matrix vectors) {
  if (static_cast<std::size_t>(vectors.rows()) != texts.size() ||
      (vectors.rows() > 0 && static_cast<std::size_t>(vectors.cols()) != candidate_.config.model_dim)) {
    throw ValidationError("candidate pool shape does not match the model");
  }
  pool_.texts = std::move(texts);
  pool_.vectors = std::move(vectors);
  pool_.stale = false;
}

void RetrievalModel::refresh_pool() {
  pool_.vectors.resize(static_cast<Eigen::Index>(pool_.texts.size()),
                       static_cast<Eigen::Index>(candidate_.config.model_dim));
  for (std::size_t i = 0; i < pool_.texts.size(); ++i) {
    pool_.vectors.row(static_cast<Eigen::Index>(i)) = encode_candidate(pool_.texts[i]).transpose();
  }
  pool_.stale = false;
}

Vocabulary build_retrieval_vocabulary(std::span<const ContextResponsePair> pairs, std::size_t min_count) {
  std::vector<std::vector<std::string>> docs;
  docs.reserve(pairs.size() * 2);
  for (const auto& p : pairs) {
    docs.push_back(tokenize(p.context_text));
    docs.push_back(tokenize(p.response_text));
  }
  return Vocabulary::build(docs, min_count);
}

double in_batch_loss(const EncoderParams& context_encoder, const EncoderParams& candidate_encoder,
                     std::span<const TokenSequence> contexts, std::span<const TokenSequence> responses,
                     EncoderParams* context_grad, EncoderParams* candidate_grad) {
  if (contexts.size() != responses.size() || contexts.size() < 2) {
    throw ValidationError("in-batch loss needs matching context/response lists of at least 2");
  }
  const auto b = static_cast<Eigen::Index>(contexts.size());
  const auto dim = static_cast<Eigen::Index>(context_encoder.config.model_dim);
  std::vector<EncoderTrace> ctx_traces(contexts.size()), cand_traces(contexts.size());
  Matrix hx(b, dim), hy(b, dim);
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto k = static_cast<std::size_t>(i);
    hx.row(i) = encode(context_encoder, contexts[k], ctx_traces[k]).transpose();
    hy.row(i) = encode(candidate_encoder, responses[k], cand_traces[k]).transpose();
  }
  const Matrix scores = hx * hy.transpose();
  Matrix dscores(b, b);
  double loss = 0.0;
  for (Eigen::Index i = 0; i < b; ++i) {
    const NllResult r = nll_loss(scores.row(i).transpose(), static_cast<std::size_t>(i));
    loss += r.loss;
    dscores.row(i) = r.grad.transpose();
  }
  loss /= static_cast<double>(b);
  if (!context_grad && !candidate_grad) return loss;

  dscores /= static_cast<double>(b);
  const Matrix dhx = dscores * hy;
  const Matrix dhy = dscores.transpose() * hx;
  for (Eigen::Index i = 0; i < b; ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (context_grad) backprop(context_encoder, ctx_traces[k], dhx.row(i).transpose(), *context_grad);
    if (candidate_grad) backprop(candidate_encoder, cand_traces[k], dhy.row(i).transpose(), *candidate_grad);
  }
  return loss;
}

RetrievalTrainResult train_retriever(std::span<const ContextResponsePair> pairs, RetrievalModel model,
                                     const TrainConfig& config, const EpochCallback& on_epoch) {
  config.validate();
  if (pairs.size() < config.batch_size) {
    throw ValidationError("need at least batch_size (" + std::to_string(config.batch_size) +
                          ") training pairs, got " + std::to_string(pairs.size()));
  }

  std::vector<TokenSequence> contexts, responses;
  contexts.reserve(pairs.size());
  responses.reserve(pairs.size());
  for (const auto& p : pairs) {
    contexts.push_back(model.sequence(p.context_text));
    responses.push_back(model.sequence(p.response_text));
    if (contexts.back().true_length == 0 || responses.back().true_length == 0) {
      throw ValidationError("training pair from '" + p.source_conversation + "' has no tokens");
    }
  }

  EncoderParams& ctx_enc = model.mutable_context_encoder();
  EncoderParams& cand_enc = model.mutable_candidate_encoder();
  EncoderParams ctx_grad = ctx_enc.zeros_like();
  EncoderParams cand_grad = cand_enc.zeros_like();

  std::vector<ParamGrad> param_list;
  {
    auto pv = ctx_enc.tensors();
    auto gv = ctx_grad.tensors();
    for (std::size_t i = 0; i < pv.size(); ++i) param_list.push_back({pv[i].value, gv[i].value});
    pv = cand_enc.tensors();
    gv = cand_grad.tensors();
    for (std::size_t i = 0; i < pv.size(); ++i) param_list.push_back({pv[i].value, gv[i].value});
  }
  Optimizer optimizer({.kind = config.optimizer, .learning_rate = config.learning_rate});

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  RetrievalTrainResult result;
  std::vector<TokenSequence> batch_ctx, batch_resp;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t b = std::min(config.batch_size, order.size() - start);
      if (b < 2) break;  // a lone trailing pair has no in-batch negative
      batch_ctx.clear();
      batch_resp.clear();
      for (std::size_t i = 0; i < b; ++i) {
        batch_ctx.push_back(contexts[order[start + i]]);
        batch_resp.push_back(responses[order[start + i]]);
      }
      ctx_grad.set_zero();
      cand_grad.set_zero();
      const double loss = in_batch_loss(ctx_enc, cand_enc, batch_ctx, batch_resp, &ctx_grad, &cand_grad);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "retrieval loss became non-finite at epoch " << epoch + 1 << " (learning rate "
            << config.learning_rate << "); lower the learning rate or check the data";
        throw TrainingDiverged(msg.str());
      }
      optimizer.step(param_list);
      loss_sum += loss;
      ++batches;
    }
    const double mean = loss_sum / static_cast<double>(std::max<std::size_t>(batches, 1));
    result.epoch_losses.push_back(mean);
    if (on_epoch) on_epoch(epoch + 1, mean);
  }

  std::vector<std::string> texts;
  texts.reserve(pairs.size());
  for (const auto& p : pairs) texts.push_back(p.response_text);
  model.set_candidates(texts);
  result.model = std::move(model);
  return result;
}

std::vector<RankedResponse> retrieve(const RetrievalModel& model, std::string_view context, std::size_t k) {
  const auto& pool = model.pool();
  if (pool.stale) throw StalePoolError("candidate pool is stale; re-encode candidates with refresh_pool()");
  if (pool.texts.empty()) throw ValidationError("candidate pool is empty");
  if (k < 1 || k > pool.texts.size()) {
    throw ValidationError("k must be in [1, " + std::to_string(pool.texts.size()) + "]");
  }
  const Vector scores = score_candidates(model.encode_context(context), pool.vectors);
  const Vector probs = softmax(scores);
  std::vector<std::size_t> idx(pool.texts.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      const double sa = scores[static_cast<Eigen::Index>(a)];
                      const double sb = scores[static_cast<Eigen::Index>(b)];
                      return sa > sb || (sa == sb && a < b);
                    });
  std::vector<RankedResponse> out;
  out.reserve(k);
  for (std::size_t r = 0; r < k; ++r) {
    const auto i = idx[r];
    out.push_back({pool.texts[i], probs[static_cast<Eigen::Index>(i)], scores[static_cast<Eigen::Index>(i)], i});
  }
  return out;
}

}  // namespace emojichat
