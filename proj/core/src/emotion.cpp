#include "emojichat/emotion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "emojichat/error.hpp"
#include "emojichat/optim.hpp"
#include "emojichat/retrieval.hpp"

namespace emojichat {

void CnnConfig::validate() const {
  if (filter_widths.empty()) throw ValidationError("at least one filter width is required");
  for (auto w : filter_widths) {
    if (w < 1) throw ValidationError("filter widths must be at least 1");
  }
  if (filters_per_width < 1) throw ValidationError("filters_per_width must be at least 1");
  if (num_classes < 2) throw ValidationError("num_classes must be at least 2");
  if (dropout && !(keep_probability > 0.0 && keep_probability <= 1.0)) {
    throw ValidationError("keep_probability must be in (0, 1]");
  }
  if (epochs < 1 || batch_size < 1) throw ValidationError("epochs and batch_size must be at least 1");
  if (!(learning_rate >= 0.0) || !(decay >= 0.0)) {
    throw ValidationError("learning_rate and decay must be non-negative");
  }
  if (max_len < max_width()) throw ValidationError("max_len shorter than the widest filter");
}

std::size_t CnnConfig::max_width() const {
  return filter_widths.empty() ? 0 : *std::max_element(filter_widths.begin(), filter_widths.end());
}

nlohmann::json CnnConfig::to_json() const {
  return {{"filter_widths", filter_widths}, {"filters_per_width", filters_per_width},
          {"embedding_dim", embedding_dim}, {"num_classes", num_classes},
          {"dropout", dropout},             {"keep_probability", keep_probability},
          {"learning_rate", learning_rate}, {"decay", decay},
          {"epochs", epochs},               {"batch_size", batch_size},
          {"max_len", max_len},             {"seed", seed}};
}

CnnConfig CnnConfig::from_json(const nlohmann::json& j) {
  CnnConfig c;
  c.filter_widths = j.at("filter_widths").get<std::vector<std::size_t>>();
  c.filters_per_width = j.at("filters_per_width").get<std::size_t>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.num_classes = j.at("num_classes").get<std::size_t>();
  c.dropout = j.at("dropout").get<bool>();
  c.keep_probability = j.at("keep_probability").get<double>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.decay = j.at("decay").get<double>();
  c.epochs = j.at("epochs").get<std::size_t>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::vector<TensorRef> CnnParams::tensors() {
  std::vector<TensorRef> out;
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    const std::string pre = "conv" + std::to_string(config.filter_widths[i]) + ".";
    out.push_back({pre + "kernel", &kernels[i]});
    out.push_back({pre + "bias", &biases[i]});
  }
  out.push_back({"output", &output});
  out.push_back({"output_bias", &output_bias});
  return out;
}

std::vector<ConstTensorRef> CnnParams::tensors() const {
  std::vector<ConstTensorRef> out;
  for (auto& t : const_cast<CnnParams*>(this)->tensors()) out.push_back({t.name, t.value});
  return out;
}

CnnParams CnnParams::zeros_like() const {
  CnnParams z;
  z.config = config;
  for (const auto& k : kernels) z.kernels.push_back(Matrix::Zero(k.rows(), k.cols()));
  for (const auto& b : biases) z.biases.push_back(Matrix::Zero(b.rows(), b.cols()));
  z.output = Matrix::Zero(output.rows(), output.cols());
  z.output_bias = Matrix::Zero(output_bias.rows(), output_bias.cols());
  return z;
}

void CnnParams::set_zero() {
  for (auto& t : tensors()) t.value->setZero();
}

Matrix embedding_from_table(const Vocabulary& vocab, const WordVectorTable& table) {
  Matrix emb = Matrix::Zero(static_cast<Eigen::Index>(vocab.size()),
                            static_cast<Eigen::Index>(table.dimension()));
  for (std::size_t i = kReservedTokens; i < vocab.size(); ++i) {
    if (const Vector* v = table.find(vocab.token(static_cast<TokenId>(i)))) {
      emb.row(static_cast<Eigen::Index>(i)) = v->transpose();
    }
  }
  return emb;
}

CnnParams init_cnn(const CnnConfig& config, Matrix embedding) {
  CnnParams p;
  p.config = config;
  if (p.config.embedding_dim == 0) p.config.embedding_dim = static_cast<std::size_t>(embedding.cols());
  p.config.validate();
  if (static_cast<std::size_t>(embedding.cols()) != p.config.embedding_dim) {
    throw ValidationError("embedding matrix width does not match embedding_dim");
  }
  p.embedding = std::move(embedding);
  const auto dim = static_cast<double>(p.config.embedding_dim);
  const auto filters = static_cast<Eigen::Index>(p.config.filters_per_width);
  std::mt19937_64 rng(p.config.seed);
  auto fill = [&](Matrix& m, double scale) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      m.data()[i] = (2.0 * u - 1.0) * scale;
    }
  };
  for (auto w : p.config.filter_widths) {
    Matrix k(static_cast<Eigen::Index>(w * p.config.embedding_dim), filters);
    fill(k, 1.0 / std::sqrt(static_cast<double>(w) * dim));
    p.kernels.push_back(std::move(k));
    p.biases.push_back(Matrix::Zero(1, filters));
  }
  p.output.resize(static_cast<Eigen::Index>(p.config.total_filters()),
                  static_cast<Eigen::Index>(p.config.num_classes));
  fill(p.output, 1.0 / std::sqrt(static_cast<double>(p.config.total_filters())));
  p.output_bias = Matrix::Zero(1, static_cast<Eigen::Index>(p.config.num_classes));
  return p;
}

namespace {

struct CnnTrace {
  Matrix embedded;                     // length x D
  std::vector<std::vector<Eigen::Index>> argmax;  // per width, per filter
  std::vector<RowVector> pooled_pre;   // per width, max over time before ReLU
  RowVector features;                  // after ReLU and dropout
  RowVector mask;                      // dropout scale per feature (1 when off)
};

// length may exceed seq.true_length; the extra positions read PAD rows.
RowVector forward(const CnnParams& p, const TokenSequence& seq, std::size_t length, CnnTrace& trace,
                  const RowVector* mask) {
  const auto dim = p.embedding.cols();
  const auto len = static_cast<Eigen::Index>(length);
  trace.embedded.resize(len, dim);
  for (Eigen::Index t = 0; t < len; ++t) {
    const TokenId id = static_cast<std::size_t>(t) < seq.ids.size() ? seq.ids[static_cast<std::size_t>(t)] : kPadId;
    if (id < 0 || id >= p.embedding.rows()) {
      throw ValidationError("token id " + std::to_string(id) + " outside classifier vocabulary");
    }
    trace.embedded.row(t) = p.embedding.row(id);
  }
  const auto filters = static_cast<Eigen::Index>(p.config.filters_per_width);
  trace.features.resize(static_cast<Eigen::Index>(p.config.total_filters()));
  trace.argmax.assign(p.kernels.size(), {});
  trace.pooled_pre.assign(p.kernels.size(), RowVector());
  for (std::size_t wi = 0; wi < p.kernels.size(); ++wi) {
    const auto w = static_cast<Eigen::Index>(p.config.filter_widths[wi]);
    const Eigen::Index positions = len - w + 1;
    // Row-major storage makes each window a contiguous w*D slice.
    const Eigen::Map<const Matrix> windows_src(trace.embedded.data(), len, dim);
    Matrix z(positions, filters);
    for (Eigen::Index t = 0; t < positions; ++t) {
      const Eigen::Map<const RowVector> window(windows_src.data() + t * dim, w * dim);
      z.row(t).noalias() = window * p.kernels[wi];
    }
    z.array().rowwise() += p.biases[wi].row(0).array();
    auto& arg = trace.argmax[wi];
    arg.resize(static_cast<std::size_t>(filters));
    RowVector best(filters);
    for (Eigen::Index f = 0; f < filters; ++f) {
      Eigen::Index at = 0;
      best[f] = z.col(f).maxCoeff(&at);
      arg[static_cast<std::size_t>(f)] = at;
    }
    trace.pooled_pre[wi] = best;
    trace.features.segment(static_cast<Eigen::Index>(wi) * filters, filters) = best.cwiseMax(0.0);
  }
  if (mask) {
    trace.mask = *mask;
    trace.features.array() *= mask->array();
  } else {
    trace.mask = RowVector::Ones(trace.features.size());
  }
  RowVector logits = trace.features * p.output;
  logits += p.output_bias.row(0);
  return logits;
}

void backward(const CnnParams& p, const CnnTrace& trace, const RowVector& dlogits, CnnParams& g) {
  g.output.noalias() += trace.features.transpose() * dlogits;
  g.output_bias.row(0) += dlogits;
  RowVector dfeat = dlogits * p.output.transpose();
  dfeat.array() *= trace.mask.array();
  const auto dim = p.embedding.cols();
  const auto filters = static_cast<Eigen::Index>(p.config.filters_per_width);
  for (std::size_t wi = 0; wi < p.kernels.size(); ++wi) {
    const auto w = static_cast<Eigen::Index>(p.config.filter_widths[wi]);
    for (Eigen::Index f = 0; f < filters; ++f) {
      if (trace.pooled_pre[wi][f] <= 0.0) continue;
      const double df = dfeat[static_cast<Eigen::Index>(wi) * filters + f];
      if (df == 0.0) continue;
      const Eigen::Index t = trace.argmax[wi][static_cast<std::size_t>(f)];
      const Eigen::Map<const RowVector> window(trace.embedded.data() + t * dim, w * dim);
      g.kernels[wi].col(f) += df * window.transpose();
      g.biases[wi](0, f) += df;
    }
  }
}

std::size_t effective_length(const CnnParams& p, const TokenSequence& seq) {
  return std::max(seq.true_length, p.config.max_width());
}

}  // namespace

Vector cnn_forward(const CnnParams& params, const TokenSequence& seq) {
  if (seq.true_length < params.config.max_width()) {
    throw ValidationError("sequence of " + std::to_string(seq.true_length) +
                          " tokens is shorter than the widest filter (" +
                          std::to_string(params.config.max_width()) + ")");
  }
  CnnTrace trace;
  return forward(params, seq, seq.true_length, trace, nullptr).transpose();
}

double cnn_loss(const CnnParams& params, std::span<const TokenSequence> seqs,
                std::span<const std::size_t> labels) {
  if (seqs.size() != labels.size() || seqs.empty()) throw ValidationError("cnn_loss: bad batch");
  double loss = 0.0;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    loss += nll_loss(cnn_forward(params, seqs[i]), labels[i]).loss;
  }
  return loss / static_cast<double>(seqs.size());
}

CnnParams cnn_grad(const CnnParams& params, std::span<const TokenSequence> seqs,
                   std::span<const std::size_t> labels) {
  if (seqs.size() != labels.size() || seqs.empty()) throw ValidationError("cnn_grad: bad batch");
  CnnParams g = params.zeros_like();
  CnnTrace trace;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    if (seqs[i].true_length < params.config.max_width()) {
      throw ValidationError("sequence shorter than the widest filter");
    }
    const RowVector logits = forward(params, seqs[i], seqs[i].true_length, trace, nullptr);
    const NllResult r = nll_loss(logits.transpose(), labels[i]);
    backward(params, trace, r.grad.transpose() / static_cast<double>(seqs.size()), g);
  }
  return g;
}

EmotionClassifier::EmotionClassifier(CnnParams params, Vocabulary vocab, std::vector<std::string> labels)
    : params_(std::move(params)), vocab_(std::move(vocab)), labels_(std::move(labels)) {
  if (labels_.size() != params_.config.num_classes) {
    throw ValidationError("label count does not match num_classes");
  }
  if (static_cast<std::size_t>(params_.embedding.rows()) != vocab_.size()) {
    throw ValidationError("classifier embedding rows do not match the vocabulary");
  }
}

std::size_t EmotionClassifier::label_index(std::string_view label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) throw ValidationError("unknown emotion label \"" + std::string(label) + "\"");
  return static_cast<std::size_t>(it - labels_.begin());
}

EmotionPrediction EmotionClassifier::predict(std::string_view text) const {
  const TokenSequence seq = encode_text(text, vocab_, params_.config.max_len);
  CnnTrace trace;
  const RowVector logits = forward(params_, seq, effective_length(params_, seq), trace, nullptr);
  EmotionPrediction out;
  out.probabilities = softmax(logits.transpose());
  Eigen::Index best = 0;
  out.probabilities.maxCoeff(&best);  // first maximum wins ties
  out.index = static_cast<std::size_t>(best);
  out.label = labels_[out.index];
  return out;
}

EmotionPrediction predict_emotion(const EmotionClassifier& classifier, std::string_view text) {
  return classifier.predict(text);
}

ClassifierTrainResult train_classifier(std::span<const LabeledText> data, std::vector<std::string> labels,
                                       const WordVectorTable& table, CnnConfig config) {
  if (labels.size() != config.num_classes) {
    throw ValidationError("label set has " + std::to_string(labels.size()) + " entries but num_classes is " +
                          std::to_string(config.num_classes));
  }
  for (const auto& ex : data) {
    if (std::find(labels.begin(), labels.end(), ex.label) == labels.end()) {
      throw ValidationError("training label \"" + ex.label + "\" is not in the label set");
    }
  }
  std::vector<std::vector<std::string>> docs;
  docs.reserve(data.size());
  for (const auto& ex : data) docs.push_back(tokenize(ex.text));
  Vocabulary vocab = Vocabulary::build(docs, 1);
  CnnParams params = init_cnn(config, embedding_from_table(vocab, table));
  return train_classifier(data, EmotionClassifier(std::move(params), std::move(vocab), std::move(labels)));
}

ClassifierTrainResult train_classifier(std::span<const LabeledText> data, EmotionClassifier initial) {
  const CnnConfig config = initial.params().config;
  config.validate();
  if (data.size() < config.batch_size) {
    throw ValidationError("need at least batch_size (" + std::to_string(config.batch_size) +
                          ") examples, got " + std::to_string(data.size()));
  }
  std::vector<TokenSequence> seqs;
  std::vector<std::size_t> gold;
  seqs.reserve(data.size());
  gold.reserve(data.size());
  for (const auto& ex : data) {
    gold.push_back(initial.label_index(ex.label));
    seqs.push_back(encode_text(ex.text, initial.vocabulary(), config.max_len));
  }

  CnnParams& params = initial.mutable_params();
  CnnParams grads = params.zeros_like();
  std::vector<ParamGrad> plist;
  {
    auto pv = params.tensors();
    auto gv = grads.tensors();
    for (std::size_t i = 0; i < pv.size(); ++i) plist.push_back({pv[i].value, gv[i].value});
  }
  Optimizer optimizer({.kind = OptimizerKind::Adam, .learning_rate = config.learning_rate, .decay = config.decay});

  std::mt19937_64 rng(config.seed);
  std::bernoulli_distribution keep(config.dropout ? config.keep_probability : 1.0);
  const auto nfeat = static_cast<Eigen::Index>(config.total_filters());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  ClassifierTrainResult result;
  CnnTrace trace;
  RowVector mask(nfeat);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    std::size_t steps = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t b = std::min(config.batch_size, order.size() - start);
      grads.set_zero();
      double loss = 0.0;
      for (std::size_t i = 0; i < b; ++i) {
        const std::size_t idx = order[start + i];
        const RowVector* m = nullptr;
        if (config.dropout) {
          for (Eigen::Index f = 0; f < nfeat; ++f) mask[f] = keep(rng) ? 1.0 / config.keep_probability : 0.0;
          m = &mask;
        }
        const RowVector logits = forward(params, seqs[idx], effective_length(params, seqs[idx]), trace, m);
        const NllResult r = nll_loss(logits.transpose(), gold[idx]);
        loss += r.loss;
        backward(params, trace, r.grad.transpose() / static_cast<double>(b), grads);
      }
      loss /= static_cast<double>(b);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "classifier loss became non-finite at epoch " << epoch + 1 << " (learning rate "
            << config.learning_rate << "); lower the learning rate";
        throw TrainingDiverged(msg.str());
      }
      optimizer.step(plist);
      result.step_losses.push_back(loss);
      epoch_loss += loss;
      ++steps;
    }
    result.epoch_losses.push_back(epoch_loss / static_cast<double>(steps));
  }
  result.classifier = std::move(initial);
  return result;
}

Checkpoint to_checkpoint(const CnnParams& params, std::span<const std::string> labels) {
  Checkpoint ckpt;
  ckpt.header = {{"type", "cnn"},
                 {"config", params.config.to_json()},
                 {"labels", std::vector<std::string>(labels.begin(), labels.end())}};
  ckpt.add("embedding", params.embedding);
  for (const auto& t : params.tensors()) ckpt.add(t.name, *t.value);
  return ckpt;
}

CnnParams cnn_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.header.value("type", "") != "cnn") throw ParseError(0, "checkpoint is not a CNN classifier");
  CnnConfig config;
  try {
    config = CnnConfig::from_json(ckpt.header.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("classifier config: ") + e.what());
  }
  CnnParams p = init_cnn(config, ckpt.get("embedding"));
  for (auto& t : p.tensors()) {
    const Matrix& stored = ckpt.get(t.name);
    if (stored.rows() != t.value->rows() || stored.cols() != t.value->cols()) {
      throw ParseError(0, "tensor '" + t.name + "' has the wrong shape");
    }
    *t.value = stored;
  }
  return p;
}

}  // namespace emojichat
