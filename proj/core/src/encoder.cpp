#include "emojichat/encoder.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "emojichat/error.hpp"

namespace emojichat {

namespace {

constexpr double kLayerNormEps = 1e-5;

double gelu(double x) { return 0.5 * x * (1.0 + std::erf(x / std::numbers::sqrt2)); }

double gelu_grad(double x) {
  const double cdf = 0.5 * (1.0 + std::erf(x / std::numbers::sqrt2));
  const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
  return cdf + x * pdf;
}

class UniformSource {
 public:
  explicit UniformSource(std::uint64_t seed) : rng_(seed) {}

  // Bit-exact across standard libraries, unlike uniform_real_distribution.
  double symmetric(double scale) {
    const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    return (2.0 * u - 1.0) * scale;
  }

  Matrix matrix(std::size_t rows, std::size_t cols, double scale) {
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = symmetric(scale);
    return m;
  }

 private:
  std::mt19937_64 rng_;
};

Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, EncoderTrace::Norm& cache) {
  const auto rows = x.rows();
  const auto d = static_cast<double>(x.cols());
  cache.normalized.resize(rows, x.cols());
  cache.inv_std.resize(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double mean = x.row(r).sum() / d;
    const auto centered = x.row(r).array() - mean;
    const double var = centered.square().sum() / d;
    const double inv = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.inv_std[r] = inv;
    cache.normalized.row(r) = centered * inv;
  }
  Matrix out = cache.normalized.array().rowwise() * gain.row(0).array();
  out.array().rowwise() += bias.row(0).array();
  return out;
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& gain, const EncoderTrace::Norm& cache,
                           Matrix& dgain, Matrix& dbias) {
  dgain.row(0) += (dy.array() * cache.normalized.array()).colwise().sum().matrix();
  dbias.row(0) += dy.colwise().sum();
  const auto d = static_cast<double>(dy.cols());
  Matrix dx(dy.rows(), dy.cols());
  for (Eigen::Index r = 0; r < dy.rows(); ++r) {
    const RowVector dxhat = dy.row(r).cwiseProduct(gain.row(0));
    const double mean_dxhat = dxhat.sum() / d;
    const double mean_dxhat_xhat = dxhat.dot(cache.normalized.row(r)) / d;
    dx.row(r) = cache.inv_std[r] *
                (dxhat.array() - mean_dxhat - cache.normalized.row(r).array() * mean_dxhat_xhat).matrix();
  }
  return dx;
}

void softmax_rows(Matrix& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double mx = m.row(r).maxCoeff();
    m.row(r) = (m.row(r).array() - mx).exp().matrix();
    m.row(r) /= m.row(r).sum();
  }
}

void check_sequence(const EncoderParams& params, const TokenSequence& seq) {
  if (seq.true_length == 0) throw ValidationError("cannot encode an all-PAD sequence");
  if (seq.true_length > static_cast<std::size_t>(params.positional.rows())) {
    throw ValidationError("sequence longer than encoder max_len");
  }
  for (TokenId id : seq.tokens()) {
    if (id < 0 || id >= params.token_embedding.rows()) {
      throw ValidationError("token id " + std::to_string(id) + " outside encoder vocabulary");
    }
  }
}

Vector forward(const EncoderParams& params, const TokenSequence& seq, EncoderTrace& trace) {
  check_sequence(params, seq);
  const auto len = static_cast<Eigen::Index>(seq.true_length);
  const auto& cfg = params.config;
  const auto d = static_cast<Eigen::Index>(cfg.model_dim);
  trace.ids.assign(seq.ids.begin(), seq.ids.begin() + len);

  Matrix x(len, d);
  for (Eigen::Index t = 0; t < len; ++t) x.row(t) = params.token_embedding.row(trace.ids[t]);

  if (cfg.kind == EncoderKind::BagOfEmbeddings) {
    trace.layers.clear();
    trace.final_states = std::move(x);
    return trace.final_states.colwise().mean().transpose();
  }

  x += params.positional.topRows(len);
  const auto heads = static_cast<Eigen::Index>(cfg.heads);
  const auto hd = d / heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
  trace.layers.resize(params.layers.size());

  for (std::size_t l = 0; l < params.layers.size(); ++l) {
    const auto& p = params.layers[l];
    auto& c = trace.layers[l];
    c.input = x;
    c.attn_in = layer_norm(x, p.ln1_gain, p.ln1_bias, c.norm1);
    c.q.noalias() = c.attn_in * p.query;
    c.k.noalias() = c.attn_in * p.key;
    c.v.noalias() = c.attn_in * p.value;
    c.probs.resize(static_cast<std::size_t>(heads));
    c.context.resize(len, d);
    for (Eigen::Index h = 0; h < heads; ++h) {
      Matrix& prob = c.probs[static_cast<std::size_t>(h)];
      prob.noalias() = c.q.middleCols(h * hd, hd) * c.k.middleCols(h * hd, hd).transpose();
      prob *= scale;
      softmax_rows(prob);
      c.context.middleCols(h * hd, hd).noalias() = prob * c.v.middleCols(h * hd, hd);
    }
    c.mid = x;
    c.mid.noalias() += c.context * p.output;

    c.ff_in = layer_norm(c.mid, p.ln2_gain, p.ln2_bias, c.norm2);
    c.ff_pre.noalias() = c.ff_in * p.ff_in;
    c.ff_pre.array().rowwise() += p.ff_in_bias.row(0).array();
    c.ff_act = c.ff_pre.unaryExpr([](double v) { return gelu(v); });
    x = c.mid;
    x.noalias() += c.ff_act * p.ff_out;
    x.array().rowwise() += p.ff_out_bias.row(0).array();
  }
  trace.final_states = std::move(x);
  return trace.final_states.colwise().mean().transpose();
}

}  // namespace

std::string_view to_string(EncoderKind kind) {
  return kind == EncoderKind::Transformer ? "transformer" : "bag_of_embeddings";
}

EncoderKind encoder_kind_from_string(std::string_view s) {
  if (s == "transformer") return EncoderKind::Transformer;
  if (s == "bag_of_embeddings") return EncoderKind::BagOfEmbeddings;
  throw ValidationError("unknown encoder kind \"" + std::string(s) + "\"");
}

void EncoderConfig::validate() const {
  if (model_dim < 1 || max_len < 1 || vocab_size < 1) {
    throw ValidationError("encoder dimensions must be at least 1");
  }
  if (kind == EncoderKind::Transformer) {
    if (layers < 1 || heads < 1 || feedforward_dim < 1) {
      throw ValidationError("transformer layers, heads and feedforward_dim must be at least 1");
    }
    if (model_dim % heads != 0) {
      throw ValidationError("model_dim " + std::to_string(model_dim) + " is not divisible by heads " +
                            std::to_string(heads));
    }
  }
}

nlohmann::json EncoderConfig::to_json() const {
  return {{"kind", to_string(kind)},       {"model_dim", model_dim},
          {"layers", layers},              {"heads", heads},
          {"feedforward_dim", feedforward_dim}, {"max_len", max_len},
          {"vocab_size", vocab_size},      {"seed", seed}};
}

EncoderConfig EncoderConfig::from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.kind = encoder_kind_from_string(j.at("kind").get<std::string>());
  c.model_dim = j.at("model_dim").get<std::size_t>();
  c.layers = j.at("layers").get<std::size_t>();
  c.heads = j.at("heads").get<std::size_t>();
  c.feedforward_dim = j.at("feedforward_dim").get<std::size_t>();
  c.max_len = j.at("max_len").get<std::size_t>();
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

std::vector<TensorRef> EncoderParams::tensors() {
  std::vector<TensorRef> out{{"token_embedding", &token_embedding}};
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto& p = layers[l];
    const std::string pre = "layer" + std::to_string(l) + ".";
    out.push_back({pre + "ln1_gain", &p.ln1_gain});
    out.push_back({pre + "ln1_bias", &p.ln1_bias});
    out.push_back({pre + "query", &p.query});
    out.push_back({pre + "key", &p.key});
    out.push_back({pre + "value", &p.value});
    out.push_back({pre + "output", &p.output});
    out.push_back({pre + "ln2_gain", &p.ln2_gain});
    out.push_back({pre + "ln2_bias", &p.ln2_bias});
    out.push_back({pre + "ff_in", &p.ff_in});
    out.push_back({pre + "ff_in_bias", &p.ff_in_bias});
    out.push_back({pre + "ff_out", &p.ff_out});
    out.push_back({pre + "ff_out_bias", &p.ff_out_bias});
  }
  return out;
}

std::vector<ConstTensorRef> EncoderParams::tensors() const {
  std::vector<ConstTensorRef> out;
  for (auto& t : const_cast<EncoderParams*>(this)->tensors()) out.push_back({t.name, t.value});
  return out;
}

EncoderParams EncoderParams::zeros_like() const {
  EncoderParams z = *this;
  z.set_zero();
  return z;
}

void EncoderParams::set_zero() {
  for (auto& t : tensors()) t.value->setZero();
}

Matrix sinusoidal_table(std::size_t max_len, std::size_t dim) {
  Matrix table(static_cast<Eigen::Index>(max_len), static_cast<Eigen::Index>(dim));
  for (std::size_t pos = 0; pos < max_len; ++pos) {
    for (std::size_t i = 0; i < dim; ++i) {
      const double freq = std::pow(10000.0, -static_cast<double>(i - i % 2) / static_cast<double>(dim));
      const double angle = static_cast<double>(pos) * freq;
      table(static_cast<Eigen::Index>(pos), static_cast<Eigen::Index>(i)) =
          i % 2 == 0 ? std::sin(angle) : std::cos(angle);
    }
  }
  return table;
}

EncoderParams init_params(const EncoderConfig& config) {
  config.validate();
  const std::size_t d = config.model_dim;
  const std::size_t f = config.feedforward_dim;
  UniformSource rng(config.seed);
  EncoderParams p;
  p.config = config;
  p.token_embedding = rng.matrix(config.vocab_size, d, 1.0 / std::sqrt(static_cast<double>(d)));
  p.positional = sinusoidal_table(config.max_len, d);
  if (config.kind == EncoderKind::Transformer) {
    const double sd = 1.0 / std::sqrt(static_cast<double>(d));
    const double sf = 1.0 / std::sqrt(static_cast<double>(f));
    for (std::size_t l = 0; l < config.layers; ++l) {
      TransformerLayer layer;
      layer.ln1_gain = Matrix::Ones(1, static_cast<Eigen::Index>(d));
      layer.ln1_bias = Matrix::Zero(1, static_cast<Eigen::Index>(d));
      layer.query = rng.matrix(d, d, sd);
      layer.key = rng.matrix(d, d, sd);
      layer.value = rng.matrix(d, d, sd);
      layer.output = rng.matrix(d, d, sd);
      layer.ln2_gain = Matrix::Ones(1, static_cast<Eigen::Index>(d));
      layer.ln2_bias = Matrix::Zero(1, static_cast<Eigen::Index>(d));
      layer.ff_in = rng.matrix(d, f, sd);
      layer.ff_in_bias = Matrix::Zero(1, static_cast<Eigen::Index>(f));
      layer.ff_out = rng.matrix(f, d, sf);
      layer.ff_out_bias = Matrix::Zero(1, static_cast<Eigen::Index>(d));
      p.layers.push_back(std::move(layer));
    }
  }
  return p;
}

Vector encode(const EncoderParams& params, const TokenSequence& seq) {
  EncoderTrace trace;
  return forward(params, seq, trace);
}

Vector encode(const EncoderParams& params, const TokenSequence& seq, EncoderTrace& trace) {
  return forward(params, seq, trace);
}

void backprop(const EncoderParams& params, const EncoderTrace& trace, const Vector& upstream,
              EncoderParams& grads) {
  const auto len = trace.final_states.rows();
  const auto d = trace.final_states.cols();
  if (upstream.size() != d) throw ValidationError("upstream gradient has the wrong dimension");

  // Mean pooling spreads dL/dh evenly over the valid positions.
  Matrix dx = upstream.transpose().replicate(len, 1) / static_cast<double>(len);

  if (params.config.kind == EncoderKind::Transformer) {
    const auto heads = static_cast<Eigen::Index>(params.config.heads);
    const auto hd = d / heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(hd));
    for (std::size_t l = params.layers.size(); l-- > 0;) {
      const auto& p = params.layers[l];
      auto& g = grads.layers[l];
      const auto& c = trace.layers[l];

      // x_out = mid + gelu(LN2(mid) W1 + b1) W2 + b2
      g.ff_out.noalias() += c.ff_act.transpose() * dx;
      g.ff_out_bias.row(0) += dx.colwise().sum();
      Matrix dpre = dx * p.ff_out.transpose();
      dpre.array() *= c.ff_pre.unaryExpr([](double v) { return gelu_grad(v); }).array();
      g.ff_in.noalias() += c.ff_in.transpose() * dpre;
      g.ff_in_bias.row(0) += dpre.colwise().sum();
      const Matrix dnorm2 = dpre * p.ff_in.transpose();
      Matrix dmid = dx + layer_norm_backward(dnorm2, p.ln2_gain, c.norm2, g.ln2_gain, g.ln2_bias);

      // mid = x + context Wo
      g.output.noalias() += c.context.transpose() * dmid;
      const Matrix dcontext = dmid * p.output.transpose();
      Matrix dq(len, d), dk(len, d), dv(len, d);
      for (Eigen::Index h = 0; h < heads; ++h) {
        const Matrix& prob = c.probs[static_cast<std::size_t>(h)];
        const auto dctx_h = dcontext.middleCols(h * hd, hd);
        Matrix dprob = dctx_h * c.v.middleCols(h * hd, hd).transpose();
        dv.middleCols(h * hd, hd).noalias() = prob.transpose() * dctx_h;
        const Vector row_dot = (dprob.array() * prob.array()).rowwise().sum();
        Matrix dscore = prob.array() * (dprob.array().colwise() - row_dot.array());
        dscore *= scale;
        dq.middleCols(h * hd, hd).noalias() = dscore * c.k.middleCols(h * hd, hd);
        dk.middleCols(h * hd, hd).noalias() = dscore.transpose() * c.q.middleCols(h * hd, hd);
      }
      g.query.noalias() += c.attn_in.transpose() * dq;
      g.key.noalias() += c.attn_in.transpose() * dk;
      g.value.noalias() += c.attn_in.transpose() * dv;
      Matrix dnorm1 = dq * p.query.transpose();
      dnorm1.noalias() += dk * p.key.transpose();
      dnorm1.noalias() += dv * p.value.transpose();
      dx = dmid + layer_norm_backward(dnorm1, p.ln1_gain, c.norm1, g.ln1_gain, g.ln1_bias);
    }
  }

  for (Eigen::Index t = 0; t < len; ++t) grads.token_embedding.row(trace.ids[t]) += dx.row(t);
}

EncoderParams encoder_grad(const EncoderParams& params, std::span<const TokenSequence> seqs,
                           std::span<const Vector> upstream) {
  if (seqs.size() != upstream.size()) throw ValidationError("encoder_grad: batch size mismatch");
  EncoderParams grads = params.zeros_like();
  EncoderTrace trace;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    forward(params, seqs[i], trace);
    backprop(params, trace, upstream[i], grads);
  }
  return grads;
}

Checkpoint to_checkpoint(const EncoderParams& params) {
  Checkpoint ckpt;
  ckpt.header = {{"type", "encoder"}, {"config", params.config.to_json()}};
  for (const auto& t : params.tensors()) ckpt.add(t.name, *t.value);
  return ckpt;
}

EncoderParams encoder_from_checkpoint(const Checkpoint& ckpt) {
  if (ckpt.header.value("type", "") != "encoder") throw ParseError(0, "checkpoint is not an encoder");
  EncoderConfig config;
  try {
    config = EncoderConfig::from_json(ckpt.header.at("config"));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("encoder config: ") + e.what());
  }
  EncoderParams p = init_params(config);
  for (auto& t : p.tensors()) {
    const Matrix& stored = ckpt.get(t.name);
    if (stored.rows() != t.value->rows() || stored.cols() != t.value->cols()) {
      throw ParseError(0, "tensor '" + t.name + "' has the wrong shape");
    }
    if (!stored.allFinite()) throw ParseError(0, "tensor '" + t.name + "' is not finite");
    *t.value = stored;
  }
  return p;
}

void save_encoder(const EncoderParams& params, const std::filesystem::path& path) {
  to_checkpoint(params).save(path);
}

EncoderParams load_encoder(const std::filesystem::path& path) {
  return encoder_from_checkpoint(Checkpoint::load(path));
}

}  // namespace emojichat
