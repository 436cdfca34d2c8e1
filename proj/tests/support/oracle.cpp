#include "oracle.hpp"

#include <algorithm>
#include <cmath>

namespace emojichat::oracle {

namespace {

using Rows = std::vector<std::vector<double>>;

double at(const Matrix& m, std::size_t r, std::size_t c) {
  return m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
}

Rows layer_norm(const Rows& x, const Matrix& gain, const Matrix& bias) {
  Rows out = x;
  for (std::size_t t = 0; t < x.size(); ++t) {
    const std::size_t d = x[t].size();
    double mean = 0.0;
    for (double v : x[t]) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : x[t]) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) {
      out[t][j] = (x[t][j] - mean) / std::sqrt(var + 1e-5) * at(gain, 0, j) + at(bias, 0, j);
    }
  }
  return out;
}

Rows matmul(const Rows& x, const Matrix& w) {
  Rows out(x.size(), std::vector<double>(static_cast<std::size_t>(w.cols()), 0.0));
  for (std::size_t t = 0; t < x.size(); ++t) {
    for (std::size_t c = 0; c < out[t].size(); ++c) {
      double s = 0.0;
      for (std::size_t k = 0; k < x[t].size(); ++k) s += x[t][k] * at(w, k, c);
      out[t][c] = s;
    }
  }
  return out;
}

}  // namespace

std::vector<double> encode(const EncoderParams& params, std::span<const TokenId> ids) {
  const auto& cfg = params.config;
  const std::size_t d = cfg.model_dim;
  const std::size_t n = ids.size();
  Rows x(n, std::vector<double>(d));
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t j = 0; j < d; ++j) {
      x[t][j] = at(params.token_embedding, static_cast<std::size_t>(ids[t]), j);
      if (cfg.kind == EncoderKind::Transformer) {
        const double pair = static_cast<double>(j / 2 * 2);
        const double angle = static_cast<double>(t) / std::pow(10000.0, pair / static_cast<double>(d));
        x[t][j] += j % 2 == 0 ? std::sin(angle) : std::cos(angle);
      }
    }
  }

  if (cfg.kind == EncoderKind::Transformer) {
    const std::size_t heads = cfg.heads;
    const std::size_t hd = d / heads;
    for (const auto& layer : params.layers) {
      const Rows a = layer_norm(x, layer.ln1_gain, layer.ln1_bias);
      const Rows q = matmul(a, layer.query);
      const Rows k = matmul(a, layer.key);
      const Rows v = matmul(a, layer.value);
      Rows ctx(n, std::vector<double>(d, 0.0));
      for (std::size_t h = 0; h < heads; ++h) {
        for (std::size_t i = 0; i < n; ++i) {
          std::vector<double> score(n);
          for (std::size_t jj = 0; jj < n; ++jj) {
            double s = 0.0;
            for (std::size_t c = h * hd; c < (h + 1) * hd; ++c) s += q[i][c] * k[jj][c];
            score[jj] = s / std::sqrt(static_cast<double>(hd));
          }
          const double top = *std::max_element(score.begin(), score.end());
          double z = 0.0;
          for (double& s : score) z += (s = std::exp(s - top));
          for (std::size_t jj = 0; jj < n; ++jj) {
            for (std::size_t c = h * hd; c < (h + 1) * hd; ++c) ctx[i][c] += score[jj] / z * v[jj][c];
          }
        }
      }
      const Rows attn = matmul(ctx, layer.output);
      Rows mid = x;
      for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < d; ++j) mid[t][j] += attn[t][j];
      }
      const Rows b = layer_norm(mid, layer.ln2_gain, layer.ln2_bias);
      Rows hidden = matmul(b, layer.ff_in);
      for (auto& row : hidden) {
        for (std::size_t c = 0; c < row.size(); ++c) {
          const double u = row[c] + at(layer.ff_in_bias, 0, c);
          row[c] = 0.5 * u * (1.0 + std::erf(u / std::sqrt(2.0)));
        }
      }
      const Rows ff = matmul(hidden, layer.ff_out);
      for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t j = 0; j < d; ++j) x[t][j] = mid[t][j] + ff[t][j] + at(layer.ff_out_bias, 0, j);
      }
    }
  }

  std::vector<double> pooled(d, 0.0);
  for (const auto& row : x) {
    for (std::size_t j = 0; j < d; ++j) pooled[j] += row[j] / static_cast<double>(n);
  }
  return pooled;
}

std::vector<double> cnn_logits(const CnnParams& params, std::span<const TokenId> ids) {
  const std::size_t dim = static_cast<std::size_t>(params.embedding.cols());
  const std::size_t filters = params.config.filters_per_width;
  std::vector<double> features;
  for (std::size_t wi = 0; wi < params.config.filter_widths.size(); ++wi) {
    const std::size_t w = params.config.filter_widths[wi];
    for (std::size_t f = 0; f < filters; ++f) {
      double best = -INFINITY;
      for (std::size_t t = 0; t + w <= ids.size(); ++t) {
        double z = at(params.biases[wi], 0, f);
        for (std::size_t k = 0; k < w; ++k) {
          for (std::size_t j = 0; j < dim; ++j) {
            z += at(params.embedding, static_cast<std::size_t>(ids[t + k]), j) * at(params.kernels[wi], k * dim + j, f);
          }
        }
        best = std::max(best, z);
      }
      features.push_back(std::max(0.0, best));
    }
  }
  std::vector<double> logits(params.config.num_classes);
  for (std::size_t c = 0; c < logits.size(); ++c) {
    double s = at(params.output_bias, 0, c);
    for (std::size_t i = 0; i < features.size(); ++i) s += features[i] * at(params.output, i, c);
    logits[c] = s;
  }
  return logits;
}

Metrics confusion_metrics(std::span<const std::string> predictions, std::span<const std::string> golds,
                          std::span<const std::string> labels) {
  const std::size_t k = labels.size();
  auto index = [&](const std::string& s) {
    return static_cast<std::size_t>(std::find(labels.begin(), labels.end(), s) - labels.begin());
  };
  std::vector<std::vector<double>> cm(k, std::vector<double>(k, 0.0));  // cm[gold][pred]
  for (std::size_t i = 0; i < golds.size(); ++i) cm[index(golds[i])][index(predictions[i])] += 1.0;

  Metrics m;
  double diag = 0.0, total = 0.0;
  double recall_sum = 0.0, present = 0.0, f1_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double row = 0.0, col = 0.0;
    for (std::size_t o = 0; o < k; ++o) {
      row += cm[c][o];
      col += cm[o][c];
      total += cm[c][o];
    }
    diag += cm[c][c];
    const double tp = cm[c][c];
    if (row > 0.0) {
      recall_sum += tp / row;
      present += 1.0;
    }
    const double precision = col > 0.0 ? tp / col : 0.0;
    const double recall = row > 0.0 ? tp / row : 0.0;
    f1_sum += precision + recall > 0.0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
  }
  m.micro_accuracy = total > 0.0 ? diag / total : 0.0;
  m.macro_accuracy = present > 0.0 ? recall_sum / present : 0.0;
  m.macro_f1 = f1_sum / static_cast<double>(k);
  return m;
}

}  // namespace emojichat::oracle
