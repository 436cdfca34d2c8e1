#include "emojichat/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "emojichat/error.hpp"

namespace emojichat {

void WordVectorTable::insert(std::string word, Vector vec) {
  if (dim_ == 0) dim_ = static_cast<std::size_t>(vec.size());
  if (static_cast<std::size_t>(vec.size()) != dim_) {
    throw ValidationError("vector for '" + word + "' has dimension " + std::to_string(vec.size()) +
                          ", expected " + std::to_string(dim_));
  }
  if (!vec.allFinite()) throw ValidationError("vector for '" + word + "' is not finite");
  if (vectors_.contains(word)) throw ValidationError("duplicate word '" + word + "'");
  words_.push_back(word);
  vectors_.emplace(std::move(word), std::move(vec));
}

const Vector* WordVectorTable::find(std::string_view word) const {
  const auto it = vectors_.find(std::string(word));
  return it == vectors_.end() ? nullptr : &it->second;
}

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  std::string f;
  while (ss >> f) out.push_back(std::move(f));
  return out;
}

bool parse_size(const std::string& s, std::size_t& out) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return false;
  out = std::stoull(s);
  return true;
}

}  // namespace

WordVectorTable load_word_vectors(std::istream& in) {
  WordVectorTable table;
  std::string line;
  std::size_t lineno = 0;
  std::size_t header_dim = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    auto fields = split_ws(line);
    if (fields.empty()) continue;
    if (first) {
      first = false;
      std::size_t count = 0;
      if (fields.size() == 2 && parse_size(fields[0], count) && parse_size(fields[1], header_dim)) {
        continue;
      }
    }
    if (fields.size() < 2) throw ParseError(lineno, "expected a word followed by components");
    const std::size_t dim = fields.size() - 1;
    if (header_dim && dim != header_dim) {
      throw ParseError(lineno, "dimension " + std::to_string(dim) + " does not match header " +
                                   std::to_string(header_dim));
    }
    if (table.dimension() && dim != table.dimension()) {
      throw ParseError(lineno, "dimension " + std::to_string(dim) + " does not match " +
                                   std::to_string(table.dimension()));
    }
    Vector v(static_cast<Eigen::Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      const std::string& f = fields[k + 1];
      char* end = nullptr;
      v[static_cast<Eigen::Index>(k)] = std::strtod(f.c_str(), &end);
      if (end != f.c_str() + f.size()) throw ParseError(lineno, "bad component '" + f + "'");
    }
    try {
      table.insert(std::move(fields[0]), std::move(v));
    } catch (const ValidationError& e) {
      throw ParseError(lineno, e.what());
    }
  }
  return table;
}

WordVectorTable load_word_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open word vectors " + path.string());
  return load_word_vectors(in);
}

SentenceVector sif_embed(std::span<const std::string> tokens, const WordVectorTable& table,
                         const WordFrequencies& freqs, double a, const Vector* principal) {
  if (!(a > 0.0)) throw ValidationError("SIF smoothing a must be positive");
  SentenceVector out{Vector::Zero(static_cast<Eigen::Index>(table.dimension())), Provenance::Sif};
  std::size_t used = 0;
  for (const auto& tok : tokens) {
    const Vector* vec = table.find(tok);
    if (!vec) continue;
    const auto it = freqs.find(tok);
    const double p = it == freqs.end() ? 0.0 : it->second;
    out.values += (a / (a + p)) * *vec;
    ++used;
  }
  if (used == 0) return out;
  out.values /= static_cast<double>(used);
  if (principal) out.values -= principal->dot(out.values) * *principal;
  return out;
}

Vector fit_principal_component(std::span<const Vector> vectors) {
  bool distinct = false;
  for (std::size_t i = 1; i < vectors.size() && !distinct; ++i) {
    distinct = vectors[i].size() != vectors[0].size() || vectors[i] != vectors[0];
  }
  if (vectors.size() < 2 || !distinct) {
    throw ValidationError("principal component needs at least 2 distinct vectors");
  }
  const auto dim = vectors[0].size();
  Matrix gram = Matrix::Zero(dim, dim);
  for (const auto& v : vectors) {
    if (v.size() != dim) throw ValidationError("principal component: mixed dimensions");
    gram.noalias() += v * v.transpose();
  }
  if (gram.norm() == 0.0) throw ValidationError("principal component of all-zero vectors");

  // Start from the diagonal so the iterate is never orthogonal to every
  // dominant direction of a PSD matrix.
  Vector x = gram.diagonal().cwiseSqrt() + Vector::Constant(dim, 1e-3);
  x.normalize();
  double lambda = 0.0;
  for (int iter = 0; iter < 20000; ++iter) {
    Vector y = gram * x;
    const double norm = y.norm();
    if (norm == 0.0) break;
    y /= norm;
    const double change = (y - x).norm();
    const double prev = lambda;
    lambda = norm;
    x = std::move(y);
    if (change < 1e-10 && std::abs(lambda - prev) <= 1e-8 * lambda) break;
  }
  Eigen::Index arg = 0;
  x.cwiseAbs().maxCoeff(&arg);
  if (x[arg] < 0) x = -x;
  return x;
}

Vector compose_emoji_vector(std::span<const std::string> keywords, const WordVectorTable& table) {
  if (keywords.empty()) throw ValidationError("emoji keyword list is empty");
  Vector sum = Vector::Zero(static_cast<Eigen::Index>(table.dimension()));
  bool found = false;
  for (const auto& k : keywords) {
    if (const Vector* v = table.find(k)) {
      sum += *v;
      found = true;
    }
  }
  if (!found) throw ValidationError("no emoji keyword is in the word-vector table");
  const double norm = sum.norm();
  if (norm == 0.0) throw ValidationError("emoji keyword vectors sum to zero");
  return sum / norm;
}

double cosine(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) throw ValidationError("cosine: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) throw ValidationError("cosine of a zero-norm vector");
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

}  // namespace emojichat
