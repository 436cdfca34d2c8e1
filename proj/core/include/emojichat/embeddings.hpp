#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "emojichat/tensor.hpp"
#include "emojichat/text.hpp"

namespace emojichat {

inline constexpr std::size_t kDefaultWordDim = 300;

class WordVectorTable {
 public:
  WordVectorTable() = default;
  explicit WordVectorTable(std::size_t dimension) : dim_(dimension) {}

  // Throws ValidationError on dimension mismatch, duplicates, or non-finite values.
  void insert(std::string word, Vector vec);

  const Vector* find(std::string_view word) const;
  bool contains(std::string_view word) const { return find(word) != nullptr; }
  std::size_t dimension() const { return dim_; }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> words_;
  std::unordered_map<std::string, Vector> vectors_;
};

// Text format: optional "count dim" header, then "word f1 ... fD" per line.
WordVectorTable load_word_vectors(std::istream& in);
WordVectorTable load_word_vectors(const std::filesystem::path& path);

enum class Provenance { Sif, Encoder };

struct SentenceVector {
  Vector values;
  Provenance provenance = Provenance::Sif;
};

inline constexpr double kDefaultSifSmoothing = 1e-3;

// Smooth-inverse-frequency average: mean over in-table tokens of
// a/(a+p(w)) * vec(w), minus its projection on `principal` when given.
// Returns the zero vector when no token is in the table.
SentenceVector sif_embed(std::span<const std::string> tokens, const WordVectorTable& table,
                         const WordFrequencies& freqs, double a = kDefaultSifSmoothing,
                         const Vector* principal = nullptr);

// First right-singular direction of the stacked rows (uncentered), by power
// iteration on the D x D Gram matrix. Sign fixed so the largest-magnitude
// component is positive.
Vector fit_principal_component(std::span<const Vector> vectors);

// Sum of the keyword vectors present in the table, L2-normalized.
Vector compose_emoji_vector(std::span<const std::string> keywords, const WordVectorTable& table);

double cosine(const Vector& u, const Vector& v);

}  // namespace emojichat
