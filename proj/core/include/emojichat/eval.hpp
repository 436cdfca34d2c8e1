#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "emojichat/corpus.hpp"
#include "emojichat/emotion.hpp"
#include "emojichat/retrieval.hpp"

namespace emojichat {

struct BleuScores {
  std::vector<double> bleu;        // bleu[n-1] = BLEU-n
  std::vector<double> precisions;  // clipped modified precision p_k, before smoothing
  double brevity_penalty = 0.0;
  double average = 0.0;            // mean of bleu
};

// Sentence-level BLEU with brevity penalty min(1, exp(1 - r/c)). A zero
// precision (including no candidate k-grams) is replaced by 1/(2c) before the
// log. An empty candidate scores all zeros.
BleuScores bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                std::size_t max_n = 4);

// Gold response plus n-1 distinct distractor responses from other pairs.
struct CandidateSet {
  std::size_t pair_index = 0;
  std::vector<std::string> candidates;
  std::size_t gold_position = 0;
};

// Distractors are drawn without replacement from the distinct responses of
// `pairs` other than the gold text. Throws ValidationError when fewer than n
// distinct responses exist.
std::vector<CandidateSet> build_candidate_sets(std::span<const ContextResponsePair> pairs, std::size_t n,
                                               std::uint64_t seed);

// Scores for set.candidates, same order.
using CandidateScorer = std::function<Vector(const CandidateSet& set)>;

// Fraction of sets whose gold strictly outscores every distractor.
double precision_at_1(std::span<const CandidateSet> sets, const CandidateScorer& scorer);

double precision_at_1_of_n(const RetrievalModel& model, std::span<const ContextResponsePair> pairs,
                           std::size_t n = 100, std::uint64_t seed = 0);

struct ClassificationMetrics {
  double micro_accuracy = 0.0;
  double macro_accuracy = 0.0;  // mean recall over classes present in golds
  double macro_f1 = 0.0;        // mean F1 over the whole label set
};

ClassificationMetrics classification_metrics(std::span<const std::string> predictions,
                                             std::span<const std::string> golds,
                                             std::span<const std::string> labels);

struct MetricReport {
  std::optional<BleuScores> mean_bleu;  // per-sample scores averaged
  std::size_t bleu_samples = 0;
  std::optional<double> p_at_1;
  std::size_t p_at_1_n = 0;
  std::size_t p_at_1_samples = 0;
  std::optional<ClassificationMetrics> classification;
  std::size_t classification_samples = 0;

  nlohmann::json to_json() const;
  std::string to_text() const;
};

// Average BLEU of the top-1 retrieved response against each gold response.
BleuScores mean_retrieval_bleu(const RetrievalModel& model, std::span<const ContextResponsePair> pairs);

}  // namespace emojichat
