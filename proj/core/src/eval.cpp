#include "emojichat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "emojichat/error.hpp"

namespace emojichat {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                      tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

BleuScores bleu(std::span<const std::string> candidate, std::span<const std::string> reference,
                std::size_t max_n) {
  if (reference.empty()) throw ValidationError("BLEU reference is empty");
  if (max_n < 1) throw ValidationError("BLEU max_n must be at least 1");
  BleuScores out;
  out.bleu.assign(max_n, 0.0);
  out.precisions.assign(max_n, 0.0);
  if (candidate.empty()) return out;

  const double c = static_cast<double>(candidate.size());
  const double r = static_cast<double>(reference.size());
  out.brevity_penalty = std::min(1.0, std::exp(1.0 - r / c));
  const double floor = 1.0 / (2.0 * c);

  double log_sum = 0.0;
  for (std::size_t n = 1; n <= max_n; ++n) {
    const auto cand = count_ngrams(candidate, n);
    const auto ref = count_ngrams(reference, n);
    std::size_t matched = 0;
    std::size_t total = 0;
    for (const auto& [gram, cnt] : cand) {
      total += cnt;
      const auto it = ref.find(gram);
      if (it != ref.end()) matched += std::min(cnt, it->second);
    }
    const double p = total ? static_cast<double>(matched) / static_cast<double>(total) : 0.0;
    out.precisions[n - 1] = p;
    log_sum += std::log(p > 0.0 ? p : floor);
    out.bleu[n - 1] = out.brevity_penalty * std::exp(log_sum / static_cast<double>(n));
  }
  double sum = 0.0;
  for (double b : out.bleu) sum += b;
  out.average = sum / static_cast<double>(max_n);
  return out;
}

std::vector<CandidateSet> build_candidate_sets(std::span<const ContextResponsePair> pairs, std::size_t n,
                                               std::uint64_t seed) {
  if (n < 1) throw ValidationError("candidate set size must be at least 1");
  std::vector<std::string> distinct;
  std::unordered_map<std::string, std::size_t> where;
  for (const auto& p : pairs) {
    if (where.emplace(p.response_text, distinct.size()).second) distinct.push_back(p.response_text);
  }
  if (distinct.size() < n) {
    throw ValidationError("P@1," + std::to_string(n) + " needs at least " + std::to_string(n) +
                          " distinct responses, found " + std::to_string(distinct.size()));
  }
  std::mt19937_64 rng(seed);
  std::vector<CandidateSet> sets;
  sets.reserve(pairs.size());
  std::vector<std::size_t> others;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const std::size_t gold = where.at(pairs[i].response_text);
    others.clear();
    for (std::size_t j = 0; j < distinct.size(); ++j) {
      if (j != gold) others.push_back(j);
    }
    // Partial Fisher-Yates: the first n-1 slots become the distractors.
    for (std::size_t k = 0; k + 1 < n; ++k) {
      std::uniform_int_distribution<std::size_t> pick(k, others.size() - 1);
      std::swap(others[k], others[pick(rng)]);
    }
    CandidateSet set;
    set.pair_index = i;
    set.gold_position = 0;
    set.candidates.push_back(pairs[i].response_text);
    for (std::size_t k = 0; k + 1 < n; ++k) set.candidates.push_back(distinct[others[k]]);
    sets.push_back(std::move(set));
  }
  return sets;
}

double precision_at_1(std::span<const CandidateSet> sets, const CandidateScorer& scorer) {
  if (sets.empty()) throw ValidationError("no candidate sets to evaluate");
  std::size_t hits = 0;
  for (const auto& set : sets) {
    const Vector scores = scorer(set);
    if (static_cast<std::size_t>(scores.size()) != set.candidates.size()) {
      throw ValidationError("scorer returned the wrong number of scores");
    }
    const double gold = scores[static_cast<Eigen::Index>(set.gold_position)];
    bool best = true;
    for (Eigen::Index k = 0; k < scores.size() && best; ++k) {
      if (static_cast<std::size_t>(k) != set.gold_position && scores[k] >= gold) best = false;
    }
    hits += best ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(sets.size());
}

double precision_at_1_of_n(const RetrievalModel& model, std::span<const ContextResponsePair> pairs,
                           std::size_t n, std::uint64_t seed) {
  const auto sets = build_candidate_sets(pairs, n, seed);
  std::unordered_map<std::string, Vector> cache;
  auto candidate_vec = [&](const std::string& text) -> const Vector& {
    auto it = cache.find(text);
    if (it == cache.end()) it = cache.emplace(text, model.encode_candidate(text)).first;
    return it->second;
  };
  return precision_at_1(sets, [&](const CandidateSet& set) {
    const Vector hx = model.encode_context(pairs[set.pair_index].context_text);
    Vector scores(static_cast<Eigen::Index>(set.candidates.size()));
    for (std::size_t k = 0; k < set.candidates.size(); ++k) {
      scores[static_cast<Eigen::Index>(k)] = hx.dot(candidate_vec(set.candidates[k]));
    }
    return scores;
  });
}

ClassificationMetrics classification_metrics(std::span<const std::string> predictions,
                                             std::span<const std::string> golds,
                                             std::span<const std::string> labels) {
  if (predictions.size() != golds.size()) throw ValidationError("predictions and golds differ in length");
  if (golds.empty()) throw ValidationError("classification metrics of an empty set");
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < labels.size(); ++i) index.emplace(labels[i], i);
  auto lookup = [&](const std::string& l) {
    const auto it = index.find(l);
    if (it == index.end()) throw ValidationError("label \"" + l + "\" is not in the label set");
    return it->second;
  };
  const std::size_t k = labels.size();
  std::vector<std::size_t> tp(k, 0), pred_count(k, 0), gold_count(k, 0);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < golds.size(); ++i) {
    const std::size_t p = lookup(predictions[i]);
    const std::size_t g = lookup(golds[i]);
    ++pred_count[p];
    ++gold_count[g];
    if (p == g) {
      ++tp[g];
      ++correct;
    }
  }
  ClassificationMetrics m;
  m.micro_accuracy = static_cast<double>(correct) / static_cast<double>(golds.size());
  double recall_sum = 0.0;
  std::size_t present = 0;
  double f1_sum = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    if (gold_count[c] == 0) continue;  // F1 counts as 0, excluded from recall mean
    const double recall = static_cast<double>(tp[c]) / static_cast<double>(gold_count[c]);
    const double precision = pred_count[c] ? static_cast<double>(tp[c]) / static_cast<double>(pred_count[c]) : 0.0;
    recall_sum += recall;
    ++present;
    if (precision + recall > 0.0) f1_sum += 2.0 * precision * recall / (precision + recall);
  }
  m.macro_accuracy = recall_sum / static_cast<double>(present);
  m.macro_f1 = k ? f1_sum / static_cast<double>(k) : 0.0;
  return m;
}

BleuScores mean_retrieval_bleu(const RetrievalModel& model, std::span<const ContextResponsePair> pairs) {
  if (pairs.empty()) throw ValidationError("no pairs to score");
  BleuScores mean;
  mean.bleu.assign(4, 0.0);
  mean.precisions.assign(4, 0.0);
  std::size_t scored = 0;
  for (const auto& p : pairs) {
    const auto ref = tokenize(p.response_text);
    if (ref.empty()) continue;
    const auto top = retrieve(model, p.context_text, 1);
    const auto cand = tokenize(top.front().text);
    ++scored;
    const BleuScores s = bleu(cand, ref, 4);
    for (std::size_t n = 0; n < 4; ++n) {
      mean.bleu[n] += s.bleu[n];
      mean.precisions[n] += s.precisions[n];
    }
    mean.brevity_penalty += s.brevity_penalty;
    mean.average += s.average;
  }
  if (scored == 0) throw ValidationError("no pair has a tokenizable reference");
  const double count = static_cast<double>(scored);
  for (std::size_t n = 0; n < 4; ++n) {
    mean.bleu[n] /= count;
    mean.precisions[n] /= count;
  }
  mean.brevity_penalty /= count;
  mean.average /= count;
  return mean;
}

nlohmann::json MetricReport::to_json() const {
  nlohmann::json j = nlohmann::json::object();
  if (mean_bleu) {
    j["bleu"] = {{"avg_bleu", mean_bleu->average},
                 {"bleu_1", mean_bleu->bleu[0]},
                 {"bleu_2", mean_bleu->bleu[1]},
                 {"bleu_3", mean_bleu->bleu[2]},
                 {"bleu_4", mean_bleu->bleu[3]},
                 {"samples", bleu_samples}};
  }
  if (p_at_1) j["p_at_1"] = {{"value", *p_at_1}, {"n", p_at_1_n}, {"samples", p_at_1_samples}};
  if (classification) {
    j["classification"] = {{"micro_accuracy", classification->micro_accuracy},
                           {"macro_accuracy", classification->macro_accuracy},
                           {"macro_f1", classification->macro_f1},
                           {"samples", classification_samples}};
  }
  return j;
}

std::string MetricReport::to_text() const {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2);
  if (mean_bleu) {
    out << "avg BLEU (1-4):   " << 100.0 * mean_bleu->average << "  [";
    for (std::size_t n = 0; n < mean_bleu->bleu.size(); ++n) {
      out << (n ? " " : "") << "B" << n + 1 << "=" << 100.0 * mean_bleu->bleu[n];
    }
    out << "]  over " << bleu_samples << " samples\n";
  }
  if (p_at_1) {
    out << "P@1," << p_at_1_n << ":          " << 100.0 * *p_at_1 << "%  over " << p_at_1_samples
        << " samples\n";
  }
  if (classification) {
    out << "emotion micro acc: " << 100.0 * classification->micro_accuracy << "%\n"
        << "emotion macro acc: " << 100.0 * classification->macro_accuracy << "%\n"
        << "emotion macro F1:  " << 100.0 * classification->macro_f1 << "%  over " << classification_samples
        << " samples\n";
  }
  return out.str();
}

}  // namespace emojichat
