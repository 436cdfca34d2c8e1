#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "emojichat/emotion.hpp"
#include "emojichat/retrieval.hpp"

namespace emojichat {

inline constexpr int kBundleFormatVersion = 1;

// Retrieval bundle directory:
//   manifest.json            format version, bundle_version, min_count, caller metadata
//   context_encoder.ckpt     encoder checkpoints (tensor container)
//   candidate_encoder.ckpt
//   candidates.ckpt          tensor "vectors"; response texts in the header
//   vocab.tsv                token<TAB>count
struct RetrievalBundle {
  RetrievalModel model;
  nlohmann::json manifest;
  std::string bundle_version;
};

// `metadata` is merged into the manifest (config, split seed, loss trace...).
void save_retrieval_bundle(const std::filesystem::path& dir, const RetrievalModel& model,
                           const nlohmann::json& metadata = nlohmann::json::object());
RetrievalBundle load_retrieval_bundle(const std::filesystem::path& dir);

// Classifier directory: classifier.ckpt, vocab.tsv, manifest.json (labels).
void save_classifier(const std::filesystem::path& dir, const EmotionClassifier& classifier,
                     const nlohmann::json& metadata = nlohmann::json::object());
EmotionClassifier load_classifier(const std::filesystem::path& dir);

}  // namespace emojichat
