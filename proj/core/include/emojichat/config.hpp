#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace emojichat {

// Settings shared by every CLI subcommand and the chat service. Relative
// paths in a config file resolve against the file's directory.
//
//   {
//     "paths": {"corpus": "...", "bundle": "...", "classifier": "...",
//               "word_vectors": "...", "emoji_map": "...",
//               "sessions": "...", "static": "..."},
//     "threshold": 0.3, "sif_a": 0.001, "sif_remove_principal": true,
//     "presets": {"retriever": "vanilla"},
//     "seed": 7, "p_at_n": 100, "min_count": 1, "max_len": 100,
//     "labels": ["..."]
//   }
struct AppConfig {
  std::filesystem::path corpus;
  std::filesystem::path bundle;
  std::filesystem::path classifier;
  std::filesystem::path word_vectors;
  std::filesystem::path emoji_map;
  std::filesystem::path sessions_dir;
  std::filesystem::path static_dir;

  double threshold = 0.3;
  double sif_a = 1e-3;
  bool sif_remove_principal = true;
  std::string retriever_preset = "vanilla";
  std::uint64_t seed = 7;
  std::size_t p_at_n = 100;
  std::size_t min_count = 1;
  std::size_t max_len = 100;
  std::vector<std::string> labels;  // empty: take labels from the corpus

  void validate() const;

  // Throws ParseError on unknown keys or wrongly typed values.
  static AppConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static AppConfig load(const std::filesystem::path& path);
};

}  // namespace emojichat
