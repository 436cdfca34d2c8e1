#include "emojichat/config.hpp"

#include <fstream>
#include <set>

#include "emojichat/error.hpp"
#include "emojichat/presets.hpp"

namespace emojichat {

void AppConfig::validate() const {
  if (!(threshold >= -1.0 && threshold <= 2.0)) throw ValidationError("threshold must lie in [-1, 2]");
  if (!(sif_a > 0.0)) throw ValidationError("sif_a must be positive");
  if (p_at_n < 2) throw ValidationError("p_at_n must be at least 2");
  if (min_count < 1) throw ValidationError("min_count must be at least 1");
  if (max_len < 1) throw ValidationError("max_len must be at least 1");
  (void)emojichat::retriever_preset(retriever_preset);
}

AppConfig AppConfig::from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  if (!j.is_object()) throw ParseError(0, "config must be a JSON object");
  static const std::set<std::string> top_keys = {"paths", "threshold", "sif_a", "sif_remove_principal", "presets",
                                                 "seed",  "p_at_n",    "min_count", "max_len",          "labels"};
  static const std::set<std::string> path_keys = {"corpus",   "bundle",   "classifier", "word_vectors",
                                                  "emoji_map", "sessions", "static"};
  for (const auto& [k, v] : j.items()) {
    if (!top_keys.contains(k)) throw ParseError(0, "unknown config key '" + k + "'");
  }
  AppConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
  };
  try {
    if (j.contains("paths")) {
      const auto& paths = j.at("paths");
      if (!paths.is_object()) throw ParseError(0, "'paths' must be an object");
      for (const auto& [k, v] : paths.items()) {
        if (!path_keys.contains(k)) throw ParseError(0, "unknown path key '" + k + "'");
      }
      auto get = [&](const char* key, std::filesystem::path& out) {
        if (paths.contains(key)) out = resolve(paths.at(key).get<std::string>());
      };
      get("corpus", c.corpus);
      get("bundle", c.bundle);
      get("classifier", c.classifier);
      get("word_vectors", c.word_vectors);
      get("emoji_map", c.emoji_map);
      get("sessions", c.sessions_dir);
      get("static", c.static_dir);
    }
    c.threshold = j.value("threshold", c.threshold);
    c.sif_a = j.value("sif_a", c.sif_a);
    c.sif_remove_principal = j.value("sif_remove_principal", c.sif_remove_principal);
    if (j.contains("presets")) {
      const auto& presets = j.at("presets");
      for (const auto& [k, v] : presets.items()) {
        if (k != "retriever") throw ParseError(0, "unknown preset key '" + k + "'");
      }
      c.retriever_preset = presets.value("retriever", c.retriever_preset);
    }
    c.seed = j.value("seed", c.seed);
    c.p_at_n = j.value("p_at_n", c.p_at_n);
    c.min_count = j.value("min_count", c.min_count);
    c.max_len = j.value("max_len", c.max_len);
    c.labels = j.value("labels", c.labels);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("config: ") + e.what());
  }
  try {
    c.validate();
  } catch (const ValidationError& e) {
    throw ParseError(0, std::string("config: ") + e.what());
  }
  return c;
}

AppConfig AppConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
  return from_json(j, path.parent_path());
}

}  // namespace emojichat
