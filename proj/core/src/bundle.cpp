#include "emojichat/bundle.hpp"

#include <cstdio>
#include <fstream>

#include <zlib.h>

#include "emojichat/error.hpp"

namespace emojichat {

namespace fs = std::filesystem;

namespace {

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

nlohmann::json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(0, path.string() + ": " + e.what());
  }
}

// Each checkpoint ends with the CRC32 of its body. A CRC over data followed
// by its own CRC is a constant, so only the bodies are hashed.
std::string version_of(const std::string& a, const std::string& b, const std::string& c) {
  uLong crc = crc32(0L, Z_NULL, 0);
  for (const auto* s : {&a, &b, &c}) {
    const std::size_t body = s->size() >= 4 ? s->size() - 4 : s->size();
    crc = crc32(crc, reinterpret_cast<const Bytef*>(s->data()), static_cast<uInt>(body));
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%08lx", static_cast<unsigned long>(crc));
  return std::to_string(kBundleFormatVersion) + "-" + buf;
}

void write_bytes(const fs::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

void save_retrieval_bundle(const fs::path& dir, const RetrievalModel& model, const nlohmann::json& metadata) {
  if (model.pool().stale) throw StalePoolError("refusing to save a bundle with a stale candidate pool");
  fs::create_directories(dir);
  const std::string ctx = to_checkpoint(model.context_encoder()).serialize();
  const std::string cand = to_checkpoint(model.candidate_encoder()).serialize();
  Checkpoint pool;
  pool.header = {{"type", "candidate_pool"}, {"texts", model.pool().texts}};
  pool.add("vectors", model.pool().vectors);
  const std::string pool_bytes = pool.serialize();

  write_bytes(dir / "context_encoder.ckpt", ctx);
  write_bytes(dir / "candidate_encoder.ckpt", cand);
  write_bytes(dir / "candidates.ckpt", pool_bytes);
  model.vocabulary().save(dir / "vocab.tsv");

  nlohmann::json manifest = metadata.is_object() ? metadata : nlohmann::json::object();
  manifest["format_version"] = kBundleFormatVersion;
  manifest["bundle_version"] = version_of(ctx, cand, pool_bytes);
  manifest["min_count"] = model.vocabulary().min_count();
  manifest["max_len"] = model.max_len();
  manifest["candidates"] = model.pool().texts.size();
  write_json(dir / "manifest.json", manifest);
}

RetrievalBundle load_retrieval_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("bundle directory " + dir.string() + " does not exist");
  RetrievalBundle b;
  b.manifest = read_json(dir / "manifest.json");
  if (b.manifest.value("format_version", 0) != kBundleFormatVersion) {
    throw ParseError(0, "unsupported bundle format in " + dir.string());
  }
  b.bundle_version = b.manifest.value("bundle_version", "");
  const std::size_t min_count = b.manifest.value("min_count", std::size_t{1});
  Vocabulary vocab = Vocabulary::load(dir / "vocab.tsv", min_count);
  b.model = RetrievalModel(load_encoder(dir / "context_encoder.ckpt"), load_encoder(dir / "candidate_encoder.ckpt"),
                           std::move(vocab));
  const Checkpoint pool = Checkpoint::load(dir / "candidates.ckpt");
  if (pool.header.value("type", "") != "candidate_pool") throw ParseError(0, "candidates.ckpt is not a pool");
  b.model.restore_pool(pool.header.at("texts").get<std::vector<std::string>>(), pool.get("vectors"));
  return b;
}

void save_classifier(const fs::path& dir, const EmotionClassifier& classifier, const nlohmann::json& metadata) {
  fs::create_directories(dir);
  to_checkpoint(classifier.params(), classifier.labels()).save(dir / "classifier.ckpt");
  classifier.vocabulary().save(dir / "vocab.tsv");
  nlohmann::json manifest = metadata.is_object() ? metadata : nlohmann::json::object();
  manifest["format_version"] = kBundleFormatVersion;
  manifest["labels"] = classifier.labels();
  manifest["config"] = classifier.params().config.to_json();
  write_json(dir / "manifest.json", manifest);
}

EmotionClassifier load_classifier(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error("classifier directory " + dir.string() + " does not exist");
  const nlohmann::json manifest = read_json(dir / "manifest.json");
  const Checkpoint ckpt = Checkpoint::load(dir / "classifier.ckpt");
  CnnParams params = cnn_from_checkpoint(ckpt);
  auto labels = manifest.at("labels").get<std::vector<std::string>>();
  if (ckpt.header.at("labels").get<std::vector<std::string>>() != labels) {
    throw ParseError(0, "classifier manifest labels disagree with the checkpoint");
  }
  Vocabulary vocab = Vocabulary::load(dir / "vocab.tsv", 1);
  return EmotionClassifier(std::move(params), std::move(vocab), std::move(labels));
}

}  // namespace emojichat
