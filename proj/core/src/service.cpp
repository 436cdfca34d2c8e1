#include "emojichat/service.hpp"

#include <chrono>
#include <fstream>
#include <random>

#include "emojichat/bundle.hpp"
#include "emojichat/error.hpp"
#include "emojichat/unicode.hpp"

namespace emojichat {

namespace fs = std::filesystem;

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

}  // namespace

nlohmann::json ChatTurn::to_json() const {
  nlohmann::json j{{"speaker", to_string(speaker)},
                   {"text", text},
                   {"display", display_text},
                   {"timestamp_ms", timestamp_ms}};
  j["emoji"] = emoji ? nlohmann::json(*emoji) : nlohmann::json(nullptr);
  if (emotion) j["emotion"] = *emotion;
  if (similarity) j["similarity"] = *similarity;
  if (probability) j["probability"] = *probability;
  return j;
}

ChatTurn ChatTurn::from_json(const nlohmann::json& j) {
  ChatTurn t;
  t.speaker = role_from_string(j.at("speaker").get<std::string>());
  t.text = j.at("text").get<std::string>();
  t.display_text = j.value("display", t.text);
  t.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
  if (j.contains("emoji") && j["emoji"].is_string()) t.emoji = j["emoji"].get<std::string>();
  if (j.contains("emotion")) t.emotion = j["emotion"].get<std::string>();
  if (j.contains("similarity")) t.similarity = j["similarity"].get<double>();
  if (j.contains("probability")) t.probability = j["probability"].get<double>();
  return t;
}

Pipeline::Pipeline(PipelineArtifacts artifacts) : a_(std::move(artifacts)) {
  if (a_.retrieval.pool().stale || a_.retrieval.pool().texts.empty()) {
    throw ServiceUnavailable("retrieval bundle has no usable candidate pool");
  }
  for (const auto& label : a_.classifier.labels()) {
    if (!a_.emoji_map.contains(label)) {
      throw ServiceUnavailable("emoji map has no bucket for emotion \"" + label + "\"");
    }
  }
  if (a_.remove_principal) {
    std::vector<Vector> sentence_vectors;
    const auto& freqs = a_.retrieval.vocabulary().frequencies();
    for (const auto& text : a_.retrieval.pool().texts) {
      auto s = sif_embed(tokenize(text), a_.word_vectors, freqs, a_.sif_a);
      if (s.values.norm() > 0.0) sentence_vectors.push_back(std::move(s.values));
    }
    try {
      principal_ = fit_principal_component(sentence_vectors);
    } catch (const ValidationError&) {
      principal_.reset();  // too few distinct responses; skip the removal
    }
  }
}

SifSettings Pipeline::sif() const {
  return {&a_.word_vectors, &a_.retrieval.vocabulary().frequencies(), a_.sif_a,
          principal_ ? &*principal_ : nullptr};
}

std::shared_ptr<const Pipeline> Pipeline::load(const AppConfig& config) {
  auto require = [](const fs::path& p, const char* what) {
    if (p.empty()) throw ServiceUnavailable(std::string("no ") + what + " path configured");
    if (!fs::exists(p)) throw ServiceUnavailable(std::string(what) + " not found at " + p.string());
  };
  require(config.bundle, "bundle");
  require(config.classifier, "classifier");
  require(config.word_vectors, "word vectors");
  require(config.emoji_map, "emoji map");
  try {
    PipelineArtifacts a;
    auto bundle = load_retrieval_bundle(config.bundle);
    a.retrieval = std::move(bundle.model);
    a.bundle_version = bundle.bundle_version;
    a.classifier = load_classifier(config.classifier);
    a.word_vectors = load_word_vectors(config.word_vectors);
    a.emoji_map = load_emoji_map(config.emoji_map, a.word_vectors, a.classifier.labels());
    a.sif_a = config.sif_a;
    a.remove_principal = config.sif_remove_principal;
    a.threshold = config.threshold;
    return std::make_shared<const Pipeline>(std::move(a));
  } catch (const ServiceUnavailable&) {
    throw;
  } catch (const Error& e) {
    throw ServiceUnavailable(std::string("failed to load artifacts: ") + e.what());
  }
}

ChatResponse Pipeline::respond(std::span<const ChatTurn> history) const {
  std::vector<std::string> turns;
  turns.reserve(history.size());
  for (const auto& t : history) turns.push_back(t.text);
  const std::string context = join_turns(turns);

  const auto best = retrieve(a_.retrieval, context, 1).front();
  const EmotionPrediction emotion = a_.classifier.predict(best.text);
  const EmojiChoice choice = select_emoji(best.text, emotion.label, a_.emoji_map, sif(), a_.threshold);

  ChatResponse r;
  r.reply_text = best.text;
  r.display_text = append_emoji(best.text, choice);
  r.emoji = choice.emoji;
  r.emotion = emotion.label;
  r.similarity = choice.similarity;
  r.retrieval_probability = best.probability;
  return r;
}

SessionStore::SessionStore(std::optional<fs::path> log_dir) : log_dir_(std::move(log_dir)) {
  if (log_dir_) fs::create_directories(*log_dir_);
}

bool SessionStore::valid_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' || c == '_';
    if (!ok) return false;
  }
  return true;
}

std::string SessionStore::new_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  std::lock_guard lock(mutex_);
  for (;;) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx%04llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(++counter_ & 0xFFFF));
    std::string id(buf);
    const bool on_disk = log_dir_ && fs::exists(*log_dir_ / (id + ".jsonl"));
    if (!sessions_.contains(id) && !on_disk) return id;
  }
}

std::shared_ptr<Session> SessionStore::acquire(std::string_view id, bool create) {
  if (!valid_id(id)) throw ValidationError("malformed session id");
  std::lock_guard lock(mutex_);
  const std::string key(id);
  if (auto it = sessions_.find(key); it != sessions_.end()) return it->second;

  auto session = std::make_shared<Session>();
  session->id = key;
  bool found = false;
  if (log_dir_) {
    std::ifstream in(*log_dir_ / (key + ".jsonl"));
    std::string line;
    while (in && std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        session->history.push_back(ChatTurn::from_json(nlohmann::json::parse(line)));
        found = true;
      } catch (const std::exception&) {
        break;  // torn final write; keep what parsed
      }
    }
    if (found) {
      session->created_ms = session->history.front().timestamp_ms;
      session->last_active_ms = session->history.back().timestamp_ms;
    }
  }
  if (!found && !create) return nullptr;
  if (!found) session->created_ms = session->last_active_ms = now_ms();
  sessions_.emplace(key, session);
  return session;
}

void SessionStore::append(Session& session, ChatTurn turn) {
  if (turn.timestamp_ms == 0) turn.timestamp_ms = now_ms();
  if (log_dir_) {
    std::ofstream out(*log_dir_ / (session.id + ".jsonl"), std::ios::app);
    if (!out) throw Error("cannot append to session log for " + session.id);
    out << turn.to_json().dump() << '\n';
  }
  session.last_active_ms = turn.timestamp_ms;
  session.history.push_back(std::move(turn));
}

ChatService::ChatService(std::shared_ptr<const Pipeline> pipeline, std::shared_ptr<SessionStore> store)
    : pipeline_(std::move(pipeline)), store_(std::move(store)) {
  if (!store_) store_ = std::make_shared<SessionStore>();
}

std::string ChatService::bundle_version() const {
  return pipeline_ ? pipeline_->bundle_version() : std::string();
}

ChatService::Reply ChatService::handle_chat(const std::optional<std::string>& session_id,
                                            std::string_view message) {
  const std::string_view text = unicode::trim(message);
  if (text.empty()) throw ValidationError("message is empty");
  if (session_id && !SessionStore::valid_id(*session_id)) throw ValidationError("malformed session id");
  if (!pipeline_) throw ServiceUnavailable("chat artifacts are not loaded");

  const std::string id = session_id ? *session_id : store_->new_id();
  auto session = store_->acquire(id, true);
  std::lock_guard lock(session->mutex);

  ChatTurn human;
  human.speaker = Role::Speaker;
  human.text = std::string(text);
  human.display_text = human.text;
  human.timestamp_ms = now_ms();

  std::vector<ChatTurn> context = session->history;
  context.push_back(human);
  ChatResponse response = pipeline_->respond(context);

  ChatTurn bot;
  bot.speaker = Role::Listener;
  bot.text = response.reply_text;
  bot.display_text = response.display_text;
  bot.emoji = response.emoji;
  bot.emotion = response.emotion;
  bot.similarity = response.similarity;
  bot.probability = response.retrieval_probability;
  bot.timestamp_ms = now_ms();

  store_->append(*session, std::move(human));
  store_->append(*session, std::move(bot));
  return {id, std::move(response)};
}

std::optional<std::vector<ChatTurn>> ChatService::history(std::string_view session_id) {
  if (!SessionStore::valid_id(session_id)) return std::nullopt;
  auto session = store_->acquire(session_id, false);
  if (!session) return std::nullopt;
  std::lock_guard lock(session->mutex);
  return session->history;
}

}  // namespace emojichat
