#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "emojichat/config.hpp"
#include "emojichat/corpus.hpp"
#include "emojichat/emoji.hpp"
#include "emojichat/emotion.hpp"
#include "emojichat/retrieval.hpp"

namespace emojichat {

struct ChatTurn {
  Role speaker = Role::Speaker;
  std::string text;          // bot turns: retrieved reply without emoji
  std::string display_text;  // bot turns: text with the emoji rule applied
  std::optional<std::string> emoji;
  std::optional<std::string> emotion;
  std::optional<double> similarity;
  std::optional<double> probability;
  std::int64_t timestamp_ms = 0;

  nlohmann::json to_json() const;
  static ChatTurn from_json(const nlohmann::json& j);
};

struct ChatResponse {
  std::string reply_text;
  std::string display_text;
  std::optional<std::string> emoji;
  std::string emotion;
  double similarity = -1.0;
  double retrieval_probability = 0.0;
};

struct PipelineArtifacts {
  RetrievalModel retrieval;
  std::string bundle_version;
  EmotionClassifier classifier;
  EmojiMap emoji_map;
  WordVectorTable word_vectors;
  double sif_a = kDefaultSifSmoothing;
  bool remove_principal = true;
  double threshold = kDefaultEmojiThreshold;
};

// Retrieve -> classify the retrieved text -> pick an emoji -> append.
// Immutable after construction.
class Pipeline {
 public:
  // Fits the SIF common direction once over the candidate pool.
  explicit Pipeline(PipelineArtifacts artifacts);

  // Throws ServiceUnavailable when a required artifact path is unset or unreadable.
  static std::shared_ptr<const Pipeline> load(const AppConfig& config);

  ChatResponse respond(std::span<const ChatTurn> history) const;

  const std::string& bundle_version() const { return a_.bundle_version; }
  double threshold() const { return a_.threshold; }
  const std::optional<Vector>& principal() const { return principal_; }
  const PipelineArtifacts& artifacts() const { return a_; }
  SifSettings sif() const;

 private:
  PipelineArtifacts a_;
  std::optional<Vector> principal_;
};

struct Session {
  std::string id;
  std::mutex mutex;  // serializes requests within the session
  std::vector<ChatTurn> history;
  std::int64_t created_ms = 0;
  std::int64_t last_active_ms = 0;
};

// In-memory sessions backed, when a directory is given, by one append-only
// JSON-lines log per session so a restarted service resumes context.
class SessionStore {
 public:
  explicit SessionStore(std::optional<std::filesystem::path> log_dir = std::nullopt);

  static bool valid_id(std::string_view id);
  std::string new_id();

  // Existing session (from memory or the log), or a fresh one when create is set.
  std::shared_ptr<Session> acquire(std::string_view id, bool create);

  // Caller must hold session.mutex.
  void append(Session& session, ChatTurn turn);

 private:
  std::optional<std::filesystem::path> log_dir_;
  std::mutex mutex_;
  std::unordered_map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t counter_ = 0;
};

class ChatService {
 public:
  ChatService(std::shared_ptr<const Pipeline> pipeline, std::shared_ptr<SessionStore> store);

  struct Reply {
    std::string session_id;
    ChatResponse response;
  };

  // Throws ValidationError for an empty message or malformed session id,
  // ServiceUnavailable when no pipeline is loaded.
  Reply handle_chat(const std::optional<std::string>& session_id, std::string_view message);

  std::optional<std::vector<ChatTurn>> history(std::string_view session_id);

  bool ready() const { return pipeline_ != nullptr; }
  std::string bundle_version() const;

 private:
  std::shared_ptr<const Pipeline> pipeline_;
  std::shared_ptr<SessionStore> store_;
};

}  // namespace emojichat
