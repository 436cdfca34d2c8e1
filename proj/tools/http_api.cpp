#include "http_api.hpp"

#include <charconv>

#include <httplib.h>

#include "emojichat/error.hpp"

namespace emojichat::http {

namespace {

ApiResponse error_response(int status, const std::string& message) {
  return {status, {{"error", message}}};
}

void write(httplib::Response& res, const ApiResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

}  // namespace

Api::Api(std::shared_ptr<ChatService> service) : service_(std::move(service)) {
  if (!service_) throw ValidationError("api needs a chat service");
}

ApiResponse Api::chat(std::string_view request_body) {
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(request_body);
  } catch (const nlohmann::json::parse_error&) {
    return error_response(400, "request body is not valid JSON");
  }
  if (!req.is_object()) return error_response(400, "request body must be an object");
  if (!req.contains("message") || !req["message"].is_string()) {
    return error_response(400, "'message' must be a string");
  }
  std::optional<std::string> session_id;
  if (req.contains("session_id") && !req["session_id"].is_null()) {
    if (!req["session_id"].is_string()) return error_response(400, "'session_id' must be a string");
    session_id = req["session_id"].get<std::string>();
  }

  try {
    const auto reply = service_->handle_chat(session_id, req["message"].get<std::string>());
    const ChatResponse& r = reply.response;
    nlohmann::json body{{"session_id", reply.session_id},
                        {"reply", r.reply_text},
                        {"display", r.display_text},
                        {"emotion", r.emotion},
                        {"similarity", r.similarity},
                        {"probability", r.retrieval_probability}};
    body["emoji"] = r.emoji ? nlohmann::json(*r.emoji) : nlohmann::json(nullptr);
    return {200, std::move(body)};
  } catch (const ValidationError& e) {
    return error_response(400, e.what());
  } catch (const ServiceUnavailable& e) {
    return error_response(503, e.what());
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
}

ApiResponse Api::health() const {
  if (!service_->ready()) return {503, {{"status", "unavailable"}, {"bundle_version", nullptr}}};
  return {200, {{"status", "ok"}, {"bundle_version", service_->bundle_version()}}};
}

ApiResponse Api::session(std::string_view id) {
  if (!SessionStore::valid_id(id)) return error_response(400, "malformed session id");
  std::optional<std::vector<ChatTurn>> history;
  try {
    history = service_->history(id);
  } catch (const std::exception& e) {
    return error_response(500, e.what());
  }
  if (!history) return error_response(404, "no such session");
  nlohmann::json turns = nlohmann::json::array();
  for (const auto& t : *history) turns.push_back(t.to_json());
  return {200, {{"session_id", std::string(id)}, {"history", std::move(turns)}}};
}

void mount(httplib::Server& server, Api& api, const std::optional<std::filesystem::path>& static_dir) {
  server.Post("/api/chat", [&api](const httplib::Request& req, httplib::Response& res) {
    write(res, api.chat(req.body));
  });
  server.Get("/api/health", [&api](const httplib::Request&, httplib::Response& res) { write(res, api.health()); });
  server.Get(R"(/api/session/([^/]+))", [&api](const httplib::Request& req, httplib::Response& res) {
    write(res, api.session(req.matches[1].str()));
  });
  if (static_dir && std::filesystem::is_directory(*static_dir)) {
    server.set_mount_point("/", static_dir->string());
  }
}

std::uint16_t port_from_env(const char* value, std::uint16_t fallback) {
  if (value == nullptr || *value == '\0') return fallback;
  const std::string_view s(value);
  unsigned port = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), port);
  if (ec != std::errc() || ptr != s.data() + s.size() || port == 0 || port > 65535) {
    throw ValidationError("EMOJICHAT_PORT must be a port number, got \"" + std::string(s) + "\"");
  }
  return static_cast<std::uint16_t>(port);
}

}  // namespace emojichat::http
