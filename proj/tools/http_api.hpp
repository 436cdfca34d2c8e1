#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "emojichat/service.hpp"

namespace httplib {
class Server;
}

namespace emojichat::http {

struct ApiResponse {
  int status = 200;
  nlohmann::json body;
};

// Transport-free request handlers; the server adapter only moves bytes.
//
//   POST /api/chat          {"session_id"?: str, "message": str}
//                           -> {"session_id", "reply", "display", "emoji", "emotion",
//                               "similarity", "probability"}
//   GET  /api/health        -> {"status": "ok" | "unavailable", "bundle_version"}
//   GET  /api/session/{id}  -> {"session_id", "history": [turn...]}
class Api {
 public:
  explicit Api(std::shared_ptr<ChatService> service);

  ApiResponse chat(std::string_view request_body);
  ApiResponse health() const;
  ApiResponse session(std::string_view id);

 private:
  std::shared_ptr<ChatService> service_;
};

// Registers the routes, plus a static mount at "/" when static_dir exists.
void mount(httplib::Server& server, Api& api, const std::optional<std::filesystem::path>& static_dir);

// EMOJICHAT_PORT parsing: unset or empty gives the fallback, junk throws ValidationError.
std::uint16_t port_from_env(const char* value, std::uint16_t fallback = 8080);

}  // namespace emojichat::http
