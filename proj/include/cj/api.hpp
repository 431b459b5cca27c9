#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "json.hpp"
#include "cj/error.hpp"
#include "cj/session.hpp"
#include "cj/store.hpp"

namespace cj {

// Thread-safe registry of live sessions backed by a SessionStore. Reads work
// on immutable snapshots; writes to one session are serialized and durable
// before they return.
class SessionService {
 public:
  explicit SessionService(const std::filesystem::path& store_path);

  // Request/response bodies are the JSON documents of the /v1 HTTP API.
  nlohmann::json CreateSession(const nlohmann::json& body);
  nlohmann::json GetSession(const std::string& id) const;
  nlohmann::json NextPair(const std::string& id);
  nlohmann::json SubmitJudgement(const std::string& id, const nlohmann::json& body);
  nlohmann::json Report(const std::string& id) const;
  nlohmann::json Grades(const std::string& id, const nlohmann::json& body) const;
  nlohmann::json Export(const std::string& id) const;

  std::size_t session_count() const;
  // Writes a posterior snapshot for every session.
  void Flush();

 private:
  struct Slot {
    std::mutex write_mu;
    mutable std::mutex ptr_mu;
    std::shared_ptr<const Session> current;

    std::shared_ptr<const Session> Get() const {
      std::lock_guard lock(ptr_mu);
      return current;
    }
    void Set(std::shared_ptr<const Session> s) {
      std::lock_guard lock(ptr_mu);
      current = std::move(s);
    }
  };

  std::shared_ptr<Slot> Find(const std::string& id) const;

  mutable SessionStore store_;
  mutable std::mutex registry_mu_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
};

// Application error with an optional JSON detail; serialized as
// {"code", "message", "detail"}.
class ApiError : public Error {
 public:
  ApiError(ErrorCode code, const std::string& message, nlohmann::json detail)
      : Error(code, message), detail_(std::move(detail)) {}
  const nlohmann::json& detail() const { return detail_; }

 private:
  nlohmann::json detail_;
};

int HttpStatusFor(ErrorCode code);
nlohmann::json ErrorBody(ErrorCode code, const std::string& message,
                         const nlohmann::json& detail = nullptr);

// HTTP/JSON front end; every route lives under /v1.
class HttpServer {
 public:
  // A non-empty token is required in the "Authorization: Bearer <token>" header.
  explicit HttpServer(SessionService& service, std::string token = {});
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns false when the address cannot be bound.
  bool Bind(const std::string& host, int port);
  // Binds an ephemeral port and returns it, or -1.
  int BindAnyPort(const std::string& host);
  // Blocks until Stop().
  bool Listen();
  void Stop();
  void WaitUntilReady();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace cj
