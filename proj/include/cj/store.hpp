#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "cj/session.hpp"

struct sqlite3;

namespace cj {

// Single-file SQLite store: session headers, an append-only judgement log,
// pending pairs, and periodic posterior snapshots. Writes are synchronous
// (durable on return).
class SessionStore {
 public:
  static constexpr std::size_t kSnapshotInterval = 25;

  explicit SessionStore(const std::filesystem::path& path);
  ~SessionStore();
  SessionStore(const SessionStore&) = delete;
  SessionStore& operator=(const SessionStore&) = delete;

  void CreateSession(const Session& session);
  // Appends the session's latest judgement (and a snapshot every
  // kSnapshotInterval judgements) and clears its pending pair, atomically.
  void AppendLatestJudgement(const Session& session);
  void SetPending(const Session& session);
  void WriteSnapshot(const Session& session);

  // Replays every stored session; each replay is checked against its most
  // recent snapshot.
  std::vector<Session> LoadAll();

 private:
  void Exec(const char* sql);
  Session LoadOne(const std::string& id, const std::string& header_json);

  std::mutex mu_;
  sqlite3* db_ = nullptr;
  std::filesystem::path path_;
};

}  // namespace cj
