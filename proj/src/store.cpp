#include "cj/store.hpp"

#include <sqlite3.h>

#include "cj/error.hpp"

namespace cj {

using nlohmann::json;

namespace {

// RAII prepared statement.
class Statement {
 public:
  Statement(sqlite3* db, const char* sql) : db_(db) {
    if (sqlite3_prepare_v2(db, sql, -1, &stmt_, nullptr) != SQLITE_OK) {
      throw Error(ErrorCode::kIo, std::string("sqlite prepare: ") + sqlite3_errmsg(db));
    }
  }
  ~Statement() { sqlite3_finalize(stmt_); }
  Statement(const Statement&) = delete;
  Statement& operator=(const Statement&) = delete;

  Statement& Bind(int index, const std::string& text) {
    sqlite3_bind_text(stmt_, index, text.c_str(), static_cast<int>(text.size()), SQLITE_TRANSIENT);
    return *this;
  }
  Statement& Bind(int index, std::int64_t value) {
    sqlite3_bind_int64(stmt_, index, value);
    return *this;
  }

  // True while rows remain.
  bool Step() {
    const int rc = sqlite3_step(stmt_);
    if (rc == SQLITE_ROW) return true;
    if (rc == SQLITE_DONE) return false;
    throw Error(ErrorCode::kIo, std::string("sqlite step: ") + sqlite3_errmsg(db_));
  }

  std::string Text(int col) const {
    const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, col));
    return p ? std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(stmt_, col))) : std::string();
  }
  std::int64_t Int(int col) const { return sqlite3_column_int64(stmt_, col); }

 private:
  sqlite3* db_;
  sqlite3_stmt* stmt_ = nullptr;
};

}  // namespace

SessionStore::SessionStore(const std::filesystem::path& path) : path_(path) {
  if (sqlite3_open_v2(path.c_str(), &db_, SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE, nullptr) !=
      SQLITE_OK) {
    const std::string msg = db_ ? sqlite3_errmsg(db_) : "out of memory";
    sqlite3_close(db_);
    db_ = nullptr;
    throw Error(ErrorCode::kIo, "cannot open store " + path.string() + ": " + msg);
  }
  try {
    Exec("PRAGMA journal_mode=WAL");
    Exec("PRAGMA synchronous=FULL");
    Exec("CREATE TABLE IF NOT EXISTS sessions (id TEXT PRIMARY KEY, header TEXT NOT NULL)");
    Exec("CREATE TABLE IF NOT EXISTS judgements (session_id TEXT NOT NULL, seq INTEGER NOT NULL,"
         " record TEXT NOT NULL, PRIMARY KEY (session_id, seq))");
    Exec("CREATE TABLE IF NOT EXISTS pending (session_id TEXT PRIMARY KEY, left_idx INTEGER,"
         " right_idx INTEGER, step INTEGER)");
    Exec("CREATE TABLE IF NOT EXISTS snapshots (session_id TEXT NOT NULL, seq INTEGER NOT NULL,"
         " matrix TEXT NOT NULL, PRIMARY KEY (session_id, seq))");
  } catch (...) {
    sqlite3_close(db_);
    db_ = nullptr;
    throw;
  }
}

SessionStore::~SessionStore() {
  if (db_) sqlite3_close(db_);
}

void SessionStore::Exec(const char* sql) {
  char* err = nullptr;
  if (sqlite3_exec(db_, sql, nullptr, nullptr, &err) != SQLITE_OK) {
    const std::string msg = err ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorCode::kIo, "store " + path_.string() + ": " + msg);
  }
}

void SessionStore::CreateSession(const Session& session) {
  std::lock_guard lock(mu_);
  Statement(db_, "INSERT INTO sessions (id, header) VALUES (?, ?)")
      .Bind(1, session.id())
      .Bind(2, ToJson(session.header()).dump())
      .Step();
}

void SessionStore::AppendLatestJudgement(const Session& session) {
  if (session.log().empty()) return;
  std::lock_guard lock(mu_);
  const auto seq = static_cast<std::int64_t>(session.log().size());
  Exec("BEGIN IMMEDIATE");
  try {
    Statement(db_, "INSERT INTO judgements (session_id, seq, record) VALUES (?, ?, ?)")
        .Bind(1, session.id())
        .Bind(2, seq)
        .Bind(3, ToJson(session.log().back()).dump())
        .Step();
    Statement(db_, "DELETE FROM pending WHERE session_id = ?").Bind(1, session.id()).Step();
    if (session.log().size() % kSnapshotInterval == 0) {
      Statement(db_, "INSERT OR REPLACE INTO snapshots (session_id, seq, matrix) VALUES (?, ?, ?)")
          .Bind(1, session.id())
          .Bind(2, seq)
          .Bind(3, ToJson(session.matrix()).dump())
          .Step();
    }
    Exec("COMMIT");
  } catch (...) {
    sqlite3_exec(db_, "ROLLBACK", nullptr, nullptr, nullptr);
    throw;
  }
}

void SessionStore::SetPending(const Session& session) {
  std::lock_guard lock(mu_);
  if (!session.pending()) {
    Statement(db_, "DELETE FROM pending WHERE session_id = ?").Bind(1, session.id()).Step();
    return;
  }
  const PendingPair& p = *session.pending();
  Statement(db_,
            "INSERT OR REPLACE INTO pending (session_id, left_idx, right_idx, step) VALUES (?, ?, ?, ?)")
      .Bind(1, session.id())
      .Bind(2, static_cast<std::int64_t>(p.left))
      .Bind(3, static_cast<std::int64_t>(p.right))
      .Bind(4, static_cast<std::int64_t>(p.step))
      .Step();
}

void SessionStore::WriteSnapshot(const Session& session) {
  std::lock_guard lock(mu_);
  Statement(db_, "INSERT OR REPLACE INTO snapshots (session_id, seq, matrix) VALUES (?, ?, ?)")
      .Bind(1, session.id())
      .Bind(2, static_cast<std::int64_t>(session.log().size()))
      .Bind(3, ToJson(session.matrix()).dump())
      .Step();
}

Session SessionStore::LoadOne(const std::string& id, const std::string& header_json) {
  SessionHeader header = HeaderFromJson(json::parse(header_json));
  std::vector<ComparisonRecord> log;
  {
    Statement st(db_, "SELECT seq, record FROM judgements WHERE session_id = ? ORDER BY seq");
    st.Bind(1, id);
    while (st.Step()) {
      if (st.Int(0) != static_cast<std::int64_t>(log.size()) + 1) {
        throw Error(ErrorCode::kInvalidState, "judgement log of session " + id + " has a gap");
      }
      log.push_back(RecordFromJson(json::parse(st.Text(1))));
    }
  }
  Session session = Session::Replay(std::move(header), log);
  {
    Statement st(db_,
                 "SELECT seq, matrix FROM snapshots WHERE session_id = ? ORDER BY seq DESC LIMIT 1");
    st.Bind(1, id);
    if (st.Step()) {
      const auto seq = static_cast<std::size_t>(st.Int(0));
      if (seq > log.size()) {
        throw Error(ErrorCode::kInvalidState, "snapshot of session " + id + " is ahead of its log");
      }
      const PreferenceMatrix snap = PreferenceMatrixFromJson(json::parse(st.Text(1)));
      const Session prefix = Session::Replay(
          session.header(), std::vector<ComparisonRecord>(log.begin(), log.begin() + static_cast<std::ptrdiff_t>(seq)));
      if (!(prefix.matrix() == snap)) {
        throw Error(ErrorCode::kInvalidState, "snapshot of session " + id + " disagrees with its log");
      }
    }
  }
  {
    Statement st(db_, "SELECT left_idx, right_idx, step FROM pending WHERE session_id = ?");
    st.Bind(1, id);
    if (st.Step() && static_cast<std::size_t>(st.Int(2)) == log.size()) {
      session.RestorePending({static_cast<ItemId>(st.Int(0)), static_cast<ItemId>(st.Int(1)),
                              static_cast<std::uint64_t>(st.Int(2))});
    }
  }
  return session;
}

std::vector<Session> SessionStore::LoadAll() {
  std::lock_guard lock(mu_);
  std::vector<std::pair<std::string, std::string>> rows;
  {
    Statement st(db_, "SELECT id, header FROM sessions ORDER BY id");
    while (st.Step()) rows.emplace_back(st.Text(0), st.Text(1));
  }
  std::vector<Session> out;
  for (const auto& [id, header] : rows) out.push_back(LoadOne(id, header));
  return out;
}

}  // namespace cj
