#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "cj/btm.hpp"
#include "cj/grading.hpp"
#include "cj/preference.hpp"
#include "cj/rank_distribution.hpp"
#include "cj/selectors.hpp"

namespace cj {

struct Item {
  std::string id;
  std::string label;
  std::string content;  // opaque URI, never interpreted
};

struct ComparisonRecord {
  std::string left;
  std::string right;
  std::string winner;
  std::string assessor;
  std::int64_t timestamp_ms = 0;
  SelectorKind selector = SelectorKind::kEntropy;

  bool operator==(const ComparisonRecord&) const = default;
};

struct PendingPair {
  ItemId left;
  ItemId right;
  std::uint64_t step;  // number of judgements when it was served

  bool operator==(const PendingPair&) const = default;
};

enum class SessionStatus { kActive, kBudgetReached };

// Immutable configuration of a session.
struct SessionHeader {
  std::string id;
  std::vector<Item> items;
  SelectorKind selector = SelectorKind::kEntropy;
  std::size_t k = 10;
  std::uint64_t seed = 0;
  std::int64_t created_ms = 0;
};

nlohmann::json ToJson(const ComparisonRecord& record);
ComparisonRecord RecordFromJson(const nlohmann::json& json);
nlohmann::json ToJson(const SessionHeader& header);
SessionHeader HeaderFromJson(const nlohmann::json& json);

struct ServedPair {
  PendingPair pair;
  double entropy;
  double p_left;  // P(left > right) under the current posterior
  bool budget_exceeded;
};

// A live judging session. Posterior state is a fold over the judgement log:
// Replay(header, log) reproduces it exactly.
class Session {
 public:
  // Validates items (>= 2, unique non-empty ids) and K >= 1.
  static Session Create(SessionHeader header);
  static Session Replay(SessionHeader header, const std::vector<ComparisonRecord>& log);

  const SessionHeader& header() const { return header_; }
  const std::string& id() const { return header_.id; }
  std::size_t n_items() const { return header_.items.size(); }
  std::size_t budget() const { return header_.items.size() * header_.k; }
  SessionStatus status() const;
  bool budget_exceeded() const { return log_.size() >= budget(); }

  const std::vector<ComparisonRecord>& log() const { return log_; }
  const PreferenceMatrix& matrix() const { return matrix_; }
  const WinCounts& omega() const { return omega_; }
  const std::optional<PendingPair>& pending() const { return pending_; }
  // Maximum cell entropy before any judgement and after each one.
  const std::vector<double>& max_entropy_series() const { return max_entropy_; }

  ItemId IndexOf(const std::string& item_id) const;

  // Serves the pending pair, choosing one first if none is pending.
  ServedPair NextPair();
  void RestorePending(const PendingPair& pending);

  // Applies a judgement on the pending pair. Throws kConflict when no pair is
  // pending or the pair differs, kValidation when the winner is not in it.
  const ComparisonRecord& Submit(const std::string& left, const std::string& right,
                                 const std::string& winner, const std::string& assessor,
                                 std::int64_t timestamp_ms);

 private:
  explicit Session(SessionHeader header);
  void Apply(const ComparisonRecord& record);

  SessionHeader header_;
  std::vector<ComparisonRecord> log_;
  PreferenceMatrix matrix_;
  WinCounts omega_;
  std::vector<double> entropy_;
  std::vector<double> max_entropy_;
  std::optional<PendingPair> pending_;
};

// Rank/entropy report computed from the session's current state only, so it
// is identical wherever the same log is replayed.
nlohmann::json BuildReport(const Session& session);
nlohmann::json BuildGradeReport(const Session& session, const GradingScheme& scheme);
nlohmann::json SessionSummary(const Session& session);

// Whole-session export: header, log, pending pair and the posterior snapshot.
nlohmann::json ExportSession(const Session& session);
// Replays the log and checks it against the stored snapshot.
Session ImportSession(const nlohmann::json& json);

}  // namespace cj
