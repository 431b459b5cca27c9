#include "cj/session.hpp"

#include <algorithm>
#include <set>

#include "cj/error.hpp"
#include "cj/kernels.hpp"
#include "cj/version.hpp"

namespace cj {

using nlohmann::json;

namespace {

constexpr std::uint64_t kOrderStream = 0x6f7264ULL;
constexpr std::uint64_t kReportStream = 0x726570ULL;

}  // namespace

json ToJson(const ComparisonRecord& record) {
  return {{"left", record.left},         {"right", record.right},
          {"winner", record.winner},     {"assessor", record.assessor},
          {"timestamp_ms", record.timestamp_ms},
          {"selector", SelectorKindName(record.selector)}};
}

ComparisonRecord RecordFromJson(const json& j) {
  ComparisonRecord r;
  r.left = j.at("left").get<std::string>();
  r.right = j.at("right").get<std::string>();
  r.winner = j.at("winner").get<std::string>();
  r.assessor = j.value("assessor", std::string());
  r.timestamp_ms = j.value("timestamp_ms", std::int64_t{0});
  r.selector = ParseSelectorKind(j.at("selector").get<std::string>());
  return r;
}

json ToJson(const SessionHeader& header) {
  json items = json::array();
  for (const Item& item : header.items) {
    items.push_back({{"id", item.id}, {"label", item.label}, {"content", item.content}});
  }
  return {{"id", header.id},
          {"items", items},
          {"selector", SelectorKindName(header.selector)},
          {"k", header.k},
          {"seed", header.seed},
          {"created_ms", header.created_ms}};
}

SessionHeader HeaderFromJson(const json& j) {
  SessionHeader h;
  h.id = j.at("id").get<std::string>();
  for (const auto& item : j.at("items")) {
    h.items.push_back({item.at("id").get<std::string>(), item.value("label", std::string()),
                       item.value("content", std::string())});
  }
  h.selector = ParseSelectorKind(j.at("selector").get<std::string>());
  h.k = j.at("k").get<std::size_t>();
  h.seed = j.at("seed").get<std::uint64_t>();
  h.created_ms = j.value("created_ms", std::int64_t{0});
  return h;
}

Session::Session(SessionHeader header)
    : header_(std::move(header)),
      matrix_(std::max<std::size_t>(header_.items.size(), 1)),
      omega_(header_.items.size()) {
  entropy_ = kernels::EntropyGridSerial(matrix_);
  max_entropy_.push_back(entropy_.empty() ? 0.0
                                          : *std::max_element(entropy_.begin(), entropy_.end()));
}

Session Session::Create(SessionHeader header) {
  if (header.items.size() < 2) {
    throw Error(ErrorCode::kValidation, "a session needs at least 2 items");
  }
  std::set<std::string> ids;
  for (const Item& item : header.items) {
    if (item.id.empty()) throw Error(ErrorCode::kValidation, "item ids must be non-empty");
    if (!ids.insert(item.id).second) {
      throw Error(ErrorCode::kValidation, "duplicate item id '" + item.id + "'");
    }
  }
  if (header.k < 1) throw Error(ErrorCode::kValidation, "k must be >= 1");
  return Session(std::move(header));
}

Session Session::Replay(SessionHeader header, const std::vector<ComparisonRecord>& log) {
  Session s = Create(std::move(header));
  for (const ComparisonRecord& r : log) s.Apply(r);
  return s;
}

SessionStatus Session::status() const {
  return budget_exceeded() ? SessionStatus::kBudgetReached : SessionStatus::kActive;
}

ItemId Session::IndexOf(const std::string& item_id) const {
  for (std::size_t i = 0; i < header_.items.size(); ++i) {
    if (header_.items[i].id == item_id) return i;
  }
  throw Error(ErrorCode::kValidation, "unknown item '" + item_id + "'");
}

void Session::Apply(const ComparisonRecord& record) {
  const ItemId left = IndexOf(record.left);
  const ItemId right = IndexOf(record.right);
  if (left == right) throw Error(ErrorCode::kValidation, "judged pair repeats an item");
  const ItemId winner = IndexOf(record.winner);
  if (winner != left && winner != right) {
    throw Error(ErrorCode::kValidation, "winner '" + record.winner + "' is not in the pair");
  }
  const ItemId loser = winner == left ? right : left;
  matrix_.Record(winner, loser);
  omega_.Record(winner, loser);
  const std::size_t k = matrix_.pair_index(left, right);
  entropy_[k] = PreferenceEntropy(matrix_.cell_at(k));
  max_entropy_.push_back(*std::max_element(entropy_.begin(), entropy_.end()));
  log_.push_back(record);
}

ServedPair Session::NextPair() {
  if (!pending_) {
    const std::uint64_t step = log_.size();
    Selector selector = Selector::AtStep(header_.selector, n_items(), header_.seed, step);
    const Pair pair = selector.Next(matrix_);
    Rng order(kernels::MixSeed(header_.seed ^ kOrderStream, step));
    const bool swap = (order() & 1U) != 0;
    pending_ = PendingPair{swap ? pair.second : pair.first, swap ? pair.first : pair.second, step};
  }
  const PendingPair& p = *pending_;
  return {p, PreferenceEntropy(matrix_.cell(p.left, p.right)),
          matrix_.probability(p.left, p.right), budget_exceeded()};
}

void Session::RestorePending(const PendingPair& pending) {
  if (pending.left >= n_items() || pending.right >= n_items() || pending.left == pending.right) {
    throw Error(ErrorCode::kInvalidState, "stored pending pair is invalid");
  }
  pending_ = pending;
}

const ComparisonRecord& Session::Submit(const std::string& left, const std::string& right,
                                        const std::string& winner, const std::string& assessor,
                                        std::int64_t timestamp_ms) {
  if (!pending_) {
    throw Error(ErrorCode::kConflict, "no pair is pending; fetch next-pair first");
  }
  const ItemId l = IndexOf(left);
  const ItemId r = IndexOf(right);
  const PendingPair p = *pending_;
  const bool matches = (l == p.left && r == p.right) || (l == p.right && r == p.left);
  if (!matches) {
    throw Error(ErrorCode::kConflict, "judgement is for a pair that is not pending");
  }
  if (winner != left && winner != right) {
    throw Error(ErrorCode::kValidation, "winner '" + winner + "' is not in the pair");
  }
  ComparisonRecord record{header_.items[p.left].id, header_.items[p.right].id, winner,
                          assessor, timestamp_ms, header_.selector};
  Apply(record);
  pending_.reset();
  return log_.back();
}

json BuildReport(const Session& session) {
  const std::size_t n = session.n_items();
  const WinProbabilities probs = kernels::WinProbabilitiesParallel(session.matrix());
  RankOptions options;
  options.seed = kernels::MixSeed(session.header().seed ^ kReportStream, session.log().size());
  const auto dists = RankDistributions(probs, options);
  const std::vector<int> ranks = RanksAscending(ExpectedRanks(dists));

  json items = json::array();
  for (std::size_t i = 0; i < n; ++i) {
    json item = ToJson(dists[i]);
    item.erase("item");
    item["id"] = session.header().items[i].id;
    item["label"] = session.header().items[i].label;
    item["rank"] = ranks[i];
    items.push_back(std::move(item));
  }

  const std::vector<double> grid = kernels::EntropyGridParallel(session.matrix());
  json entropy = json::array();
  json p_prefer = json::array();
  double total_entropy = 0.0;
  for (double h : grid) total_entropy += h;
  for (std::size_t i = 0; i < n; ++i) {
    json erow = json::array();
    json prow = json::array();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) {
        erow.push_back(nullptr);
        prow.push_back(nullptr);
      } else {
        erow.push_back(grid[session.matrix().pair_index(i, j)]);
        prow.push_back(probs(i, j));
      }
    }
    entropy.push_back(std::move(erow));
    p_prefer.push_back(std::move(prow));
  }

  const BtmState btm = BtmFit(session.omega());
  std::vector<double> scores;
  for (double g : btm.gamma) scores.push_back(100.0 * g);

  return {{"session_id", session.id()},
          {"n", n},
          {"budget", session.budget()},
          {"judgements", session.log().size()},
          {"status", session.status() == SessionStatus::kActive ? "active" : "budget-reached"},
          {"method", n <= options.exact_threshold ? "exact" : "monte-carlo"},
          {"items", items},
          {"ranks", ranks},
          {"entropy", entropy},
          {"p_prefer", p_prefer},
          {"total_entropy", total_entropy},
          {"max_entropy_series", session.max_entropy_series()},
          {"btm", {{"scores", scores},
                   {"ranks", BtmRanks(btm)},
                   {"smoothed", btm.smoothed},
                   {"converged", btm.converged},
                   {"iterations", btm.iterations}}}};
}

json BuildGradeReport(const Session& session, const GradingScheme& scheme) {
  ValidateScheme(scheme, session.n_items());
  const auto dists = RankDistributions(
      session.matrix(),
      RankOptions{kDefaultExactThreshold, kDefaultMonteCarloSamples,
                  kernels::MixSeed(session.header().seed ^ kReportStream, session.log().size())});
  json windows = json::array();
  for (const RankWindow& w : GradeWindows(scheme)) windows.push_back({w.first, w.last});
  json items = json::array();
  for (std::size_t i = 0; i < dists.size(); ++i) {
    const std::vector<double> gp = GradeProbabilities(dists[i], scheme);
    std::vector<double> cumulative;
    double c = 0.0;
    for (double p : gp) cumulative.push_back(c += p);
    items.push_back({{"id", session.header().items[i].id},
                     {"grade_probabilities", gp},
                     {"cumulative", cumulative},
                     {"grade", scheme.labels[AssignGrade(gp, scheme)]}});
  }
  return {{"session_id", session.id()}, {"labels", scheme.labels}, {"counts", scheme.counts},
          {"threshold", scheme.threshold}, {"windows", windows}, {"items", items}};
}

json SessionSummary(const Session& session) {
  json s = ToJson(session.header());
  s["budget"] = session.budget();
  s["judgements"] = session.log().size();
  s["status"] = session.status() == SessionStatus::kActive ? "active" : "budget-reached";
  s["budget_exceeded"] = session.budget_exceeded();
  return s;
}

json ExportSession(const Session& session) {
  json log = json::array();
  for (const auto& r : session.log()) log.push_back(ToJson(r));
  json out = {{"format", "cj-session"},
              {"version", kVersion},
              {"session", ToJson(session.header())},
              {"judgements", log},
              {"snapshot", ToJson(session.matrix())},
              {"pending", nullptr}};
  if (const auto& p = session.pending()) {
    out["pending"] = {{"left", p->left}, {"right", p->right}, {"step", p->step}};
  }
  return out;
}

Session ImportSession(const json& j) {
  try {
    std::vector<ComparisonRecord> log;
    for (const auto& r : j.at("judgements")) log.push_back(RecordFromJson(r));
    Session s = Session::Replay(HeaderFromJson(j.at("session")), log);
    if (j.contains("snapshot") && !j["snapshot"].is_null()) {
      if (!(PreferenceMatrixFromJson(j["snapshot"]) == s.matrix())) {
        throw Error(ErrorCode::kInvalidState, "snapshot does not match the replayed log");
      }
    }
    if (j.contains("pending") && !j["pending"].is_null()) {
      const auto& p = j["pending"];
      s.RestorePending({p.at("left").get<ItemId>(), p.at("right").get<ItemId>(),
                        p.at("step").get<std::uint64_t>()});
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kParse, std::string("bad session export: ") + e.what());
  }
}

}  // namespace cj
