#include "cj/api.hpp"

#include <chrono>
#include <random>
#include <regex>

#include "httplib.h"
#include "cj/version.hpp"

namespace cj {

using nlohmann::json;

namespace {

std::int64_t NowMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string RandomId() {
  std::random_device rd;
  const std::uint64_t v = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json ItemJson(const Item& item) {
  return {{"id", item.id}, {"label", item.label}, {"content", item.content}};
}

json PendingJson(const Session& s, const PendingPair& p) {
  return {{"left", s.header().items[p.left].id}, {"right", s.header().items[p.right].id},
          {"step", p.step}};
}

template <typename T>
T Field(const json& body, const char* name) {
  if (!body.contains(name)) throw Error(ErrorCode::kValidation, std::string(name) + ": required");
  try {
    return body[name].get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::kValidation, std::string(name) + ": wrong type");
  }
}

}  // namespace

int HttpStatusFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kIo:
    case ErrorCode::kInvalidState: return 500;
    default: return 400;
  }
}

json ErrorBody(ErrorCode code, const std::string& message, const json& detail) {
  return {{"code", ErrorCodeName(code)}, {"message", message}, {"detail", detail}};
}

SessionService::SessionService(const std::filesystem::path& store_path) : store_(store_path) {
  for (Session& s : store_.LoadAll()) {
    auto slot = std::make_shared<Slot>();
    const std::string id = s.id();
    slot->current = std::make_shared<const Session>(std::move(s));
    sessions_.emplace(id, std::move(slot));
  }
}

std::shared_ptr<SessionService::Slot> SessionService::Find(const std::string& id) const {
  std::lock_guard lock(registry_mu_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::kNotFound, "no session '" + id + "'");
  return it->second;
}

std::size_t SessionService::session_count() const {
  std::lock_guard lock(registry_mu_);
  return sessions_.size();
}

json SessionService::CreateSession(const json& body) {
  if (!body.is_object()) throw Error(ErrorCode::kValidation, "body must be a JSON object");
  SessionHeader header;
  header.id = body.contains("id") ? Field<std::string>(body, "id") : RandomId();
  static const std::regex kIdPattern("[A-Za-z0-9_-]{1,64}");
  if (!std::regex_match(header.id, kIdPattern)) {
    throw Error(ErrorCode::kValidation, "id: must match [A-Za-z0-9_-]{1,64}");
  }
  if (!body.contains("items") || !body["items"].is_array()) {
    throw Error(ErrorCode::kValidation, "items: required array");
  }
  for (const auto& item : body["items"]) {
    if (item.is_string()) {
      header.items.push_back({item.get<std::string>(), item.get<std::string>(), ""});
    } else if (item.is_object() && item.contains("id") && item["id"].is_string()) {
      header.items.push_back({item["id"].get<std::string>(), item.value("label", std::string()),
                              item.value("content", std::string())});
    } else {
      throw Error(ErrorCode::kValidation, "items: each entry needs a string id");
    }
  }
  if (body.contains("selector")) {
    try {
      header.selector = ParseSelectorKind(Field<std::string>(body, "selector"));
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidation, std::string("selector: ") + e.what());
    }
  }
  if (body.contains("k")) {
    const auto k = Field<long long>(body, "k");
    if (k < 1) throw Error(ErrorCode::kValidation, "k: must be >= 1");
    header.k = static_cast<std::size_t>(k);
  }
  if (body.contains("seed")) {
    header.seed = Field<std::uint64_t>(body, "seed");
  } else {
    std::random_device rd;
    header.seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  header.created_ms = NowMs();

  Session session = [&] {
    try {
      return Session::Create(std::move(header));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfig) throw Error(ErrorCode::kValidation, e.what());
      throw;
    }
  }();

  std::lock_guard lock(registry_mu_);
  if (sessions_.count(session.id())) {
    throw Error(ErrorCode::kValidation, "session '" + session.id() + "' already exists");
  }
  store_.CreateSession(session);
  auto slot = std::make_shared<Slot>();
  slot->current = std::make_shared<const Session>(session);
  sessions_.emplace(session.id(), slot);
  return SessionSummary(session);
}

json SessionService::GetSession(const std::string& id) const {
  return SessionSummary(*Find(id)->Get());
}

json SessionService::NextPair(const std::string& id) {
  const auto slot = Find(id);
  std::lock_guard write(slot->write_mu);
  auto session = std::make_shared<Session>(*slot->Get());
  const bool had_pending = session->pending().has_value();
  const ServedPair served = session->NextPair();
  if (!had_pending) store_.SetPending(*session);
  slot->Set(session);
  const auto& items = session->header().items;
  return {{"left", ItemJson(items[served.pair.left])},
          {"right", ItemJson(items[served.pair.right])},
          {"step", served.pair.step},
          {"entropy", served.entropy},
          {"p_left", served.p_left},
          {"selector", SelectorKindName(session->header().selector)},
          {"judgements", session->log().size()},
          {"budget", session->budget()},
          {"budget_exceeded", served.budget_exceeded}};
}

json SessionService::SubmitJudgement(const std::string& id, const json& body) {
  if (!body.is_object()) throw Error(ErrorCode::kValidation, "body must be a JSON object");
  const auto left = Field<std::string>(body, "left");
  const auto right = Field<std::string>(body, "right");
  const auto winner = Field<std::string>(body, "winner");
  const std::string assessor = body.value("assessor", std::string());

  const auto slot = Find(id);
  std::lock_guard write(slot->write_mu);
  auto session = std::make_shared<Session>(*slot->Get());
  try {
    session->Submit(left, right, winner, assessor, NowMs());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConflict) {
      const auto& current = *slot->Get();
      throw ApiError(e.code(), e.what(),
                     {{"pending", current.pending() ? PendingJson(current, *current.pending())
                                                    : json(nullptr)}});
    }
    throw;
  }
  store_.AppendLatestJudgement(*session);
  slot->Set(session);

  const auto dists = RankDistributions(session->matrix(), RankOptions{kDefaultExactThreshold, 2000, session->log().size()});
  json expected = json::object();
  for (std::size_t i = 0; i < dists.size(); ++i) {
    expected[session->header().items[i].id] = dists[i].expected_rank;
  }
  json out = SessionSummary(*session);
  out["expected_ranks"] = expected;
  out["max_entropy"] = session->max_entropy_series().back();
  return out;
}

json SessionService::Report(const std::string& id) const { return BuildReport(*Find(id)->Get()); }

json SessionService::Grades(const std::string& id, const json& body) const {
  if (!body.is_object()) throw Error(ErrorCode::kValidation, "body must be a JSON object");
  GradingScheme scheme;
  scheme.labels = Field<std::vector<std::string>>(body, "labels");
  const auto counts = Field<std::vector<long long>>(body, "counts");
  for (long long c : counts) {
    if (c <= 0) throw Error(ErrorCode::kValidation, "counts: must be positive");
    scheme.counts.push_back(static_cast<std::size_t>(c));
  }
  scheme.threshold = body.contains("threshold") ? Field<double>(body, "threshold") : 0.9;
  const auto session = Find(id)->Get();
  try {
    return BuildGradeReport(*session, scheme);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kInvalidScheme) throw Error(ErrorCode::kValidation, e.what());
    throw;
  }
}

json SessionService::Export(const std::string& id) const { return ExportSession(*Find(id)->Get()); }

void SessionService::Flush() {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::lock_guard lock(registry_mu_);
    for (const auto& [_, slot] : sessions_) slots.push_back(slot);
  }
  for (const auto& slot : slots) {
    std::lock_guard write(slot->write_mu);
    store_.WriteSnapshot(*slot->Get());
  }
}

struct HttpServer::Impl {
  SessionService& service;
  std::string token;
  httplib::Server server;

  Impl(SessionService& s, std::string t) : service(s), token(std::move(t)) {}

  static void Send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  }

  template <typename F>
  httplib::Server::Handler Wrap(F&& handler, int ok_status = 200) {
    return [this, handler = std::forward<F>(handler), ok_status](const httplib::Request& req,
                                                                 httplib::Response& res) {
      try {
        if (!token.empty() && req.get_header_value("Authorization") != "Bearer " + token) {
          Send(res, 401, ErrorBody(ErrorCode::kValidation, "missing or wrong bearer token"));
          return;
        }
        Send(res, ok_status, handler(req));
      } catch (const ApiError& e) {
        Send(res, HttpStatusFor(e.code()), ErrorBody(e.code(), e.what(), e.detail()));
      } catch (const Error& e) {
        Send(res, HttpStatusFor(e.code()), ErrorBody(e.code(), e.what()));
      } catch (const std::exception& e) {
        Send(res, 500, json{{"code", "internal"}, {"message", e.what()}, {"detail", nullptr}});
      }
    };
  }

  static json Body(const httplib::Request& req) {
    try {
      return json::parse(req.body);
    } catch (const json::parse_error& e) {
      throw ApiError(ErrorCode::kParse, "request body is not JSON", {{"byte", e.byte}});
    }
  }

  void Routes() {
    const std::string sid = R"(/v1/sessions/([A-Za-z0-9_-]+))";
    server.Get("/v1/health", Wrap([](const httplib::Request&) {
                 return json{{"status", "ok"}, {"version", kVersion}};
               }));
    server.Post("/v1/sessions", Wrap([this](const httplib::Request& req) {
                  return service.CreateSession(Body(req));
                }, 201));
    server.Get(sid, Wrap([this](const httplib::Request& req) {
                 return service.GetSession(req.matches[1]);
               }));
    server.Get(sid + "/next-pair", Wrap([this](const httplib::Request& req) {
                 return service.NextPair(req.matches[1]);
               }));
    server.Post(sid + "/judgements", Wrap([this](const httplib::Request& req) {
                  return service.SubmitJudgement(req.matches[1], Body(req));
                }));
    server.Get(sid + "/report", Wrap([this](const httplib::Request& req) {
                 return service.Report(req.matches[1]);
               }));
    server.Post(sid + "/grades", Wrap([this](const httplib::Request& req) {
                  return service.Grades(req.matches[1], Body(req));
                }));
    server.Get(sid + "/export", Wrap([this](const httplib::Request& req) {
                 return service.Export(req.matches[1]);
               }));
    server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        Send(res, res.status, ErrorBody(ErrorCode::kNotFound, "no such route"));
      }
    });
  }
};

HttpServer::HttpServer(SessionService& service, std::string token)
    : impl_(std::make_unique<Impl>(service, std::move(token))) {
  impl_->Routes();
}

HttpServer::~HttpServer() { Stop(); }

bool HttpServer::Bind(const std::string& host, int port) {
  return impl_->server.bind_to_port(host, port);
}

int HttpServer::BindAnyPort(const std::string& host) {
  return impl_->server.bind_to_any_port(host);
}

bool HttpServer::Listen() { return impl_->server.listen_after_bind(); }

void HttpServer::Stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::WaitUntilReady() { impl_->server.wait_until_ready(); }

}  // namespace cj
