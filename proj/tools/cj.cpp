// cj: comparative-judgement engine command line.
//
//   cj simulate [--config FILE] [--n 5,10] [--k 10] [--repeats 50] --out DIR
//   cj report SESSION.json [--grades A:1,B:1,C:2,D:1 --threshold 0.9]
//   cj serve [--bind 127.0.0.1:8080] [--store FILE]
//   cj export --store FILE --session ID

#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "cj/api.hpp"
#include "cj/error.hpp"
#include "cj/grading.hpp"
#include "cj/session.hpp"
#include "cj/sim.hpp"
#include "cj/store.hpp"
#include "cj/version.hpp"

namespace {

using nlohmann::json;

enum ExitCode { kOk = 0, kValidation = 1, kIo = 2, kInternal = 3 };

int ExitFor(cj::ErrorCode code) {
  switch (code) {
    case cj::ErrorCode::kIo: return kIo;
    case cj::ErrorCode::kInvalidState: return kInternal;
    default: return kValidation;
  }
}

std::vector<std::size_t> ParseSizeList(const std::string& text, const char* flag) {
  std::vector<std::size_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      std::size_t used = 0;
      const long long v = std::stoll(part, &used);
      if (used != part.size() || v < 0) throw std::invalid_argument(part);
      out.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw cj::Error(cj::ErrorCode::kConfig,
                      std::string(flag) + ": '" + part + "' is not a non-negative integer");
    }
  }
  return out;
}

std::string ReadText(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw cj::Error(cj::ErrorCode::kIo, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json ParseJsonFile(const std::string& path) {
  const std::string text = ReadText(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw cj::Error(cj::ErrorCode::kParse,
                    path + ": parse error at byte " + std::to_string(e.byte) + ": " + e.what());
  }
}

struct SimulateArgs {
  std::string config;
  std::string n;
  std::string k;
  long long repeats = -1;
  long long seed = -1;
  std::string methods;
  std::string out;
  int jobs = 0;
  bool resume = false;
};

int Simulate(const SimulateArgs& args) {
  cj::sim::ExperimentConfig config;
  if (!args.config.empty()) {
    try {
      config = cj::sim::ConfigFromJson(ParseJsonFile(args.config));
    } catch (const cj::Error& e) {
      throw cj::Error(e.code(), args.config + ": " + e.what());
    }
  }
  if (!args.n.empty()) config.n_values = ParseSizeList(args.n, "--n");
  if (!args.k.empty()) config.k_values = ParseSizeList(args.k, "--k");
  if (args.repeats >= 0) config.repeats = static_cast<std::size_t>(args.repeats);
  if (args.seed >= 0) config.seed = static_cast<std::uint64_t>(args.seed);
  if (!args.methods.empty()) {
    config.methods.clear();
    std::stringstream ss(args.methods);
    std::string label;
    while (std::getline(ss, label, ',')) config.methods.push_back(cj::sim::ParseMethod(label));
  }
  if (args.jobs > 0) config.jobs = args.jobs;
  cj::sim::ValidateConfig(config);
  cj::sim::RunExperimentToDirectory(config, args.out, args.resume);
  std::cout << "wrote " << args.out << "/{steps.csv,summary.csv,jsd_summary.csv,manifest.json}\n";
  return kOk;
}

int Report(const std::string& path, const std::string& grades, double threshold,
           const std::string& format) {
  const cj::Session session = cj::ImportSession(ParseJsonFile(path));
  json report = cj::BuildReport(session);
  if (!grades.empty()) {
    report["grades"] = cj::BuildGradeReport(session, cj::ParseGradeSpec(grades, threshold));
  }
  if (format == "json") {
    std::cout << report.dump(2) << "\n";
    return kOk;
  }
  // csv: one row per item
  std::cout << "id,rank,expected_rank";
  if (report.contains("grades")) std::cout << ",grade";
  std::cout << "\n";
  for (std::size_t i = 0; i < report["items"].size(); ++i) {
    const auto& item = report["items"][i];
    std::cout << item["id"].get<std::string>() << ',' << item["rank"].get<int>() << ','
              << cj::sim::FormatDouble(item["expected_rank"].get<double>());
    if (report.contains("grades")) {
      std::cout << ',' << report["grades"]["items"][i]["grade"].get<std::string>();
    }
    std::cout << "\n";
  }
  return kOk;
}

cj::HttpServer* g_server = nullptr;

extern "C" void HandleSignal(int) {
  if (g_server) g_server->Stop();
}

int Serve(const std::string& bind, const std::string& store, const std::string& token) {
  const auto colon = bind.rfind(':');
  if (colon == std::string::npos) {
    throw cj::Error(cj::ErrorCode::kConfig, "--bind: expected HOST:PORT");
  }
  const std::string host = bind.substr(0, colon);
  int port = 0;
  try {
    port = std::stoi(bind.substr(colon + 1));
  } catch (const std::exception&) {
    throw cj::Error(cj::ErrorCode::kConfig, "--bind: bad port");
  }
  cj::SessionService service(store);
  cj::HttpServer server(service, token);
  if (port == 0) {
    port = server.BindAnyPort(host);
    if (port < 0) throw cj::Error(cj::ErrorCode::kIo, "cannot bind " + host);
  } else if (!server.Bind(host, port)) {
    throw cj::Error(cj::ErrorCode::kIo, "cannot bind " + bind + " (port in use?)");
  }
  g_server = &server;
  std::signal(SIGINT, HandleSignal);
  std::signal(SIGTERM, HandleSignal);
  std::cout << "listening on " << host << ":" << port << " store=" << store << std::endl;
  server.Listen();
  g_server = nullptr;
  service.Flush();
  std::cout << "stopped; snapshots flushed" << std::endl;
  return kOk;
}

int Export(const std::string& store_path, const std::string& id) {
  cj::SessionStore store(store_path);
  for (const cj::Session& s : store.LoadAll()) {
    if (s.id() == id) {
      std::cout << cj::ExportSession(s).dump(2) << "\n";
      return kOk;
    }
  }
  throw cj::Error(cj::ErrorCode::kNotFound, "no session '" + id + "' in " + store_path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian comparative-judgement engine"};
  app.set_version_flag("--version", cj::kVersion);
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "run the synthetic method-comparison grid");
  simulate->add_option("--config", sim.config, "JSON experiment config; flags override it");
  simulate->add_option("--n", sim.n, "item counts, comma separated");
  simulate->add_option("--k", sim.k, "budget multipliers, comma separated");
  simulate->add_option("--repeats", sim.repeats, "repeats per cell");
  simulate->add_option("--seed", sim.seed, "master seed");
  simulate->add_option("--methods", sim.methods, "e.g. BTM-NR,BCJ-E");
  simulate->add_option("--out", sim.out, "run directory")->required();
  simulate->add_option("--jobs", sim.jobs, "worker threads");
  simulate->add_flag("--resume", sim.resume, "reuse cells completed by an earlier run");

  std::string report_path;
  std::string grades;
  double threshold = 0.9;
  std::string format = "json";
  auto* report = app.add_subcommand("report", "offline report for an exported session");
  report->add_option("session", report_path, "session export JSON")->required();
  report->add_option("--grades", grades, "LABEL:COUNT list, best grade first");
  report->add_option("--threshold", threshold, "threshold of acceptability in (0,1]");
  report->add_option("--format", format)->check(CLI::IsMember({"json", "csv"}));

  const char* env_store = std::getenv("CJ_ENGINE_STORE");
  std::string store = env_store ? env_store : "cj_store.db";
  std::string bind = "127.0.0.1:8080";
  std::string token;
  auto* serve = app.add_subcommand("serve", "run the HTTP/JSON session service");
  serve->add_option("--bind", bind, "HOST:PORT (port 0 picks a free port)");
  serve->add_option("--store", store, "SQLite store file (default $CJ_ENGINE_STORE)");
  serve->add_option("--token", token, "require this bearer token");

  std::string session_id;
  auto* exp = app.add_subcommand("export", "print a stored session as JSON");
  exp->add_option("--store", store, "SQLite store file");
  exp->add_option("--session", session_id)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*simulate) return Simulate(sim);
    if (*report) return Report(report_path, grades, threshold, format);
    if (*serve) return Serve(bind, store, token);
    if (*exp) return Export(store, session_id);
  } catch (const cj::Error& e) {
    std::cerr << "error [" << cj::ErrorCodeName(e.code()) << "]: " << e.what() << "\n";
    return ExitFor(e.code());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kInternal;
  }
  return kInternal;
}
