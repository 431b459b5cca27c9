#include "cj/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "cj/error.hpp"
#include "cj/kernels.hpp"
#include "cj/version.hpp"

namespace cj::sim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSelectorStream = 0x73656cULL;
constexpr std::uint64_t kDuelStream = 0x64756cULL;

void CheckPair(const TargetPopulation& pop, ItemId i, ItemId j) {
  if (i >= pop.means.size() || j >= pop.means.size()) {
    throw Error(ErrorCode::kUnknownItem, "item id out of range");
  }
  if (i == j) throw Error(ErrorCode::kInvalidPair, "duel needs two distinct items");
}

std::uint64_t RepeatSeed(std::uint64_t seed, std::size_t n, std::size_t repeat) {
  return kernels::MixSeed(kernels::MixSeed(seed, n), repeat);
}

}  // namespace

TargetPopulation SampleTargetPopulation(std::size_t n_items, std::uint64_t seed,
                                        double sigma, double low, double high) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::kInvalidArgument, "sigma must be positive");
  TargetPopulation pop;
  pop.sigma = sigma;
  pop.seed = seed;
  Rng rng(seed);
  pop.means.resize(n_items);
  for (double& m : pop.means) m = low + (high - low) * UnitDouble(rng);
  return pop;
}

double TargetDominationProb(const TargetPopulation& pop, ItemId i, ItemId j) {
  CheckPair(pop, i, j);
  const double m = (pop.means[i] - pop.means[j]) / std::sqrt(2.0 * pop.sigma * pop.sigma);
  return 0.5 * (1.0 + std::erf(m / std::sqrt(2.0)));
}

WinProbabilities TargetWinProbabilities(const TargetPopulation& pop) {
  WinProbabilities probs(pop.means.size());
  for (ItemId i = 0; i < pop.means.size(); ++i) {
    for (ItemId j = i + 1; j < pop.means.size(); ++j) {
      probs.set(i, j, TargetDominationProb(pop, i, j));
    }
  }
  return probs;
}

std::vector<RankDistribution> TargetRankDistributions(const TargetPopulation& pop,
                                                      const RankOptions& options) {
  return RankDistributions(TargetWinProbabilities(pop), options);
}

std::vector<int> TargetRanks(const std::vector<RankDistribution>& targets) {
  return RanksAscending(ExpectedRanks(targets));
}

ItemId SimulateDuel(const TargetPopulation& pop, ItemId i, ItemId j, Rng& rng) {
  CheckPair(pop, i, j);
  const double si = pop.means[i] + pop.sigma * StandardNormal(rng);
  const double sj = pop.means[j] + pop.sigma * StandardNormal(rng);
  return si > sj ? i : j;
}

std::string MethodLabel(const Method& method) {
  std::string label = method.model == RankModel::kBtm ? "BTM-" : "BCJ-";
  switch (method.selector) {
    case SelectorKind::kRandom: return label + "R";
    case SelectorKind::kNrp: return label + "NR";
    case SelectorKind::kEntropy: return label + "E";
  }
  return label;
}

Method ParseMethod(const std::string& label) {
  for (const Method& m : AllMethods()) {
    if (MethodLabel(m) == label) return m;
  }
  throw Error(ErrorCode::kConfig, "unknown method '" + label +
                                      "' (expected BTM|BCJ followed by -R, -NR or -E)");
}

std::vector<Method> AllMethods() {
  std::vector<Method> out;
  for (RankModel model : {RankModel::kBtm, RankModel::kBcj}) {
    for (SelectorKind s : {SelectorKind::kRandom, SelectorKind::kNrp, SelectorKind::kEntropy}) {
      out.push_back({model, s});
    }
  }
  return out;
}

void ValidateConfig(const ExperimentConfig& config) {
  if (config.n_values.empty()) throw Error(ErrorCode::kConfig, "n: at least one value required");
  if (config.k_values.empty()) throw Error(ErrorCode::kConfig, "k: at least one value required");
  for (std::size_t n : config.n_values) {
    if (n < 2) throw Error(ErrorCode::kConfig, "n: every value must be >= 2, got " + std::to_string(n));
  }
  for (std::size_t k : config.k_values) {
    if (k < 1) throw Error(ErrorCode::kConfig, "k: every value must be >= 1, got " + std::to_string(k));
  }
  if (config.repeats < 1) throw Error(ErrorCode::kConfig, "repeats: must be >= 1");
  if (config.methods.empty()) throw Error(ErrorCode::kConfig, "methods: at least one method required");
  if (!(config.sigma > 0.0)) throw Error(ErrorCode::kConfig, "sigma: must be positive");
  if (config.jobs < 1) throw Error(ErrorCode::kConfig, "jobs: must be >= 1");
}

json ToJson(const ExperimentConfig& config) {
  std::vector<std::string> methods;
  for (const Method& m : config.methods) methods.push_back(MethodLabel(m));
  return {{"n", config.n_values}, {"k", config.k_values}, {"repeats", config.repeats},
          {"methods", methods},   {"seed", config.seed},  {"sigma", config.sigma},
          {"jobs", config.jobs}};
}

namespace {

std::vector<std::size_t> SizeList(const json& value, const char* field) {
  std::vector<std::size_t> out;
  auto one = [&](const json& v) {
    if (!v.is_number_integer() || v.get<long long>() < 0) {
      throw Error(ErrorCode::kConfig, std::string(field) + ": expected non-negative integers");
    }
    out.push_back(v.get<std::size_t>());
  };
  if (value.is_array()) {
    for (const auto& v : value) one(v);
  } else {
    one(value);
  }
  return out;
}

}  // namespace

ExperimentConfig ConfigFromJson(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kConfig, "config: top level must be an object");
  static const std::set<std::string> kKnown{"n", "k", "repeats", "methods", "seed", "sigma", "jobs"};
  for (const auto& [key, _] : j.items()) {
    if (!kKnown.count(key)) throw Error(ErrorCode::kConfig, key + ": unknown field");
  }
  ExperimentConfig c;
  if (j.contains("n")) c.n_values = SizeList(j["n"], "n");
  if (j.contains("k")) c.k_values = SizeList(j["k"], "k");
  if (j.contains("repeats")) {
    if (!j["repeats"].is_number_integer()) throw Error(ErrorCode::kConfig, "repeats: expected integer");
    const auto r = j["repeats"].get<long long>();
    if (r < 1) throw Error(ErrorCode::kConfig, "repeats: must be >= 1");
    c.repeats = static_cast<std::size_t>(r);
  }
  if (j.contains("methods")) {
    if (!j["methods"].is_array()) throw Error(ErrorCode::kConfig, "methods: expected array of labels");
    c.methods.clear();
    for (const auto& m : j["methods"]) {
      if (!m.is_string()) throw Error(ErrorCode::kConfig, "methods: expected strings");
      c.methods.push_back(ParseMethod(m.get<std::string>()));
    }
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_integer()) throw Error(ErrorCode::kConfig, "seed: expected integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("sigma")) {
    if (!j["sigma"].is_number()) throw Error(ErrorCode::kConfig, "sigma: expected number");
    c.sigma = j["sigma"].get<double>();
  }
  if (j.contains("jobs")) {
    if (!j["jobs"].is_number_integer()) throw Error(ErrorCode::kConfig, "jobs: expected integer");
    c.jobs = j["jobs"].get<int>();
  }
  ValidateConfig(c);
  return c;
}

RunTrace RunMethod(const TargetPopulation& pop, const std::vector<RankDistribution>& targets,
                   const Method& method, std::size_t budget, const RunSeeds& seeds) {
  const std::size_t n = pop.means.size();
  const std::vector<int> target_ranks = TargetRanks(targets);
  PreferenceMatrix matrix(n);
  WinProbabilities probs = kernels::WinProbabilitiesSerial(matrix);
  WinCounts omega(n);
  Selector selector(method.selector, n, seeds.selector);
  Rng duel_rng(seeds.duels);
  std::vector<double> gamma;  // BTM warm start

  RunTrace trace;
  trace.tau.reserve(budget);
  trace.pairs.reserve(budget);
  std::vector<RankDistribution> dists(n);
  RankOptions exact{SIZE_MAX, 0, 0};
  for (std::size_t step = 0; step < budget; ++step) {
    const Pair pair = selector.Next(matrix);
    trace.pairs.push_back(pair);
    const ItemId winner = SimulateDuel(pop, pair.first, pair.second, duel_rng);
    const ItemId loser = winner == pair.first ? pair.second : pair.first;
    matrix.Record(winner, loser);
    omega.Record(winner, loser);
    probs.set(pair.first, pair.second,
              PreferenceProbability(matrix.cell(pair.first, pair.second)));

    const auto entropy = kernels::EntropyGridSerial(matrix);
    trace.max_entropy.push_back(*std::max_element(entropy.begin(), entropy.end()));

    std::vector<int> ranks;
    if (method.model == RankModel::kBcj) {
      dists = RankDistributions(probs, exact);
      ranks = RanksAscending(ExpectedRanks(dists));
      trace.worst_jsd.push_back(WorstJsd(dists, targets));
    } else {
      BtmFitOptions options;
      options.initial_gamma = gamma;
      const BtmState state = BtmFit(omega, options);
      gamma = state.gamma;
      ranks = BtmRanks(state);
    }
    trace.tau.push_back(KendallTauDistance(ranks, target_ranks));
    if (step + 1 == budget) trace.final_ranks = std::move(ranks);
  }
  return trace;
}

CellResult RunCell(const ExperimentConfig& config, std::size_t n, std::size_t k) {
  ValidateConfig(config);
  CellResult cell;
  cell.n = n;
  cell.k = k;
  const std::size_t methods = config.methods.size();
  cell.traces.assign(methods, std::vector<RunTrace>(config.repeats));
  const auto repeats = static_cast<std::int64_t>(config.repeats);
#pragma omp parallel for num_threads(config.jobs) schedule(dynamic)
  for (std::int64_t r = 0; r < repeats; ++r) {
    const auto repeat = static_cast<std::size_t>(r);
    const std::uint64_t base = RepeatSeed(config.seed, n, repeat);
    const TargetPopulation pop = SampleTargetPopulation(n, base, config.sigma);
    const auto targets = TargetRankDistributions(pop);
    const RunSeeds seeds{kernels::MixSeed(base, kSelectorStream),
                         kernels::MixSeed(base, kDuelStream)};
    for (std::size_t m = 0; m < methods; ++m) {
      cell.traces[m][repeat] = RunMethod(pop, targets, config.methods[m], n * k, seeds);
    }
  }
  return cell;
}

std::vector<CellResult> RunExperiment(const ExperimentConfig& config) {
  ValidateConfig(config);
  std::vector<CellResult> out;
  for (std::size_t n : config.n_values) {
    for (std::size_t k : config.k_values) out.push_back(RunCell(config, n, k));
  }
  return out;
}

double Median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "median of empty sample");
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 == 1 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

CellSummary SummarizeCell(std::size_t n, std::size_t k, const std::vector<std::string>& labels,
                          const std::vector<std::vector<double>>& final_tau,
                          const std::vector<std::vector<double>>& final_jsd) {
  CellSummary summary;
  summary.n = n;
  summary.k = k;
  std::vector<MethodResult> results;
  for (std::size_t m = 0; m < labels.size(); ++m) results.push_back({labels[m], final_tau[m]});
  const std::vector<int> v = BeatCount(results);
  for (std::size_t m = 0; m < labels.size(); ++m) {
    MethodSummary ms;
    ms.method = labels[m];
    ms.median_tau = Median(final_tau[m]);
    if (m < final_jsd.size() && !final_jsd[m].empty()) ms.median_worst_jsd = Median(final_jsd[m]);
    ms.v_count = v[m];
    summary.methods.push_back(ms);
  }
  return summary;
}

namespace {

void FinalValues(const ExperimentConfig& config, const CellResult& cell,
                 std::vector<std::string>& labels, std::vector<std::vector<double>>& tau,
                 std::vector<std::vector<double>>& jsd) {
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    labels.push_back(MethodLabel(config.methods[m]));
    std::vector<double> t;
    std::vector<double> js;
    for (const RunTrace& trace : cell.traces[m]) {
      t.push_back(trace.tau.back());
      if (!trace.worst_jsd.empty()) js.push_back(trace.worst_jsd.back());
    }
    tau.push_back(std::move(t));
    jsd.push_back(std::move(js));
  }
}

}  // namespace

CellSummary SummarizeCell(const ExperimentConfig& config, const CellResult& cell) {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> tau;
  std::vector<std::vector<double>> jsd;
  FinalValues(config, cell, labels, tau, jsd);
  return SummarizeCell(cell.n, cell.k, labels, tau, jsd);
}

std::vector<CellSummary> AnalyzeExperiment(const ExperimentConfig& config,
                                           const std::vector<CellSummary>& cells) {
  std::vector<CellSummary> out;
  for (std::size_t n : config.n_values) {
    for (std::size_t k : config.k_values) {
      const auto it = std::find_if(cells.begin(), cells.end(), [&](const CellSummary& c) {
        return c.n == n && c.k == k;
      });
      if (it == cells.end()) {
        throw Error(ErrorCode::kMissingCell, "no results for cell n=" + std::to_string(n) +
                                                 " k=" + std::to_string(k));
      }
      out.push_back(*it);
    }
  }
  return out;
}

std::string FormatDouble(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 10);
  return std::string(buf, res.ptr);
}

std::string StepsCsv(const ExperimentConfig& config, const CellResult& cell) {
  std::string out;
  for (std::size_t m = 0; m < config.methods.size(); ++m) {
    const std::string label = MethodLabel(config.methods[m]);
    for (std::size_t r = 0; r < cell.traces[m].size(); ++r) {
      const RunTrace& trace = cell.traces[m][r];
      for (std::size_t s = 0; s < trace.tau.size(); ++s) {
        out += label + ',' + std::to_string(cell.n) + ',' + std::to_string(cell.k) + ',' +
               std::to_string(r) + ',' + std::to_string(s + 1) + ',' +
               FormatDouble(trace.tau[s]) + ',';
        if (s < trace.worst_jsd.size()) out += FormatDouble(trace.worst_jsd[s]);
        out += '\n';
      }
    }
  }
  return out;
}

std::string SummaryCsv(const std::vector<CellSummary>& cells) {
  std::string out = kSummaryHeader;
  for (const CellSummary& c : cells) {
    for (const MethodSummary& m : c.methods) {
      out += std::to_string(c.n) + ',' + std::to_string(c.k) + ',' + m.method + ',' +
             FormatDouble(m.median_tau) + ',' + std::to_string(m.v_count) + '\n';
    }
  }
  return out;
}

std::string JsdSummaryCsv(const std::vector<CellSummary>& cells) {
  std::string out = "n,k,method,median_worst_jsd\n";
  for (const CellSummary& c : cells) {
    for (const MethodSummary& m : c.methods) {
      if (!m.median_worst_jsd) continue;
      out += std::to_string(c.n) + ',' + std::to_string(c.k) + ',' + m.method + ',' +
             FormatDouble(*m.median_worst_jsd) + '\n';
    }
  }
  return out;
}

namespace {

void WriteFile(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out << contents;
  out.close();
  if (!out) throw Error(ErrorCode::kIo, "failed writing " + path.string());
}

std::string ReadFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string CellName(std::size_t n, std::size_t k) {
  return "n" + std::to_string(n) + "_k" + std::to_string(k);
}

json FinalsJson(const ExperimentConfig& config, const CellResult& cell) {
  std::vector<std::string> labels;
  std::vector<std::vector<double>> tau;
  std::vector<std::vector<double>> jsd;
  FinalValues(config, cell, labels, tau, jsd);
  return {{"n", cell.n}, {"k", cell.k}, {"methods", labels}, {"final_tau", tau},
          {"final_worst_jsd", jsd}};
}

json ManifestJson(const ExperimentConfig& config, const std::vector<std::string>& done) {
  json seeds = json::array();
  for (std::size_t n : config.n_values) {
    for (std::size_t r = 0; r < config.repeats; ++r) {
      seeds.push_back({{"n", n}, {"repeat", r}, {"seed", RepeatSeed(config.seed, n, r)}});
    }
  }
  return {{"version", kVersion},
          {"config", ToJson(config)},
          {"repeat_seeds", seeds},
          {"completed_cells", done}};
}

bool SameConfig(const json& a, const json& b) {
  json x = a;
  json y = b;
  x.erase("jobs");  // thread count does not affect results
  y.erase("jobs");
  return x == y;
}

}  // namespace

void RunExperimentToDirectory(const ExperimentConfig& config, const fs::path& out_dir,
                              bool resume) {
  ValidateConfig(config);
  std::error_code ec;
  fs::create_directories(out_dir / "cells", ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + out_dir.string() + ": " + ec.message());

  std::set<std::string> done;
  const fs::path manifest_path = out_dir / "manifest.json";
  if (resume && fs::exists(manifest_path)) {
    json manifest;
    try {
      manifest = json::parse(ReadFile(manifest_path));
    } catch (const json::parse_error& e) {
      throw Error(ErrorCode::kParse, manifest_path.string() + ": " + e.what());
    }
    if (!SameConfig(manifest.at("config"), ToJson(config))) {
      throw Error(ErrorCode::kConfig,
                  "manifest in " + out_dir.string() + " was written for a different config");
    }
    for (const auto& c : manifest.at("completed_cells")) done.insert(c.get<std::string>());
  }

  std::vector<std::string> completed;
  std::vector<CellSummary> summaries;
  for (std::size_t n : config.n_values) {
    for (std::size_t k : config.k_values) {
      const std::string name = CellName(n, k);
      const fs::path steps_path = out_dir / "cells" / (name + ".steps.csv");
      const fs::path finals_path = out_dir / "cells" / (name + ".json");
      json finals;
      if (done.count(name) && fs::exists(steps_path) && fs::exists(finals_path)) {
        finals = json::parse(ReadFile(finals_path));
      } else {
        const CellResult cell = RunCell(config, n, k);
        WriteFile(steps_path, StepsCsv(config, cell));
        finals = FinalsJson(config, cell);
        WriteFile(finals_path, finals.dump());
      }
      completed.push_back(name);
      WriteFile(manifest_path, ManifestJson(config, completed).dump(2) + "\n");
      summaries.push_back(SummarizeCell(
          n, k, finals["methods"].get<std::vector<std::string>>(),
          finals["final_tau"].get<std::vector<std::vector<double>>>(),
          finals["final_worst_jsd"].get<std::vector<std::vector<double>>>()));
    }
  }

  std::string steps = kStepsHeader;
  for (std::size_t n : config.n_values) {
    for (std::size_t k : config.k_values) {
      steps += ReadFile(out_dir / "cells" / (CellName(n, k) + ".steps.csv"));
    }
  }
  WriteFile(out_dir / "steps.csv", steps);
  const auto analyzed = AnalyzeExperiment(config, summaries);
  WriteFile(out_dir / "summary.csv", SummaryCsv(analyzed));
  WriteFile(out_dir / "jsd_summary.csv", JsdSummaryCsv(analyzed));
}

}  // namespace cj::sim
