// Copyright 2026 The HiSS Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "hiss/experiment.h"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>
#include <thread>

#ifndef HISS_VERSION_STRING
#define HISS_VERSION_STRING "unknown"
#endif

namespace hiss {
namespace fs = std::filesystem;

namespace {

// Independent stream for initial states, so the sampler stream of chain k
// is the same whether the chain starts at the lowest or a random state.
constexpr std::uint64_t kInitStream = 0x9e3779b97f4a7c15ULL;

std::string At(const YAML::Node& node, const std::string& path) {
  std::ostringstream os;
  const YAML::Mark mark = node.Mark();
  if (mark.line >= 0) os << "line " << mark.line + 1 << ", ";
  os << "field '" << path << "': ";
  return os.str();
}

[[noreturn]] void Fail(const YAML::Node& node, const std::string& path, const std::string& what) {
  throw ConfigError(At(node, path) + what);
}

void CheckKeys(const YAML::Node& map, const std::string& path,
               const std::set<std::string>& allowed) {
  if (!map.IsMap()) Fail(map, path, "expected a mapping");
  for (const auto& kv : map) {
    const std::string key = kv.first.as<std::string>();
    if (!allowed.count(key)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      Fail(kv.first, path.empty() ? key : path + "." + key, "unknown key (expected one of " + list + ")");
    }
  }
}

template <typename T>
T Get(const YAML::Node& node, const std::string& path, const char* type) {
  if (!node.IsScalar()) Fail(node, path, std::string("expected ") + type);
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    Fail(node, path, std::string("expected ") + type + ", got '" + node.Scalar() + "'");
  }
}

double GetDouble(const YAML::Node& node, const std::string& path) {
  const double v = Get<double>(node, path, "a number");
  if (!std::isfinite(v)) Fail(node, path, "must be finite");
  return v;
}

long long GetInt(const YAML::Node& node, const std::string& path, long long lo) {
  const long long v = Get<long long>(node, path, "an integer");
  if (v < lo) Fail(node, path, "must be >= " + std::to_string(lo));
  return v;
}

std::uint64_t GetU64(const YAML::Node& node, const std::string& path) {
  if (node.IsScalar() && !node.Scalar().empty() && node.Scalar()[0] == '-') {
    Fail(node, path, "must be non-negative");
  }
  return Get<std::uint64_t>(node, path, "a non-negative integer");
}

std::string ResolvePath(const std::string& base_dir, const std::string& p) {
  if (p.empty()) return p;
  fs::path path(p);
  if (path.is_relative()) path = fs::path(base_dir) / path;
  return fs::absolute(path).lexically_normal().string();
}

void ParseModel(const YAML::Node& node, const std::string& base_dir, ModelConfig& m) {
  const std::string path = "model";
  CheckKeys(node, path,
            {"name", "side", "a", "b", "file", "csv", "hidden", "synthetic_rows",
             "synthetic_inputs", "synthetic_noise", "data_seed", "alphabet"});
  if (!node["name"]) Fail(node, path, "missing 'name'");
  m.name = Get<std::string>(node["name"], "model.name", "a string");
  static const std::set<std::string> kNames{"bernoulli4d", "ising", "tsp", "mlp"};
  if (!kNames.count(m.name)) {
    Fail(node["name"], "model.name",
         "unknown model '" + m.name + "' (expected bernoulli4d, ising, tsp or mlp)");
  }
  if (auto n = node["side"]) m.side = static_cast<std::size_t>(GetInt(n, "model.side", 1));
  if (auto n = node["a"]) m.a = GetDouble(n, "model.a");
  if (auto n = node["b"]) m.b = GetDouble(n, "model.b");
  if (auto n = node["file"]) m.file = ResolvePath(base_dir, Get<std::string>(n, "model.file", "a path"));
  if (auto n = node["csv"]) m.csv = ResolvePath(base_dir, Get<std::string>(n, "model.csv", "a path"));
  if (auto n = node["hidden"]) m.hidden = static_cast<std::size_t>(GetInt(n, "model.hidden", 1));
  if (auto n = node["synthetic_rows"]) {
    m.synthetic_rows = static_cast<std::size_t>(GetInt(n, "model.synthetic_rows", 1));
  }
  if (auto n = node["synthetic_inputs"]) {
    m.synthetic_inputs = static_cast<std::size_t>(GetInt(n, "model.synthetic_inputs", 1));
  }
  if (auto n = node["synthetic_noise"]) {
    m.synthetic_noise = GetDouble(n, "model.synthetic_noise");
    if (m.synthetic_noise < 0) Fail(n, "model.synthetic_noise", "must be >= 0");
  }
  if (auto n = node["data_seed"]) m.data_seed = GetU64(n, "model.data_seed");
  if (auto n = node["alphabet"]) {
    if (!n.IsSequence() || n.size() == 0) Fail(n, "model.alphabet", "expected a non-empty list");
    m.alphabet.clear();
    for (std::size_t i = 0; i < n.size(); ++i) {
      m.alphabet.push_back(GetDouble(n[i], "model.alphabet[" + std::to_string(i) + "]"));
    }
  }
  if (m.name == "tsp" && m.file.empty()) Fail(node, path, "tsp model needs 'file'");
}

SamplerKind ParseSamplerName(const YAML::Node& node, const std::string& path) {
  const std::string name = Get<std::string>(node, path, "a sampler name");
  if (auto kind = ParseSamplerKind(name)) return *kind;
  std::string list;
  for (const auto& s : SamplerNames()) list += (list.empty() ? "" : ", ") + s;
  Fail(node, path, "unknown sampler '" + name + "' (expected one of " + list + ")");
}

void ParseParams(const YAML::Node& node, ExperimentConfig& c) {
  const std::string path = "params";
  CheckKeys(node, path,
            {"alpha", "eta", "sweeps", "refinements", "gk_sigma2", "mh_correction",
             "steps_per_sample"});
  SamplerConfig& p = c.params;
  if (auto n = node["alpha"]) p.alpha = GetDouble(n, "params.alpha");
  if (auto n = node["eta"]) p.eta = GetDouble(n, "params.eta");
  if (auto n = node["sweeps"]) p.sweeps = static_cast<int>(GetInt(n, "params.sweeps", 1));
  if (auto n = node["refinements"]) {
    p.refinements = static_cast<int>(GetInt(n, "params.refinements", 0));
  }
  if (auto n = node["gk_sigma2"]) p.gk_sigma2 = GetDouble(n, "params.gk_sigma2");
  if (auto n = node["mh_correction"]) p.mh_correction = Get<bool>(n, "params.mh_correction", "a boolean");
  if (auto n = node["steps_per_sample"]) {
    c.steps_per_sample = static_cast<int>(GetInt(n, "params.steps_per_sample", 0));
  }
}

void ParsePt(const YAML::Node& node, PtConfig& pt) {
  CheckKeys(node, "pt", {"temps", "swap_interval", "min_beta"});
  if (auto n = node["temps"]) pt.num_temps = static_cast<int>(GetInt(n, "pt.temps", 2));
  if (auto n = node["swap_interval"]) {
    pt.swap_interval = static_cast<int>(GetInt(n, "pt.swap_interval", 1));
  }
  if (auto n = node["min_beta"]) pt.min_beta = GetDouble(n, "pt.min_beta");
}

void ParseRun(const YAML::Node& node, ExperimentConfig& c) {
  CheckKeys(node, "run",
            {"chains", "samples", "seed", "init", "metrics", "metric_every", "workers",
             "enumeration_cap"});
  if (auto n = node["chains"]) c.chains = static_cast<std::size_t>(GetInt(n, "run.chains", 1));
  if (auto n = node["samples"]) c.samples = static_cast<std::size_t>(GetInt(n, "run.samples", 1));
  if (auto n = node["seed"]) c.seed = GetU64(n, "run.seed");
  if (auto n = node["init"]) {
    const std::string init = Get<std::string>(n, "run.init", "lowest or random");
    if (init == "lowest") {
      c.init = InitKind::kLowest;
    } else if (init == "random") {
      c.init = InitKind::kRandom;
    } else {
      Fail(n, "run.init", "expected lowest or random, got '" + init + "'");
    }
  }
  if (auto n = node["metrics"]) {
    const auto known = KnownMetrics();
    std::vector<YAML::Node> items;
    if (n.IsSequence()) {
      for (const auto& item : n) items.push_back(item);
    } else {
      items.push_back(n);
    }
    c.metrics.clear();
    for (std::size_t i = 0; i < items.size(); ++i) {
      const std::string field = "run.metrics[" + std::to_string(i) + "]";
      const std::string m = Get<std::string>(items[i], field, "a metric name");
      if (std::find(known.begin(), known.end(), m) == known.end()) {
        std::string list;
        for (const auto& k : known) list += (list.empty() ? "" : ", ") + k;
        Fail(items[i], field, "unknown metric '" + m + "' (expected one of " + list + ")");
      }
      c.metrics.push_back(m);
    }
  }
  if (auto n = node["metric_every"]) {
    c.metric_every = static_cast<std::size_t>(GetInt(n, "run.metric_every", 1));
  }
  if (auto n = node["workers"]) c.workers = static_cast<int>(GetInt(n, "run.workers", 0));
  if (auto n = node["enumeration_cap"]) c.enumeration_cap = GetU64(n, "run.enumeration_cap");
}

void ParseOutput(const YAML::Node& node, ExperimentConfig& c) {
  CheckKeys(node, "output", {"dir", "record_wall_time"});
  if (auto n = node["dir"]) c.out_dir = Get<std::string>(n, "output.dir", "a path");
  if (auto n = node["record_wall_time"]) {
    c.record_wall_time = Get<bool>(n, "output.record_wall_time", "a boolean");
  }
}

}  // namespace

void ExperimentConfig::Validate() const {
  if (samplers.empty()) throw ConfigError("field 'sampler': at least one sampler is required");
  if (chains == 0) throw ConfigError("field 'run.chains': must be >= 1");
  if (samples == 0) throw ConfigError("field 'run.samples': must be >= 1");
  if (metric_every == 0) throw ConfigError("field 'run.metric_every': must be >= 1");
  if (workers < 0) throw ConfigError("field 'run.workers': must be >= 0");
  if (steps_per_sample < 0) throw ConfigError("field 'params.steps_per_sample': must be >= 0");
  try {
    params.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("section 'params': ") + e.what());
  }
  try {
    pt.Validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("section 'pt': ") + e.what());
  }
  if (model.name == "tsp" && model.file.empty()) {
    throw ConfigError("field 'model.file': tsp model needs a TSPLIB file");
  }
}

ExperimentConfig ParseExperimentConfig(const std::string& yaml_text, const std::string& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  ExperimentConfig c;
  if (!root || root.IsNull()) throw ConfigError("empty config");
  CheckKeys(root, "", {"model", "sampler", "params", "pt", "run", "output", "version"});
  if (!root["model"]) throw ConfigError("missing section 'model'");
  ParseModel(root["model"], base_dir, c.model);
  if (auto n = root["sampler"]) {
    c.samplers.clear();
    if (n.IsSequence()) {
      for (std::size_t i = 0; i < n.size(); ++i) {
        c.samplers.push_back(ParseSamplerName(n[i], "sampler[" + std::to_string(i) + "]"));
      }
      if (c.samplers.empty()) Fail(n, "sampler", "expected at least one sampler");
    } else {
      c.samplers.push_back(ParseSamplerName(n, "sampler"));
    }
  }
  if (auto n = root["params"]) ParseParams(n, c);
  if (auto n = root["pt"]) ParsePt(n, c.pt);
  if (auto n = root["run"]) ParseRun(n, c);
  if (auto n = root["output"]) ParseOutput(n, c);
  c.params.seed = c.seed;
  c.Validate();
  return c;
}

ExperimentConfig LoadExperimentConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  fs::path parent = fs::path(path).parent_path();
  if (parent.empty()) parent = ".";
  try {
    return ParseExperimentConfig(buffer.str(), parent.string());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string VersionString() { return HISS_VERSION_STRING; }

namespace {

// Plain scalar with the shortest round-trip form.
YAML::Emitter& EmitNumber(YAML::Emitter& out, double v) {
  return out << YAML::Value << FormatDouble(v);
}

}  // namespace

std::string EmitManifest(const ExperimentConfig& c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "version" << YAML::Value << VersionString();

  out << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << c.model.name;
  const ModelConfig& m = c.model;
  if (m.name == "ising") {
    out << YAML::Key << "side" << YAML::Value << m.side;
    out << YAML::Key << "a";
    EmitNumber(out, m.a);
    out << YAML::Key << "b";
    EmitNumber(out, m.b);
  } else if (m.name == "tsp") {
    out << YAML::Key << "file" << YAML::Value << m.file;
  } else if (m.name == "mlp") {
    if (!m.csv.empty()) {
      out << YAML::Key << "csv" << YAML::Value << m.csv;
    } else {
      out << YAML::Key << "synthetic_rows" << YAML::Value << m.synthetic_rows;
      out << YAML::Key << "synthetic_inputs" << YAML::Value << m.synthetic_inputs;
      out << YAML::Key << "synthetic_noise";
      EmitNumber(out, m.synthetic_noise);
      out << YAML::Key << "data_seed" << YAML::Value << m.data_seed;
    }
    out << YAML::Key << "hidden" << YAML::Value << m.hidden;
    out << YAML::Key << "alphabet" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double v : m.alphabet) out << FormatDouble(v);
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;

  out << YAML::Key << "sampler" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (SamplerKind k : c.samplers) out << std::string(SamplerName(k));
  out << YAML::EndSeq;

  out << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "alpha";
  EmitNumber(out, c.params.alpha);
  out << YAML::Key << "eta";
  EmitNumber(out, c.params.eta);
  out << YAML::Key << "sweeps" << YAML::Value << c.params.sweeps;
  out << YAML::Key << "refinements" << YAML::Value << c.params.refinements;
  out << YAML::Key << "gk_sigma2";
  EmitNumber(out, c.params.gk_sigma2);
  out << YAML::Key << "mh_correction" << YAML::Value << c.params.mh_correction;
  out << YAML::Key << "steps_per_sample" << YAML::Value << c.steps_per_sample;
  out << YAML::EndMap;

  out << YAML::Key << "pt" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "temps" << YAML::Value << c.pt.num_temps;
  out << YAML::Key << "swap_interval" << YAML::Value << c.pt.swap_interval;
  out << YAML::Key << "min_beta";
  EmitNumber(out, c.pt.min_beta);
  out << YAML::EndMap;

  out << YAML::Key << "run" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "chains" << YAML::Value << c.chains;
  out << YAML::Key << "samples" << YAML::Value << c.samples;
  out << YAML::Key << "seed" << YAML::Value << c.seed;
  out << YAML::Key << "init" << YAML::Value
      << (c.init == InitKind::kLowest ? "lowest" : "random");
  if (!c.metrics.empty()) {
    out << YAML::Key << "metrics" << YAML::Value << YAML::Flow << c.metrics;
  }
  out << YAML::Key << "metric_every" << YAML::Value << c.metric_every;
  out << YAML::Key << "workers" << YAML::Value << c.workers;
  out << YAML::Key << "enumeration_cap" << YAML::Value << c.enumeration_cap;
  out << YAML::EndMap;

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << c.out_dir;
  out << YAML::Key << "record_wall_time" << YAML::Value << c.record_wall_time;
  out << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::unique_ptr<EnergyModel> BuildModel(const ModelConfig& m) {
  if (m.name == "bernoulli4d") return std::make_unique<TabularModel>(Bernoulli4d());
  if (m.name == "ising") return std::make_unique<IsingModel>(Ising(m.side, m.a, m.b));
  if (m.name == "tsp") return std::make_unique<TspModel>(LoadTsplib(m.file));
  if (m.name == "mlp") {
    RegressionData data =
        m.csv.empty() ? SyntheticRegression(m.synthetic_rows, m.synthetic_inputs, m.hidden,
                                            m.synthetic_noise, m.data_seed)
                      : LoadRegressionCsv(m.csv);
    return std::make_unique<BinaryMlpModel>(std::move(data), m.hidden, m.alphabet);
  }
  throw ConfigError("unknown model '" + m.name + "'");
}

std::vector<std::string> KnownMetrics() {
  return {"tvd", "logmae", "coverage", "acceptance", "energy", "tour_cost", "best_cost", "rmse",
          "best_rmse"};
}

std::vector<std::string> DefaultMetrics(const EnergyModel& model) {
  if (dynamic_cast<const TspModel*>(&model)) return {"tour_cost", "best_cost", "acceptance"};
  if (dynamic_cast<const BinaryMlpModel*>(&model)) return {"rmse", "best_rmse", "acceptance"};
  return {"tvd", "logmae", "coverage", "acceptance"};
}

DiscreteState InitialState(const EnergyModel& model, InitKind kind, Rng& rng) {
  const DomainSpec& spec = model.domain();
  if (const auto* tsp = dynamic_cast<const TspModel*>(&model)) {
    Tour tour(tsp->cities());
    std::iota(tour.begin(), tour.end(), 0);
    if (kind == InitKind::kRandom) {
      for (std::size_t i = tour.size(); i > 1; --i) std::swap(tour[i - 1], tour[rng.Below(i)]);
    }
    return tsp->StateFromTour(tour);
  }
  if (kind == InitKind::kLowest) return spec.LowestState();
  DiscreteState s{Vector(spec.dim())};
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    const auto levels = spec.levels(i);
    s.values[i] = levels[rng.Below(levels.size())];
  }
  return s;
}

double SamplerResult::Mean(const std::string& metric) const {
  if (chains.empty()) return std::numeric_limits<double>::quiet_NaN();
  double sum = 0.0;
  for (const auto& c : chains) sum += c.final_metrics.at(metric);
  return sum / static_cast<double>(chains.size());
}

double SamplerResult::StdDev(const std::string& metric) const {
  if (chains.size() < 2) return 0.0;
  const double mean = Mean(metric);
  double ss = 0.0;
  for (const auto& c : chains) {
    const double d = c.final_metrics.at(metric) - mean;
    ss += d * d;
  }
  return std::sqrt(ss / static_cast<double>(chains.size() - 1));
}

double SamplerResult::StdErr(const std::string& metric) const {
  if (chains.empty()) return 0.0;
  return StdDev(metric) / std::sqrt(static_cast<double>(chains.size()));
}

double SamplerResult::MeanMwgAcceptance() const {
  if (chains.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : chains) sum += c.stats.MwgAcceptance();
  return sum / static_cast<double>(chains.size());
}

const SamplerResult& RunResult::Get(SamplerKind kind) const {
  for (const auto& s : samplers) {
    if (s.kind == kind) return s;
  }
  throw std::out_of_range("RunResult: sampler '" + std::string(SamplerName(kind)) + "' not run");
}

std::string FormatState(const DiscreteState& state, const DomainSpec& spec) {
  bool digits = true;
  for (std::size_t i = 0; i < spec.dim() && digits; ++i) {
    for (double v : spec.levels(i)) digits = digits && v >= 0.0 && v <= 9.0 && v == std::floor(v);
  }
  std::string out;
  for (std::size_t i = 0; i < state.dim(); ++i) {
    if (digits) {
      out += static_cast<char>('0' + static_cast<int>(state.values[i]));
    } else {
      if (i > 0) out += ';';
      out += FormatDouble(state.values[i]);
    }
  }
  return out;
}

namespace {

bool IsHissKind(SamplerKind kind) {
  return kind == SamplerKind::kHiss || kind == SamplerKind::kHissGk ||
         kind == SamplerKind::kHissNoMh;
}

std::string TourString(const Tour& tour) {
  std::string out;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    if (i > 0) out += ' ';
    out += std::to_string(tour[i]);
  }
  return out;
}

struct RunContext {
  const ExperimentConfig* config = nullptr;
  const EnergyModel* model = nullptr;
  const TspModel* tsp = nullptr;
  const BinaryMlpModel* mlp = nullptr;
  const ExactDistribution* exact = nullptr;
  std::vector<std::string> metrics;
};

ChainSummary RunOneChain(const RunContext& ctx, SamplerKind kind, int chain_id,
                         std::vector<MetricSeries>& series) {
  const ExperimentConfig& config = *ctx.config;
  const EnergyModel& model = *ctx.model;
  Rng init_rng(DeriveSeed(config.seed ^ kInitStream, static_cast<std::uint64_t>(chain_id)));
  Rng rng(DeriveSeed(config.seed, static_cast<std::uint64_t>(chain_id)));
  const DiscreteState init = InitialState(model, config.init, init_rng);

  ChainOptions options;
  options.samples = config.samples;
  options.steps_per_sample = config.steps_per_sample;
  options.pt = config.pt;
  options.keep_samples = false;

  series.clear();
  for (const auto& m : ctx.metrics) {
    MetricSeries s;
    s.metric = m;
    s.chain_id = chain_id;
    series.push_back(std::move(s));
  }

  std::optional<Histogram> hist;
  if (ctx.exact) hist.emplace(ctx.exact->spec, config.enumeration_cap);
  ChainSummary summary;
  summary.chain_id = chain_id;
  double best_cost = std::numeric_limits<double>::infinity();
  double best_rmse = std::numeric_limits<double>::infinity();
  DiscreteState last;

  const auto start = std::chrono::steady_clock::now();
  auto evaluate = [&](const std::string& m, const DiscreteState& s, const ChainStats& stats,
                      double tour_cost, double rmse) -> double {
    if (m == "tvd") return TotalVariation(*hist, *ctx.exact);
    if (m == "logmae") return LogMae(*hist, *ctx.exact);
    if (m == "coverage") return Coverage(*hist);
    if (m == "acceptance") return IsHissKind(kind) ? stats.MwgAcceptance() : stats.RefineAcceptance();
    if (m == "energy") return model.Energy(s);
    if (m == "tour_cost") return tour_cost;
    if (m == "best_cost") return best_cost;
    if (m == "rmse") return rmse;
    if (m == "best_rmse") return best_rmse;
    throw std::logic_error("unhandled metric " + m);
  };

  auto on_sample = [&](std::size_t index, const DiscreteState& s, const ChainStats& stats) {
    if (hist) hist->Add(s);
    double tour_cost = 0.0;
    double rmse = 0.0;
    if (ctx.tsp) {
      const Tour tour = ctx.tsp->TourFromState(s);
      tour_cost = ctx.tsp->TourLength(tour);
      if (tour_cost < best_cost) {
        best_cost = tour_cost;
        summary.best_tour = tour;
      }
    }
    if (ctx.mlp) {
      rmse = ctx.mlp->Rmse(s.values);
      best_rmse = std::min(best_rmse, rmse);
    }
    const std::size_t iteration = index + 1;
    const bool last_sample = iteration == config.samples;
    if (iteration % config.metric_every == 0 || last_sample) {
      const double t =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      for (std::size_t k = 0; k < ctx.metrics.size(); ++k) {
        const double v = evaluate(ctx.metrics[k], s, stats, tour_cost, rmse);
        series[k].Append(iteration, t, v);
        if (last_sample) summary.final_metrics[ctx.metrics[k]] = v;
      }
    }
    if (last_sample) last = s;
  };

  const ChainTrace trace = RunChain(model, kind, config.params, options, init, rng, on_sample);
  summary.stats = trace.stats;
  summary.wall_time = trace.wall_time;
  summary.final_sample = last;
  return summary;
}

std::uint64_t PredictNfe(const ExperimentConfig& c, SamplerKind kind) {
  const SamplerConfig p = EffectiveConfig(kind, c.params);
  const std::uint64_t steps =
      static_cast<std::uint64_t>(c.steps_per_sample > 0 ? c.steps_per_sample : p.BaselineSteps());
  switch (kind) {
    case SamplerKind::kHiss:
    case SamplerKind::kHissGk:
    case SamplerKind::kHissNoMh:
      return PredictedNfeHiss(c.chains, c.samples, static_cast<std::uint64_t>(p.sweeps),
                              static_cast<std::uint64_t>(p.refinements));
    case SamplerKind::kDmala:
    case SamplerKind::kGwg:
      return PredictedNfeBase(c.chains, c.samples, steps);
    case SamplerKind::kPtDmala:
      return PredictedNfePt(c.chains, c.samples, steps, static_cast<std::uint64_t>(c.pt.num_temps),
                            static_cast<std::uint64_t>(c.pt.swap_interval));
  }
  return 0;
}

void WriteFile(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

void WriteOutputs(const ExperimentConfig& config, const RunContext& ctx, const RunResult& result) {
  const fs::path dir(config.out_dir);
  fs::create_directories(dir);
  WriteFile(dir / "manifest.yaml", EmitManifest(config));

  std::ostringstream summary;
  summary << "sampler,chain_id,metric,value\n";
  std::ostringstream finals;
  finals << "sampler,chain_id,state\n";
  std::ostringstream nfe;
  nfe << "sampler,measured,predicted,match\n";

  for (const auto& sr : result.samplers) {
    const std::string name(SamplerName(sr.kind));
    std::ostringstream metrics;
    WriteMetricCsv(metrics, sr.series, config.record_wall_time);
    WriteFile(dir / ("metrics_" + name + ".csv"), metrics.str());

    for (const auto& c : sr.chains) {
      auto row = [&](const std::string& metric, double v) {
        summary << name << ',' << c.chain_id << ',' << metric << ',' << FormatDouble(v) << '\n';
      };
      for (const auto& [metric, v] : c.final_metrics) row(metric, v);
      row("mwg_acceptance", c.stats.MwgAcceptance());
      row("refine_acceptance", c.stats.RefineAcceptance());
      if (c.stats.swap_attempt > 0) {
        row("swap_acceptance", static_cast<double>(c.stats.swap_accept) /
                                   static_cast<double>(c.stats.swap_attempt));
      }
      row("infeasible_rejects", static_cast<double>(c.stats.infeasible_rejects));
      row("energy_calls", static_cast<double>(c.stats.energy_calls));
      if (config.record_wall_time) row("wall_time_s", c.wall_time);
      finals << name << ',' << c.chain_id << ',' << FormatState(c.final_sample, ctx.model->domain()) << '\n';
    }
    nfe << name << ',' << sr.nfe.measured << ',' << sr.nfe.predicted << ','
        << (sr.nfe.Matches() ? "true" : "false") << '\n';

    if (ctx.tsp) {
      std::ostringstream tours;
      tours << "chain_id,kind,cost,tour\n";
      std::vector<Tour> best;
      for (const auto& c : sr.chains) {
        const Tour final_tour = ctx.tsp->TourFromState(c.final_sample);
        tours << c.chain_id << ",final," << FormatDouble(ctx.tsp->TourLength(final_tour)) << ','
              << TourString(final_tour) << '\n';
        if (c.best_tour) {
          tours << c.chain_id << ",best," << FormatDouble(ctx.tsp->TourLength(*c.best_tour))
                << ',' << TourString(*c.best_tour) << '\n';
          best.push_back(*c.best_tour);
        }
      }
      WriteFile(dir / ("tours_" + name + ".csv"), tours.str());
      if (!best.empty()) {
        const TourDiversity d = ComputeTourDiversity(best, *ctx.tsp);
        std::ostringstream div;
        div << "mean_cost,sd_cost,best_cost,pmc,jaccard,unique\n"
            << FormatDouble(d.mean_cost) << ',' << FormatDouble(d.sd_cost) << ','
            << FormatDouble(d.best_cost) << ',' << FormatDouble(d.pmc) << ','
            << FormatDouble(d.jaccard) << ',' << d.unique << '\n';
        WriteFile(dir / ("diversity_" + name + ".csv"), div.str());
      }
    }
  }
  WriteFile(dir / "summary.csv", summary.str());
  WriteFile(dir / "final_samples.csv", finals.str());
  WriteFile(dir / "nfe.csv", nfe.str());
}

}  // namespace

RunResult RunExperiment(const ExperimentConfig& config, const RunOptions& options) {
  config.Validate();
  const std::unique_ptr<EnergyModel> model = BuildModel(config.model);

  RunContext ctx;
  ctx.config = &config;
  ctx.model = model.get();
  ctx.tsp = dynamic_cast<const TspModel*>(model.get());
  ctx.mlp = dynamic_cast<const BinaryMlpModel*>(model.get());
  ctx.metrics = config.metrics.empty() ? DefaultMetrics(*model) : config.metrics;

  const bool needs_exact = std::any_of(ctx.metrics.begin(), ctx.metrics.end(), [](const auto& m) {
    return m == "tvd" || m == "logmae" || m == "coverage";
  });
  std::optional<ExactDistribution> exact;
  if (needs_exact) {
    try {
      exact = ComputeExactDistribution(*model, config.enumeration_cap);
    } catch (const EnumerationCapError& e) {
      throw ConfigError(std::string("metrics tvd, logmae and coverage need an enumerable domain: ") +
                        e.what());
    }
    ctx.exact = &*exact;
  }
  for (const auto& m : ctx.metrics) {
    if ((m == "tour_cost" || m == "best_cost") && !ctx.tsp) {
      throw ConfigError("metric '" + m + "' needs the tsp model");
    }
    if ((m == "rmse" || m == "best_rmse") && !ctx.mlp) {
      throw ConfigError("metric '" + m + "' needs the mlp model");
    }
  }

  std::size_t workers = config.workers > 0 ? static_cast<std::size_t>(config.workers)
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, config.chains);

  RunResult result;
  for (SamplerKind kind : config.samplers) {
    SamplerResult sr;
    sr.kind = kind;
    sr.chains.resize(config.chains);
    std::vector<std::vector<MetricSeries>> series(config.chains);
    std::atomic<std::size_t> next{0};
    std::mutex error_mu;
    std::exception_ptr error;
    auto worker = [&] {
      for (std::size_t k = next++; k < config.chains; k = next++) {
        try {
          sr.chains[k] = RunOneChain(ctx, kind, static_cast<int>(k), series[k]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    };
    if (workers <= 1) {
      worker();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    for (auto& s : series) {
      for (auto& m : s) sr.series.push_back(std::move(m));
    }
    sr.nfe.sampler = std::string(SamplerName(kind));
    for (const auto& c : sr.chains) sr.nfe.measured += c.stats.energy_calls;
    sr.nfe.predicted = PredictNfe(config, kind);
    if (options.log) {
      *options.log << SamplerName(kind) << ": " << config.chains << " chains x " << config.samples
                   << " samples, energy calls " << sr.nfe.measured << "\n";
    }
    result.samplers.push_back(std::move(sr));
  }

  if (options.write_files) WriteOutputs(config, ctx, result);
  return result;
}

void WriteEnumerationCsv(const ExperimentConfig& config, std::ostream& out) {
  const std::unique_ptr<EnergyModel> model = BuildModel(config.model);
  const ExactDistribution exact = ComputeExactDistribution(*model, config.enumeration_cap);
  out << "state,probability\n";
  for (std::uint64_t idx : RankStates(exact)) {
    out << FormatState(exact.spec.StateAt(idx), exact.spec) << ',' << FormatDouble(exact.probs[idx]) << '\n';
  }
}

std::vector<double> ParseGrid(const std::string& text) {
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find(',', pos);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(pos, end - pos);
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (item.empty() || ec != std::errc() || ptr != item.data() + item.size() || !std::isfinite(v)) {
      throw ConfigError("grid: cannot parse '" + item + "' as a number");
    }
    grid.push_back(v);
    pos = end + 1;
  }
  if (grid.empty()) throw ConfigError("grid: no values");
  return grid;
}

std::vector<AblationRow> RunAblation(const ExperimentConfig& config, const AblationSpec& spec,
                                     const RunOptions& options) {
  static const std::set<std::string> kParams{"alpha",     "eta",       "sweeps",
                                             "refinements", "gk_sigma2", "mh_correction"};
  if (!kParams.count(spec.param)) {
    throw ConfigError("ablation: unknown parameter '" + spec.param +
                      "' (expected alpha, eta, sweeps, refinements, gk_sigma2 or mh_correction)");
  }
  if (spec.grid.empty()) throw ConfigError("ablation: empty grid");
  if (spec.fixed_product && spec.param != "sweeps" && spec.param != "refinements") {
    throw ConfigError("ablation: --fixed-product applies to sweeps or refinements only");
  }
  auto as_int = [&](double v, int lo) {
    if (v != std::floor(v) || v < lo) {
      throw ConfigError("ablation: " + spec.param + " value " + FormatDouble(v) +
                        " must be an integer >= " + std::to_string(lo));
    }
    return static_cast<int>(v);
  };

  const fs::path base(config.out_dir);
  std::vector<AblationRow> rows;
  for (double v : spec.grid) {
    ExperimentConfig sub = config;
    SamplerConfig& p = sub.params;
    if (spec.param == "alpha") p.alpha = v;
    if (spec.param == "eta") p.eta = v;
    if (spec.param == "gk_sigma2") p.gk_sigma2 = v;
    if (spec.param == "mh_correction") p.mh_correction = v != 0.0;
    if (spec.param == "sweeps") p.sweeps = as_int(v, 1);
    if (spec.param == "refinements") p.refinements = as_int(v, 0);
    if (spec.fixed_product) {
      const int product = *spec.fixed_product;
      const int given = spec.param == "sweeps" ? p.sweeps : p.refinements;
      if (given == 0 || product % given != 0) {
        throw ConfigError("ablation: fixed product " + std::to_string(product) +
                          " is not divisible by " + FormatDouble(v));
      }
      if (spec.param == "sweeps") {
        p.refinements = product / given;
      } else {
        p.sweeps = product / given;
      }
    }
    sub.out_dir = (base / ("ablation_" + spec.param) / (spec.param + "=" + FormatDouble(v))).string();
    sub.Validate();
    const RunResult result = RunExperiment(sub, options);
    for (const auto& sr : result.samplers) {
      AblationRow row;
      row.sampler = std::string(SamplerName(sr.kind));
      row.value = v;
      row.sweeps = sub.params.sweeps;
      row.refinements = sub.params.refinements;
      const auto& finals = sr.chains.front().final_metrics;
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.final_logmae_mean = finals.count("logmae") ? sr.Mean("logmae") : nan;
      row.final_logmae_sd = finals.count("logmae") ? sr.StdDev("logmae") : nan;
      row.final_tvd_mean = finals.count("tvd") ? sr.Mean("tvd") : nan;
      row.final_coverage_mean = finals.count("coverage") ? sr.Mean("coverage") : nan;
      row.mwg_acceptance_mean = sr.MeanMwgAcceptance();
      double wall = 0.0;
      for (const auto& c : sr.chains) wall += c.wall_time;
      row.wall_time_mean = wall / static_cast<double>(sr.chains.size());
      rows.push_back(row);
    }
  }

  if (options.write_files) {
    std::ostringstream csv;
    csv << "sampler,param,value,sweeps,refinements,final_logmae_mean,final_logmae_sd,final_tvd_mean,"
           "mwg_acceptance_mean,final_coverage_mean,wall_time_s\n";
    auto num = [](double v) { return std::isnan(v) ? std::string() : FormatDouble(v); };
    for (const auto& r : rows) {
      csv << r.sampler << ',' << spec.param << ',' << FormatDouble(r.value) << ',' << r.sweeps << ',' << r.refinements
          << ',' << num(r.final_logmae_mean) << ',' << num(r.final_logmae_sd) << ','
          << num(r.final_tvd_mean) << ',' << num(r.mwg_acceptance_mean) << ','
          << num(r.final_coverage_mean) << ','
          << (config.record_wall_time ? FormatDouble(r.wall_time_mean) : std::string()) << '\n';
    }
    fs::create_directories(base);
    WriteFile(base / ("ablation_" + spec.param + ".csv"), csv.str());
  }
  return rows;
}

}  // namespace hiss
