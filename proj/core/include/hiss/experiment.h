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

#ifndef HISS_EXPERIMENT_H_
#define HISS_EXPERIMENT_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hiss/diagnostics.h"
#include "hiss/domain.h"
#include "hiss/models.h"
#include "hiss/samplers.h"

namespace hiss {

// Config parse or validation failure. The message carries the source line
// (1-based) and field path when known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelConfig {
  std::string name = "bernoulli4d";  // bernoulli4d | ising | tsp | mlp
  // ising
  std::size_t side = 3;
  double a = 0.5;
  double b = 0.1;
  // tsp
  std::string file;
  // mlp
  std::string csv;
  std::size_t hidden = 10;
  std::size_t synthetic_rows = 40;
  std::size_t synthetic_inputs = 4;
  double synthetic_noise = 0.1;
  std::uint64_t data_seed = 7;
  Vector alphabet{-1.0, 1.0};
};

enum class InitKind { kLowest, kRandom };

struct ExperimentConfig {
  ModelConfig model;
  std::vector<SamplerKind> samplers{SamplerKind::kHiss};
  SamplerConfig params;
  int steps_per_sample = 0;  // 0: G * L
  PtConfig pt;
  std::size_t chains = 10;
  std::size_t samples = 1000;
  std::uint64_t seed = 0;
  InitKind init = InitKind::kLowest;
  std::vector<std::string> metrics;  // empty: defaults for the model
  std::size_t metric_every = 10;
  int workers = 1;
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  std::string out_dir = "out";
  bool record_wall_time = false;

  // Throws ConfigError.
  void Validate() const;
};

ExperimentConfig ParseExperimentConfig(const std::string& yaml_text,
                                       const std::string& base_dir = ".");
ExperimentConfig LoadExperimentConfig(const std::string& path);

// Resolved config in the input schema plus a version line; loading it
// reproduces the run.
std::string EmitManifest(const ExperimentConfig& config);

std::string VersionString();

std::unique_ptr<EnergyModel> BuildModel(const ModelConfig& config);

// Metrics recorded when the config lists none.
std::vector<std::string> DefaultMetrics(const EnergyModel& model);
std::vector<std::string> KnownMetrics();

DiscreteState InitialState(const EnergyModel& model, InitKind kind, Rng& rng);

struct ChainSummary {
  int chain_id = 0;
  ChainStats stats;
  double wall_time = 0.0;
  std::map<std::string, double> final_metrics;
  DiscreteState final_sample;
  std::optional<Tour> best_tour;
};

struct SamplerResult {
  SamplerKind kind = SamplerKind::kHiss;
  std::vector<ChainSummary> chains;
  std::vector<MetricSeries> series;
  NfeRecord nfe;

  double Mean(const std::string& metric) const;
  double StdDev(const std::string& metric) const;
  double StdErr(const std::string& metric) const;
  double MeanMwgAcceptance() const;
};

struct RunResult {
  std::vector<SamplerResult> samplers;

  // Throws std::out_of_range if `kind` was not run.
  const SamplerResult& Get(SamplerKind kind) const;
};

struct RunOptions {
  bool write_files = true;
  std::ostream* log = nullptr;
};

// Runs every configured sampler for `chains` chains and writes
//   manifest.yaml, metrics_<sampler>.csv, summary.csv, nfe.csv,
//   final_samples.csv and, for TSP, tours_<sampler>.csv
// under config.out_dir.
RunResult RunExperiment(const ExperimentConfig& config, const RunOptions& options = {});

// CSV `state,probability` sorted by probability descending.
void WriteEnumerationCsv(const ExperimentConfig& config, std::ostream& out);

// Levels joined without separators when every level of the domain is an
// integer in [0, 9] (so 0110), otherwise separated by ';'.
std::string FormatState(const DiscreteState& state, const DomainSpec& spec);

struct AblationRow {
  std::string sampler;
  double value = 0.0;
  int sweeps = 0;
  int refinements = 0;
  double final_logmae_mean = 0.0;
  double final_logmae_sd = 0.0;
  double final_tvd_mean = 0.0;
  double mwg_acceptance_mean = 0.0;
  double final_coverage_mean = 0.0;
  double wall_time_mean = 0.0;
};

struct AblationSpec {
  std::string param;  // alpha | eta | sweeps | refinements | gk_sigma2 | mh_correction
  std::vector<double> grid;
  // When set with param == sweeps, refinements = fixed_product / sweeps.
  std::optional<int> fixed_product;
};

std::vector<double> ParseGrid(const std::string& text);

// One sub-run per grid value under <out_dir>/ablation_<param>/<param>=<v>,
// plus <out_dir>/ablation_<param>.csv.
std::vector<AblationRow> RunAblation(const ExperimentConfig& config, const AblationSpec& spec,
                                     const RunOptions& options = {});

}  // namespace hiss

#endif  // HISS_EXPERIMENT_H_
