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

#ifndef HISS_DIAGNOSTICS_H_
#define HISS_DIAGNOSTICS_H_

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <unordered_set>
#include <vector>

#include "hiss/domain.h"
#include "hiss/models.h"

namespace hiss {

// exp(U(theta)) / Z over every state, normalized with log-sum-exp.
struct ExactDistribution {
  DomainSpec spec;
  std::vector<double> probs;  // indexed by DomainSpec::StateIndex
  double log_partition = 0.0;  // ln Z

  double Prob(const DiscreteState& s) const { return probs[spec.StateIndex(s)]; }
};

ExactDistribution ComputeExactDistribution(const EnergyModel& model,
                                           std::uint64_t cap = kDefaultEnumerationCap);

// State indices sorted by probability, descending; ties keep index order.
std::vector<std::uint64_t> RankStates(const ExactDistribution& exact);

// Size of the leading group of states separated from the rest by the
// largest probability ratio p_(k) / p_(k+1) among states at or above the
// uniform level 1 / |Theta|.
std::size_t DominantStateCount(const ExactDistribution& exact);

// Visit counts over an enumerable domain.
class Histogram {
 public:
  explicit Histogram(const DomainSpec& spec, std::uint64_t cap = kDefaultEnumerationCap);

  void Add(const DiscreteState& s) { AddIndex(spec_.StateIndex(s)); }
  void AddIndex(std::uint64_t index);

  const DomainSpec& spec() const { return spec_; }
  std::uint64_t total() const { return total_; }
  std::uint64_t visited() const { return visited_; }
  const std::vector<std::uint64_t>& counts() const { return counts_; }
  double Frequency(std::uint64_t index) const;

 private:
  DomainSpec spec_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  std::uint64_t visited_ = 0;
};

// Half the L1 distance. Throws std::invalid_argument on domain mismatch.
double TotalVariation(const Histogram& empirical, const ExactDistribution& exact);
double TotalVariation(const std::vector<double>& p, const std::vector<double>& q);

inline constexpr double kLogMaeFloor = -16.0;

// log10 of the mean absolute error over states, floored at 1e-16.
double LogMae(const Histogram& empirical, const ExactDistribution& exact);
double LogMae(const std::vector<double>& p, const std::vector<double>& q);

// Fraction of the state space visited at least once.
double Coverage(const Histogram& empirical);
double Coverage(const std::unordered_set<std::uint64_t>& visited, const DomainSpec& spec);

struct TourDiversity {
  double mean_cost = 0.0;
  double sd_cost = 0.0;
  double best_cost = 0.0;
  double pmc = 0.0;      // mean pairwise count of positions holding different cities
  double jaccard = 1.0;  // mean pairwise |E_a & E_b| / |E_a | E_b| over undirected edges
  std::size_t unique = 0;  // distinct tours modulo rotation and reflection
};

// Throws std::invalid_argument on an empty list or an infeasible tour.
TourDiversity ComputeTourDiversity(const std::vector<Tour>& tours, const TspModel& model);

// Lexicographically smallest rotation over both orientations.
Tour CanonicalTour(const Tour& tour);

// Closed-form energy-call counts.
std::uint64_t PredictedNfeBase(std::uint64_t chains, std::uint64_t samples, std::uint64_t steps);
std::uint64_t PredictedNfeHiss(std::uint64_t chains, std::uint64_t samples, std::uint64_t sweeps,
                               std::uint64_t refinements);
std::uint64_t PredictedNfePt(std::uint64_t chains, std::uint64_t samples, std::uint64_t steps,
                             std::uint64_t temps, std::uint64_t swap_interval);

struct NfeRecord {
  std::string sampler;
  std::uint64_t measured = 0;
  std::uint64_t predicted = 0;
  bool has_prediction = true;

  bool Matches() const { return !has_prediction || measured == predicted; }
};

// Metric values recorded along a chain. Iterations strictly increase.
struct MetricSeries {
  std::string metric;
  int chain_id = 0;
  std::vector<std::uint64_t> iterations;
  std::vector<double> wall_times;
  std::vector<double> values;

  // Throws std::invalid_argument if `iteration` does not exceed the last.
  void Append(std::uint64_t iteration, double wall_time, double value);
};

// CSV with header iteration,wall_time_s,metric,value,chain_id. When
// `with_wall_time` is false the wall-clock column is left empty so the file
// is a pure function of the seed.
void WriteMetricCsv(std::ostream& out, const std::vector<MetricSeries>& series,
                    bool with_wall_time);

// Shortest round-trip decimal form.
std::string FormatDouble(double v);

}  // namespace hiss

#endif  // HISS_DIAGNOSTICS_H_
