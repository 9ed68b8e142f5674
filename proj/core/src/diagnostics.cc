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

#include "hiss/diagnostics.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <initializer_list>
#include <map>
#include <numeric>
#include <set>
#include <stdexcept>
#include <utility>

namespace hiss {

ExactDistribution ComputeExactDistribution(const EnergyModel& model, std::uint64_t cap) {
  const DomainSpec& spec = model.domain();
  std::vector<double> energies;
  energies.reserve(spec.CheckedStateCount(cap));
  for (const DiscreteState& s : EnumerateStates(spec, cap)) energies.push_back(model.Energy(s));
  const double m = *std::max_element(energies.begin(), energies.end());
  double z = 0.0;
  for (double u : energies) z += std::exp(u - m);
  ExactDistribution exact{spec, {}, m + std::log(z)};
  exact.probs.resize(energies.size());
  for (std::size_t k = 0; k < energies.size(); ++k) exact.probs[k] = std::exp(energies[k] - m) / z;
  return exact;
}

std::vector<std::uint64_t> RankStates(const ExactDistribution& exact) {
  std::vector<std::uint64_t> order(exact.probs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::uint64_t a, std::uint64_t b) {
    return exact.probs[a] > exact.probs[b];
  });
  return order;
}

std::size_t DominantStateCount(const ExactDistribution& exact) {
  const auto order = RankStates(exact);
  if (order.size() < 2) return order.size();
  const double uniform = 1.0 / static_cast<double>(order.size());
  std::size_t best = 1;
  double best_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < order.size(); ++k) {
    const double p = exact.probs[order[k]];
    if (p < uniform) break;
    const double ratio = p / exact.probs[order[k + 1]];
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = k + 1;
    }
  }
  return best;
}

Histogram::Histogram(const DomainSpec& spec, std::uint64_t cap)
    : spec_(spec), counts_(spec.CheckedStateCount(cap), 0) {}

void Histogram::AddIndex(std::uint64_t index) {
  if (counts_.at(index)++ == 0) ++visited_;
  ++total_;
}

double Histogram::Frequency(std::uint64_t index) const {
  return total_ == 0 ? 0.0 : static_cast<double>(counts_[index]) / static_cast<double>(total_);
}

namespace {

std::vector<double> Frequencies(const Histogram& h) {
  std::vector<double> f(h.counts().size());
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = h.Frequency(k);
  return f;
}

void CheckSameDomain(const Histogram& h, const ExactDistribution& exact) {
  if (!(h.spec() == exact.spec)) throw std::invalid_argument("histogram and exact distribution differ in domain");
}

}  // namespace

double TotalVariation(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size()) throw std::invalid_argument("TotalVariation: size mismatch");
  double l1 = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) l1 += std::abs(p[k] - q[k]);
  return std::clamp(0.5 * l1, 0.0, 1.0);
}

double TotalVariation(const Histogram& empirical, const ExactDistribution& exact) {
  CheckSameDomain(empirical, exact);
  return TotalVariation(Frequencies(empirical), exact.probs);
}

double LogMae(const std::vector<double>& p, const std::vector<double>& q) {
  if (p.size() != q.size() || p.empty()) throw std::invalid_argument("LogMae: size mismatch");
  double sum = 0.0;
  for (std::size_t k = 0; k < p.size(); ++k) sum += std::abs(p[k] - q[k]);
  const double mae = sum / static_cast<double>(p.size());
  return std::max(kLogMaeFloor, std::log10(std::max(mae, 1e-300)));
}

double LogMae(const Histogram& empirical, const ExactDistribution& exact) {
  CheckSameDomain(empirical, exact);
  return LogMae(Frequencies(empirical), exact.probs);
}

double Coverage(const Histogram& empirical) {
  return static_cast<double>(empirical.visited()) / static_cast<double>(empirical.counts().size());
}

double Coverage(const std::unordered_set<std::uint64_t>& visited, const DomainSpec& spec) {
  const auto count = spec.StateCount();
  if (!count) throw EnumerationCapError(std::nullopt, kDefaultEnumerationCap);
  return static_cast<double>(visited.size()) / static_cast<double>(*count);
}

Tour CanonicalTour(const Tour& tour) {
  Tour best = tour;
  const std::size_t n = tour.size();
  Tour reversed(tour.rbegin(), tour.rend());
  for (const Tour* base : std::initializer_list<const Tour*>{&tour, &reversed}) {
    for (std::size_t r = 0; r < n; ++r) {
      Tour rotated(n);
      for (std::size_t k = 0; k < n; ++k) rotated[k] = (*base)[(k + r) % n];
      if (rotated < best) best = std::move(rotated);
    }
  }
  return best;
}

namespace {

std::set<std::pair<int, int>> TourEdges(const Tour& tour) {
  std::set<std::pair<int, int>> edges;
  for (std::size_t k = 0; k < tour.size(); ++k) {
    const int a = tour[k], b = tour[(k + 1) % tour.size()];
    edges.emplace(std::min(a, b), std::max(a, b));
  }
  return edges;
}

}  // namespace

TourDiversity ComputeTourDiversity(const std::vector<Tour>& tours, const TspModel& model) {
  if (tours.empty()) throw std::invalid_argument("tour diversity needs at least one tour");
  const std::size_t n = model.cities();
  TourDiversity out;
  std::vector<double> costs;
  std::set<Tour> canonical;
  std::vector<std::set<std::pair<int, int>>> edges;
  for (const Tour& t : tours) {
    if (!IsPermutation(t, n)) throw std::invalid_argument("tour diversity: infeasible tour");
    costs.push_back(model.TourLength(t));
    canonical.insert(CanonicalTour(t));
    edges.push_back(TourEdges(t));
  }
  const double m = static_cast<double>(costs.size());
  out.mean_cost = std::accumulate(costs.begin(), costs.end(), 0.0) / m;
  double var = 0.0;
  for (double c : costs) var += (c - out.mean_cost) * (c - out.mean_cost);
  out.sd_cost = costs.size() > 1 ? std::sqrt(var / (m - 1.0)) : 0.0;
  out.best_cost = *std::min_element(costs.begin(), costs.end());
  out.unique = canonical.size();

  double pmc = 0.0, jac = 0.0;
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < tours.size(); ++a) {
    for (std::size_t b = a + 1; b < tours.size(); ++b) {
      std::size_t mismatch = 0;
      for (std::size_t k = 0; k < n; ++k) mismatch += tours[a][k] != tours[b][k];
      std::size_t common = 0;
      for (const auto& e : edges[a]) common += edges[b].count(e);
      const std::size_t uni = edges[a].size() + edges[b].size() - common;
      pmc += static_cast<double>(mismatch);
      jac += static_cast<double>(common) / static_cast<double>(uni);
      ++pairs;
    }
  }
  if (pairs > 0) {
    out.pmc = pmc / static_cast<double>(pairs);
    out.jaccard = jac / static_cast<double>(pairs);
  }
  return out;
}

namespace {

// Closed-form accounting, kept separate from the sampler call-site counters
// so the two routes check each other.
constexpr std::uint64_t kCostPerGradientStep = 4;
constexpr std::uint64_t kCostPerMwg = 2;
constexpr std::uint64_t kCostPerSwap = 2;

}  // namespace

std::uint64_t PredictedNfeBase(std::uint64_t chains, std::uint64_t samples, std::uint64_t steps) {
  return chains * samples * steps * kCostPerGradientStep;
}

std::uint64_t PredictedNfeHiss(std::uint64_t chains, std::uint64_t samples, std::uint64_t sweeps,
                               std::uint64_t refinements) {
  return chains * samples * sweeps * (kCostPerMwg + refinements * kCostPerGradientStep);
}

std::uint64_t PredictedNfePt(std::uint64_t chains, std::uint64_t samples, std::uint64_t steps,
                             std::uint64_t temps, std::uint64_t swap_interval) {
  const std::uint64_t refinement = samples * chains * temps * steps * kCostPerGradientStep;
  const std::uint64_t swaps = (samples * steps / swap_interval) * chains * (temps - 1) * kCostPerSwap;
  return refinement + swaps;
}

void MetricSeries::Append(std::uint64_t iteration, double wall_time, double value) {
  if (!iterations.empty() && iteration <= iterations.back()) {
    throw std::invalid_argument("MetricSeries: iterations must strictly increase");
  }
  iterations.push_back(iteration);
  wall_times.push_back(wall_time);
  values.push_back(value);
}

std::string FormatDouble(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void WriteMetricCsv(std::ostream& out, const std::vector<MetricSeries>& series,
                    bool with_wall_time) {
  out << "iteration,wall_time_s,metric,value,chain_id\n";
  for (const MetricSeries& s : series) {
    for (std::size_t k = 0; k < s.iterations.size(); ++k) {
      out << s.iterations[k] << ',';
      if (with_wall_time) out << FormatDouble(s.wall_times[k]);
      out << ',' << s.metric << ',' << FormatDouble(s.values[k]) << ',' << s.chain_id << '\n';
    }
  }
}

}  // namespace hiss
