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

#include "hiss/samplers.h"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace hiss {
namespace {

double LogSumExp(const Vector& xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

// Index drawn by cumulative-sum inversion of one uniform.
std::size_t InvertCumulative(const Vector& log_probs, double u) {
  double cum = 0.0;
  for (std::size_t k = 0; k < log_probs.size(); ++k) {
    cum += std::exp(log_probs[k]);
    if (u < cum) return k;
  }
  // Round-off left u above the final partial sum: take the last level with
  // nonzero mass.
  for (std::size_t k = log_probs.size(); k-- > 0;) {
    if (std::isfinite(log_probs[k])) return k;
  }
  return log_probs.size() - 1;
}

bool MetropolisAccept(double log_ratio, Rng& rng) {
  const double u = rng.OpenUniform();
  return log_ratio >= 0.0 || std::log(u) < log_ratio;
}

// Proposals outside the feasible set are rejected and the current state is
// retained. The uniform is drawn first so the stream does not depend on
// feasibility.
bool AcceptFeasible(double log_ratio, const DiscreteState& proposal, const EnergyModel& model,
                    Rng& rng, ChainStats& stats, bool mh_correction = true) {
  const bool mh = MetropolisAccept(log_ratio, rng) || !mh_correction;
  if (!model.Feasible(proposal)) {
    ++stats.infeasible_rejects;
    return false;
  }
  return mh;
}

void CheckDim(const DiscreteState& theta, const EnergyModel& model) {
  if (theta.dim() != model.dim()) throw std::invalid_argument("state dimension does not match model");
}

}  // namespace

void SamplerConfig::Validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be > 0");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw std::invalid_argument("eta must be > 0");
  if (sweeps < 1) throw std::invalid_argument("sweeps (G) must be >= 1");
  if (refinements < 0) throw std::invalid_argument("refinements (L) must be >= 0");
  if (kernel == KernelKind::kGaussianVp && !(gk_sigma2 > 0.0 && gk_sigma2 < 1.0)) {
    throw std::invalid_argument("gk_sigma2 must lie in (0, 1)");
  }
}

CouplingKernel SamplerConfig::MakeKernel() const {
  if (kernel == KernelKind::kGaussianVp) return GaussianKernel::VariancePreserving(gk_sigma2);
  return LogisticKernel(eta);
}

void PtConfig::Validate() const {
  if (num_temps < 2) throw std::invalid_argument("parallel tempering needs num_temps >= 2");
  if (swap_interval < 1) throw std::invalid_argument("swap_interval must be >= 1");
  if (!(min_beta > 0.0 && min_beta < 1.0)) throw std::invalid_argument("min_beta must lie in (0, 1)");
}

Vector PtConfig::Ladder() const {
  Validate();
  const double ratio = std::pow(min_beta, 1.0 / (num_temps - 1));
  Vector betas(num_temps);
  for (int k = 0; k < num_temps; ++k) betas[k] = std::pow(ratio, k);
  return betas;
}

double ChainStats::MwgAcceptance() const {
  return mwg_attempt == 0 ? 0.0 : static_cast<double>(mwg_accept) / mwg_attempt;
}

double ChainStats::RefineAcceptance() const {
  return refine_attempt == 0 ? 0.0 : static_cast<double>(refine_accept) / refine_attempt;
}

// ---------------------------------------------------------------------------

CoordinateCategorical CoordinateCategorical::FromLogits(std::vector<Vector> logits) {
  CoordinateCategorical c;
  for (Vector& row : logits) {
    const double norm = LogSumExp(row);
    for (double& v : row) v -= norm;
  }
  c.log_probs_ = std::move(logits);
  return c;
}

DiscreteState CoordinateCategorical::Sample(const DomainSpec& spec, Rng& rng) const {
  DiscreteState s{Vector(dim())};
  for (std::size_t i = 0; i < dim(); ++i) {
    s.values[i] = spec.levels(i)[InvertCumulative(log_probs_[i], rng.Uniform())];
  }
  return s;
}

double CoordinateCategorical::LogProb(const DomainSpec& spec, const DiscreteState& state) const {
  double total = 0.0;
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto k = spec.LevelIndex(i, state.values[i]);
    if (!k) return -std::numeric_limits<double>::infinity();
    total += log_probs_[i][*k];
  }
  return total;
}

CoordinateCategorical DlpProposal(const DiscreteState& theta, std::span<const double> grad,
                                  double alpha, const DomainSpec& spec) {
  if (grad.size() != theta.dim() || theta.dim() != spec.dim()) {
    throw std::invalid_argument("DlpProposal: dimension mismatch");
  }
  std::vector<Vector> logits(spec.dim());
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    const auto levels = spec.levels(i);
    logits[i].resize(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) {
      const double delta = levels[k] - theta.values[i];
      logits[i][k] = 0.5 * grad[i] * delta - delta * delta / (2.0 * alpha);
    }
  }
  return CoordinateCategorical::FromLogits(std::move(logits));
}

DiscreteState SampleDlp(const DiscreteState& theta, std::span<const double> grad, double alpha,
                        const DomainSpec& spec, Rng& rng) {
  return DlpProposal(theta, grad, alpha, spec).Sample(spec, rng);
}

StepResult DmalaStep(const DiscreteState& theta, const EnergyModel& model, double alpha, Rng& rng,
                     ChainStats& stats, double beta) {
  CheckDim(theta, model);
  const DomainSpec& spec = model.domain();
  Vector grad = model.Gradient(theta);
  for (double& g : grad) g *= beta;
  const CoordinateCategorical forward = DlpProposal(theta, grad, alpha, spec);
  DiscreteState proposal = forward.Sample(spec, rng);

  Vector grad_prop = model.Gradient(proposal);
  for (double& g : grad_prop) g *= beta;
  const CoordinateCategorical reverse = DlpProposal(proposal, grad_prop, alpha, spec);
  stats.energy_calls += kGradientCost;

  const double log_ratio = beta * (model.Energy(proposal) - model.Energy(theta)) +
                           reverse.LogProb(spec, theta) - forward.LogProb(spec, proposal);
  stats.energy_calls += kMhCost;

  ++stats.refine_attempt;
  if (AcceptFeasible(log_ratio, proposal, model, rng, stats)) {
    ++stats.refine_accept;
    return {std::move(proposal), true, log_ratio};
  }
  return {theta, false, log_ratio};
}

namespace {

struct FlipCandidates {
  std::vector<std::pair<std::size_t, std::size_t>> moves;  // (coordinate, level index)
  Vector log_probs;
};

FlipCandidates GwgCandidates(const DiscreteState& theta, std::span<const double> grad,
                             const DomainSpec& spec) {
  FlipCandidates c;
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    const auto levels = spec.levels(i);
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (levels[k] == theta.values[i]) continue;
      c.moves.emplace_back(i, k);
      c.log_probs.push_back(0.5 * grad[i] * (levels[k] - theta.values[i]));
    }
  }
  if (!c.log_probs.empty()) {
    const double norm = LogSumExp(c.log_probs);
    for (double& v : c.log_probs) v -= norm;
  }
  return c;
}

}  // namespace

StepResult GwgStep(const DiscreteState& theta, const EnergyModel& model, Rng& rng,
                   ChainStats& stats) {
  CheckDim(theta, model);
  const DomainSpec& spec = model.domain();
  const Vector grad = model.Gradient(theta);
  const FlipCandidates forward = GwgCandidates(theta, grad, spec);
  if (forward.moves.empty()) {
    stats.energy_calls += kGradientStepCost;
    ++stats.refine_attempt;
    ++stats.refine_accept;
    return {theta, true, 0.0};
  }
  const std::size_t pick = InvertCumulative(forward.log_probs, rng.Uniform());
  const auto [coord, level] = forward.moves[pick];
  DiscreteState proposal = theta;
  proposal.values[coord] = spec.levels(coord)[level];

  const Vector grad_prop = model.Gradient(proposal);
  const FlipCandidates reverse = GwgCandidates(proposal, grad_prop, spec);
  stats.energy_calls += kGradientCost;
  const std::size_t back_level = *spec.LevelIndex(coord, theta.values[coord]);
  double log_reverse = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < reverse.moves.size(); ++m) {
    if (reverse.moves[m].first == coord && reverse.moves[m].second == back_level) {
      log_reverse = reverse.log_probs[m];
      break;
    }
  }
  const double log_ratio = model.Energy(proposal) - model.Energy(theta) + log_reverse -
                           forward.log_probs[pick];
  stats.energy_calls += kMhCost;

  ++stats.refine_attempt;
  if (AcceptFeasible(log_ratio, proposal, model, rng, stats)) {
    ++stats.refine_accept;
    return {std::move(proposal), true, log_ratio};
  }
  return {theta, false, log_ratio};
}

// ---------------------------------------------------------------------------
// HiSS

AuxState HissNoise(const DiscreteState& theta, const CouplingKernel& kernel, Rng& rng) {
  AuxState aux{Vector(theta.dim())};
  for (std::size_t i = 0; i < theta.dim(); ++i) aux.values[i] = kernel.Sample(theta.values[i], rng);
  return aux;
}

double LogNoiseDensity(const AuxState& theta_a, const DiscreteState& theta,
                       const CouplingKernel& kernel) {
  return kernel.LogDensity(theta_a, theta);
}

CoordinateCategorical DenoiseProposal(const AuxState& theta_a, const CouplingKernel& kernel,
                                      const DomainSpec& spec) {
  if (theta_a.dim() != spec.dim()) throw std::invalid_argument("DenoiseProposal: dimension mismatch");
  std::vector<Vector> logits(spec.dim());
  for (std::size_t i = 0; i < spec.dim(); ++i) {
    const auto levels = spec.levels(i);
    logits[i].resize(levels.size());
    for (std::size_t k = 0; k < levels.size(); ++k) {
      logits[i][k] = kernel.LogDensity(theta_a.values[i], levels[k]);
    }
  }
  return CoordinateCategorical::FromLogits(std::move(logits));
}

DiscreteState HissDenoise(const AuxState& theta_a, const CouplingKernel& kernel,
                          const DomainSpec& spec, Rng& rng) {
  return DenoiseProposal(theta_a, kernel, spec).Sample(spec, rng);
}

MwgTerms ComputeMwgTerms(const DiscreteState& theta_prev, const AuxState& theta_a,
                         const DiscreteState& theta_prop, const EnergyModel& model,
                         const CouplingKernel& kernel, const CoordinateCategorical& denoise) {
  const DomainSpec& spec = model.domain();
  MwgTerms t;
  t.energy_prop = model.Energy(theta_prop);
  t.energy_prev = model.Energy(theta_prev);
  t.log_noise_prop = LogNoiseDensity(theta_a, theta_prop, kernel);
  t.log_noise_prev = LogNoiseDensity(theta_a, theta_prev, kernel);
  t.log_denoise_prev = denoise.LogProb(spec, theta_prev);
  t.log_denoise_prop = denoise.LogProb(spec, theta_prop);
  return t;
}

StepResult HissMwgAccept(const DiscreteState& theta_prev, const AuxState& theta_a,
                         const DiscreteState& theta_prop, const EnergyModel& model,
                         const CouplingKernel& kernel, const CoordinateCategorical& denoise,
                         Rng& rng, ChainStats& stats, bool mh_correction) {
  const MwgTerms terms = ComputeMwgTerms(theta_prev, theta_a, theta_prop, model, kernel, denoise);
  stats.energy_calls += kMhCost;
  const double log_ratio = terms.LogRatio();
  ++stats.mwg_attempt;
  // The uniform is drawn even without correction so both variants consume
  // the stream identically.
  const bool accept = AcceptFeasible(log_ratio, theta_prop, model, rng, stats, mh_correction);
  if (accept) {
    ++stats.mwg_accept;
    return {theta_prop, true, log_ratio};
  }
  return {theta_prev, false, log_ratio};
}

Vector ConditionalGradient(const DiscreteState& theta, const AuxState& theta_a,
                           const EnergyModel& model, const CouplingKernel& kernel) {
  Vector grad = model.Gradient(theta);
  for (std::size_t i = 0; i < grad.size(); ++i) {
    grad[i] += kernel.DLogDensityDLevel(theta_a.values[i], theta.values[i]);
  }
  return grad;
}

double JointEnergy(const DiscreteState& theta, const AuxState& theta_a, const EnergyModel& model,
                   const CouplingKernel& kernel) {
  return model.Energy(theta) + kernel.LogDensity(theta_a, theta);
}

StepResult ConditionalDmalaStep(const JointState& joint, const EnergyModel& model, double alpha,
                                const CouplingKernel& kernel, Rng& rng, ChainStats& stats) {
  const DiscreteState& theta = joint.theta;
  const AuxState& aux = joint.theta_a;
  CheckDim(theta, model);
  const DomainSpec& spec = model.domain();

  const CoordinateCategorical forward =
      DlpProposal(theta, ConditionalGradient(theta, aux, model, kernel), alpha, spec);
  DiscreteState proposal = forward.Sample(spec, rng);
  const CoordinateCategorical reverse =
      DlpProposal(proposal, ConditionalGradient(proposal, aux, model, kernel), alpha, spec);
  stats.energy_calls += kGradientCost;

  const double log_ratio = JointEnergy(proposal, aux, model, kernel) -
                           JointEnergy(theta, aux, model, kernel) + reverse.LogProb(spec, theta) -
                           forward.LogProb(spec, proposal);
  stats.energy_calls += kMhCost;

  ++stats.refine_attempt;
  if (AcceptFeasible(log_ratio, proposal, model, rng, stats)) {
    ++stats.refine_accept;
    return {std::move(proposal), true, log_ratio};
  }
  return {theta, false, log_ratio};
}

DiscreteState HissGibbsStep(const DiscreteState& theta, const EnergyModel& model,
                            const SamplerConfig& config, const CouplingKernel& kernel, Rng& rng,
                            ChainStats& stats) {
  CheckDim(theta, model);
  const DomainSpec& spec = model.domain();
  JointState joint{theta, HissNoise(theta, kernel, rng)};
  const CoordinateCategorical denoise = DenoiseProposal(joint.theta_a, kernel, spec);
  const DiscreteState proposal = denoise.Sample(spec, rng);
  joint.theta = HissMwgAccept(theta, joint.theta_a, proposal, model, kernel, denoise, rng, stats,
                              config.mh_correction)
                    .state;
  for (int l = 0; l < config.refinements; ++l) {
    joint.theta = ConditionalDmalaStep(joint, model, config.alpha, kernel, rng, stats).state;
  }
  return std::move(joint.theta);
}

DiscreteState HissSweep(const DiscreteState& theta, const EnergyModel& model,
                        const SamplerConfig& config, Rng& rng, ChainStats& stats) {
  config.Validate();
  const CouplingKernel kernel = config.MakeKernel();
  DiscreteState current = theta;
  for (int g = 0; g < config.sweeps; ++g) {
    current = HissGibbsStep(current, model, config, kernel, rng, stats);
  }
  return current;
}

// ---------------------------------------------------------------------------
// Parallel tempering

PtState MakePtState(const DiscreteState& init, const PtConfig& pt) {
  PtState state;
  state.betas = pt.Ladder();
  state.replicas.assign(state.betas.size(), init);
  return state;
}

double SwapLogProbability(double beta_k, double beta_k1, double energy_k, double energy_k1) {
  return std::min(0.0, (beta_k - beta_k1) * (energy_k1 - energy_k));
}

void PtDmalaStep(PtState& state, const EnergyModel& model, double alpha, const PtConfig& pt,
                 Rng& rng, ChainStats& stats) {
  if (state.replicas.size() < 2 || state.replicas.size() != state.betas.size()) {
    throw std::invalid_argument("PtDmalaStep: need one replica per temperature, at least two");
  }
  for (std::size_t k = 0; k < state.replicas.size(); ++k) {
    state.replicas[k] = DmalaStep(state.replicas[k], model, alpha, rng, stats, state.betas[k]).state;
  }
  ++state.steps;
  if (state.steps % static_cast<std::uint64_t>(pt.swap_interval) != 0) return;
  for (std::size_t k = 0; k + 1 < state.replicas.size(); ++k) {
    const double uk = model.Energy(state.replicas[k]);
    const double uk1 = model.Energy(state.replicas[k + 1]);
    stats.energy_calls += kSwapCost;
    ++stats.swap_attempt;
    if (std::log(rng.OpenUniform()) < SwapLogProbability(state.betas[k], state.betas[k + 1], uk, uk1)) {
      std::swap(state.replicas[k], state.replicas[k + 1]);
      ++stats.swap_accept;
    }
  }
}

// ---------------------------------------------------------------------------
// Chain driver

namespace {

constexpr std::array<std::pair<SamplerKind, std::string_view>, 6> kSamplerNames{{
    {SamplerKind::kHiss, "hiss"},
    {SamplerKind::kDmala, "dmala"},
    {SamplerKind::kGwg, "gwg"},
    {SamplerKind::kPtDmala, "pt_dmala"},
    {SamplerKind::kHissGk, "hiss_gk"},
    {SamplerKind::kHissNoMh, "hiss_nomh"},
}};

}  // namespace

std::string_view SamplerName(SamplerKind kind) {
  for (const auto& [k, name] : kSamplerNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

std::optional<SamplerKind> ParseSamplerKind(std::string_view name) {
  for (const auto& [k, n] : kSamplerNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

std::vector<std::string> SamplerNames() {
  std::vector<std::string> names;
  for (const auto& entry : kSamplerNames) names.emplace_back(entry.second);
  return names;
}

SamplerConfig EffectiveConfig(SamplerKind kind, SamplerConfig config) {
  if (kind == SamplerKind::kHissGk) config.kernel = KernelKind::kGaussianVp;
  if (kind == SamplerKind::kHissNoMh) config.mh_correction = false;
  return config;
}

ChainTrace RunChain(const EnergyModel& model, SamplerKind kind, const SamplerConfig& base_config,
                    const ChainOptions& options, const DiscreteState& init, Rng& rng,
                    const SampleCallback& on_sample) {
  const SamplerConfig config = EffectiveConfig(kind, base_config);
  config.Validate();
  CheckDim(init, model);
  if (!model.domain().Contains(init)) throw std::invalid_argument("RunChain: initial state outside domain");
  const int steps = options.steps_per_sample > 0 ? options.steps_per_sample : config.BaselineSteps();
  const CouplingKernel kernel = config.MakeKernel();

  ChainTrace trace;
  if (options.keep_samples) trace.samples.reserve(options.samples);
  trace.sample_times.reserve(options.samples);
  DiscreteState current = init;
  std::optional<PtState> pt;
  if (kind == SamplerKind::kPtDmala) pt = MakePtState(init, options.pt);

  const auto start = std::chrono::steady_clock::now();
  for (std::size_t n = 0; n < options.samples; ++n) {
    switch (kind) {
      case SamplerKind::kHiss:
      case SamplerKind::kHissGk:
      case SamplerKind::kHissNoMh:
        for (int g = 0; g < config.sweeps; ++g) {
          current = HissGibbsStep(current, model, config, kernel, rng, trace.stats);
        }
        break;
      case SamplerKind::kDmala:
        for (int s = 0; s < steps; ++s) current = DmalaStep(current, model, config.alpha, rng, trace.stats).state;
        break;
      case SamplerKind::kGwg:
        for (int s = 0; s < steps; ++s) current = GwgStep(current, model, rng, trace.stats).state;
        break;
      case SamplerKind::kPtDmala:
        for (int s = 0; s < steps; ++s) PtDmalaStep(*pt, model, config.alpha, options.pt, rng, trace.stats);
        current = pt->replicas[0];
        break;
    }
    trace.sample_times.push_back(
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
    if (on_sample) on_sample(n, current, trace.stats);
    if (options.keep_samples) trace.samples.push_back(current);
  }
  trace.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

}  // namespace hiss
