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

#ifndef HISS_SAMPLERS_H_
#define HISS_SAMPLERS_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hiss/domain.h"
#include "hiss/kernels.h"
#include "hiss/rng.h"

namespace hiss {

// Energy-call accounting units: a gradient evaluation and an MH correction
// each cost two, a replica swap costs two.
inline constexpr std::uint64_t kGradientCost = 2;
inline constexpr std::uint64_t kMhCost = 2;
inline constexpr std::uint64_t kSwapCost = 2;
inline constexpr std::uint64_t kGradientStepCost = kGradientCost + kMhCost;

struct SamplerConfig {
  double alpha = 0.2;     // DLP step size
  double eta = 4.0;       // logistic coupling scale
  int sweeps = 5;         // Gibbs sweeps G per emitted sample
  int refinements = 2;    // conditional DMALA steps L per sweep
  std::uint64_t seed = 0;
  KernelKind kernel = KernelKind::kLogistic;
  double gk_sigma2 = 0.9;  // VP Gaussian variance when kernel == kGaussianVp
  bool mh_correction = true;

  // Throws std::invalid_argument naming the offending field.
  void Validate() const;
  CouplingKernel MakeKernel() const;
  // Per-sample step budget S = G * L used by the single-kernel baselines.
  int BaselineSteps() const { return sweeps * refinements > 0 ? sweeps * refinements : 1; }
};

struct PtConfig {
  int num_temps = 5;
  int swap_interval = 4;
  double min_beta = 0.1;  // inverse temperature of the hottest replica

  void Validate() const;
  // beta_k = r^k with r = min_beta^(1 / (K - 1)); beta_0 = 1.
  Vector Ladder() const;
};

struct ChainStats {
  std::uint64_t mwg_accept = 0;
  std::uint64_t mwg_attempt = 0;
  std::uint64_t refine_accept = 0;
  std::uint64_t refine_attempt = 0;
  std::uint64_t swap_accept = 0;
  std::uint64_t swap_attempt = 0;
  std::uint64_t infeasible_rejects = 0;
  std::uint64_t energy_calls = 0;  // accounting units, see kGradientCost

  double MwgAcceptance() const;
  double RefineAcceptance() const;
};

struct ChainTrace {
  std::vector<DiscreteState> samples;
  std::vector<double> sample_times;  // seconds since chain start
  ChainStats stats;
  double wall_time = 0.0;
};

struct StepResult {
  DiscreteState state;
  bool accepted = false;
  double log_ratio = 0.0;
};

// Independent categorical distribution per coordinate, stored as normalized
// log probabilities in alphabet order.
class CoordinateCategorical {
 public:
  static CoordinateCategorical FromLogits(std::vector<Vector> logits);

  std::size_t dim() const { return log_probs_.size(); }
  const Vector& log_probs(std::size_t i) const { return log_probs_[i]; }

  // Cumulative-sum inversion of one uniform per coordinate.
  DiscreteState Sample(const DomainSpec& spec, Rng& rng) const;
  double LogProb(const DomainSpec& spec, const DiscreteState& state) const;

 private:
  std::vector<Vector> log_probs_;
};

// Discrete Langevin proposal: per coordinate, softmax over levels v of
//   grad_i (v - theta_i) / 2 - (v - theta_i)^2 / (2 alpha).
CoordinateCategorical DlpProposal(const DiscreteState& theta, std::span<const double> grad,
                                  double alpha, const DomainSpec& spec);
DiscreteState SampleDlp(const DiscreteState& theta, std::span<const double> grad, double alpha,
                        const DomainSpec& spec, Rng& rng);

// One Metropolis-adjusted DLP step targeting exp(beta U).
StepResult DmalaStep(const DiscreteState& theta, const EnergyModel& model, double alpha, Rng& rng,
                     ChainStats& stats, double beta = 1.0);

// Gibbs-with-gradients: choose one (coordinate, level) pair with probability
// proportional to exp(grad_i (v - theta_i) / 2), then MH-correct.
StepResult GwgStep(const DiscreteState& theta, const EnergyModel& model, Rng& rng,
                   ChainStats& stats);

// Noising: theta_a_i ~ k(. | theta_i).
AuxState HissNoise(const DiscreteState& theta, const CouplingKernel& kernel, Rng& rng);
double LogNoiseDensity(const AuxState& theta_a, const DiscreteState& theta,
                       const CouplingKernel& kernel);

// Denoising distribution: per coordinate, softmax over levels v of
// log k(theta_a_i | v). For the logistic kernel the logits are
// -2 ln cosh((theta_a_i - v) / (2 eta)) up to a constant. Depends on
// theta_a only.
CoordinateCategorical DenoiseProposal(const AuxState& theta_a, const CouplingKernel& kernel,
                                      const DomainSpec& spec);
DiscreteState HissDenoise(const AuxState& theta_a, const CouplingKernel& kernel,
                          const DomainSpec& spec, Rng& rng);

// Log terms of the Metropolis-within-Gibbs ratio for a denoised proposal.
struct MwgTerms {
  double energy_prop = 0.0;
  double energy_prev = 0.0;
  double log_noise_prop = 0.0;    // log q_noise(theta_a | theta')
  double log_noise_prev = 0.0;    // log q_noise(theta_a | theta_prev)
  double log_denoise_prev = 0.0;  // log q_denoise(theta_prev | theta_a)
  double log_denoise_prop = 0.0;  // log q_denoise(theta' | theta_a)

  double LogRatio() const {
    return (energy_prop - energy_prev) + (log_noise_prop - log_noise_prev) +
           (log_denoise_prev - log_denoise_prop);
  }
};

// `denoise` must be DenoiseProposal(theta_a, ...); its tables are reused so
// the ratio matches the distribution theta_prop was drawn from.
MwgTerms ComputeMwgTerms(const DiscreteState& theta_prev, const AuxState& theta_a,
                         const DiscreteState& theta_prop, const EnergyModel& model,
                         const CouplingKernel& kernel, const CoordinateCategorical& denoise);

// Accepts theta_prop with probability min(1, exp(LogRatio())), or always
// when `mh_correction` is false. Updates the MwG counters.
StepResult HissMwgAccept(const DiscreteState& theta_prev, const AuxState& theta_a,
                         const DiscreteState& theta_prop, const EnergyModel& model,
                         const CouplingKernel& kernel, const CoordinateCategorical& denoise,
                         Rng& rng, ChainStats& stats, bool mh_correction = true);

// grad U(theta) + d/dtheta sum_i log k(theta_a_i | theta_i). For the logistic
// kernel the second term is tanh((theta_a - theta) / (2 eta)) / eta.
Vector ConditionalGradient(const DiscreteState& theta, const AuxState& theta_a,
                           const EnergyModel& model, const CouplingKernel& kernel);

// U(theta) + sum_i log k(theta_a_i | theta_i).
double JointEnergy(const DiscreteState& theta, const AuxState& theta_a, const EnergyModel& model,
                   const CouplingKernel& kernel);

// DMALA on theta | theta_a with theta_a held fixed.
StepResult ConditionalDmalaStep(const JointState& joint, const EnergyModel& model, double alpha,
                                const CouplingKernel& kernel, Rng& rng, ChainStats& stats);

// One Gibbs sweep: noise, denoise, MwG accept, then L conditional DMALA
// refinements conditioned on the same theta_a.
DiscreteState HissGibbsStep(const DiscreteState& theta, const EnergyModel& model,
                            const SamplerConfig& config, const CouplingKernel& kernel, Rng& rng,
                            ChainStats& stats);

// G Gibbs sweeps; the result is the emitted sample.
DiscreteState HissSweep(const DiscreteState& theta, const EnergyModel& model,
                        const SamplerConfig& config, Rng& rng, ChainStats& stats);

struct PtState {
  std::vector<DiscreteState> replicas;  // replicas[0] targets beta = 1
  Vector betas;
  std::uint64_t steps = 0;
};

PtState MakePtState(const DiscreteState& init, const PtConfig& pt);

// log of the swap acceptance exp((beta_k - beta_k1) (U_k1 - U_k)), capped at 0.
double SwapLogProbability(double beta_k, double beta_k1, double energy_k, double energy_k1);

// Advances every replica by one tempered DMALA step; every swap_interval
// steps attempts swaps between consecutive replicas (0,1), (1,2), ...
void PtDmalaStep(PtState& state, const EnergyModel& model, double alpha, const PtConfig& pt,
                 Rng& rng, ChainStats& stats);

enum class SamplerKind { kHiss, kDmala, kGwg, kPtDmala, kHissGk, kHissNoMh };

std::string_view SamplerName(SamplerKind kind);
std::optional<SamplerKind> ParseSamplerKind(std::string_view name);
std::vector<std::string> SamplerNames();

// Applies the ablation overrides implied by `kind` (Gaussian kernel, no MH).
SamplerConfig EffectiveConfig(SamplerKind kind, SamplerConfig config);

struct ChainOptions {
  std::size_t samples = 1000;
  int steps_per_sample = 0;  // baseline step budget; 0 means config.BaselineSteps()
  PtConfig pt;
  bool keep_samples = true;
};

using SampleCallback =
    std::function<void(std::size_t index, const DiscreteState& sample, const ChainStats& stats)>;

// Runs one chain from `init`. Every step rejects proposals that fail
// model.Feasible(), so a feasible `init` yields feasible samples. An
// infeasible `init` is emitted as-is until the chain first reaches a
// feasible state.
// `on_sample` fires after every emitted sample.
ChainTrace RunChain(const EnergyModel& model, SamplerKind kind, const SamplerConfig& config,
                    const ChainOptions& options, const DiscreteState& init, Rng& rng,
                    const SampleCallback& on_sample = {});

}  // namespace hiss

#endif  // HISS_SAMPLERS_H_
