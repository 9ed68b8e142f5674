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

// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Pass criterion numbers to run a subset:
//   hiss_acceptance 1 3 9

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hiss/diagnostics.h"
#include "hiss/domain.h"
#include "hiss/experiment.h"
#include "hiss/kernels.h"
#include "hiss/models.h"
#include "hiss/rng.h"
#include "hiss/samplers.h"

#ifndef HISS_DATA_DIR
#define HISS_DATA_DIR "data"
#endif

namespace {

namespace fs = std::filesystem;
using hiss::DiscreteState;
using hiss::ExperimentConfig;
using hiss::SamplerKind;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Check(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [failed]");
  }
};

std::string Num(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Oracles written independently of the library.

double OracleLogisticCdf(double x, double mu, double eta) {
  return 1.0 / (1.0 + std::exp(-(x - mu) / eta));
}

double OracleLogisticPdf(double x, double mu, double eta) {
  const double z = std::exp(-std::abs(x - mu) / eta);
  return z / (eta * (1.0 + z) * (1.0 + z));
}

// Composite Simpson on a uniform grid of `panels` (even) intervals.
double Simpson(const std::function<double(double)>& f, double a, double b, int panels) {
  const double h = (b - a) / panels;
  double sum = f(a) + f(b);
  for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 == 1 ? 4.0 : 2.0);
  return sum * h / 3.0;
}

// Central differences, h relative to the coordinate magnitude.
std::vector<double> OracleGradient(const hiss::EnergyModel& model, std::vector<double> x) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * std::max(1.0, std::abs(x[i]));
    const double keep = x[i];
    x[i] = keep + h;
    const double up = model.Energy(x);
    x[i] = keep - h;
    const double down = model.Energy(x);
    x[i] = keep;
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double RelativeError(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - b[i]) * (a[i] - b[i]);
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nb), 1e-8});
}

// 3x3 spin lattice, W[i][j] = 1 iff i + j = 8, enumerated directly.
std::vector<double> OracleIsingProbabilities(double a, double b) {
  const int d = 9;
  std::vector<double> logp(512);
  for (int idx = 0; idx < 512; ++idx) {
    int s[9];
    for (int i = 0; i < d; ++i) s[i] = ((idx >> (d - 1 - i)) & 1) ? 1 : -1;
    double quad = 0.0, lin = 0.0;
    for (int i = 0; i < d; ++i) {
      quad += s[i] * s[d - 1 - i];
      lin += s[i];
    }
    logp[idx] = a * quad + b * lin;
  }
  const double mx = *std::max_element(logp.begin(), logp.end());
  double z = 0.0;
  for (double v : logp) z += std::exp(v - mx);
  std::vector<double> p(512);
  for (int i = 0; i < 512; ++i) p[i] = std::exp(logp[i] - mx) / z;
  return p;
}

// Largest ratio gap p_(k) / p_(k+1) among states at or above 1 / |Theta|.
std::size_t OracleDominantCount(std::vector<double> p) {
  std::sort(p.begin(), p.end(), std::greater<>());
  const double uniform = 1.0 / static_cast<double>(p.size());
  std::size_t best = 1;
  double best_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < p.size() && p[k] >= uniform; ++k) {
    const double ratio = p[k] / p[k + 1];
    if (ratio > best_ratio) {
      best_ratio = ratio;
      best = k + 1;
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Shared run configurations.

ExperimentConfig BernoulliConfig() {
  ExperimentConfig c;
  c.model.name = "bernoulli4d";
  c.samplers = {SamplerKind::kHiss, SamplerKind::kDmala, SamplerKind::kGwg};
  c.params.alpha = 0.2;
  c.params.eta = 4.0;
  c.params.sweeps = 5;
  c.params.refinements = 2;
  c.chains = 10;
  c.samples = 1000;
  c.seed = 2024;
  c.metrics = {"tvd", "logmae", "coverage", "acceptance"};
  c.metric_every = 100;
  return c;
}

ExperimentConfig IsingConfig() {
  ExperimentConfig c;
  c.model.name = "ising";
  c.model.side = 3;
  c.model.a = 0.5;
  c.model.b = 0.1;
  c.samplers = {SamplerKind::kHiss, SamplerKind::kDmala};
  c.params.alpha = 0.2;
  c.params.eta = 4.0;
  c.params.sweeps = 10;
  c.params.refinements = 2;
  c.chains = 5;
  c.samples = 2500;
  c.seed = 7;
  c.metrics = {"tvd", "logmae", "coverage", "acceptance"};
  c.metric_every = 250;
  return c;
}

hiss::RunOptions Quiet() {
  hiss::RunOptions o;
  o.write_files = false;
  return o;
}

const hiss::RunResult& BernoulliRun() {
  static const hiss::RunResult r = hiss::RunExperiment(BernoulliConfig(), Quiet());
  return r;
}

const hiss::RunResult& IsingRun() {
  static const hiss::RunResult r = hiss::RunExperiment(IsingConfig(), Quiet());
  return r;
}

// ---------------------------------------------------------------------------
// Criteria

Outcome KernelMath() {
  Outcome out;
  // Kolmogorov-Smirnov against the closed-form CDF. The asymptotic
  // critical value at level 0.001 is 1.9495 / sqrt(n).
  const std::size_t n = 100000;
  for (const auto& [mu, eta] : std::vector<std::pair<double, double>>{{0.0, 1.0}, {1.0, 4.0}}) {
    hiss::LogisticKernel kernel(eta);
    hiss::Rng rng(hiss::DeriveSeed(99, static_cast<std::uint64_t>(eta)));
    std::vector<double> draws(n);
    for (double& x : draws) x = kernel.Sample(mu, rng);
    std::sort(draws.begin(), draws.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double f = OracleLogisticCdf(draws[i], mu, eta);
      d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    const double crit = 1.9495 / std::sqrt(static_cast<double>(n));
    out.Check(d < crit, "KS(mu=" + Num(mu) + ",eta=" + Num(eta) + ") D=" + Num(d, 3) + " < " +
                            Num(crit, 3));
  }

  double worst = 0.0;
  for (double eta : {0.01, 1.0, 4.0}) {
    for (double mu : {0.0, 2.5}) {
      const double total = Simpson(
          [&](double x) { return std::exp(hiss::LogisticLogDensity(x, mu, eta)); },
          mu - 80.0 * eta, mu + 80.0 * eta, 400000);
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  out.Check(worst < 1e-8, "density integral |1 - I| <= " + Num(worst, 2));

  double worst_ratio = 1.0;
  double worst_exact = 0.0;
  for (double eta : {1.0, 4.0}) {
    for (double ratio : {5.0, 10.0, 20.0}) {
      const double mu = ratio * eta;
      const double eps = 0.1 * eta;
      const hiss::IntermediateMass m = hiss::IntermediateMassLogistic(mu, eta, eps);
      const double closed = 2.0 * (eps / eta) * std::exp(-mu / eta);
      const double exact =
          0.5 * (OracleLogisticCdf(eps, mu, eta) - OracleLogisticCdf(-eps, mu, eta)) +
          0.5 * (OracleLogisticCdf(eps, -mu, eta) - OracleLogisticCdf(-eps, -mu, eta));
      const double r = m.quadrature / closed;
      worst_ratio = std::max({worst_ratio, r, 1.0 / r});
      worst_exact = std::max(worst_exact, std::abs(m.quadrature - exact) / exact);
    }
  }
  out.Check(worst_ratio <= 1.25, "strip mass / closed form within factor " + Num(worst_ratio));
  out.Check(worst_exact < 1e-6, "strip mass vs exact CDF rel err " + Num(worst_exact, 2));
  return out;
}

Outcome GradientSuite() {
  Outcome out;
  hiss::Rng rng(4242);
  auto uniform_point = [&](std::size_t d, double lo, double hi) {
    std::vector<double> x(d);
    for (double& v : x) v = lo + (hi - lo) * rng.Uniform();
    return x;
  };
  auto run = [&](const hiss::EnergyModel& model, double lo, double hi, double tol) {
    double worst = 0.0;
    for (int k = 0; k < 100; ++k) {
      const std::vector<double> x = uniform_point(model.dim(), lo, hi);
      worst = std::max(worst, RelativeError(model.Gradient(x), OracleGradient(model, x)));
    }
    out.Check(worst < tol, model.name() + " max rel err " + Num(worst, 2));
  };
  run(hiss::Bernoulli4d(), 0.0, 1.0, 1e-5);
  run(hiss::Ising3x3(), -1.0, 1.0, 1e-5);
  run(hiss::TspModel(hiss::LoadTsplib(std::string(HISS_DATA_DIR) + "/eil14.tsp")), 0.0, 1.0, 1e-5);
  run(hiss::BinaryMlpModel(hiss::SyntheticRegression(40, 4, 10, 0.1, 7), 10), -1.0, 1.0, 1e-4);
  return out;
}

Outcome MarginalCorrectness() {
  Outcome out;
  // Two levels, then three unevenly spaced levels; the joint is
  // exp(U(theta)) k(theta_a | theta) integrated over theta_a.
  const std::vector<std::pair<std::vector<double>, std::vector<double>>> cases{
      {{0.0, 1.0}, {0.7, 0.3}}, {{-1.0, 0.0, 2.5}, {0.2, 0.5, 0.3}}};
  double worst = 0.0;
  for (double eta : {0.5, 4.0}) {
    for (const auto& [levels, probs] : cases) {
      const hiss::TabularModel model(hiss::DomainSpec({levels}), probs, "toy");
      const hiss::CouplingKernel kernel = hiss::LogisticKernel(eta);
      std::vector<double> mass(levels.size());
      for (std::size_t k = 0; k < levels.size(); ++k) {
        const DiscreteState theta{{levels[k]}};
        mass[k] = Simpson(
            [&](double a) {
              return std::exp(hiss::JointEnergy(theta, hiss::AuxState{{a}}, model, kernel));
            },
            -80.0 * eta - 5.0, 80.0 * eta + 5.0, 400000);
      }
      const double z = std::accumulate(mass.begin(), mass.end(), 0.0);
      double zp = 0.0;
      for (double p : probs) zp += p;
      for (std::size_t k = 0; k < levels.size(); ++k) {
        worst = std::max(worst, std::abs(mass[k] / z - probs[k] / zp));
      }
    }
  }
  out.Check(worst < 1e-6, "max |marginal - exp(U)/Z| " + Num(worst, 2));
  return out;
}

using Matrix = std::vector<std::vector<double>>;

// Monte Carlo one-sweep kernel from every state. With `reversed` the
// refinements run before the MwG step, which is the time reversal of a
// sweep when each component is reversible.
Matrix EstimateKernel(const hiss::TabularModel& model, int refinements, std::size_t n,
                      std::uint64_t seed, bool reversed) {
  hiss::SamplerConfig config;
  config.alpha = 0.2;
  config.eta = 4.0;
  config.sweeps = 1;
  config.refinements = refinements;
  const hiss::CouplingKernel kernel = config.MakeKernel();
  const hiss::DomainSpec& spec = model.domain();
  const std::size_t states = *spec.StateCount();
  Matrix k(states, std::vector<double>(states, 0.0));
  for (std::size_t x = 0; x < states; ++x) {
    hiss::Rng rng(hiss::DeriveSeed(seed, x));
    hiss::ChainStats stats;
    const DiscreteState start = spec.StateAt(x);
    for (std::size_t t = 0; t < n; ++t) {
      DiscreteState y;
      if (!reversed) {
        y = hiss::HissGibbsStep(start, model, config, kernel, rng, stats);
      } else {
        hiss::JointState joint{start, hiss::HissNoise(start, kernel, rng)};
        for (int l = 0; l < refinements; ++l) {
          joint.theta = hiss::ConditionalDmalaStep(joint, model, config.alpha, kernel, rng, stats).state;
        }
        const auto denoise = hiss::DenoiseProposal(joint.theta_a, kernel, spec);
        const DiscreteState proposal = denoise.Sample(spec, rng);
        y = hiss::HissMwgAccept(joint.theta, joint.theta_a, proposal, model, kernel, denoise, rng,
                                stats)
                .state;
      }
      k[x][spec.StateIndex(y)] += 1.0;
    }
    for (double& v : k[x]) v /= static_cast<double>(n);
  }
  return k;
}

struct FluxComparison {
  std::size_t pairs = 0;
  std::size_t violations = 0;
  double max_z = 0.0;
};

// Compares pi(x) K(x,y) with pi(y) Kr(y,x) for x != y where either estimate
// exceeds 1e-3. The binomial standard error is taken under the null of
// equal flux, so a zero count on one side is not mistaken for certainty.
FluxComparison CompareFlux(const std::vector<double>& pi, const Matrix& k, const Matrix& kr,
                           std::size_t n, bool unordered) {
  FluxComparison c;
  const double nn = static_cast<double>(n);
  for (std::size_t x = 0; x < pi.size(); ++x) {
    for (std::size_t y = unordered ? x + 1 : 0; y < pi.size(); ++y) {
      if (x == y || (k[x][y] <= 1e-3 && kr[y][x] <= 1e-3)) continue;
      ++c.pairs;
      const double fx = pi[x] * k[x][y];
      const double fy = pi[y] * kr[y][x];
      const double flux = 0.5 * (fx + fy);
      const double kx = flux / pi[x], ky = flux / pi[y];
      const double se = std::sqrt(pi[x] * pi[x] * kx * (1.0 - kx) / nn +
                                  pi[y] * pi[y] * ky * (1.0 - ky) / nn);
      const double z = std::abs(fx - fy) / se;
      c.max_z = std::max(c.max_z, z);
      if (z > 4.0) ++c.violations;
    }
  }
  return c;
}

Outcome DetailedBalance() {
  Outcome out;
  const hiss::TabularModel model = hiss::Bernoulli4d();
  const hiss::ExactDistribution exact = hiss::ComputeExactDistribution(model);
  const std::size_t n = 200000;
  const Matrix k2 = EstimateKernel(model, 2, n, 31337, false);
  const FluxComparison db = CompareFlux(exact.probs, k2, k2, n, true);
  out.Check(db.violations == 0, "L=2 sweep: " + std::to_string(db.pairs) + " pairs, " +
                                    std::to_string(db.violations) + " beyond 4 SE, max |z| " +
                                    Num(db.max_z, 3));

  // Diagnostics that locate the failure, reported but not gated.
  double stat_z = 0.0;
  for (std::size_t y = 0; y < k2.size(); ++y) {
    double mass = 0.0, var = 0.0;
    for (std::size_t x = 0; x < k2.size(); ++x) {
      mass += exact.probs[x] * k2[x][y];
      var += exact.probs[x] * exact.probs[x] * k2[x][y] * (1.0 - k2[x][y]) / static_cast<double>(n);
    }
    if (var > 0.0) stat_z = std::max(stat_z, std::abs(mass - exact.probs[y]) / std::sqrt(var));
  }
  const std::size_t nd = 100000;
  const Matrix k0 = EstimateKernel(model, 0, nd, 4711, false);
  const FluxComparison db0 = CompareFlux(exact.probs, k0, k0, nd, true);
  const Matrix k2d = EstimateKernel(model, 2, nd, 4712, false);
  const Matrix k2r = EstimateKernel(model, 2, nd, 4713, true);
  const FluxComparison adj = CompareFlux(exact.probs, k2d, k2r, nd, false);
  out.detail += "; diagnostics: L=2 stationarity max |z| " + Num(stat_z, 3) +
                ", L=0 sweep max |z| " + Num(db0.max_z, 3) +
                ", L=2 flux vs reversed-order sweep max |z| " + Num(adj.max_z, 3);
  return out;
}

Outcome BernoulliReproduction() {
  Outcome out;
  const hiss::RunResult& r = BernoulliRun();
  const auto& h = r.Get(SamplerKind::kHiss);
  const auto& d = r.Get(SamplerKind::kDmala);
  const auto& g = r.Get(SamplerKind::kGwg);
  out.Check(h.Mean("logmae") < d.Mean("logmae") && h.Mean("logmae") < g.Mean("logmae"),
            "logMAE hiss " + Num(h.Mean("logmae")) + " < dmala " + Num(d.Mean("logmae")) +
                ", gwg " + Num(g.Mean("logmae")));
  out.Check(h.Mean("coverage") > d.Mean("coverage") && h.Mean("coverage") > g.Mean("coverage"),
            "coverage hiss " + Num(h.Mean("coverage")) + " > dmala " + Num(d.Mean("coverage")) +
                ", gwg " + Num(g.Mean("coverage")));
  const double acc = h.MeanMwgAcceptance();
  out.Check(std::abs(acc - 0.136) <= 0.05, "MwG acceptance " + Num(acc) + " in 0.136 +- 0.05");
  return out;
}

Outcome IsingReproduction() {
  Outcome out;
  const ExperimentConfig config = IsingConfig();
  const std::vector<double> oracle = OracleIsingProbabilities(config.model.a, config.model.b);
  const auto model = hiss::BuildModel(config.model);
  const hiss::ExactDistribution exact = hiss::ComputeExactDistribution(*model);
  out.Check(hiss::TotalVariation(exact.probs, oracle) < 1e-12, "enumeration matches oracle");
  const std::size_t dominant = OracleDominantCount(oracle);

  // A chain that never leaves its start emits a point mass there.
  hiss::Rng unused(0);
  const DiscreteState init = hiss::InitialState(*model, config.init, unused);
  const double no_progress = 1.0 - oracle[exact.spec.StateIndex(init)];

  const hiss::RunResult& r = IsingRun();
  const auto& h = r.Get(SamplerKind::kHiss);
  const auto& d = r.Get(SamplerKind::kDmala);
  out.Check(h.Mean("tvd") <= 0.25, "hiss TVD " + Num(h.Mean("tvd")) + " +- " +
                                       Num(h.StdErr("tvd"), 2) + " <= 0.25");
  out.Check(h.Mean("tvd") < d.Mean("tvd") && d.Mean("tvd") < no_progress,
            "hiss < dmala " + Num(d.Mean("tvd")) + " < no-progress " + Num(no_progress));
  const double need = 0.9 * static_cast<double>(dominant) / 512.0;
  out.Check(h.Mean("coverage") >= need, "coverage " + Num(h.Mean("coverage")) + " >= 0.9 * " +
                                            std::to_string(dominant) + "/512");
  return out;
}

Outcome AblationDirectionality() {
  Outcome out;
  ExperimentConfig base = BernoulliConfig();
  base.samplers = {SamplerKind::kHiss};

  hiss::AblationSpec eta_spec;
  eta_spec.param = "eta";
  eta_spec.grid = {0.01, 0.1, 1.0, 4.0};
  const auto rows = hiss::RunAblation(base, eta_spec, Quiet());
  int acc_inversions = 0, cov_inversions = 0;
  std::string acc_list, cov_list;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    acc_list += (k ? "," : "") + Num(rows[k].mwg_acceptance_mean, 3);
    cov_list += (k ? "," : "") + Num(rows[k].final_coverage_mean, 3);
    if (k == 0) continue;
    if (rows[k].mwg_acceptance_mean > rows[k - 1].mwg_acceptance_mean) ++acc_inversions;
    if (rows[k].final_coverage_mean < rows[k - 1].final_coverage_mean) ++cov_inversions;
  }
  out.Check(acc_inversions <= 1, "acceptance over eta {" + acc_list + "}");
  out.Check(cov_inversions <= 1, "coverage over eta {" + cov_list + "}");

  ExperimentConfig mh = base;
  mh.samplers = {SamplerKind::kHiss, SamplerKind::kHissNoMh};
  const hiss::RunResult r = hiss::RunExperiment(mh, Quiet());
  const double tvd = r.Get(SamplerKind::kHiss).Mean("tvd");
  const double tvd_nomh = r.Get(SamplerKind::kHissNoMh).Mean("tvd");
  out.Check(tvd_nomh - tvd >= 0.05, "TVD no-MH " + Num(tvd_nomh) + " vs " + Num(tvd));

  hiss::AblationSpec l_spec;
  l_spec.param = "refinements";
  l_spec.grid = {0.0, 2.0};
  const auto l_rows = hiss::RunAblation(base, l_spec, Quiet());
  out.Check(l_rows[0].final_logmae_mean > l_rows[1].final_logmae_mean,
            "logMAE L=0 " + Num(l_rows[0].final_logmae_mean, 6) + " > L=2 " +
                Num(l_rows[1].final_logmae_mean, 6) + " (sd " +
                Num(l_rows[1].final_logmae_sd, 2) + ")");
  return out;
}

Outcome TspProperty() {
  Outcome out;
  const hiss::TspModel model(hiss::LoadTsplib(std::string(HISS_DATA_DIR) + "/eil14.tsp"));
  hiss::SamplerConfig config;
  config.alpha = 0.02;
  config.eta = 2.0;
  config.sweeps = 10;
  config.refinements = 4;
  hiss::ChainOptions options;
  options.samples = 10000;
  options.keep_samples = false;
  const std::uint64_t master = 11;

  std::map<SamplerKind, double> mean_best;
  std::map<SamplerKind, std::uint64_t> accepted;
  std::uint64_t infeasible_emitted = 0;
  for (SamplerKind kind : {SamplerKind::kHiss, SamplerKind::kDmala}) {
    double sum_best = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      hiss::Rng init_rng(hiss::DeriveSeed(master + 1000, seed));
      const DiscreteState init = hiss::InitialState(model, hiss::InitKind::kRandom, init_rng);
      hiss::Rng rng(hiss::DeriveSeed(master, seed));
      double best = std::numeric_limits<double>::infinity();
      const hiss::ChainTrace trace = hiss::RunChain(
          model, kind, config, options, init, rng,
          [&](std::size_t, const DiscreteState& s, const hiss::ChainStats&) {
            // Direct permutation-matrix check, then the tour cost.
            std::vector<int> rows(14, 0), cols(14, 0);
            hiss::Tour tour(14, -1);
            for (int k = 0; k < 14; ++k) {
              for (int c = 0; c < 14; ++c) {
                if (s.values[k * 14 + c] == 1.0) {
                  ++rows[k];
                  ++cols[c];
                  tour[k] = c;
                }
              }
            }
            const bool ok = std::all_of(rows.begin(), rows.end(), [](int v) { return v == 1; }) &&
                            std::all_of(cols.begin(), cols.end(), [](int v) { return v == 1; });
            if (!ok) {
              ++infeasible_emitted;
              return;
            }
            double len = 0.0;
            for (int k = 0; k < 14; ++k) len += model.Distance(tour[k], tour[(k + 1) % 14]);
            best = std::min(best, len);
          });
      sum_best += best;
      accepted[kind] += trace.stats.mwg_accept + trace.stats.refine_accept;
    }
    mean_best[kind] = sum_best / 3.0;
  }
  out.Check(infeasible_emitted == 0,
            "infeasible emitted samples " + std::to_string(infeasible_emitted));
  out.Check(mean_best[SamplerKind::kHiss] <= mean_best[SamplerKind::kDmala],
            "mean best cost hiss " + Num(mean_best[SamplerKind::kHiss], 6) + " <= dmala " +
                Num(mean_best[SamplerKind::kDmala], 6));
  out.detail += "; accepted moves hiss " + std::to_string(accepted[SamplerKind::kHiss]) +
                ", dmala " + std::to_string(accepted[SamplerKind::kDmala]);
  return out;
}

Outcome NfeAccounting() {
  Outcome out;
  const hiss::RunResult& b = BernoulliRun();
  const std::uint64_t hiss_nfe = b.Get(SamplerKind::kHiss).nfe.measured;
  const std::uint64_t dmala_nfe = b.Get(SamplerKind::kDmala).nfe.measured;
  const std::uint64_t gwg_nfe = b.Get(SamplerKind::kGwg).nfe.measured;
  out.Check(hiss_nfe == 500000, "hiss " + std::to_string(hiss_nfe) + " == 5.0e5");
  out.Check(dmala_nfe == 400000 && gwg_nfe == 400000,
            "dmala " + std::to_string(dmala_nfe) + ", gwg " + std::to_string(gwg_nfe) +
                " == 4.0e5");

  ExperimentConfig pt = IsingConfig();
  pt.samplers = {SamplerKind::kPtDmala};
  pt.pt.num_temps = 5;
  pt.pt.swap_interval = 2;
  pt.pt.min_beta = 0.1;
  pt.metrics = {"acceptance"};
  const hiss::RunResult r = hiss::RunExperiment(pt, Quiet());
  const std::uint64_t pt_nfe = r.Get(SamplerKind::kPtDmala).nfe.measured;
  out.Check(pt_nfe == 6000000, "pt_dmala " + std::to_string(pt_nfe) + " == 6.00e6");

  bool all_match = true;
  for (const auto* run : {&b, &IsingRun(), &r}) {
    for (const auto& s : run->samplers) all_match = all_match && s.nfe.Matches();
  }
  out.Check(all_match, "every run matches its closed form");
  return out;
}

std::string ReadFile(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome Determinism() {
  Outcome out;
  const fs::path root = fs::temp_directory_path() / "hiss_acceptance_determinism";
  fs::remove_all(root);
  ExperimentConfig c = BernoulliConfig();
  c.samplers = {SamplerKind::kHiss, SamplerKind::kDmala, SamplerKind::kGwg,
                SamplerKind::kPtDmala, SamplerKind::kHissGk, SamplerKind::kHissNoMh};
  c.chains = 4;
  c.samples = 300;
  c.metric_every = 10;
  hiss::RunOptions options;
  c.out_dir = (root / "a").string();
  c.workers = 1;
  hiss::RunExperiment(c, options);
  c.out_dir = (root / "b").string();
  hiss::RunExperiment(c, options);
  c.out_dir = (root / "c").string();
  c.workers = 3;
  hiss::RunExperiment(c, options);
  std::size_t files = 0, mismatches = 0;
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    const std::string name = entry.path().filename().string();
    if (name.rfind("metrics_", 0) != 0) continue;
    ++files;
    const std::string a = ReadFile(entry.path());
    if (a != ReadFile(root / "b" / name) || a != ReadFile(root / "c" / name)) ++mismatches;
  }
  out.Check(files == c.samplers.size() && mismatches == 0,
            std::to_string(files) + " metric CSVs byte-identical across reruns and worker counts");
  fs::remove_all(root);
  return out;
}

struct Criterion {
  int id;
  const char* name;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> criteria{
      {1, "kernel math", KernelMath},
      {2, "gradients", GradientSuite},
      {3, "marginal correctness", MarginalCorrectness},
      {4, "detailed balance", DetailedBalance},
      {5, "bernoulli reproduction", BernoulliReproduction},
      {6, "ising reproduction", IsingReproduction},
      {7, "ablation directionality", AblationDirectionality},
      {8, "tsp feasibility and ordering", TspProperty},
      {9, "nfe accounting", NfeAccounting},
      {10, "determinism", Determinism},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " (" << c.name
              << "): " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
