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

#include "hiss/kernels.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "hiss/quadrature.h"

namespace hiss {
namespace {

void RequirePositive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
  }
}

double LogSumExp(std::span<const double> xs) {
  const double m = *std::max_element(xs.begin(), xs.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

double LogCosh(double z) {
  const double a = std::abs(z);
  return a + std::log1p(std::exp(-2.0 * a)) - std::numbers::ln2;
}

double LogisticInverseCdf(double u, double eta) {
  RequirePositive(eta, "eta");
  return eta * std::log(u / (1.0 - u));
}

double LogisticCdf(double x, double mu, double eta) {
  return 1.0 / (1.0 + std::exp(-(x - mu) / eta));
}

double LogisticLogDensity(double x, double mu, double eta) {
  return -std::log(4.0 * eta) - 2.0 * LogCosh((x - mu) / (2.0 * eta));
}

Vector SampleLogisticNoise(Rng& rng, std::size_t d, double eta) {
  RequirePositive(eta, "eta");
  Vector noise(d);
  for (double& v : noise) v = LogisticInverseCdf(rng.OpenUniform(), eta);
  return noise;
}

LogisticKernel::LogisticKernel(double eta) : eta_(eta) { RequirePositive(eta, "eta"); }

double LogisticKernel::DLogDensityDMean(double x, double mu) const {
  return std::tanh((x - mu) / (2.0 * eta_)) / eta_;
}

double LogisticKernel::Sample(double mu, Rng& rng) const {
  return mu + LogisticInverseCdf(rng.OpenUniform(), eta_);
}

GaussianKernel::GaussianKernel(double alpha_vp, double sigma) : alpha_(alpha_vp), sigma_(sigma) {
  RequirePositive(sigma, "sigma");
  if (!(alpha_vp > 0.0) || alpha_vp > 1.0) {
    throw std::invalid_argument("alpha_vp must lie in (0, 1]");
  }
  if (alpha_vp < 1.0 && std::abs(alpha_vp * alpha_vp + sigma * sigma - 1.0) > 1e-12) {
    throw std::invalid_argument("variance-preserving kernel requires alpha^2 + sigma^2 = 1");
  }
}

GaussianKernel GaussianKernel::VariancePreserving(double sigma2) {
  if (!(sigma2 > 0.0) || !(sigma2 < 1.0)) {
    throw std::invalid_argument("VP kernel requires sigma^2 in (0, 1)");
  }
  return GaussianKernel(std::sqrt(1.0 - sigma2), std::sqrt(sigma2));
}

double GaussianKernel::LogDensity(double x, double x_prime) const {
  const double r = x - alpha_ * x_prime;
  return -0.5 * std::log(2.0 * std::numbers::pi * sigma_ * sigma_) - r * r / (2.0 * sigma_ * sigma_);
}

double GaussianKernel::DLogDensityDMean(double x, double x_prime) const {
  return alpha_ * (x - alpha_ * x_prime) / (sigma_ * sigma_);
}

double GaussianKernel::Sample(double x_prime, Rng& rng) const {
  return alpha_ * x_prime + sigma_ * rng.Normal();
}

double GaussianLogDensity(double x, double x_prime, const GaussianKernel& kernel) {
  return kernel.LogDensity(x, x_prime);
}

Vector SampleGaussianNoise(Rng& rng, std::size_t d, const GaussianKernel& kernel) {
  Vector noise(d);
  for (double& v : noise) v = kernel.sigma() * rng.Normal();
  return noise;
}

KernelKind CouplingKernel::kind() const {
  return std::holds_alternative<LogisticKernel>(kernel_) ? KernelKind::kLogistic
                                                         : KernelKind::kGaussianVp;
}

double CouplingKernel::LogDensity(double aux, double level) const {
  return std::visit([&](const auto& k) { return k.LogDensity(aux, level); }, kernel_);
}

double CouplingKernel::DLogDensityDLevel(double aux, double level) const {
  return std::visit([&](const auto& k) { return k.DLogDensityDMean(aux, level); }, kernel_);
}

double CouplingKernel::Sample(double level, Rng& rng) const {
  return std::visit([&](const auto& k) { return k.Sample(level, rng); }, kernel_);
}

double CouplingKernel::LogDensity(const AuxState& aux, const DiscreteState& theta) const {
  if (aux.dim() != theta.dim()) throw std::invalid_argument("CouplingKernel: dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < theta.dim(); ++i) total += LogDensity(aux.values[i], theta.values[i]);
  return total;
}

double LogSmoothedDensity(const AuxState& theta_a, const EnergyModel& model, double eta,
                          std::uint64_t cap) {
  RequirePositive(eta, "eta");
  if (theta_a.dim() != model.dim()) {
    throw std::invalid_argument("LogSmoothedDensity: dimension mismatch");
  }
  Vector terms;
  terms.reserve(model.domain().CheckedStateCount(cap));
  for (const DiscreteState& s : EnumerateStates(model.domain(), cap)) {
    double t = model.Energy(s);
    for (std::size_t i = 0; i < s.dim(); ++i) {
      t += LogisticLogDensity(theta_a.values[i], s.values[i], eta);
    }
    terms.push_back(t);
  }
  return LogSumExp(terms);
}

double SmoothedDensity(const AuxState& theta_a, const EnergyModel& model, double eta,
                       std::uint64_t cap) {
  return std::exp(LogSmoothedDensity(theta_a, model, eta, cap));
}

IntermediateMass IntermediateMassLogistic(double mu, double eta, double epsilon) {
  RequirePositive(mu, "mu");
  RequirePositive(eta, "eta");
  RequirePositive(epsilon, "epsilon");
  if (epsilon >= mu) {
    throw std::invalid_argument("intermediate mass: epsilon must be much smaller than mu");
  }
  auto density = [mu, eta](double x) {
    return 0.5 * std::exp(LogisticLogDensity(x, -mu, eta)) +
           0.5 * std::exp(LogisticLogDensity(x, mu, eta));
  };
  const double closed = 2.0 * (epsilon / eta) * std::exp(-mu / eta);
  // Absolute tolerance relative to the strip mass, which can be ~1e-9.
  const double scale = 2.0 * epsilon * std::max(density(0.0), density(epsilon));
  return {IntegrateAdaptiveSimpson(density, -epsilon, epsilon, std::max(1e-10 * scale, 1e-300)), closed};
}

IntermediateMass IntermediateMassGaussian(double mu, const GaussianKernel& kernel,
                                          double epsilon) {
  RequirePositive(mu, "mu");
  RequirePositive(epsilon, "epsilon");
  if (epsilon >= mu) {
    throw std::invalid_argument("intermediate mass: epsilon must be much smaller than mu");
  }
  auto density = [&kernel, mu](double x) {
    return 0.5 * std::exp(kernel.LogDensity(x, -mu)) + 0.5 * std::exp(kernel.LogDensity(x, mu));
  };
  const double closed = 2.0 * epsilon * density(0.0);
  const double scale = 2.0 * epsilon * std::max(density(0.0), density(epsilon));
  return {IntegrateAdaptiveSimpson(density, -epsilon, epsilon, std::max(1e-10 * scale, 1e-300)), closed};
}

}  // namespace hiss
