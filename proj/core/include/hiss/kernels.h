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

#ifndef HISS_KERNELS_H_
#define HISS_KERNELS_H_

#include <cstddef>
#include <cstdint>
#include <variant>

#include "hiss/domain.h"
#include "hiss/rng.h"

namespace hiss {

// ln cosh(z) in the overflow-free form |z| + log1p(exp(-2|z|)) - ln 2.
double LogCosh(double z);

// Inverse CDF of Logistic(0, eta): eta * ln(u / (1 - u)).
double LogisticInverseCdf(double u, double eta);

double LogisticCdf(double x, double mu, double eta);

// log of (1 / (4 eta)) sech^2((x - mu) / (2 eta)).
double LogisticLogDensity(double x, double mu, double eta);

// d i.i.d. Logistic(0, eta) draws by inverse transform of open uniforms.
Vector SampleLogisticNoise(Rng& rng, std::size_t d, double eta);

class LogisticKernel {
 public:
  explicit LogisticKernel(double eta);

  double eta() const { return eta_; }

  double LogDensity(double x, double mu) const { return LogisticLogDensity(x, mu, eta_); }
  // d/dmu of LogDensity: tanh((x - mu) / (2 eta)) / eta.
  double DLogDensityDMean(double x, double mu) const;
  double Sample(double mu, Rng& rng) const;

 private:
  double eta_;
};

// Gaussian kernel k(x | x') = N(x; alpha_vp * x', sigma^2). Variance
// preserving kernels satisfy alpha_vp^2 + sigma^2 = 1; alpha_vp == 1 is a
// plain location kernel with free sigma.
class GaussianKernel {
 public:
  GaussianKernel(double alpha_vp, double sigma);

  static GaussianKernel VariancePreserving(double sigma2);
  static GaussianKernel Plain(double sigma) { return GaussianKernel(1.0, sigma); }

  double alpha_vp() const { return alpha_; }
  double sigma() const { return sigma_; }

  double LogDensity(double x, double x_prime) const;
  double DLogDensityDMean(double x, double x_prime) const;
  double Sample(double x_prime, Rng& rng) const;

 private:
  double alpha_;
  double sigma_;
};

double GaussianLogDensity(double x, double x_prime, const GaussianKernel& kernel);
Vector SampleGaussianNoise(Rng& rng, std::size_t d, const GaussianKernel& kernel);

enum class KernelKind { kLogistic, kGaussianVp };

// Per-coordinate coupling p(theta_a_i | theta_i) between the discrete and
// auxiliary variables.
class CouplingKernel {
 public:
  CouplingKernel(LogisticKernel k) : kernel_(k) {}  // NOLINT(runtime/explicit)
  CouplingKernel(GaussianKernel k) : kernel_(k) {}  // NOLINT(runtime/explicit)

  KernelKind kind() const;

  double LogDensity(double aux, double level) const;
  double DLogDensityDLevel(double aux, double level) const;
  double Sample(double level, Rng& rng) const;

  // Sum of per-coordinate log densities.
  double LogDensity(const AuxState& aux, const DiscreteState& theta) const;

 private:
  std::variant<LogisticKernel, GaussianKernel> kernel_;
};

// Unnormalized smoothed density
//   sum_theta exp(U(theta)) prod_i k(theta_a_i - theta_i)
// by exhaustive enumeration, with k the normalized logistic density. The log
// variant avoids underflow for energetic models.
double LogSmoothedDensity(const AuxState& theta_a, const EnergyModel& model, double eta,
                          std::uint64_t cap = kDefaultEnumerationCap);
double SmoothedDensity(const AuxState& theta_a, const EnergyModel& model, double eta,
                       std::uint64_t cap = kDefaultEnumerationCap);

struct IntermediateMass {
  double quadrature;   // integral of the smoothed density over (-eps, eps)
  double closed_form;  // small-strip approximation
};

// Mass within |x| < eps of the two-atom mixture 1/2 delta(-mu) + 1/2 delta(mu)
// convolved with a logistic kernel of scale eta. Closed form:
// 2 (eps / eta) exp(-mu / eta). Throws std::invalid_argument unless
// 0 < eps < mu.
IntermediateMass IntermediateMassLogistic(double mu, double eta, double epsilon);

// Same strip mass for a Gaussian kernel; the closed form is
// 2 eps N(alpha_vp mu; 0, sigma^2).
IntermediateMass IntermediateMassGaussian(double mu, const GaussianKernel& kernel,
                                          double epsilon);

}  // namespace hiss

#endif  // HISS_KERNELS_H_
