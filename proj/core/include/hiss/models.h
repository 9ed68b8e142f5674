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

#ifndef HISS_MODELS_H_
#define HISS_MODELS_H_

#include <cstddef>
#include <cstdint>
#include <istream>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "hiss/domain.h"

namespace hiss {

// Normalized probability table over an enumerable domain. Off-lattice
// energies come from the tensor-product Lagrange interpolant of ln p, which
// on {0,1}^d is the multilinear extension
//   U(x) = sum_a prod_n x_n^a_n (1 - x_n)^(1 - a_n) ln p_a.
class TabularModel : public EnergyModel {
 public:
  // `probs` is indexed like DomainSpec::StateIndex and is renormalized.
  // Throws std::invalid_argument on size mismatch or non-positive entries.
  TabularModel(DomainSpec domain, std::vector<double> probs, std::string name = "tabular");

  std::string name() const override { return name_; }
  const std::vector<double>& log_probs() const { return log_probs_; }
  double raw_sum() const { return raw_sum_; }

 protected:
  double EnergyImpl(std::span<const double> x) const override;
  void GradientImpl(std::span<const double> x, std::span<double> out) const override;

 private:
  // basis[i][k] and its derivative for coordinate i, level k at x_i.
  void Basis(std::span<const double> x, std::vector<Vector>& value,
             std::vector<Vector>& slope) const;

  std::vector<double> log_probs_;
  double raw_sum_;
  std::string name_;
};

// Quadrivariate Bernoulli target with modes at 0000, 1110 and 1111.
TabularModel Bernoulli4d();

// U(theta) = a theta^T W theta + b sum_i theta_i on spins {-1, +1}.
class IsingModel : public EnergyModel {
 public:
  // `interaction` is row-major side^2 x side^2 and must be symmetric.
  IsingModel(std::size_t side, std::vector<double> interaction, double a, double b);

  std::string name() const override { return "ising"; }
  std::size_t side() const { return side_; }
  double a() const { return a_; }
  double b() const { return b_; }
  const std::vector<double>& interaction() const { return w_; }

 protected:
  double EnergyImpl(std::span<const double> x) const override;
  void GradientImpl(std::span<const double> x, std::span<double> out) const override;

 private:
  std::size_t side_;
  std::size_t d_;
  std::vector<double> w_;
  double a_, b_;
};

// W[i][j] = 1 iff i + j == d - 1, else 0.
std::vector<double> CrossDiagonalInteraction(std::size_t d);

IsingModel Ising(std::size_t side, double a = 0.5, double b = 0.1);
inline IsingModel Ising3x3(double a = 0.5, double b = 0.1) { return Ising(3, a, b); }

struct TspInstance {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;

  std::size_t size() const { return x.size(); }
};

// Parses a TSPLIB95 instance with EDGE_WEIGHT_TYPE EUC_2D. Throws
// std::runtime_error naming the offending line on malformed input.
TspInstance ParseTsplib(std::istream& in);
TspInstance ParseTsplib(std::string_view text);
TspInstance LoadTsplib(const std::string& path);

// Tour as position -> city index.
using Tour = std::vector<int>;

// Traveling salesman energy on the flattened n x n assignment matrix
// P[position][city]. At permutation matrices U is minus the closed tour
// length. Off the permutation matrices the same bilinear form
//   -sum_k sum_{c,c'} P[k][c] P[k+1][c'] D[c][c']
// serves as the differentiable relaxation; samplers reject proposals that
// fail Feasible().
class TspModel : public EnergyModel {
 public:
  explicit TspModel(TspInstance instance);

  std::string name() const override { return "tsp"; }
  bool Feasible(const DiscreteState& s) const override;

  std::size_t cities() const { return n_; }
  const TspInstance& instance() const { return instance_; }
  double Distance(int a, int b) const { return dist_[static_cast<std::size_t>(a) * n_ + b]; }

  double TourLength(const Tour& tour) const;
  // Throws std::invalid_argument if `s` is not a permutation matrix.
  Tour TourFromState(const DiscreteState& s) const;
  DiscreteState StateFromTour(const Tour& tour) const;

 protected:
  double EnergyImpl(std::span<const double> x) const override;
  void GradientImpl(std::span<const double> x, std::span<double> out) const override;

 private:
  TspInstance instance_;
  std::size_t n_;
  std::vector<double> dist_;
};

bool IsPermutation(const Tour& tour, std::size_t n);

struct RegressionData {
  std::vector<Vector> features;
  Vector targets;

  std::size_t rows() const { return targets.size(); }
  std::size_t inputs() const { return features.empty() ? 0 : features.front().size(); }
};

// Comma-delimited, header row, last column is the target.
RegressionData LoadRegressionCsv(std::istream& in);
RegressionData LoadRegressionCsv(const std::string& path);

// Targets from a random binary teacher network of the same architecture
// plus Gaussian noise of standard deviation `noise`.
RegressionData SyntheticRegression(std::size_t rows, std::size_t inputs, std::size_t hidden,
                                   double noise, std::uint64_t seed);

// Two-layer tanh network without biases, f(x) = W2 tanh(W1 x), scored by
// U(theta) = -sum_i (f(x_i) - y_i)^2. Weights are laid out as W1 row-major
// (hidden x inputs) followed by W2 (hidden).
class BinaryMlpModel : public EnergyModel {
 public:
  BinaryMlpModel(RegressionData data, std::size_t hidden, Vector alphabet = {-1.0, 1.0});

  std::string name() const override { return "mlp"; }
  std::size_t hidden() const { return hidden_; }
  std::size_t inputs() const { return inputs_; }
  const RegressionData& data() const { return data_; }

  double Predict(std::span<const double> weights, std::span<const double> features) const;
  double Rmse(std::span<const double> weights) const;

 protected:
  double EnergyImpl(std::span<const double> x) const override;
  void GradientImpl(std::span<const double> x, std::span<double> out) const override;

 private:
  RegressionData data_;
  std::size_t inputs_;
  std::size_t hidden_;
};

}  // namespace hiss

#endif  // HISS_MODELS_H_
