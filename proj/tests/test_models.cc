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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "hiss/models.h"
#include "hiss/rng.h"

namespace hiss {
namespace {

template <typename Fn>
std::string ErrorMessage(Fn&& fn) {
  try {
    fn();
  } catch (const std::exception& e) {
    return e.what();
  }
  return {};
}

std::vector<double> RandomPoint(std::size_t d, Rng& rng, double lo, double hi) {
  std::vector<double> x(d);
  for (double& v : x) v = lo + (hi - lo) * rng.Uniform();
  return x;
}

TEST(TabularModelTest, BernoulliTableIsRenormalized) {
  const TabularModel model = Bernoulli4d();
  EXPECT_NEAR(model.raw_sum(), 0.588204 + 0.294102 + 0.117641 + 13 * 5.882e-6, 1e-12);
  EXPECT_NEAR(model.raw_sum(), 1.0000235, 1e-7);
  EXPECT_NEAR(model.Energy(DiscreteState{{0, 0, 0, 0}}), std::log(0.588204 / model.raw_sum()), 1e-12);
  EXPECT_NEAR(model.Energy(DiscreteState{{1, 1, 1, 0}}), std::log(0.294102 / model.raw_sum()), 1e-12);
  double total = 0.0;
  for (double lp : model.log_probs()) total += std::exp(lp);
  EXPECT_NEAR(total, 1.0, 1e-14);
}

TEST(TabularModelTest, EnergyInterpolatesTableAtLatticePoints) {
  const DomainSpec spec({{-1.0, 0.5, 2.0}, {0.0, 1.0}});
  std::vector<double> p{1, 2, 3, 4, 5, 6};
  const TabularModel model(spec, p);
  for (std::uint64_t k = 0; k < 6; ++k) {
    EXPECT_NEAR(model.Energy(spec.StateAt(k)), std::log(p[k] / 21.0), 1e-12) << k;
  }
}

TEST(TabularModelTest, GradientMatchesFiniteDifferenceOffLattice) {
  const TabularModel model = Bernoulli4d();
  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto x = RandomPoint(4, rng, -0.5, 1.5);
    EXPECT_LT(GradientRelativeError(model, x), 1e-6);
  }
  const TabularModel mixed(DomainSpec({{-1.0, 0.5, 2.0}, {0.0, 1.0}}), {1, 2, 3, 4, 5, 6});
  for (int t = 0; t < 20; ++t) EXPECT_LT(GradientRelativeError(mixed, RandomPoint(2, rng, -1, 2)), 1e-6);
}

TEST(TabularModelTest, RejectsBadTables) {
  const DomainSpec spec = DomainSpec::Uniform(2, {0.0, 1.0});
  EXPECT_EQ(ErrorMessage([&] { TabularModel(spec, {1, 1, 1}); }),
            "TabularModel: table has 3 entries, domain has 4 states");
  EXPECT_EQ(ErrorMessage([&] { TabularModel(spec, {1, 0, 1, 1}); }),
            "TabularModel: probabilities must be strictly positive");
  EXPECT_THROW(TabularModel(spec, {1, 1, NAN, 1}), std::invalid_argument);
}

TEST(IsingModelTest, CrossDiagonalCouplingAndEnergy) {
  const auto w = CrossDiagonalInteraction(9);
  for (std::size_t i = 0; i < 9; ++i) {
    for (std::size_t j = 0; j < 9; ++j) EXPECT_EQ(w[i * 9 + j], j == 8 - i ? 1.0 : 0.0);
  }
  const IsingModel model = Ising3x3();
  const DiscreteState up{Vector(9, 1.0)};
  // a * 9 + b * 9 for all spins up.
  EXPECT_NEAR(model.Energy(up), 0.5 * 9 + 0.1 * 9, 1e-14);
  DiscreteState s = up;
  s.values[0] = -1.0;
  // Flipping spin 0 breaks the (0, 8) and (8, 0) pairs.
  EXPECT_NEAR(model.Energy(s), 0.5 * 5 + 0.1 * 7, 1e-14);
}

TEST(IsingModelTest, GradientMatchesFiniteDifference) {
  const IsingModel model = Ising(4, 0.3, -0.2);
  Rng rng(5);
  for (int t = 0; t < 20; ++t) EXPECT_LT(GradientRelativeError(model, RandomPoint(16, rng, -2, 2)), 1e-7);
}

TEST(IsingModelTest, RejectsBadInteraction) {
  std::vector<double> w(4, 0.0);
  w[1] = 1.0;
  EXPECT_EQ(ErrorMessage([&] { IsingModel(2, std::vector<double>(16, 0.0), 1, 0); }), "");
  EXPECT_EQ(ErrorMessage([&] { IsingModel(1, w, 1, 0); }), "IsingModel: interaction must be d x d");
  std::vector<double> asym(16, 0.0);
  asym[1] = 1.0;
  EXPECT_EQ(ErrorMessage([&] { IsingModel(2, asym, 1, 0); }), "IsingModel: interaction must be symmetric");
  EXPECT_THROW(IsingModel(0, {}, 1, 0), std::invalid_argument);
}

constexpr char kSquare[] =
    "NAME : square\n"
    "TYPE : TSP\n"
    "DIMENSION : 4\n"
    "EDGE_WEIGHT_TYPE : EUC_2D\n"
    "NODE_COORD_SECTION\n"
    "1 0 0\n"
    "2 1 0\n"
    "3 1 1\n"
    "4 0 1\n"
    "EOF\n";

TEST(TsplibTest, ParsesWellFormedInstance) {
  const TspInstance inst = ParseTsplib(kSquare);
  EXPECT_EQ(inst.name, "square");
  ASSERT_EQ(inst.size(), 4u);
  EXPECT_EQ(inst.x[2], 1.0);
  EXPECT_EQ(inst.y[3], 1.0);
}

TEST(TsplibTest, ReportsLineNumbers) {
  EXPECT_EQ(ErrorMessage([] { ParseTsplib("DIMENSION : 3\nEDGE_WEIGHT_TYPE : GEO\n"); }),
            "TSPLIB line 2: unsupported EDGE_WEIGHT_TYPE 'GEO' (only EUC_2D)");
  EXPECT_EQ(ErrorMessage([] { ParseTsplib("DIMENSION : x\n"); }), "TSPLIB line 1: invalid DIMENSION 'x'");
  EXPECT_EQ(ErrorMessage([] {
              ParseTsplib("DIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n5 1 1\n");
            }),
            "TSPLIB line 5: node id 5 outside 1..3");
  EXPECT_EQ(ErrorMessage([] {
              ParseTsplib("DIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n1 1 1\n");
            }),
            "TSPLIB line 5: duplicate node id 1");
  EXPECT_EQ(ErrorMessage([] { ParseTsplib("NODE_COORD_SECTION\n"); }),
            "TSPLIB line 1: NODE_COORD_SECTION before DIMENSION");
  EXPECT_EQ(ErrorMessage([] { ParseTsplib("garbage\n"); }), "TSPLIB line 1: expected 'KEY : VALUE'");
}

TEST(TsplibTest, ReportsMissingFields) {
  EXPECT_EQ(ErrorMessage([] { ParseTsplib("NAME : x\n"); }), "TSPLIB: missing DIMENSION");
  EXPECT_EQ(ErrorMessage([] { ParseTsplib("DIMENSION : 3\n"); }), "TSPLIB: missing EDGE_WEIGHT_TYPE");
  EXPECT_EQ(ErrorMessage([] { ParseTsplib("DIMENSION : 3\nEDGE_WEIGHT_TYPE : EUC_2D\nNODE_COORD_SECTION\n1 0 0\n"); }),
            "TSPLIB: DIMENSION is 3 but 1 node coordinates were given");
  EXPECT_THROW(LoadTsplib("/nonexistent/file.tsp"), std::runtime_error);
}

TEST(TsplibTest, BundledInstanceLoads) {
  const TspInstance inst = LoadTsplib(std::string(HISS_DATA_DIR) + "/eil14.tsp");
  EXPECT_EQ(inst.size(), 14u);
}

TEST(TspModelTest, CollinearCitiesTourCost) {
  // Cities on a line at 0, 1, 2: any tour walks out and back.
  const TspModel model(TspInstance{"line", {0, 1, 2}, {0, 0, 0}});
  EXPECT_DOUBLE_EQ(model.TourLength({0, 1, 2}), 4.0);
  EXPECT_DOUBLE_EQ(model.TourLength({2, 0, 1}), 4.0);
  EXPECT_DOUBLE_EQ(model.Energy(model.StateFromTour({1, 0, 2})), -4.0);
}

TEST(TspModelTest, StateTourRoundTripAndFeasibility) {
  const TspModel model(ParseTsplib(kSquare));
  const Tour tour{2, 0, 3, 1};
  const DiscreteState s = model.StateFromTour(tour);
  EXPECT_TRUE(model.Feasible(s));
  EXPECT_EQ(model.TourFromState(s), tour);
  EXPECT_NEAR(-model.Energy(s), model.TourLength(tour), 1e-12);

  DiscreteState bad = s;
  bad.values[0] = 1.0;  // Row 0 now has two ones.
  EXPECT_FALSE(model.Feasible(bad));
  EXPECT_THROW(model.TourFromState(bad), std::invalid_argument);
  EXPECT_FALSE(model.Feasible(DiscreteState{Vector(16, 0.0)}));
  EXPECT_THROW(model.TourLength({0, 0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(TspModel(TspInstance{"two", {0, 1}, {0, 0}}), std::invalid_argument);
}

TEST(TspModelTest, BruteForceOptimumAgreesWithEnergyMaximum) {
  Rng rng(21);
  TspInstance inst{"random", {}, {}};
  for (int k = 0; k < 7; ++k) {
    inst.x.push_back(100 * rng.Uniform());
    inst.y.push_back(100 * rng.Uniform());
  }
  const TspModel model(inst);
  Tour tour(7);
  std::iota(tour.begin(), tour.end(), 0);
  double best_len = std::numeric_limits<double>::infinity();
  double best_energy = -std::numeric_limits<double>::infinity();
  do {
    best_len = std::min(best_len, model.TourLength(tour));
    best_energy = std::max(best_energy, model.Energy(model.StateFromTour(tour)));
  } while (std::next_permutation(tour.begin(), tour.end()));
  EXPECT_NEAR(-best_energy, best_len, 1e-9);
}

TEST(TspModelTest, GradientMatchesFiniteDifference) {
  const TspModel model(LoadTsplib(std::string(HISS_DATA_DIR) + "/eil14.tsp"));
  Rng rng(8);
  for (int t = 0; t < 5; ++t) {
    EXPECT_LT(GradientRelativeError(model, RandomPoint(model.dim(), rng, 0.0, 1.0)), 1e-7);
  }
}

TEST(IsPermutationTest, Cases) {
  EXPECT_TRUE(IsPermutation({2, 0, 1}, 3));
  EXPECT_FALSE(IsPermutation({2, 0, 0}, 3));
  EXPECT_FALSE(IsPermutation({2, 0, 3}, 3));
  EXPECT_FALSE(IsPermutation({-1, 0, 1}, 3));
  EXPECT_FALSE(IsPermutation({0, 1}, 3));
}

TEST(RegressionCsvTest, ParsesAndReportsErrors) {
  std::istringstream good("x1,x2,y\n1,2,3\n4,5,6\n");
  const RegressionData data = LoadRegressionCsv(good);
  EXPECT_EQ(data.rows(), 2u);
  EXPECT_EQ(data.inputs(), 2u);
  EXPECT_EQ(data.features[1][0], 4.0);
  EXPECT_EQ(data.targets[0], 3.0);

  std::istringstream bad_cell("x,y\n1,2\n1,z\n");
  EXPECT_EQ(ErrorMessage([&] { LoadRegressionCsv(bad_cell); }).rfind("CSV line 3: non-numeric cell", 0), 0u);
  std::istringstream ragged("x,y\n1,2,3\n");
  EXPECT_EQ(ErrorMessage([&] { LoadRegressionCsv(ragged); }).rfind("CSV line 2: expected", 0), 0u);
  std::istringstream empty("x,y\n");
  EXPECT_EQ(ErrorMessage([&] { LoadRegressionCsv(empty); }), "CSV: no data rows");
  std::istringstream one_col("y\n1\n");
  EXPECT_THROW(LoadRegressionCsv(one_col), std::runtime_error);
}

TEST(BinaryMlpModelTest, ZeroWeightsGiveNegativeSumOfSquaredTargets) {
  const RegressionData data{{{1.0, 2.0}, {-1.0, 0.5}, {0.0, 3.0}}, {0.5, -2.0, 1.5}};
  const BinaryMlpModel model(data, 3);
  EXPECT_EQ(model.dim(), 3u * 2 + 3);
  const std::vector<double> zero(model.dim(), 0.0);
  EXPECT_NEAR(model.Energy(zero), -(0.25 + 4.0 + 2.25), 1e-14);
  EXPECT_NEAR(model.Rmse(zero), std::sqrt(6.5 / 3.0), 1e-14);
}

TEST(BinaryMlpModelTest, PredictMatchesHandComputation) {
  const RegressionData data{{{1.0, -1.0}}, {0.0}};
  const BinaryMlpModel model(data, 2);
  // Hidden rows (1, 1) and (1, -1), output weights (1, -1).
  const std::vector<double> w{1, 1, 1, -1, 1, -1};
  EXPECT_NEAR(model.Predict(w, data.features[0]), std::tanh(0.0) - std::tanh(2.0), 1e-14);
}

TEST(BinaryMlpModelTest, GradientMatchesFiniteDifference) {
  const BinaryMlpModel model(SyntheticRegression(30, 4, 5, 0.1, 7), 5);
  Rng rng(9);
  for (int t = 0; t < 10; ++t) {
    EXPECT_LT(GradientRelativeError(model, RandomPoint(model.dim(), rng, -1, 1)), 1e-6);
  }
}

TEST(BinaryMlpModelTest, SyntheticDataIsDeterministic) {
  const RegressionData a = SyntheticRegression(10, 3, 4, 0.1, 42);
  const RegressionData b = SyntheticRegression(10, 3, 4, 0.1, 42);
  EXPECT_EQ(a.targets, b.targets);
  EXPECT_EQ(a.rows(), 10u);
  EXPECT_EQ(a.inputs(), 3u);
  EXPECT_NE(SyntheticRegression(10, 3, 4, 0.1, 43).targets, a.targets);
}

TEST(BinaryMlpModelTest, RejectsMalformedData) {
  EXPECT_THROW(BinaryMlpModel(RegressionData{{{1.0}}, {1.0}}, 0), std::invalid_argument);
  EXPECT_THROW(BinaryMlpModel(RegressionData{{{1.0}, {1.0, 2.0}}, {1.0, 2.0}}, 2), std::invalid_argument);
  EXPECT_THROW(BinaryMlpModel(RegressionData{{{1.0}}, {1.0, 2.0}}, 2), std::invalid_argument);
}

}  // namespace
}  // namespace hiss
