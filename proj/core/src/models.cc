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

#include "hiss/models.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "hiss/rng.h"

namespace hiss {

// ---------------------------------------------------------------------------
// TabularModel

TabularModel::TabularModel(DomainSpec domain, std::vector<double> probs, std::string name)
    : EnergyModel(std::move(domain)), name_(std::move(name)) {
  const std::uint64_t count = this->domain().CheckedStateCount();
  if (probs.size() != count) {
    throw std::invalid_argument("TabularModel: table has " + std::to_string(probs.size()) +
                                " entries, domain has " + std::to_string(count) + " states");
  }
  raw_sum_ = 0.0;
  for (double p : probs) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw std::invalid_argument("TabularModel: probabilities must be strictly positive");
    }
    raw_sum_ += p;
  }
  log_probs_.resize(probs.size());
  const double log_sum = std::log(raw_sum_);
  for (std::size_t k = 0; k < probs.size(); ++k) log_probs_[k] = std::log(probs[k]) - log_sum;
}

void TabularModel::Basis(std::span<const double> x, std::vector<Vector>& value,
                         std::vector<Vector>& slope) const {
  const std::size_t d = dim();
  value.assign(d, {});
  slope.assign(d, {});
  for (std::size_t i = 0; i < d; ++i) {
    const auto lv = domain().levels(i);
    const std::size_t m = lv.size();
    value[i].assign(m, 1.0);
    slope[i].assign(m, 0.0);
    for (std::size_t k = 0; k < m; ++k) {
      for (std::size_t j = 0; j < m; ++j) {
        if (j == k) continue;
        value[i][k] *= (x[i] - lv[j]) / (lv[k] - lv[j]);
        double term = 1.0 / (lv[k] - lv[j]);
        for (std::size_t l = 0; l < m; ++l) {
          if (l == k || l == j) continue;
          term *= (x[i] - lv[l]) / (lv[k] - lv[l]);
        }
        slope[i][k] += term;
      }
    }
  }
}

double TabularModel::EnergyImpl(std::span<const double> x) const {
  std::vector<Vector> value, slope;
  Basis(x, value, slope);
  const std::size_t d = dim();
  std::vector<std::size_t> digits(d, 0);
  double total = 0.0;
  for (std::size_t s = 0; s < log_probs_.size(); ++s) {
    double w = 1.0;
    for (std::size_t i = 0; i < d; ++i) w *= value[i][digits[i]];
    total += w * log_probs_[s];
    for (std::size_t i = d; i-- > 0;) {
      if (++digits[i] < domain().level_count(i)) break;
      digits[i] = 0;
    }
  }
  return total;
}

void TabularModel::GradientImpl(std::span<const double> x, std::span<double> out) const {
  std::vector<Vector> value, slope;
  Basis(x, value, slope);
  const std::size_t d = dim();
  std::vector<std::size_t> digits(d, 0);
  for (std::size_t s = 0; s < log_probs_.size(); ++s) {
    for (std::size_t j = 0; j < d; ++j) {
      double w = slope[j][digits[j]];
      for (std::size_t i = 0; i < d; ++i) {
        if (i != j) w *= value[i][digits[i]];
      }
      out[j] += w * log_probs_[s];
    }
    for (std::size_t i = d; i-- > 0;) {
      if (++digits[i] < domain().level_count(i)) break;
      digits[i] = 0;
    }
  }
}

TabularModel Bernoulli4d() {
  std::vector<double> p(16, 5.882e-6);
  p[0b0000] = 0.588204;
  p[0b1110] = 0.294102;
  p[0b1111] = 0.117641;
  return TabularModel(DomainSpec::Uniform(4, {0.0, 1.0}), std::move(p), "bernoulli4d");
}

// ---------------------------------------------------------------------------
// IsingModel

IsingModel::IsingModel(std::size_t side, std::vector<double> interaction, double a, double b)
    : EnergyModel(DomainSpec::Uniform(side * side, {-1.0, 1.0})),
      side_(side),
      d_(side * side),
      w_(std::move(interaction)),
      a_(a),
      b_(b) {
  if (side == 0) throw std::invalid_argument("IsingModel: side must be >= 1");
  if (w_.size() != d_ * d_) throw std::invalid_argument("IsingModel: interaction must be d x d");
  for (std::size_t i = 0; i < d_; ++i) {
    for (std::size_t j = i + 1; j < d_; ++j) {
      if (w_[i * d_ + j] != w_[j * d_ + i]) {
        throw std::invalid_argument("IsingModel: interaction must be symmetric");
      }
    }
  }
}

double IsingModel::EnergyImpl(std::span<const double> x) const {
  double quad = 0.0, lin = 0.0;
  for (std::size_t i = 0; i < d_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d_; ++j) row += w_[i * d_ + j] * x[j];
    quad += x[i] * row;
    lin += x[i];
  }
  return a_ * quad + b_ * lin;
}

void IsingModel::GradientImpl(std::span<const double> x, std::span<double> out) const {
  for (std::size_t i = 0; i < d_; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d_; ++j) row += w_[i * d_ + j] * x[j];
    out[i] = 2.0 * a_ * row + b_;
  }
}

std::vector<double> CrossDiagonalInteraction(std::size_t d) {
  std::vector<double> w(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i) w[i * d + (d - 1 - i)] = 1.0;
  return w;
}

IsingModel Ising(std::size_t side, double a, double b) {
  return IsingModel(side, CrossDiagonalInteraction(side * side), a, b);
}

// ---------------------------------------------------------------------------
// TSPLIB

namespace {

std::string Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void TsplibError(int line, const std::string& what) {
  throw std::runtime_error("TSPLIB line " + std::to_string(line) + ": " + what);
}

}  // namespace

TspInstance ParseTsplib(std::istream& in) {
  TspInstance inst;
  std::size_t dimension = 0;
  std::string edge_type;
  bool in_coords = false;
  std::vector<bool> seen;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = Trim(raw);
    if (line.empty()) continue;
    if (line == "EOF") break;
    if (in_coords) {
      std::istringstream ls(line);
      long id;
      double x, y;
      if (!(ls >> id >> x >> y)) {
        // Another section starts; coordinates are complete.
        if (std::isalpha(static_cast<unsigned char>(line[0]))) {
          in_coords = false;
          continue;
        }
        TsplibError(line_no, "expected '<id> <x> <y>'");
      }
      if (id < 1 || static_cast<std::size_t>(id) > dimension) {
        TsplibError(line_no, "node id " + std::to_string(id) + " outside 1.." +
                                 std::to_string(dimension));
      }
      if (seen[id - 1]) TsplibError(line_no, "duplicate node id " + std::to_string(id));
      seen[id - 1] = true;
      inst.x[id - 1] = x;
      inst.y[id - 1] = y;
      continue;
    }
    if (line.rfind("NODE_COORD_SECTION", 0) == 0) {
      if (dimension == 0) TsplibError(line_no, "NODE_COORD_SECTION before DIMENSION");
      if (edge_type.empty()) TsplibError(line_no, "NODE_COORD_SECTION before EDGE_WEIGHT_TYPE");
      in_coords = true;
      continue;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) TsplibError(line_no, "expected 'KEY : VALUE'");
    const std::string key = Trim(std::string_view(line).substr(0, colon));
    const std::string value = Trim(std::string_view(line).substr(colon + 1));
    if (key == "NAME") {
      inst.name = value;
    } else if (key == "DIMENSION") {
      try {
        std::size_t used = 0;
        const long dim = std::stol(value, &used);
        if (used != value.size() || dim < 1) throw std::invalid_argument(value);
        dimension = static_cast<std::size_t>(dim);
      } catch (const std::exception&) {
        TsplibError(line_no, "invalid DIMENSION '" + value + "'");
      }
      inst.x.assign(dimension, 0.0);
      inst.y.assign(dimension, 0.0);
      seen.assign(dimension, false);
    } else if (key == "EDGE_WEIGHT_TYPE") {
      if (value != "EUC_2D") {
        TsplibError(line_no, "unsupported EDGE_WEIGHT_TYPE '" + value + "' (only EUC_2D)");
      }
      edge_type = value;
    } else if (key == "TYPE" && value != "TSP") {
      TsplibError(line_no, "unsupported TYPE '" + value + "'");
    }
  }
  if (dimension == 0) throw std::runtime_error("TSPLIB: missing DIMENSION");
  if (edge_type.empty()) throw std::runtime_error("TSPLIB: missing EDGE_WEIGHT_TYPE");
  const auto found = static_cast<std::size_t>(std::count(seen.begin(), seen.end(), true));
  if (found != dimension) {
    throw std::runtime_error("TSPLIB: DIMENSION is " + std::to_string(dimension) + " but " +
                             std::to_string(found) + " node coordinates were given");
  }
  return inst;
}

TspInstance ParseTsplib(std::string_view text) {
  std::istringstream in{std::string(text)};
  return ParseTsplib(in);
}

TspInstance LoadTsplib(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open TSPLIB file '" + path + "'");
  return ParseTsplib(in);
}

// ---------------------------------------------------------------------------
// TspModel

TspModel::TspModel(TspInstance instance)
    : EnergyModel(DomainSpec::Uniform(instance.size() * instance.size(), {0.0, 1.0})),
      instance_(std::move(instance)),
      n_(instance_.size()) {
  if (n_ < 3) throw std::invalid_argument("TspModel: need at least 3 cities");
  dist_.resize(n_ * n_);
  for (std::size_t a = 0; a < n_; ++a) {
    for (std::size_t b = 0; b < n_; ++b) {
      dist_[a * n_ + b] = std::hypot(instance_.x[a] - instance_.x[b], instance_.y[a] - instance_.y[b]);
    }
  }
}

bool IsPermutation(const Tour& tour, std::size_t n) {
  if (tour.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (int c : tour) {
    if (c < 0 || static_cast<std::size_t>(c) >= n || seen[c]) return false;
    seen[c] = true;
  }
  return true;
}

bool TspModel::Feasible(const DiscreteState& s) const {
  if (s.dim() != n_ * n_) return false;
  std::vector<int> col(n_, 0);
  for (std::size_t k = 0; k < n_; ++k) {
    int row = 0;
    for (std::size_t c = 0; c < n_; ++c) {
      const double v = s.values[k * n_ + c];
      if (v != 0.0 && v != 1.0) return false;
      if (v == 1.0) {
        ++row;
        ++col[c];
      }
    }
    if (row != 1) return false;
  }
  return std::all_of(col.begin(), col.end(), [](int c) { return c == 1; });
}

double TspModel::TourLength(const Tour& tour) const {
  if (!IsPermutation(tour, n_)) throw std::invalid_argument("TourLength: not a permutation");
  double len = 0.0;
  for (std::size_t k = 0; k < n_; ++k) len += Distance(tour[k], tour[(k + 1) % n_]);
  return len;
}

Tour TspModel::TourFromState(const DiscreteState& s) const {
  if (!Feasible(s)) throw std::invalid_argument("TourFromState: not a permutation matrix");
  Tour tour(n_);
  for (std::size_t k = 0; k < n_; ++k) {
    for (std::size_t c = 0; c < n_; ++c) {
      if (s.values[k * n_ + c] == 1.0) tour[k] = static_cast<int>(c);
    }
  }
  return tour;
}

DiscreteState TspModel::StateFromTour(const Tour& tour) const {
  if (!IsPermutation(tour, n_)) throw std::invalid_argument("StateFromTour: not a permutation");
  DiscreteState s{Vector(n_ * n_, 0.0)};
  for (std::size_t k = 0; k < n_; ++k) s.values[k * n_ + tour[k]] = 1.0;
  return s;
}

double TspModel::EnergyImpl(std::span<const double> x) const {
  double tour = 0.0;
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t next = (k + 1) % n_;
    for (std::size_t c = 0; c < n_; ++c) {
      const double pc = x[k * n_ + c];
      if (pc == 0.0) continue;
      double acc = 0.0;
      for (std::size_t c2 = 0; c2 < n_; ++c2) acc += x[next * n_ + c2] * dist_[c * n_ + c2];
      tour += pc * acc;
    }
  }
  return -tour;
}

void TspModel::GradientImpl(std::span<const double> x, std::span<double> out) const {
  for (std::size_t k = 0; k < n_; ++k) {
    const std::size_t next = (k + 1) % n_;
    const std::size_t prev = (k + n_ - 1) % n_;
    for (std::size_t c = 0; c < n_; ++c) {
      double acc = 0.0;
      for (std::size_t c2 = 0; c2 < n_; ++c2) {
        acc += (x[next * n_ + c2] + x[prev * n_ + c2]) * dist_[c * n_ + c2];
      }
      out[k * n_ + c] = -acc;
    }
  }
}

// ---------------------------------------------------------------------------
// Regression data and BinaryMlpModel

RegressionData LoadRegressionCsv(std::istream& in) {
  RegressionData data;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("CSV: missing header row");
  const auto columns = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  if (columns < 2) throw std::runtime_error("CSV: need at least one feature and one target column");
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    Vector row;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        const std::string t = Trim(cell);
        row.push_back(std::stod(t, &used));
        if (used != t.size()) throw std::invalid_argument(t);
      } catch (const std::exception&) {
        throw std::runtime_error("CSV line " + std::to_string(line_no) + ": non-numeric cell '" +
                                 cell + "'");
      }
    }
    if (row.size() != columns) {
      throw std::runtime_error("CSV line " + std::to_string(line_no) + ": expected " +
                               std::to_string(columns) + " cells, got " + std::to_string(row.size()));
    }
    data.targets.push_back(row.back());
    row.pop_back();
    data.features.push_back(std::move(row));
  }
  if (data.targets.empty()) throw std::runtime_error("CSV: no data rows");
  return data;
}

RegressionData LoadRegressionCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file '" + path + "'");
  return LoadRegressionCsv(in);
}

RegressionData SyntheticRegression(std::size_t rows, std::size_t inputs, std::size_t hidden,
                                   double noise, std::uint64_t seed) {
  Rng rng(seed);
  Vector teacher(hidden * inputs + hidden);
  for (double& w : teacher) w = rng.Uniform() < 0.5 ? -1.0 : 1.0;
  RegressionData data;
  for (std::size_t r = 0; r < rows; ++r) {
    Vector x(inputs);
    for (double& v : x) v = rng.Normal();
    double y = 0.0;
    for (std::size_t j = 0; j < hidden; ++j) {
      double a = 0.0;
      for (std::size_t k = 0; k < inputs; ++k) a += teacher[j * inputs + k] * x[k];
      y += teacher[hidden * inputs + j] * std::tanh(a);
    }
    data.features.push_back(std::move(x));
    data.targets.push_back(y + noise * rng.Normal());
  }
  return data;
}

BinaryMlpModel::BinaryMlpModel(RegressionData data, std::size_t hidden, Vector alphabet)
    : EnergyModel(DomainSpec::Uniform(hidden * data.inputs() + hidden, std::move(alphabet))),
      data_(std::move(data)),
      inputs_(data_.inputs()),
      hidden_(hidden) {
  if (hidden == 0) throw std::invalid_argument("BinaryMlpModel: hidden width must be >= 1");
  if (data_.features.size() != data_.targets.size()) {
    throw std::invalid_argument("BinaryMlpModel: feature rows do not match target count");
  }
  for (const Vector& row : data_.features) {
    if (row.size() != inputs_) throw std::invalid_argument("BinaryMlpModel: ragged feature matrix");
  }
}

double BinaryMlpModel::Predict(std::span<const double> w, std::span<const double> features) const {
  double out = 0.0;
  for (std::size_t j = 0; j < hidden_; ++j) {
    double a = 0.0;
    for (std::size_t k = 0; k < inputs_; ++k) a += w[j * inputs_ + k] * features[k];
    out += w[hidden_ * inputs_ + j] * std::tanh(a);
  }
  return out;
}

double BinaryMlpModel::Rmse(std::span<const double> weights) const {
  return std::sqrt(-EnergyImpl(weights) / static_cast<double>(data_.rows()));
}

double BinaryMlpModel::EnergyImpl(std::span<const double> x) const {
  double loss = 0.0;
  for (std::size_t r = 0; r < data_.rows(); ++r) {
    const double residual = Predict(x, data_.features[r]) - data_.targets[r];
    loss += residual * residual;
  }
  return -loss;
}

void BinaryMlpModel::GradientImpl(std::span<const double> x, std::span<double> out) const {
  Vector h(hidden_);
  for (std::size_t r = 0; r < data_.rows(); ++r) {
    const Vector& f = data_.features[r];
    double pred = 0.0;
    for (std::size_t j = 0; j < hidden_; ++j) {
      double a = 0.0;
      for (std::size_t k = 0; k < inputs_; ++k) a += x[j * inputs_ + k] * f[k];
      h[j] = std::tanh(a);
      pred += x[hidden_ * inputs_ + j] * h[j];
    }
    const double upstream = -2.0 * (pred - data_.targets[r]);
    for (std::size_t j = 0; j < hidden_; ++j) {
      const double w2 = x[hidden_ * inputs_ + j];
      out[hidden_ * inputs_ + j] += upstream * h[j];
      const double back = upstream * w2 * (1.0 - h[j] * h[j]);
      for (std::size_t k = 0; k < inputs_; ++k) out[j * inputs_ + k] += back * f[k];
    }
  }
}

}  // namespace hiss
