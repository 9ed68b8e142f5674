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

#include "hiss/domain.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hiss {
namespace {

std::string CapMessage(std::optional<std::uint64_t> count, std::uint64_t cap) {
  std::ostringstream os;
  os << "state space too large to enumerate: ";
  if (count) {
    os << *count << " states";
  } else {
    os << "more than 2^64 states";
  }
  os << " exceed the cap of " << cap;
  return os.str();
}

}  // namespace

EnumerationCapError::EnumerationCapError(std::optional<std::uint64_t> state_count,
                                         std::uint64_t cap)
    : std::runtime_error(CapMessage(state_count, cap)), state_count_(state_count) {}

bool AuxState::finite() const {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

DomainSpec::DomainSpec(std::vector<Vector> alphabets) : alphabets_(std::move(alphabets)) {
  if (alphabets_.empty()) throw std::invalid_argument("DomainSpec: dimension must be >= 1");
  for (std::size_t i = 0; i < alphabets_.size(); ++i) {
    const Vector& a = alphabets_[i];
    if (a.empty()) {
      throw std::invalid_argument("DomainSpec: alphabet " + std::to_string(i) + " is empty");
    }
    for (std::size_t k = 0; k < a.size(); ++k) {
      if (!std::isfinite(a[k])) {
        throw std::invalid_argument("DomainSpec: non-finite level in alphabet " + std::to_string(i));
      }
      if (k > 0 && !(a[k - 1] < a[k])) {
        throw std::invalid_argument("DomainSpec: alphabet " + std::to_string(i) +
                                    " must be strictly ascending");
      }
    }
  }
}

DomainSpec DomainSpec::Uniform(std::size_t dim, Vector levels) {
  return DomainSpec(std::vector<Vector>(dim, std::move(levels)));
}

std::optional<std::size_t> DomainSpec::LevelIndex(std::size_t i, double value) const {
  const Vector& a = alphabets_[i];
  auto it = std::lower_bound(a.begin(), a.end(), value);
  if (it == a.end() || *it != value) return std::nullopt;
  return static_cast<std::size_t>(it - a.begin());
}

bool DomainSpec::Contains(const DiscreteState& state) const {
  if (state.dim() != dim()) return false;
  for (std::size_t i = 0; i < dim(); ++i) {
    if (!Contains(i, state.values[i])) return false;
  }
  return true;
}

std::optional<std::uint64_t> DomainSpec::StateCount() const {
  std::uint64_t count = 1;
  for (const Vector& a : alphabets_) {
    if (count > std::numeric_limits<std::uint64_t>::max() / a.size()) return std::nullopt;
    count *= a.size();
  }
  return count;
}

std::uint64_t DomainSpec::CheckedStateCount(std::uint64_t cap) const {
  const auto count = StateCount();
  if (!count || *count > cap) throw EnumerationCapError(count, cap);
  return *count;
}

std::uint64_t DomainSpec::StateIndex(const DiscreteState& state) const {
  if (state.dim() != dim()) throw std::invalid_argument("StateIndex: dimension mismatch");
  std::uint64_t index = 0;
  for (std::size_t i = 0; i < dim(); ++i) {
    const auto level = LevelIndex(i, state.values[i]);
    if (!level) throw std::invalid_argument("StateIndex: value outside alphabet");
    index = index * alphabets_[i].size() + *level;
  }
  return index;
}

DiscreteState DomainSpec::StateAt(std::uint64_t index) const {
  DiscreteState s{Vector(dim())};
  for (std::size_t i = dim(); i-- > 0;) {
    const std::uint64_t radix = alphabets_[i].size();
    s.values[i] = alphabets_[i][index % radix];
    index /= radix;
  }
  if (index != 0) throw std::out_of_range("StateAt: index beyond state count");
  return s;
}

DiscreteState DomainSpec::LowestState() const {
  DiscreteState s{Vector(dim())};
  for (std::size_t i = 0; i < dim(); ++i) s.values[i] = alphabets_[i].front();
  return s;
}

StateRange::iterator::iterator(const DomainSpec* spec, bool at_end)
    : spec_(spec), at_end_(at_end) {
  if (!at_end_) {
    digits_.assign(spec_->dim(), 0);
    state_ = spec_->LowestState();
  }
}

StateRange::iterator& StateRange::iterator::operator++() {
  ++position_;
  for (std::size_t i = digits_.size(); i-- > 0;) {
    if (++digits_[i] < spec_->level_count(i)) {
      state_.values[i] = spec_->levels(i)[digits_[i]];
      return *this;
    }
    digits_[i] = 0;
    state_.values[i] = spec_->levels(i)[0];
  }
  at_end_ = true;
  return *this;
}

StateRange EnumerateStates(const DomainSpec& spec, std::uint64_t cap) {
  spec.CheckedStateCount(cap);
  return StateRange(spec);
}

double StateDistanceL2(const DiscreteState& a, const DiscreteState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("StateDistanceL2: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double diff = a.values[i] - b.values[i];
    sum += diff * diff;
  }
  return std::sqrt(sum);
}

std::size_t HammingDistance(const DiscreteState& a, const DiscreteState& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("HammingDistance: dimension mismatch");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.dim(); ++i) n += a.values[i] != b.values[i];
  return n;
}

double EnergyModel::Energy(std::span<const double> x) const {
  if (x.size() != dim()) throw std::invalid_argument(name() + ": energy input has wrong dimension");
  energy_calls_.fetch_add(1, std::memory_order_relaxed);
  return EnergyImpl(x);
}

Vector EnergyModel::Gradient(std::span<const double> x) const {
  if (x.size() != dim()) throw std::invalid_argument(name() + ": gradient input has wrong dimension");
  gradient_calls_.fetch_add(1, std::memory_order_relaxed);
  Vector out(dim(), 0.0);
  GradientImpl(x, out);
  return out;
}

Vector FiniteDifferenceGradient(const EnergyModel& model, std::span<const double> x, double h) {
  Vector probe(x.begin(), x.end());
  Vector g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double step = h * std::max(1.0, std::abs(x[i]));
    probe[i] = x[i] + step;
    const double up = model.Energy(probe);
    probe[i] = x[i] - step;
    const double down = model.Energy(probe);
    probe[i] = x[i];
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double GradientRelativeError(const EnergyModel& model, std::span<const double> x, double h,
                             double floor) {
  const Vector analytic = model.Gradient(x);
  const Vector numeric = FiniteDifferenceGradient(model, x, h);
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    diff += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
    na += analytic[i] * analytic[i];
    nn += numeric[i] * numeric[i];
  }
  return std::sqrt(diff) / std::max({std::sqrt(na), std::sqrt(nn), floor});
}

}  // namespace hiss
