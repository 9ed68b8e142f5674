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

#ifndef HISS_DOMAIN_H_
#define HISS_DOMAIN_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iterator>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hiss {

using Vector = std::vector<double>;

inline constexpr std::uint64_t kDefaultEnumerationCap = std::uint64_t{1} << 24;

// Raised when exhaustive enumeration would exceed the configured cap.
class EnumerationCapError : public std::runtime_error {
 public:
  EnumerationCapError(std::optional<std::uint64_t> state_count, std::uint64_t cap);

  // Empty when the count itself overflows 64 bits.
  std::optional<std::uint64_t> state_count() const { return state_count_; }

 private:
  std::optional<std::uint64_t> state_count_;
};

// A point of the discrete lattice. Each coordinate holds one of the levels
// of the corresponding alphabet.
struct DiscreteState {
  Vector values;

  std::size_t dim() const { return values.size(); }
  friend bool operator==(const DiscreteState&, const DiscreteState&) = default;
};

// Continuous auxiliary variable paired with a DiscreteState.
struct AuxState {
  Vector values;

  std::size_t dim() const { return values.size(); }
  bool finite() const;
};

struct JointState {
  DiscreteState theta;
  AuxState theta_a;
};

// Product of per-coordinate finite alphabets of real-valued levels. Levels
// within an alphabet are distinct and sorted ascending.
class DomainSpec {
 public:
  explicit DomainSpec(std::vector<Vector> alphabets);

  // d coordinates sharing one alphabet.
  static DomainSpec Uniform(std::size_t dim, Vector levels);

  std::size_t dim() const { return alphabets_.size(); }
  std::span<const double> levels(std::size_t i) const { return alphabets_[i]; }
  std::size_t level_count(std::size_t i) const { return alphabets_[i].size(); }

  // Position of `value` in alphabet i, or nullopt. O(log |alphabet|).
  std::optional<std::size_t> LevelIndex(std::size_t i, double value) const;
  bool Contains(std::size_t i, double value) const { return LevelIndex(i, value).has_value(); }
  bool Contains(const DiscreteState& state) const;

  // Product of alphabet sizes; nullopt on 64-bit overflow.
  std::optional<std::uint64_t> StateCount() const;

  // Throws EnumerationCapError unless StateCount() <= cap.
  std::uint64_t CheckedStateCount(std::uint64_t cap = kDefaultEnumerationCap) const;

  // Mixed-radix rank with coordinate 0 most significant, matching the order
  // of EnumerateStates.
  std::uint64_t StateIndex(const DiscreteState& state) const;
  DiscreteState StateAt(std::uint64_t index) const;

  // State with every coordinate at its smallest level.
  DiscreteState LowestState() const;

  friend bool operator==(const DomainSpec&, const DomainSpec&) = default;

 private:
  std::vector<Vector> alphabets_;
};

// Forward range over every state of a domain in lexicographic order of
// level indices.
class StateRange {
 public:
  class iterator {
   public:
    using iterator_category = std::input_iterator_tag;
    using value_type = DiscreteState;
    using difference_type = std::ptrdiff_t;
    using pointer = const DiscreteState*;
    using reference = const DiscreteState&;

    iterator() = default;
    iterator(const DomainSpec* spec, bool at_end);

    reference operator*() const { return state_; }
    pointer operator->() const { return &state_; }
    iterator& operator++();
    iterator operator++(int) {
      iterator copy = *this;
      ++*this;
      return copy;
    }
    friend bool operator==(const iterator& a, const iterator& b) {
      return a.at_end_ == b.at_end_ && (a.at_end_ || a.position_ == b.position_);
    }

   private:
    const DomainSpec* spec_ = nullptr;
    std::vector<std::size_t> digits_;
    DiscreteState state_;
    std::uint64_t position_ = 0;
    bool at_end_ = true;
  };

  explicit StateRange(const DomainSpec& spec) : spec_(&spec) {}
  iterator begin() const { return iterator(spec_, false); }
  iterator end() const { return iterator(spec_, true); }

 private:
  const DomainSpec* spec_;
};

// All states of `spec`. Throws EnumerationCapError when the state count
// exceeds `cap`. The returned range borrows `spec`.
StateRange EnumerateStates(const DomainSpec& spec, std::uint64_t cap = kDefaultEnumerationCap);

// Euclidean distance between the level vectors. Throws std::invalid_argument
// on dimension mismatch.
double StateDistanceL2(const DiscreteState& a, const DiscreteState& b);

// Number of coordinates that differ.
std::size_t HammingDistance(const DiscreteState& a, const DiscreteState& b);

// Differentiable extension U of a log-unnormalized discrete target
// pi(theta) ~ exp(U(theta)). Implementations accept any real vector of
// length dim(), not only lattice points.
//
// Evaluation counters are monotone and safe under concurrent increments;
// they count raw evaluations. Cost accounting in the NFE convention lives in
// ChainStats.
class EnergyModel {
 public:
  explicit EnergyModel(DomainSpec domain) : domain_(std::move(domain)) {}
  virtual ~EnergyModel() = default;

  // Copies start with fresh call counters.
  EnergyModel(const EnergyModel& other) : domain_(other.domain_) {}
  EnergyModel& operator=(const EnergyModel&) = delete;

  double Energy(std::span<const double> x) const;
  Vector Gradient(std::span<const double> x) const;

  double Energy(const DiscreteState& s) const { return Energy(std::span<const double>(s.values)); }
  Vector Gradient(const DiscreteState& s) const { return Gradient(std::span<const double>(s.values)); }

  const DomainSpec& domain() const { return domain_; }
  std::size_t dim() const { return domain_.dim(); }

  std::uint64_t energy_calls() const { return energy_calls_.load(std::memory_order_relaxed); }
  std::uint64_t gradient_calls() const { return gradient_calls_.load(std::memory_order_relaxed); }

  // Lattice points a sampler may emit. Only constrained models override.
  virtual bool Feasible(const DiscreteState&) const { return true; }

  virtual std::string name() const = 0;

 protected:
  virtual double EnergyImpl(std::span<const double> x) const = 0;
  virtual void GradientImpl(std::span<const double> x, std::span<double> out) const = 0;

 private:
  DomainSpec domain_;
  mutable std::atomic<std::uint64_t> energy_calls_{0};
  mutable std::atomic<std::uint64_t> gradient_calls_{0};
};

// Central finite-difference gradient with per-coordinate step
// h * max(1, |x_i|).
Vector FiniteDifferenceGradient(const EnergyModel& model, std::span<const double> x,
                                double h = 1e-5);

// ||g - g_fd||_2 / max(||g||_2, ||g_fd||_2, floor). The floor keeps points
// with a vanishing gradient from dividing by zero.
double GradientRelativeError(const EnergyModel& model, std::span<const double> x,
                             double h = 1e-5, double floor = 1e-8);

}  // namespace hiss

#endif  // HISS_DOMAIN_H_
