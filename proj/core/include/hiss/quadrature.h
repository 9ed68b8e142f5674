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

#ifndef HISS_QUADRATURE_H_
#define HISS_QUADRATURE_H_

#include <functional>

namespace hiss {

// Adaptive Simpson quadrature of f over [a, b] to absolute tolerance `tol`.
// Recursion depth is bounded by `max_depth`; the last refinement level is
// accepted when the bound is reached.
double IntegrateAdaptiveSimpson(const std::function<double(double)>& f, double a, double b,
                                double tol = 1e-10, int max_depth = 50);

}  // namespace hiss

#endif  // HISS_QUADRATURE_H_
