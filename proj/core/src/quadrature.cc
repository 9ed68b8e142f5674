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

#include "hiss/quadrature.h"

#include <cmath>

namespace hiss {
namespace {

struct Panel {
  double a, m, b;
  double fa, fm, fb;
  double whole;
};

double Simpson(double a, double b, double fa, double fm, double fb) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double Recurse(const std::function<double(double)>& f, const Panel& p, double tol, int depth) {
  const double lm = 0.5 * (p.a + p.m);
  const double rm = 0.5 * (p.m + p.b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = Simpson(p.a, p.m, p.fa, flm, p.fm);
  const double right = Simpson(p.m, p.b, p.fm, frm, p.fb);
  const double delta = left + right - p.whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return Recurse(f, {p.a, lm, p.m, p.fa, flm, p.fm, left}, 0.5 * tol, depth - 1) +
         Recurse(f, {p.m, rm, p.b, p.fm, frm, p.fb, right}, 0.5 * tol, depth - 1);
}

}  // namespace

double IntegrateAdaptiveSimpson(const std::function<double(double)>& f, double a, double b,
                                double tol, int max_depth) {
  // Seed with a fixed 64-panel split so narrow peaks are not missed by the
  // first three-point estimate.
  constexpr int kPanels = 64;
  const double width = (b - a) / kPanels;
  double total = 0.0;
  for (int k = 0; k < kPanels; ++k) {
    const double lo = a + k * width;
    const double hi = (k + 1 == kPanels) ? b : lo + width;
    const double mid = 0.5 * (lo + hi);
    const double flo = f(lo), fmid = f(mid), fhi = f(hi);
    total += Recurse(f, {lo, mid, hi, flo, fmid, fhi, Simpson(lo, hi, flo, fmid, fhi)},
                     tol / kPanels, max_depth);
  }
  return total;
}

}  // namespace hiss
