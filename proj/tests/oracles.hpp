// Copyright 2026 The tlgp Authors.
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

// Test-only reference computations. Nothing here calls into the library's
// numeric paths, so each one can check the implementation independently.

#ifndef TLGP_TESTS_ORACLES_HPP_
#define TLGP_TESTS_ORACLES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "tlgp/primitives.hpp"
#include "tlgp/program.hpp"

namespace tlgp::oracle {

using Rows = std::vector<std::vector<double>>;

// Least squares by modified Gram-Schmidt QR and back substitution (pseudo-
// inverse solution for full column rank).
inline std::vector<double> least_squares_qr(const Rows& a, const std::vector<double>& y) {
  const std::size_t n = a.size();
  const std::size_t p = a.empty() ? 0 : a[0].size();
  std::vector<std::vector<double>> q(p, std::vector<double>(n));
  std::vector<std::vector<double>> r(p, std::vector<double>(p, 0.0));
  for (std::size_t k = 0; k < p; ++k) {
    for (std::size_t i = 0; i < n; ++i) q[k][i] = a[i][k];
  }
  for (std::size_t k = 0; k < p; ++k) {
    double norm = 0.0;
    for (double v : q[k]) norm += v * v;
    norm = std::sqrt(norm);
    r[k][k] = norm;
    for (double& v : q[k]) v /= norm;
    for (std::size_t m = k + 1; m < p; ++m) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += q[k][i] * q[m][i];
      r[k][m] = dot;
      for (std::size_t i = 0; i < n; ++i) q[m][i] -= dot * q[k][i];
    }
  }
  // Re-orthogonalize the right-hand side projection against Q.
  std::vector<double> qty(p, 0.0);
  std::vector<double> resid = y;
  for (std::size_t k = 0; k < p; ++k) {
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += q[k][i] * resid[i];
    qty[k] = dot;
    for (std::size_t i = 0; i < n; ++i) resid[i] -= dot * q[k][i];
  }
  std::vector<double> w(p, 0.0);
  for (std::size_t k = p; k-- > 0;) {
    double s = qty[k];
    for (std::size_t m = k + 1; m < p; ++m) s -= r[k][m] * w[m];
    w[k] = s / r[k][k];
  }
  return w;
}

inline double relative_error(const std::vector<double>& got, const std::vector<double>& want) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) {
    num += (got[i] - want[i]) * (got[i] - want[i]);
    den += want[i] * want[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

// Direct restatement of the gamma definitions.
inline double gamma(TunableKind kind, const std::vector<double>& s, std::size_t alpha) {
  const double w = static_cast<double>(s.size());
  std::vector<double> diffs;
  for (std::size_t i = 1; i < s.size(); ++i) diffs.push_back(s[i] - s[i - 1]);
  switch (kind) {
    case TunableKind::kAvg: {
      double t = 0;
      for (double v : s) t += v;
      return t / w;
    }
    case TunableKind::kStd: {
      double t = 0;
      for (double v : s) t += v;
      const double m = t / w;
      double ss = 0;
      for (double v : s) ss += (v - m) * (v - m);
      return std::sqrt(ss / w);
    }
    case TunableKind::kFluctuate: {
      double t = 0;
      for (double d : diffs) t += std::fabs(d);
      return t / (w - 1);
    }
    case TunableKind::kNegSlope: {
      double t = 0;
      for (double d : diffs) t += d < 0 ? d : 0;
      return t / (w - 1);
    }
    case TunableKind::kPosSlope: {
      double t = 0;
      for (double d : diffs) t += d > 0 ? d : 0;
      return t / (w - 1);
    }
    case TunableKind::kPeak: {
      double m = s[0];
      for (double v : s) m = v > m ? v : m;
      return m;
    }
    case TunableKind::kValley: {
      double m = s[0];
      for (double v : s) m = v < m ? v : m;
      return m;
    }
    case TunableKind::kPeakLoc: {
      std::size_t best = 0;
      for (std::size_t i = 1; i < s.size(); ++i) {
        if (s[i] > s[best]) best = i;
      }
      return static_cast<double>(alpha + best);
    }
    default:
      return 0.0;
  }
}

// Central finite difference of f at coordinate k.
inline double central_difference(const std::function<double(const std::vector<double>&)>& f,
                                  std::vector<double> x, std::size_t k, double h = 1e-5) {
  const double x0 = x[k];
  x[k] = x0 + h;
  const double up = f(x);
  x[k] = x0 - h;
  const double down = f(x);
  return (up - down) / (2 * h);
}

// Random structurally valid program over `features` inputs.
inline Program random_program(std::mt19937_64& rng, std::size_t registers, std::size_t features,
                              std::size_t max_len, bool with_head, std::size_t head_inputs,
                              bool allow_tunable = true) {
  std::uniform_int_distribution<std::size_t> reg(0, registers - 1);
  std::uniform_int_distribution<std::size_t> feat(0, features - 1);
  std::uniform_int_distribution<std::size_t> len(1, max_len);
  std::uniform_real_distribution<double> coef(-3.0, 3.0);
  const std::size_t nfunc = allow_tunable ? kFunctionCount : kBasicFunctions.size();
  std::uniform_int_distribution<std::size_t> func(0, nfunc - 1);
  auto operand = [&]() -> Operand {
    const int pick = std::uniform_int_distribution<int>(0, allow_tunable ? 2 : 1)(rng);
    if (pick == 0) return RegisterRef{reg(rng)};
    if (pick == 1) return InputRef{feat(rng)};
    const auto kind = kAllTerminalKinds[std::uniform_int_distribution<std::size_t>(0, 9)(rng)];
    const std::size_t lo = min_width(kind);
    const std::size_t width = std::uniform_int_distribution<std::size_t>(lo, std::max(lo, features / 2))(rng);
    const std::size_t alpha = std::uniform_int_distribution<std::size_t>(0, features - width)(rng);
    auto t = make_terminal(kind, alpha, alpha + width - 1, features);
    for (double& c : t.coeffs) c = coef(rng);
    return t;
  };
  Program p;
  p.register_count = registers;
  p.feature_count = features;
  const std::size_t n = len(rng);
  for (std::size_t i = 0; i < n; ++i) {
    Instruction ins;
    ins.dest = reg(rng);
    ins.func = static_cast<Function>(func(rng));
    ins.op1 = operand();
    ins.op2 = operand();
    if (is_tunable(ins.func)) {
      std::vector<double> w(coefficient_count(kind_of(ins.func), 0));
      for (double& c : w) c = coef(rng);
      ins.state = make_function_state(kind_of(ins.func), w);
    }
    p.instructions.push_back(ins);
  }
  if (with_head) {
    p.mvlr = make_mvlr(head_inputs);
    for (double& c : p.mvlr->coeffs) c = coef(rng);
  }
  return p;
}

}  // namespace tlgp::oracle

#endif  // TLGP_TESTS_ORACLES_HPP_
