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

// Primitive catalog: basic functions, tunable terminals over feature ranges,
// residual-style tunable functions, and the multivariate linear head.

#ifndef TLGP_PRIMITIVES_HPP_
#define TLGP_PRIMITIVES_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tlgp/common.hpp"

namespace tlgp {

enum class Function {
  kAdd,
  kSub,
  kMul,
  kAq,
  kSin,
  kCos,
  kTanh,
  kMax,
  kMin,
  kSqrt,
  kSquare,
  kExp,
  kLn,
  // Tunable functions. Each instruction using one owns a TunableState.
  kLrf,
  kSinRf,
  kExpoRf,
  kPowRf,
};

inline constexpr std::size_t kFunctionCount = 17;

enum class TunableKind {
  kLR,
  kFirstDerivativeLR,
  kAvg,
  kStd,
  kFluctuate,
  kNegSlope,
  kPosSlope,
  kPeak,
  kValley,
  kPeakLoc,
  kLrf,
  kSinRf,
  kExpoRf,
  kPowRf,
  kMvlr,
};

inline constexpr std::size_t kTerminalKindCount = 10;

inline constexpr std::array<TunableKind, kTerminalKindCount> kAllTerminalKinds = {
    TunableKind::kLR,       TunableKind::kFirstDerivativeLR, TunableKind::kAvg,
    TunableKind::kStd,      TunableKind::kFluctuate,         TunableKind::kNegSlope,
    TunableKind::kPosSlope, TunableKind::kPeak,              TunableKind::kValley,
    TunableKind::kPeakLoc};

inline constexpr std::array<Function, 13> kBasicFunctions = {
    Function::kAdd,  Function::kSub, Function::kMul,  Function::kAq,     Function::kSin,
    Function::kCos,  Function::kTanh, Function::kMax, Function::kMin,    Function::kSqrt,
    Function::kSquare, Function::kExp, Function::kLn};

inline constexpr std::array<Function, 4> kTunableFunctions = {
    Function::kLrf, Function::kSinRf, Function::kExpoRf, Function::kPowRf};

inline bool is_tunable(Function f) {
  return f == Function::kLrf || f == Function::kSinRf || f == Function::kExpoRf ||
         f == Function::kPowRf;
}

inline int arity(Function f) {
  switch (f) {
    case Function::kAdd:
    case Function::kSub:
    case Function::kMul:
    case Function::kAq:
    case Function::kMax:
    case Function::kMin:
      return 2;
    default:
      return 1;
  }
}

inline bool is_terminal_kind(TunableKind k) {
  return static_cast<int>(k) <= static_cast<int>(TunableKind::kPeakLoc);
}

inline bool is_function_kind(TunableKind k) {
  return k == TunableKind::kLrf || k == TunableKind::kSinRf || k == TunableKind::kExpoRf ||
         k == TunableKind::kPowRf;
}

// Kinds whose gamma works on successive differences need two features.
inline std::size_t min_width(TunableKind k) {
  switch (k) {
    case TunableKind::kFirstDerivativeLR:
    case TunableKind::kFluctuate:
    case TunableKind::kNegSlope:
    case TunableKind::kPosSlope:
      return 2;
    default:
      return 1;
  }
}

inline TunableKind kind_of(Function f) {
  switch (f) {
    case Function::kLrf: return TunableKind::kLrf;
    case Function::kSinRf: return TunableKind::kSinRf;
    case Function::kExpoRf: return TunableKind::kExpoRf;
    case Function::kPowRf: return TunableKind::kPowRf;
    default: throw StructureError("function is not tunable");
  }
}

inline std::string_view name(Function f) {
  switch (f) {
    case Function::kAdd: return "add";
    case Function::kSub: return "sub";
    case Function::kMul: return "mul";
    case Function::kAq: return "aq";
    case Function::kSin: return "sin";
    case Function::kCos: return "cos";
    case Function::kTanh: return "tanh";
    case Function::kMax: return "max";
    case Function::kMin: return "min";
    case Function::kSqrt: return "sqrt";
    case Function::kSquare: return "square";
    case Function::kExp: return "exp";
    case Function::kLn: return "ln";
    case Function::kLrf: return "LRF";
    case Function::kSinRf: return "SinRF";
    case Function::kExpoRf: return "ExpoRF";
    case Function::kPowRf: return "PowRF";
  }
  return "?";
}

inline std::string_view name(TunableKind k) {
  switch (k) {
    case TunableKind::kLR: return "LR";
    case TunableKind::kFirstDerivativeLR: return "1stDLR";
    case TunableKind::kAvg: return "Avg";
    case TunableKind::kStd: return "Std";
    case TunableKind::kFluctuate: return "Fluctuate";
    case TunableKind::kNegSlope: return "NegSlope";
    case TunableKind::kPosSlope: return "PosSlope";
    case TunableKind::kPeak: return "Peak";
    case TunableKind::kValley: return "Valley";
    case TunableKind::kPeakLoc: return "PeakLoc";
    case TunableKind::kLrf: return "LRF";
    case TunableKind::kSinRf: return "SinRF";
    case TunableKind::kExpoRf: return "ExpoRF";
    case TunableKind::kPowRf: return "PowRF";
    case TunableKind::kMvlr: return "MVLR";
  }
  return "?";
}

inline std::optional<Function> function_from_name(std::string_view s) {
  for (std::size_t i = 0; i < kFunctionCount; ++i) {
    const auto f = static_cast<Function>(i);
    if (name(f) == s) return f;
  }
  return std::nullopt;
}

inline std::optional<TunableKind> kind_from_name(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(TunableKind::kMvlr); ++i) {
    const auto k = static_cast<TunableKind>(i);
    if (name(k) == s) return k;
  }
  return std::nullopt;
}

// Coefficients of one tunable site. alpha/beta are inclusive feature indices
// for terminals and the register range for the MVLR head; functions ignore them.
struct TunablePrimitiveState {
  TunableKind kind = TunableKind::kLR;
  std::size_t alpha = 0;
  std::size_t beta = 0;
  std::vector<double> coeffs;

  std::size_t width() const { return beta - alpha + 1; }

  friend bool operator==(const TunablePrimitiveState&, const TunablePrimitiveState&) = default;
};

inline std::size_t coefficient_count(TunableKind k, std::size_t width) {
  switch (k) {
    case TunableKind::kLR: return width + 1;
    case TunableKind::kFirstDerivativeLR: return width;
    case TunableKind::kSinRf: return 4;
    case TunableKind::kMvlr: return width + 1;
    default: return 2;
  }
}

// Largest admissible terminal range for `feature_count` features.
inline std::size_t max_terminal_width(std::size_t feature_count, double cap_fraction) {
  const auto w = static_cast<std::size_t>(std::ceil(cap_fraction * static_cast<double>(feature_count)));
  return std::clamp<std::size_t>(w, 1, std::max<std::size_t>(feature_count, 1));
}

inline void validate_terminal_range(TunableKind kind, std::size_t alpha, std::size_t beta,
                                    std::size_t feature_count) {
  if (!is_terminal_kind(kind)) throw StructureError(std::string(name(kind)) + " is not a terminal");
  if (alpha > beta) throw StructureError("terminal range has alpha > beta");
  if (beta >= feature_count) {
    throw StructureError("terminal range [" + std::to_string(alpha) + ":" + std::to_string(beta) +
                         "] exceeds " + std::to_string(feature_count) + " features");
  }
  if (beta - alpha + 1 < min_width(kind)) {
    throw StructureError(std::string(name(kind)) + " needs at least " +
                         std::to_string(min_width(kind)) + " features");
  }
}

inline void validate_terminal(const TunablePrimitiveState& s, std::size_t feature_count) {
  validate_terminal_range(s.kind, s.alpha, s.beta, feature_count);
  if (s.coeffs.size() != coefficient_count(s.kind, s.width())) {
    throw StructureError(std::string(name(s.kind)) + " expects " +
                         std::to_string(coefficient_count(s.kind, s.width())) + " coefficients");
  }
}

// Fresh terminal with neutral coefficients: intercept 0 and unit slope on
// gamma. LR starts as the slice mean and 1stDLR as the mean first difference.
inline TunablePrimitiveState make_terminal(TunableKind kind, std::size_t alpha, std::size_t beta,
                                           std::size_t feature_count) {
  validate_terminal_range(kind, alpha, beta, feature_count);
  TunablePrimitiveState s{kind, alpha, beta, {}};
  const std::size_t w = s.width();
  switch (kind) {
    case TunableKind::kLR:
      s.coeffs.assign(w + 1, 1.0 / static_cast<double>(w));
      s.coeffs[0] = 0.0;
      break;
    case TunableKind::kFirstDerivativeLR:
      s.coeffs.assign(w, 1.0 / static_cast<double>(w - 1));
      s.coeffs[0] = 0.0;
      break;
    default:
      s.coeffs = {0.0, 1.0};
  }
  return s;
}

inline TunablePrimitiveState make_function_state(TunableKind kind, std::vector<double> omega) {
  if (!is_function_kind(kind)) throw StructureError(std::string(name(kind)) + " is not a function");
  if (omega.size() != coefficient_count(kind, 0)) {
    throw StructureError(std::string(name(kind)) + " expects " +
                         std::to_string(coefficient_count(kind, 0)) + " coefficients");
  }
  return {kind, 0, 0, std::move(omega)};
}

inline constexpr double kLnGuard = 1e-12;
inline constexpr double kExpClamp = 30.0;
inline constexpr double kOmegaBound = 3.0;

// exp(z) with z clamped to [-30, 30]; every tunable power goes through this.
inline double clamped_exp(double z) { return std::exp(std::clamp(z, -kExpClamp, kExpClamp)); }

inline double eval_basic(Function f, double a, double b) {
  double v = 0.0;
  switch (f) {
    case Function::kAdd: v = a + b; break;
    case Function::kSub: v = a - b; break;
    case Function::kMul: v = a * b; break;
    case Function::kAq: v = a / std::sqrt(1.0 + b * b); break;
    case Function::kSin: v = std::sin(a); break;
    case Function::kCos: v = std::cos(a); break;
    case Function::kTanh: v = std::tanh(a); break;
    case Function::kMax: v = std::max(a, b); break;
    case Function::kMin: v = std::min(a, b); break;
    case Function::kSqrt: v = std::sqrt(std::abs(a)); break;
    case Function::kSquare: v = a * a; break;
    case Function::kExp: v = std::exp(std::min(a, kExpClamp)); break;
    case Function::kLn: v = std::abs(a) < kLnGuard ? 0.0 : std::log(std::abs(a)); break;
    default: throw StructureError(std::string(name(f)) + " is not a basic function");
  }
  // a/sqrt(1+b^2) with |b| ~ 1e200 squares to inf and gives 0, which is the limit.
  return protect(v);
}

// gamma of one instance's slice. `alpha` is the absolute index of slice[0] and
// only matters for PeakLoc.
inline double gamma_eval(TunableKind kind, std::span<const double> slice, std::size_t alpha = 0) {
  const std::size_t w = slice.size();
  if (w < min_width(kind) || w == 0) throw StructureError("slice too short for " + std::string(name(kind)));
  switch (kind) {
    case TunableKind::kAvg: {
      double sum = 0.0;
      for (double v : slice) sum += v;
      return sum / static_cast<double>(w);
    }
    case TunableKind::kStd: {
      double sum = 0.0;
      for (double v : slice) sum += v;
      const double mean = sum / static_cast<double>(w);
      double ss = 0.0;
      for (double v : slice) ss += (v - mean) * (v - mean);
      return std::sqrt(ss / static_cast<double>(w));
    }
    case TunableKind::kFluctuate:
    case TunableKind::kNegSlope:
    case TunableKind::kPosSlope: {
      double sum = 0.0;
      for (std::size_t i = 1; i < w; ++i) {
        const double d = slice[i] - slice[i - 1];
        if (kind == TunableKind::kFluctuate) sum += std::abs(d);
        else if (kind == TunableKind::kNegSlope) sum += std::min(d, 0.0);
        else sum += std::max(d, 0.0);
      }
      return sum / static_cast<double>(w - 1);
    }
    case TunableKind::kPeak: return *std::max_element(slice.begin(), slice.end());
    case TunableKind::kValley: return *std::min_element(slice.begin(), slice.end());
    case TunableKind::kPeakLoc: {
      // max_element returns the first maximum, so ties go to the lowest index.
      const auto it = std::max_element(slice.begin(), slice.end());
      return static_cast<double>(alpha + static_cast<std::size_t>(it - slice.begin()));
    }
    default: throw StructureError(std::string(name(kind)) + " has no gamma form");
  }
}

// `slice` is the instance's features alpha..beta.
inline double eval_terminal_on_slice(const TunablePrimitiveState& s, std::span<const double> slice) {
  const auto& w = s.coeffs;
  double v = w[0];
  switch (s.kind) {
    case TunableKind::kLR:
      for (std::size_t i = 0; i < slice.size(); ++i) v += w[i + 1] * slice[i];
      break;
    case TunableKind::kFirstDerivativeLR:
      for (std::size_t i = 1; i < slice.size(); ++i) v += w[i] * (slice[i] - slice[i - 1]);
      break;
    default:
      v += w[1] * gamma_eval(s.kind, slice, s.alpha);
  }
  return protect(v);
}

// `row` holds all features of one instance.
inline double eval_tunable_terminal(const TunablePrimitiveState& s, std::span<const double> row) {
  return eval_terminal_on_slice(s, row.subspan(s.alpha, s.width()));
}

// |x|^p through the clamped exponent. 0^p is 1 for p = 0 and 0 otherwise.
inline double protected_abs_pow(double x, double p) {
  const double ax = std::abs(x);
  if (ax == 0.0) return p == 0.0 ? 1.0 : 0.0;
  return clamped_exp(p * std::log(ax));
}

// (w^2 + 1)^x through the clamped exponent.
inline double protected_expo(double w, double x) { return clamped_exp(x * std::log1p(w * w)); }

inline double eval_tunable_function(const TunablePrimitiveState& s, double x) {
  const auto& w = s.coeffs;
  double v = 0.0;
  switch (s.kind) {
    case TunableKind::kLrf: v = w[0] + w[1] * x; break;
    case TunableKind::kSinRf: v = w[0] + w[1] * std::sin(w[2] * x + w[3]) + x; break;
    case TunableKind::kExpoRf: v = w[0] + protected_expo(w[1], x) + x; break;
    case TunableKind::kPowRf: v = w[0] + protected_abs_pow(x, w[1]) + x; break;
    default: throw StructureError(std::string(name(s.kind)) + " is not a tunable function");
  }
  return protect(v);
}

// Affine head [1, finals] . w.
inline double eval_mvlr(std::span<const double> w, std::span<const double> finals) {
  if (w.size() != finals.size() + 1) {
    throw StructureError("MVLR head has " + std::to_string(w.size()) + " coefficients for " +
                         std::to_string(finals.size()) + " registers");
  }
  double v = w[0];
  for (std::size_t i = 0; i < finals.size(); ++i) v += w[i + 1] * finals[i];
  return protect(v);
}

// Which primitives a run may draw from.
struct PrimitiveSet {
  std::vector<Function> functions;
  std::vector<TunableKind> terminals;
  bool raw_inputs = false;
  bool mvlr = true;

  static PrimitiveSet fish() {
    PrimitiveSet p;
    p.functions.assign(kBasicFunctions.begin(), kBasicFunctions.end());
    p.functions.insert(p.functions.end(), kTunableFunctions.begin(), kTunableFunctions.end());
    p.terminals.assign(kAllTerminalKinds.begin(), kAllTerminalKinds.end());
    p.raw_inputs = false;
    p.mvlr = true;
    return p;
  }

  static PrimitiveSet srbench() {
    PrimitiveSet p = fish();
    p.terminals = {TunableKind::kLR};
    p.raw_inputs = true;
    return p;
  }

  // Plain LGP: basic functions over registers and raw inputs, output in R0.
  static PrimitiveSet basic() {
    PrimitiveSet p;
    p.functions.assign(kBasicFunctions.begin(), kBasicFunctions.end());
    p.raw_inputs = true;
    p.mvlr = false;
    return p;
  }
};

}  // namespace tlgp

#endif  // TLGP_PRIMITIVES_HPP_
