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

// Coefficient tuning. Every tunable site is fitted to approximate the target
// from its own immediate inputs, minimizing the sum of squared errors
//
//   L(W) = sum_j (tau(x_j, W) - y_j)^2.
//
// Linear-in-W primitives (terminals, LRF, the MVLR head) are solved by least
// squares; SinRF, ExpoRF and PowRF take normalized gradient steps.

#ifndef TLGP_NUMERIC_HPP_
#define TLGP_NUMERIC_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tlgp/common.hpp"
#include "tlgp/execute.hpp"
#include "tlgp/primitives.hpp"
#include "tlgp/program.hpp"

namespace tlgp {

using DesignMatrix = Eigen::MatrixXd;

struct LeastSquaresProblem {
  DesignMatrix design;  // n x p, first column all ones
  Vector targets;       // n
};

struct SolveReport {
  bool ridge = false;
  double rcond = 0.0;  // reciprocal condition estimate of the equilibrated normal matrix
};

inline constexpr double kMaxCondition = 1e10;
inline constexpr double kRidgeScale = 1e-8;

// Minimizes ||design * W - targets||^2 through the normal equations. Columns
// are equilibrated first; an ill-conditioned or singular system is solved with
// a small ridge term lambda = 1e-8 * trace / p instead. The result is finite.
inline Vector solve_least_squares(const DesignMatrix& design, const Vector& targets,
                                  SolveReport* report = nullptr) {
  const auto n = design.rows();
  const auto p = design.cols();
  if (n == 0) throw DataError("least squares on empty data");
  if (p == 0) return Vector();
  if (targets.size() != n) throw StructureError("design and target sizes differ");

  // All-zero columns carry no information and get weight 0.
  std::vector<Eigen::Index> live;
  std::vector<double> scales;
  for (Eigen::Index k = 0; k < p; ++k) {
    const double m = design.col(k).cwiseAbs().maxCoeff();
    if (m > 0.0) {
      live.push_back(k);
      scales.push_back(std::isfinite(m) ? 1.0 / m : 1.0);
    }
  }
  Vector full = Vector::Zero(p);
  if (live.empty()) {
    if (report) *report = SolveReport{};
    return full;
  }
  const auto q = static_cast<Eigen::Index>(live.size());
  const Vector scale = Eigen::Map<const Vector>(scales.data(), q);
  const DesignMatrix scaled = design(Eigen::all, live) * scale.asDiagonal();
  DesignMatrix gram = DesignMatrix::Zero(q, q);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(scaled.transpose());
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  const Vector rhs = scaled.transpose() * targets;

  SolveReport info;
  Vector w;
  Eigen::LDLT<DesignMatrix> ldlt(gram);
  if (ldlt.info() == Eigen::Success) {
    // LDLT silently skips zero pivots, so rcond() alone misses exact rank loss.
    const Vector d = ldlt.vectorD().cwiseAbs();
    const double pivot_ratio = d.maxCoeff() > 0.0 ? d.minCoeff() / d.maxCoeff() : 0.0;
    info.rcond = std::min(ldlt.rcond(), pivot_ratio);
  }
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && info.rcond * kMaxCondition >= 1.0) {
    w = ldlt.solve(rhs);
  }
  if (w.size() != q || !w.allFinite()) {
    info.ridge = true;
    const double tr = gram.trace();
    const double lambda = tr > 0.0 ? kRidgeScale * tr / static_cast<double>(q) : kRidgeScale;
    gram.diagonal().array() += lambda;
    w = gram.ldlt().solve(rhs);
  }
  w = w.cwiseProduct(scale);
  if (w.allFinite()) {
    for (Eigen::Index k = 0; k < q; ++k) full(live[static_cast<std::size_t>(k)]) = w(k);
  }
  if (report) *report = info;
  return full;
}

inline Vector solve_least_squares(const LeastSquaresProblem& problem, SolveReport* report = nullptr) {
  return solve_least_squares(problem.design, problem.targets, report);
}

inline double sum_squared_error(const Vector& fitted, const Vector& targets) {
  const double l = (fitted - targets).squaredNorm();
  return std::isfinite(l) ? l : std::numeric_limits<double>::max();
}

// ---------------------------------------------------------------------------
// Terminals

// Outputs of a terminal on every row of its recorded n x width slice matrix.
inline Vector terminal_outputs(const TunablePrimitiveState& s, const Matrix& slices) {
  Vector out(slices.rows());
  const auto w = static_cast<std::size_t>(slices.cols());
  for (Eigen::Index j = 0; j < slices.rows(); ++j) {
    out(j) = eval_terminal_on_slice(s, std::span<const double>(slices.row(j).data(), w));
  }
  return out;
}

// Kind-specific least-squares design for a terminal:
// LR [1, X], 1stDLR [1, row differences], gamma forms [1, gamma(slice)].
inline DesignMatrix terminal_design(const TunablePrimitiveState& s, const Matrix& slices) {
  const auto n = slices.rows();
  const auto w = slices.cols();
  DesignMatrix design;
  switch (s.kind) {
    case TunableKind::kLR:
      design.resize(n, w + 1);
      design.col(0).setOnes();
      design.rightCols(w) = slices;
      break;
    case TunableKind::kFirstDerivativeLR:
      design.resize(n, w);
      design.col(0).setOnes();
      design.rightCols(w - 1) = slices.rightCols(w - 1) - slices.leftCols(w - 1);
      break;
    default: {
      design.resize(n, 2);
      design.col(0).setOnes();
      const auto ww = static_cast<std::size_t>(w);
      for (Eigen::Index j = 0; j < n; ++j) {
        design(j, 1) = gamma_eval(s.kind, std::span<const double>(slices.row(j).data(), ww), s.alpha);
      }
    }
  }
  return design;
}

// Least-squares fit of a terminal's coefficients. The previous coefficients
// are kept when the fit does not lower the loss.
inline TunablePrimitiveState tune_terminal(const TunablePrimitiveState& state, const Matrix& slices,
                                           const Vector& targets) {
  if (!is_terminal_kind(state.kind)) throw StructureError("tune_terminal on a non-terminal");
  if (static_cast<std::size_t>(slices.cols()) != state.width()) {
    throw StructureError("slice width does not match the terminal range");
  }
  const Vector w = solve_least_squares(terminal_design(state, slices), targets);
  TunablePrimitiveState tuned = state;
  tuned.coeffs.assign(w.data(), w.data() + w.size());
  const double before = sum_squared_error(terminal_outputs(state, slices), targets);
  const double after = sum_squared_error(terminal_outputs(tuned, slices), targets);
  return after <= before ? tuned : state;
}

// ---------------------------------------------------------------------------
// Tunable functions

inline Vector function_outputs(const TunablePrimitiveState& s, const Vector& x) {
  Vector out(x.size());
  for (Eigen::Index j = 0; j < x.size(); ++j) out(j) = eval_tunable_function(s, x(j));
  return out;
}

inline double function_loss(const TunablePrimitiveState& s, const Vector& x, const Vector& targets) {
  return sum_squared_error(function_outputs(s, x), targets);
}

// Analytic dL/domega for SinRF, ExpoRF and PowRF. Where the protected power
// saturates its exponent clamp the output is flat in omega_1, so that term
// contributes nothing.
inline Vector loss_gradient(const TunablePrimitiveState& s, const Vector& x, const Vector& targets) {
  const auto& w = s.coeffs;
  Vector g = Vector::Zero(static_cast<Eigen::Index>(w.size()));
  for (Eigen::Index j = 0; j < x.size(); ++j) {
    const double xj = x(j);
    const double e = 2.0 * (eval_tunable_function(s, xj) - targets(j));
    switch (s.kind) {
      case TunableKind::kSinRf: {
        const double arg = w[2] * xj + w[3];
        const double sn = std::sin(arg);
        const double cs = std::cos(arg);
        g(0) += e;
        g(1) += e * sn;
        g(2) += e * w[1] * cs * xj;
        g(3) += e * w[1] * cs;
        break;
      }
      case TunableKind::kExpoRf: {
        g(0) += e;
        const double z = xj * std::log1p(w[1] * w[1]);
        if (std::abs(z) < kExpClamp) {
          // d/dw (w^2+1)^x = 2 w x (w^2+1)^(x-1)
          g(1) += e * 2.0 * w[1] * xj * protected_expo(w[1], xj) / (1.0 + w[1] * w[1]);
        }
        break;
      }
      case TunableKind::kPowRf: {
        g(0) += e;
        const double ax = std::abs(xj);
        if (ax > 0.0 && std::abs(w[1] * std::log(ax)) < kExpClamp) {
          g(1) += e * protected_abs_pow(xj, w[1]) * std::log(ax);
        }
        break;
      }
      default:
        throw StructureError(std::string(name(s.kind)) + " has no gradient rule");
    }
  }
  return g;
}

inline constexpr double kGradientFloor = 1e-10;

// `steps` normalized gradient steps omega <- omega - lambda * g / |g|, each
// followed by clamping omega to [-3, 3]. Returns the lowest-loss coefficients
// seen, including the starting point.
inline TunablePrimitiveState tune_function_gd(const TunablePrimitiveState& state, const Vector& x,
                                              const Vector& targets, std::size_t steps = 5,
                                              double step_size = 0.1) {
  if (state.kind != TunableKind::kSinRf && state.kind != TunableKind::kExpoRf &&
      state.kind != TunableKind::kPowRf) {
    throw StructureError("gradient tuning applies to SinRF, ExpoRF and PowRF");
  }
  TunablePrimitiveState best = state;
  double best_loss = function_loss(state, x, targets);
  TunablePrimitiveState current = state;
  for (std::size_t step = 0; step < steps; ++step) {
    const Vector g = loss_gradient(current, x, targets);
    const double norm = g.norm();
    if (!(norm >= kGradientFloor) || !std::isfinite(norm)) break;
    for (std::size_t k = 0; k < current.coeffs.size(); ++k) {
      current.coeffs[k] = std::clamp(current.coeffs[k] - step_size * g(static_cast<Eigen::Index>(k)) / norm,
                                     -kOmegaBound, kOmegaBound);
    }
    const double loss = function_loss(current, x, targets);
    if (loss < best_loss) {
      best_loss = loss;
      best = current;
    }
  }
  return best;
}

// LRF is linear in omega and is fitted by least squares on [1, x]; its
// coefficients are not range-limited.
inline TunablePrimitiveState tune_lrf(const TunablePrimitiveState& state, const Vector& x,
                                      const Vector& targets) {
  DesignMatrix design(x.size(), 2);
  design.col(0).setOnes();
  design.col(1) = x;
  const Vector w = solve_least_squares(design, targets);
  TunablePrimitiveState tuned = state;
  tuned.coeffs = {w(0), w(1)};
  return function_loss(tuned, x, targets) <= function_loss(state, x, targets) ? tuned : state;
}

inline TunablePrimitiveState tune_function(const TunablePrimitiveState& state, const Vector& x,
                                           const Vector& targets, std::size_t steps = 5,
                                           double step_size = 0.1) {
  if (state.kind == TunableKind::kLrf) return tune_lrf(state, x, targets);
  return tune_function_gd(state, x, targets, steps, step_size);
}

// ---------------------------------------------------------------------------
// MVLR head

inline DesignMatrix mvlr_design(const Matrix& registers, std::size_t inputs) {
  DesignMatrix design(registers.cols(), static_cast<Eigen::Index>(inputs) + 1);
  design.col(0).setOnes();
  design.rightCols(static_cast<Eigen::Index>(inputs)) =
      registers.topRows(static_cast<Eigen::Index>(inputs)).transpose();
  return design;
}

// Refits the head on the final register values (register_count x n). Returns
// the program unchanged when it has no head.
inline Program tune_mvlr(const Program& program, const Matrix& registers, const Vector& targets) {
  if (!program.mvlr) return program;
  const std::size_t r = program.mvlr_inputs();
  if (static_cast<std::size_t>(registers.rows()) < r || registers.cols() != targets.size()) {
    throw StructureError("register file does not match the MVLR head");
  }
  const Vector w = solve_least_squares(mvlr_design(registers, r), targets);
  Program tuned = program;
  tuned.mvlr->coeffs.assign(w.data(), w.data() + w.size());
  const double before = sum_squared_error(apply_head(program, registers), targets);
  const double after = sum_squared_error(apply_head(tuned, registers), targets);
  return after <= before ? tuned : program;
}

inline Program tune_mvlr(const Program& program, const ExecutionTrace& trace, const Vector& targets) {
  return tune_mvlr(program, trace.finals, targets);
}

}  // namespace tlgp

#endif  // TLGP_NUMERIC_HPP_
