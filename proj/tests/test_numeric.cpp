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

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tlgp/numeric.hpp"

namespace tlgp {
namespace {

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

oracle::Rows to_rows(const DesignMatrix& a) {
  oracle::Rows rows(a.rows(), std::vector<double>(a.cols()));
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) rows[i][j] = a(i, j);
  }
  return rows;
}

TEST(LeastSquares, InterceptOnly) {
  DesignMatrix a = DesignMatrix::Ones(2, 1);
  Vector y(2);
  y << 4, 4;
  const Vector w = solve_least_squares(a, y);
  ASSERT_EQ(w.size(), 1);
  EXPECT_NEAR(w(0), 4.0, 1e-14);
}

TEST(LeastSquares, ExactAffineData) {
  DesignMatrix a(3, 2);
  a << 1, 0, 1, 1, 1, 2;
  Vector y(3);
  y << 2, 5, 8;
  SolveReport info;
  const Vector w = solve_least_squares(a, y, &info);
  EXPECT_NEAR(w(0), 2.0, 1e-13);
  EXPECT_NEAR(w(1), 3.0, 1e-13);
  EXPECT_FALSE(info.ridge);
  EXPECT_LT((a * w - y).norm(), 1e-12);
}

TEST(LeastSquares, MatchesQrOracleOnRandomSystems) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> v(0, 1);
  for (int t = 0; t < 20; ++t) {
    DesignMatrix a(50, 6);
    Vector y(50);
    for (int i = 0; i < 50; ++i) {
      a(i, 0) = 1;
      for (int j = 1; j < 6; ++j) a(i, j) = v(rng) * (j * 3);
      y(i) = v(rng);
    }
    const auto want = oracle::least_squares_qr(to_rows(a), to_std(y));
    EXPECT_LT(oracle::relative_error(to_std(solve_least_squares(a, y)), want), 1e-8);
  }
}

TEST(LeastSquares, SingularSystemFallsBackToRidge) {
  DesignMatrix a(4, 3);
  a << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8;  // col2 = 2 * col1
  Vector y(4);
  y << 1, 2, 3, 4;
  SolveReport info;
  const Vector w = solve_least_squares(a, y, &info);
  EXPECT_TRUE(info.ridge);
  EXPECT_TRUE(w.allFinite());
  EXPECT_LT((a * w - y).norm(), 1e-6);
}

TEST(LeastSquares, ZeroColumnsAndEmptyData) {
  DesignMatrix a = DesignMatrix::Zero(5, 3);
  a.col(0).setOnes();
  Vector y = Vector::Constant(5, 2.5);
  const Vector w = solve_least_squares(a, y);
  EXPECT_NEAR(w(0), 2.5, 1e-6);
  EXPECT_TRUE(w.allFinite());
  EXPECT_THROW(solve_least_squares(DesignMatrix(0, 2), Vector(0)), DataError);
}

TEST(LeastSquares, OptimalAgainstRandomPerturbations) {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> v(0, 1);
  DesignMatrix a(40, 5);
  Vector y(40);
  for (int i = 0; i < 40; ++i) {
    a(i, 0) = 1;
    for (int j = 1; j < 5; ++j) a(i, j) = v(rng);
    y(i) = v(rng) + a(i, 1);
  }
  const Vector w = solve_least_squares(a, y);
  const double best = (a * w - y).squaredNorm();
  for (int k = 0; k < 100; ++k) {
    Vector other = w;
    for (Eigen::Index j = 0; j < other.size(); ++j) other(j) += 0.1 * v(rng);
    EXPECT_LE(best, (a * other - y).squaredNorm() + 1e-9);
  }
}

TEST(TuneTerminal, RecoversAvgExactly) {
  std::mt19937_64 rng(29);
  std::normal_distribution<double> v(0, 1);
  Matrix slices(30, 4);
  for (Eigen::Index i = 0; i < slices.rows(); ++i) {
    for (Eigen::Index j = 0; j < 4; ++j) slices(i, j) = v(rng);
  }
  const Vector y = slices.rowwise().mean();
  auto s = make_terminal(TunableKind::kAvg, 3, 6, 10);
  s.coeffs = {5, -1};
  const auto tuned = tune_terminal(s, slices, y);
  EXPECT_NEAR(tuned.coeffs[0], 0.0, 1e-12);
  EXPECT_NEAR(tuned.coeffs[1], 1.0, 1e-12);
  EXPECT_LT((terminal_outputs(tuned, slices) - y).norm(), 1e-12);
}

TEST(TuneTerminal, ConstantTargetFitsIntercept) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> v(0, 1);
  Matrix slices(25, 5);
  for (Eigen::Index i = 0; i < slices.rows(); ++i) {
    for (Eigen::Index j = 0; j < 5; ++j) slices(i, j) = v(rng);
  }
  const Vector y = Vector::Constant(25, 3.0);
  for (auto kind : kAllTerminalKinds) {
    const auto tuned = tune_terminal(make_terminal(kind, 0, 4, 5), slices, y);
    EXPECT_LT((terminal_outputs(tuned, slices) - y).cwiseAbs().maxCoeff(), 1e-8) << name(kind);
  }
}

TEST(TuneTerminal, LrMatchesOracleOnRandomSpectra) {
  std::mt19937_64 rng(37);
  std::normal_distribution<double> v(0, 1);
  for (int t = 0; t < 10; ++t) {
    Matrix x(80, 30);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = v(rng) + 0.1 * j;
    }
    Vector y(80);
    for (Eigen::Index i = 0; i < 80; ++i) y(i) = v(rng);
    const auto s = make_terminal(TunableKind::kLR, 7, 16, 30);
    const Matrix slices = x.middleCols(7, 10);
    const auto tuned = tune_terminal(s, slices, y);
    oracle::Rows rows(80, std::vector<double>(11, 1.0));
    for (int i = 0; i < 80; ++i) {
      for (int j = 0; j < 10; ++j) rows[i][j + 1] = slices(i, j);
    }
    EXPECT_LT(oracle::relative_error(tuned.coeffs, oracle::least_squares_qr(rows, to_std(y))), 1e-8);
  }
}

TEST(TuneFunction, LrfRecoversLine) {
  Vector x(5), y(5);
  x << -2, 0, 1, 3, 4;
  y = (5.0 + 2.0 * x.array()).matrix();
  const auto tuned = tune_function(make_function_state(TunableKind::kLrf, {0.3, -1}), x, y);
  EXPECT_NEAR(tuned.coeffs[0], 5.0, 1e-12);
  EXPECT_NEAR(tuned.coeffs[1], 2.0, 1e-12);
}

TEST(TuneFunction, StationaryPointIsKept) {
  Vector x(6);
  x << -1, -0.5, 0, 0.5, 1, 2;
  const auto s = make_function_state(TunableKind::kSinRf, {0.5, 1.2, -0.7, 0.3});
  const Vector y = function_outputs(s, x);
  const auto tuned = tune_function_gd(s, x, y, 5, 0.1);
  EXPECT_EQ(tuned.coeffs, s.coeffs);
}

TEST(TuneFunction, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> om(-3, 3);
  std::uniform_real_distribution<double> xv(-2, 2);
  for (auto kind : {TunableKind::kSinRf, TunableKind::kExpoRf, TunableKind::kPowRf}) {
    for (int t = 0; t < 20; ++t) {
      std::vector<double> w(coefficient_count(kind, 0));
      for (double& c : w) c = om(rng);
      Vector x(8), y(8);
      for (int j = 0; j < 8; ++j) {
        x(j) = xv(rng);
        if (std::abs(x(j)) < 0.05) x(j) = 0.5;
        y(j) = xv(rng);
      }
      const auto s = make_function_state(kind, w);
      const Vector g = loss_gradient(s, x, y);
      auto loss = [&](const std::vector<double>& c) { return function_loss(make_function_state(kind, c), x, y); };
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double fd = oracle::central_difference(loss, w, k);
        EXPECT_LE(std::abs(g(k) - fd), 1e-5 * std::max(1.0, std::abs(fd))) << name(kind) << " coeff " << k;
      }
    }
  }
}

TEST(TuneFunction, NeverWorseAndClamped) {
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> om(-3, 3);
  std::normal_distribution<double> v(0, 2);
  for (auto kind : {TunableKind::kSinRf, TunableKind::kExpoRf, TunableKind::kPowRf}) {
    for (int t = 0; t < 100; ++t) {
      std::vector<double> w(coefficient_count(kind, 0));
      for (double& c : w) c = om(rng);
      Vector x(15), y(15);
      for (int j = 0; j < 15; ++j) {
        x(j) = v(rng);
        y(j) = 3 * x(j) + v(rng);
      }
      const auto s = make_function_state(kind, w);
      const auto tuned = tune_function_gd(s, x, y, 5, 0.1);
      EXPECT_LE(function_loss(tuned, x, y), function_loss(s, x, y));
      for (double c : tuned.coeffs) {
        EXPECT_GE(c, -3.0);
        EXPECT_LE(c, 3.0);
      }
    }
  }
  EXPECT_THROW(tune_function_gd(make_function_state(TunableKind::kLrf, {0, 1}), Vector::Ones(2), Vector::Ones(2)),
               StructureError);
}

TEST(TuneMvlr, IdentityAndMeanCases) {
  Program p;
  p.register_count = 3;
  p.instructions.push_back({1, Function::kAdd, InputRef{0}, RegisterRef{2}, std::nullopt});
  p.mvlr = make_mvlr(2);
  Matrix x(4, 1);
  x << 1, 4, -2, 7;
  Vector y = x.col(0);
  const auto regs = run_instructions(p, x);
  auto tuned = tune_mvlr(p, regs, y);
  // R0 stays zero, so its weight is arbitrary; the fit must still be exact.
  EXPECT_NEAR(tuned.mvlr->coeffs[0], 0.0, 1e-10);
  EXPECT_NEAR(tuned.mvlr->coeffs[2], 1.0, 1e-10);
  EXPECT_LT((predict(tuned, x) - y).norm(), 1e-10);

  Program zero = p;
  zero.instructions[0].dest = 2;
  y << 1, 2, 3, 6;
  tuned = tune_mvlr(zero, run_instructions(zero, x), y);
  EXPECT_NEAR(tuned.mvlr->coeffs[0], 3.0, 1e-10);
}

TEST(TuneMvlr, MatchesOracleAndBeatsAlternatives) {
  std::mt19937_64 rng(47);
  std::normal_distribution<double> v(0, 1);
  for (int t = 0; t < 10; ++t) {
    Matrix regs(6, 60);
    for (Eigen::Index i = 0; i < regs.rows(); ++i) {
      for (Eigen::Index j = 0; j < regs.cols(); ++j) regs(i, j) = v(rng);
    }
    Vector y(60);
    for (int j = 0; j < 60; ++j) y(j) = v(rng) + regs(1, j);
    Program p;
    p.register_count = 6;
    p.instructions.push_back({5, Function::kAdd, RegisterRef{0}, RegisterRef{0}, std::nullopt});
    p.mvlr = make_mvlr(4);
    const auto tuned = tune_mvlr(p, regs, y);
    oracle::Rows rows(60, std::vector<double>(5, 1.0));
    for (int j = 0; j < 60; ++j) {
      for (int k = 0; k < 4; ++k) rows[j][k + 1] = regs(k, j);
    }
    EXPECT_LT(oracle::relative_error(tuned.mvlr->coeffs, oracle::least_squares_qr(rows, to_std(y))), 1e-8);
    const double best = (apply_head(tuned, regs) - y).squaredNorm();
    for (int k = 0; k < 20; ++k) {
      Program other = tuned;
      for (double& c : other.mvlr->coeffs) c += 0.05 * v(rng);
      EXPECT_LE(best, (apply_head(other, regs) - y).squaredNorm() + 1e-9);
    }
  }
}

}  // namespace
}  // namespace tlgp
