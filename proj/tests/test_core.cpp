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

#include <random>
#include <string>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "tlgp/execute.hpp"
#include "tlgp/program.hpp"

namespace tlgp {
namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
  std::normal_distribution<double> v(0, 2);
  Matrix x(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = v(rng);
  }
  return x;
}

TEST(Execute, ZeroHeadGivesZeros) {
  std::mt19937_64 rng(1);
  auto p = oracle::random_program(rng, 6, 5, 10, true, 3);
  p.mvlr = make_mvlr(3);
  const Matrix x = random_matrix(rng, 20, 5);
  EXPECT_TRUE(predict(p, x).isZero(0.0));
}

TEST(Execute, OverviewFormula) {
  // (x1 + 1)^2 * x0 / x1, with 1 = cos(0) and 1/x1 = exp(-ln|x1|).
  const auto p = parse_program(
      "registers 4\n"
      "R1 = cos(R2, R2)\n"
      "R1 = add(x1, R1)\n"
      "R1 = square(R1, R1)\n"
      "R1 = mul(R1, x0)\n"
      "R3 = ln(x1, x1)\n"
      "R3 = sub(R2, R3)\n"
      "R3 = exp(R3, R3)\n"
      "R0 = mul(R1, R3)\n"
      "R0 = MVLR[0:0]{0,1}\n");
  Matrix x(2, 2);
  x << 2, 1, 3, 2;
  const Vector y = predict(p, x);
  EXPECT_EQ(y(0), 8.0);
  EXPECT_NEAR(y(1), 13.5, 1e-12);
}

TEST(Execute, DoublingThroughIdentityHead) {
  const auto p = parse_program("registers 2\nR1 = add(x0, x0)\nR0 = MVLR[0:1]{0,0,1}\n");
  Matrix x(2, 1);
  x << 3, 5;
  const Vector y = predict(p, x);
  EXPECT_EQ(y(0), 6.0);
  EXPECT_EQ(y(1), 10.0);
}

TEST(Execute, WithoutHeadOutputsR0) {
  const auto p = parse_program("registers 2\nR0 = mul(x0, x0)\n");
  Matrix x(1, 1);
  x << -3;
  EXPECT_EQ(predict(p, x)(0), 9.0);
}

TEST(Execute, MalformedIndicesAreErrors) {
  Matrix x = Matrix::Ones(3, 4);
  Program p;
  p.register_count = 2;
  p.instructions.push_back({0, Function::kAdd, InputRef{4}, RegisterRef{0}, std::nullopt});
  EXPECT_THROW(execute(p, x), StructureError);
  p.instructions[0].op1 = RegisterRef{2};
  EXPECT_THROW(execute(p, x), StructureError);
  p.instructions[0].op1 = make_terminal(TunableKind::kAvg, 0, 3, 4);
  EXPECT_NO_THROW(execute(p, x));
  EXPECT_THROW(execute(p, Matrix::Ones(3, 3)), StructureError);
  p.instructions[0].dest = 5;
  EXPECT_THROW(execute(p, x), StructureError);
}

TEST(Execute, DeterministicWithAndWithoutTrace) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    const auto p = oracle::random_program(rng, 8, 12, 30, i % 3 != 0, 4);
    const Matrix x = random_matrix(rng, 25, 12);
    const auto a = execute(p, x, false);
    const auto b = execute(p, x, true);
    ASSERT_TRUE(b.trace.has_value());
    EXPECT_EQ(a.predictions, b.predictions);
    EXPECT_EQ(execute(p, x).predictions, a.predictions);
    EXPECT_TRUE(a.predictions.allFinite());
  }
}

TEST(Execute, TraceRecordsEveryTunableSite) {
  std::mt19937_64 rng(9);
  for (int i = 0; i < 30; ++i) {
    const auto p = oracle::random_program(rng, 6, 10, 20, true, 3);
    const Matrix x = random_matrix(rng, 17, 10);
    const auto t = *execute(p, x, true).trace;
    EXPECT_EQ(t.dest_values.size(), p.size());
    EXPECT_EQ(t.finals.cols(), 17);
    for (std::size_t k = 0; k < p.size(); ++k) {
      const auto& ins = p.instructions[k];
      EXPECT_EQ(t.dest_values[k].size(), 17);
      if (ins.state) {
        const auto* s = t.find({k, Slot::kFunction});
        ASSERT_NE(s, nullptr);
        EXPECT_EQ(s->inputs.rows(), 17);
        EXPECT_EQ(s->inputs, site_inputs(p, x, {k, Slot::kFunction}));
      }
      if (const auto* term = std::get_if<TunablePrimitiveState>(&ins.op1)) {
        const auto* s = t.find({k, Slot::kOp1});
        ASSERT_NE(s, nullptr);
        EXPECT_EQ(s->inputs.rows(), 17);
        EXPECT_EQ(static_cast<std::size_t>(s->inputs.cols()), term->width());
      }
    }
  }
}

TEST(Effective, SingleInstructionFeedingHead) {
  const auto p = parse_program("registers 3\nR1 = add(x0, x0)\nR0 = MVLR[0:1]{0,0,1}\n");
  EXPECT_EQ(effective_instructions(p), std::vector<bool>{true});
}

TEST(Effective, DeadStoreIsIntron) {
  const auto p = parse_program(
      "registers 6\n"
      "R1 = add(x0, x1)\n"
      "R5 = mul(x0, R1)\n"
      "R0 = sin(R1, R5)\n"
      "R0 = MVLR[0:1]{0.5,2,-1}\n");
  EXPECT_EQ(effective_instructions(p), (std::vector<bool>{true, false, true}));
  auto pruned = p;
  pruned.instructions.erase(pruned.instructions.begin() + 1);
  std::mt19937_64 rng(2);
  const Matrix x = random_matrix(rng, 30, 2);
  EXPECT_EQ(predict(p, x), predict(pruned, x));
}

TEST(Effective, OverwrittenBeforeReadIsIntron) {
  const auto p = parse_program("registers 2\nR0 = add(x0, x0)\nR0 = mul(x0, x0)\n");
  EXPECT_EQ(effective_instructions(p), (std::vector<bool>{false, true}));
}

TEST(Effective, EffectiveSubsetMatchesFullExecution) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const bool head = i % 4 != 0;
    const auto p = oracle::random_program(rng, 8, 9, 40, head, 4);
    const Matrix x = random_matrix(rng, 20, 9);
    const auto mask = effective_instructions(p);
    const Vector full = apply_head(p, run_instructions(p, x));
    const Vector effective = apply_head(p, run_instructions(p, x, &mask));
    EXPECT_EQ(full, effective);
  }
}

TEST(TextFormat, RoundTripRandomPrograms) {
  std::mt19937_64 rng(17);
  for (int i = 0; i < 300; ++i) {
    const auto p = oracle::random_program(rng, 1 + i % 12, 15, 25, i % 2 == 0, 1 + i % 12 / 2);
    const auto text = to_string(p);
    EXPECT_EQ(parse_program(text), p) << text;
    EXPECT_EQ(to_string(parse_program(text)), text);
  }
}

TEST(TextFormat, ReportsLineNumbers) {
  try {
    parse_program("registers 2\nR0 = add(x0, x0)\nR1 = frobnicate(x0, x0)\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("frobnicate"), std::string::npos);
  }
  EXPECT_THROW(parse_program("R0 = add(x0, x0)\n"), ParseError);
  EXPECT_THROW(parse_program("registers 2\nR0 = LR[0:1]{1,2}(x0, x0)\n"), ParseError);
  EXPECT_THROW(parse_program("registers 2\nR0 = add(LR[0:1]{1,2}, x0)\n"), ParseError);
  EXPECT_THROW(parse_program("registers 2\nR0 = MVLR[0:1]{0,1,1}\nR1 = add(x0, x0)\n"), ParseError);
  EXPECT_THROW(parse_program("registers 2\nR3 = add(x0, x0)\n"), ParseError);
  EXPECT_THROW(parse_program("registers 2\nfeatures 3\nR1 = add(x3, x0)\n"), ParseError);
}

}  // namespace
}  // namespace tlgp
