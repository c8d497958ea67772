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

#ifndef TLGP_EXECUTE_HPP_
#define TLGP_EXECUTE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "tlgp/common.hpp"
#include "tlgp/primitives.hpp"
#include "tlgp/program.hpp"

namespace tlgp {

// Identifies one tunable site: the function slot of an instruction or one of
// its two operand slots.
enum class Slot { kFunction, kOp1, kOp2 };

struct SiteRef {
  std::size_t instruction = 0;
  Slot slot = Slot::kFunction;
  friend bool operator==(const SiteRef&, const SiteRef&) = default;
};

struct SiteTrace {
  SiteRef site;
  // n x width feature slice for a terminal, n x 1 input values for a function.
  Matrix inputs;
};

struct ExecutionTrace {
  std::vector<SiteTrace> sites;
  // dest_values[i] holds instruction i's result for every instance.
  std::vector<Vector> dest_values;
  // register_count x n register file after the last instruction, before the head.
  Matrix finals;

  const SiteTrace* find(SiteRef s) const {
    for (const auto& t : sites) {
      if (t.site == s) return &t;
    }
    return nullptr;
  }
};

struct Execution {
  Vector predictions;
  std::optional<ExecutionTrace> trace;
};

// Instructions whose result reaches the output: the MVLR inputs, or R0 when
// the program has no head.
inline std::vector<bool> effective_instructions(const Program& p) {
  std::vector<bool> needed(p.register_count, false);
  if (p.mvlr) {
    for (std::size_t r = 0; r < p.mvlr_inputs() && r < p.register_count; ++r) needed[r] = true;
  } else {
    needed[kOutputRegister] = true;
  }
  std::vector<bool> mask(p.instructions.size(), false);
  for (std::size_t i = p.instructions.size(); i-- > 0;) {
    const auto& ins = p.instructions[i];
    if (!needed[ins.dest]) continue;
    mask[i] = true;
    needed[ins.dest] = false;
    const Operand* ops[2] = {&ins.op1, &ins.op2};
    for (int k = 0; k < read_count(ins); ++k) {
      if (const auto* r = std::get_if<RegisterRef>(ops[k])) needed[r->index] = true;
    }
  }
  return mask;
}

inline std::size_t effective_size(const Program& p) {
  std::size_t n = 0;
  for (bool b : effective_instructions(p)) n += b;
  return n;
}

namespace detail {

// Values of one operand for every instance. Register operands alias the
// register row; everything else is materialized into `buffer`.
inline const double* operand_values(const Operand& op, const Matrix& X, const Matrix& registers,
                                    std::vector<double>& buffer) {
  const auto n = static_cast<std::size_t>(X.rows());
  if (const auto* r = std::get_if<RegisterRef>(&op)) return registers.row(r->index).data();
  buffer.resize(n);
  if (const auto* x = std::get_if<InputRef>(&op)) {
    for (std::size_t j = 0; j < n; ++j) buffer[j] = X(j, x->index);
  } else {
    const auto& t = std::get<TunablePrimitiveState>(op);
    const auto d = static_cast<std::size_t>(X.cols());
    for (std::size_t j = 0; j < n; ++j) {
      buffer[j] = eval_tunable_terminal(t, std::span<const double>(X.row(j).data(), d));
    }
  }
  return buffer.data();
}

inline void apply(const Instruction& ins, const double* a, const double* b, double* out, std::size_t n) {
  if (ins.state) {
    for (std::size_t j = 0; j < n; ++j) out[j] = eval_tunable_function(*ins.state, a[j]);
    return;
  }
  switch (ins.func) {
    case Function::kAdd:
      for (std::size_t j = 0; j < n; ++j) out[j] = protect(a[j] + b[j]);
      break;
    case Function::kSub:
      for (std::size_t j = 0; j < n; ++j) out[j] = protect(a[j] - b[j]);
      break;
    case Function::kMul:
      for (std::size_t j = 0; j < n; ++j) out[j] = protect(a[j] * b[j]);
      break;
    default:
      for (std::size_t j = 0; j < n; ++j) out[j] = eval_basic(ins.func, a[j], b[j]);
  }
}

inline Matrix slice_columns(const Matrix& X, std::size_t alpha, std::size_t width) {
  return X.middleCols(static_cast<Eigen::Index>(alpha), static_cast<Eigen::Index>(width));
}

}  // namespace detail

// Runs instructions [0, stop) selected by `mask` (all when null) on zeroed
// registers. Returns the register_count x n register file.
inline Matrix run_instructions(const Program& p, const Matrix& X, const std::vector<bool>* mask = nullptr,
                               ExecutionTrace* trace = nullptr,
                               std::size_t stop = static_cast<std::size_t>(-1)) {
  const auto n = static_cast<std::size_t>(X.rows());
  Matrix registers = Matrix::Zero(static_cast<Eigen::Index>(p.register_count), X.rows());
  std::vector<double> buf1, buf2, out(n);
  if (trace) trace->dest_values.assign(p.instructions.size(), Vector());
  const std::size_t last = std::min(stop, p.instructions.size());
  for (std::size_t i = 0; i < last; ++i) {
    if (mask && !(*mask)[i]) continue;
    const auto& ins = p.instructions[i];
    const double* a = detail::operand_values(ins.op1, X, registers, buf1);
    const double* b = a;
    if (read_count(ins) > 1) b = detail::operand_values(ins.op2, X, registers, buf2);
    if (trace) {
      if (const auto* t = std::get_if<TunablePrimitiveState>(&ins.op1)) {
        trace->sites.push_back({{i, Slot::kOp1}, detail::slice_columns(X, t->alpha, t->width())});
      }
      if (const auto* t = std::get_if<TunablePrimitiveState>(&ins.op2); t && read_count(ins) > 1) {
        trace->sites.push_back({{i, Slot::kOp2}, detail::slice_columns(X, t->alpha, t->width())});
      }
      if (ins.state) {
        trace->sites.push_back({{i, Slot::kFunction}, Eigen::Map<const Matrix>(a, X.rows(), 1)});
      }
    }
    detail::apply(ins, a, b, out.data(), n);
    std::copy(out.begin(), out.end(), registers.row(ins.dest).data());
    if (trace) trace->dest_values[i] = Eigen::Map<const Vector>(out.data(), X.rows());
  }
  return registers;
}

// Output of the program given its final register file.
inline Vector apply_head(const Program& p, const Matrix& registers) {
  const auto n = registers.cols();
  if (!p.mvlr) return registers.row(kOutputRegister).transpose();
  const std::size_t r = p.mvlr_inputs();
  Vector pred(n);
  std::vector<double> finals(r);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (std::size_t k = 0; k < r; ++k) finals[k] = registers(static_cast<Eigen::Index>(k), j);
    pred(j) = eval_mvlr(p.mvlr->coeffs, finals);
  }
  return pred;
}

// Predictions for every row of X. Without a trace only the effective
// instructions run; the output is bit-identical either way.
inline Execution execute(const Program& p, const Matrix& X, bool trace = false) {
  validate(p, static_cast<std::size_t>(X.cols()));
  Execution result;
  if (trace) {
    ExecutionTrace t;
    t.finals = run_instructions(p, X, nullptr, &t);
    result.predictions = apply_head(p, t.finals);
    result.trace = std::move(t);
  } else {
    const auto mask = effective_instructions(p);
    result.predictions = apply_head(p, run_instructions(p, X, &mask));
  }
  return result;
}

inline Vector predict(const Program& p, const Matrix& X) { return execute(p, X).predictions; }

// Immediate inputs of one site, running only the instructions before it.
inline Matrix site_inputs(const Program& p, const Matrix& X, SiteRef site) {
  const auto& ins = p.instructions.at(site.instruction);
  if (site.slot == Slot::kFunction) {
    if (!ins.state) throw StructureError("instruction has no tunable function");
    const Matrix regs = run_instructions(p, X, nullptr, nullptr, site.instruction);
    std::vector<double> buf;
    const double* a = detail::operand_values(ins.op1, X, regs, buf);
    return Eigen::Map<const Matrix>(a, X.rows(), 1);
  }
  const Operand& op = site.slot == Slot::kOp1 ? ins.op1 : ins.op2;
  const auto* t = std::get_if<TunablePrimitiveState>(&op);
  if (!t) throw StructureError("operand is not a tunable terminal");
  return detail::slice_columns(X, t->alpha, t->width());
}

}  // namespace tlgp

#endif  // TLGP_EXECUTE_HPP_
