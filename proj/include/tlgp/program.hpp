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

// Linear programs over a register file and their line-oriented text form:
//
//   registers 8
//   features 10
//   R1 = add(x0, R2)
//   R2 = SinRF{0.5,1,-2,0.25}(R1, R0)
//   R3 = mul(LR[3:5]{0,1,1,1}, R1)
//   R0 = MVLR[0:3]{0.1,1,0,0,2}
//
// The MVLR line is the head and always comes last. Without it, R0 is the output.

#ifndef TLGP_PROGRAM_HPP_
#define TLGP_PROGRAM_HPP_

#include <cctype>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tlgp/common.hpp"
#include "tlgp/primitives.hpp"

namespace tlgp {

struct RegisterRef {
  std::size_t index = 0;
  friend bool operator==(const RegisterRef&, const RegisterRef&) = default;
};

struct InputRef {
  std::size_t index = 0;
  friend bool operator==(const InputRef&, const InputRef&) = default;
};

// A source operand: register, raw input feature, or tunable terminal site.
using Operand = std::variant<RegisterRef, InputRef, TunablePrimitiveState>;

struct Instruction {
  std::size_t dest = 0;
  Function func = Function::kAdd;
  Operand op1 = RegisterRef{0};
  Operand op2 = RegisterRef{0};
  // Present exactly when func is a tunable function.
  std::optional<TunablePrimitiveState> state;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

inline constexpr std::size_t kOutputRegister = 0;

struct Program {
  std::size_t register_count = 1;
  // Width of the data the program was built for; 0 when unknown.
  std::size_t feature_count = 0;
  std::vector<Instruction> instructions;
  // kMvlr state over registers [0, beta]. Absent: R0 is the raw output.
  std::optional<TunablePrimitiveState> mvlr;

  std::size_t size() const { return instructions.size(); }
  std::size_t mvlr_inputs() const { return mvlr ? mvlr->beta + 1 : 0; }

  friend bool operator==(const Program&, const Program&) = default;
};

inline TunablePrimitiveState make_mvlr(std::size_t inputs) {
  if (inputs == 0) throw StructureError("MVLR needs at least one input register");
  TunablePrimitiveState s{TunableKind::kMvlr, 0, inputs - 1, std::vector<double>(inputs + 1, 0.0)};
  return s;
}

// Operands read by an instruction. Unary functions ignore op2.
inline int read_count(const Instruction& ins) { return arity(ins.func); }

inline void validate_operand(const Operand& op, std::size_t register_count, std::size_t feature_count,
                             std::size_t line) {
  const auto where = " in instruction " + std::to_string(line);
  if (const auto* r = std::get_if<RegisterRef>(&op)) {
    if (r->index >= register_count) {
      throw StructureError("register R" + std::to_string(r->index) + " out of range" + where);
    }
  } else if (const auto* x = std::get_if<InputRef>(&op)) {
    if (x->index >= feature_count) {
      throw StructureError("input x" + std::to_string(x->index) + " out of range" + where);
    }
  } else {
    try {
      validate_terminal(std::get<TunablePrimitiveState>(op), feature_count);
    } catch (const StructureError& e) {
      throw StructureError(e.what() + where);
    }
  }
}

// Throws StructureError naming the first defect. `feature_count` is the width
// of the data the program will run on.
inline void validate(const Program& p, std::size_t feature_count, std::size_t max_size = 0) {
  if (p.register_count == 0) throw StructureError("program has no registers");
  if (p.instructions.empty()) throw StructureError("program has no instructions");
  if (max_size != 0 && p.instructions.size() > max_size) {
    throw StructureError("program has " + std::to_string(p.instructions.size()) +
                         " instructions, limit is " + std::to_string(max_size));
  }
  for (std::size_t i = 0; i < p.instructions.size(); ++i) {
    const auto& ins = p.instructions[i];
    if (ins.dest >= p.register_count) {
      throw StructureError("destination R" + std::to_string(ins.dest) + " out of range in instruction " +
                           std::to_string(i));
    }
    validate_operand(ins.op1, p.register_count, feature_count, i);
    validate_operand(ins.op2, p.register_count, feature_count, i);
    if (is_tunable(ins.func)) {
      if (!ins.state || ins.state->kind != kind_of(ins.func) ||
          ins.state->coeffs.size() != coefficient_count(ins.state->kind, 0)) {
        throw StructureError("tunable function without matching state in instruction " + std::to_string(i));
      }
    } else if (ins.state) {
      throw StructureError("basic function carries a tunable state in instruction " + std::to_string(i));
    }
  }
  if (p.mvlr) {
    const auto& m = *p.mvlr;
    if (m.kind != TunableKind::kMvlr || m.alpha != 0 || m.beta >= p.register_count ||
        m.coeffs.size() != m.beta + 2) {
      throw StructureError("malformed MVLR head");
    }
  }
}

// ---------------------------------------------------------------------------
// Text form

inline std::string coeff_list(const std::vector<double>& w) {
  std::string s = "{";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ',';
    s += format_double(w[i]);
  }
  return s + "}";
}

inline std::string to_string(const TunablePrimitiveState& s) {
  std::string out(name(s.kind));
  if (!is_function_kind(s.kind)) out += "[" + std::to_string(s.alpha) + ":" + std::to_string(s.beta) + "]";
  return out + coeff_list(s.coeffs);
}

inline std::string to_string(const Operand& op) {
  if (const auto* r = std::get_if<RegisterRef>(&op)) return "R" + std::to_string(r->index);
  if (const auto* x = std::get_if<InputRef>(&op)) return "x" + std::to_string(x->index);
  return to_string(std::get<TunablePrimitiveState>(op));
}

inline std::string to_string(const Instruction& ins) {
  std::string s = "R" + std::to_string(ins.dest) + " = ";
  s += ins.state ? to_string(*ins.state) : std::string(name(ins.func));
  return s + "(" + to_string(ins.op1) + ", " + to_string(ins.op2) + ")";
}

inline std::string to_string(const Program& p) {
  std::ostringstream os;
  os << "registers " << p.register_count << "\n";
  if (p.feature_count) os << "features " << p.feature_count << "\n";
  for (const auto& ins : p.instructions) os << to_string(ins) << "\n";
  if (p.mvlr) os << "R" << kOutputRegister << " = " << to_string(*p.mvlr) << "\n";
  return os.str();
}

namespace detail {

class LineCursor {
 public:
  LineCursor(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(what + " near '" + std::string(text_.substr(pos_, 24)) + "'", line_);
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }
  bool peek(char c) {
    skip_space();
    return pos_ < text_.size() && text_[pos_] == c;
  }
  void expect(char c) {
    if (!peek(c)) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  std::string_view word() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
    if (start == pos_) fail("expected a name");
    return text_.substr(start, pos_ - start);
  }
  std::size_t index() {
    skip_space();
    std::size_t v = 0;
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      v = v * 10 + static_cast<std::size_t>(text_[pos_] - '0');
      ++pos_;
    }
    if (start == pos_) fail("expected an index");
    return v;
  }
  double number() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != '}' &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    double v = 0.0;
    if (!parse_double(text_.substr(start, pos_ - start), v)) {
      pos_ = start;
      fail("expected a number");
    }
    return v;
  }
  std::size_t line() const { return line_; }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

inline std::vector<double> parse_coeffs(LineCursor& c) {
  std::vector<double> w;
  c.expect('{');
  if (c.peek('}')) {
    c.expect('}');
    return w;
  }
  while (true) {
    w.push_back(c.number());
    if (c.peek(',')) {
      c.expect(',');
      continue;
    }
    c.expect('}');
    return w;
  }
}

// A register index like "R12" after the leading 'R' was already a word.
inline std::optional<std::size_t> prefixed_index(std::string_view w, char prefix) {
  if (w.size() < 2 || w[0] != prefix) return std::nullopt;
  std::size_t v = 0;
  for (std::size_t i = 1; i < w.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(w[i]))) return std::nullopt;
    v = v * 10 + static_cast<std::size_t>(w[i] - '0');
  }
  return v;
}

inline Operand parse_operand(LineCursor& c) {
  const auto w = c.word();
  if (auto r = prefixed_index(w, 'R')) return RegisterRef{*r};
  if (auto x = prefixed_index(w, 'x')) return InputRef{*x};
  const auto kind = kind_from_name(w);
  if (!kind || !is_terminal_kind(*kind)) c.fail("unknown operand '" + std::string(w) + "'");
  TunablePrimitiveState s{*kind, 0, 0, {}};
  c.expect('[');
  s.alpha = c.index();
  c.expect(':');
  s.beta = c.index();
  c.expect(']');
  s.coeffs = parse_coeffs(c);
  return s;
}

}  // namespace detail

// Parses the text form. Structural checks that need the data width are left
// to validate(); coefficient counts are checked here.
inline Program parse_program(std::string_view text) {
  Program p;
  bool saw_registers = false;
  bool saw_head = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    detail::LineCursor c(line, line_no);
    if (c.at_end() || c.peek('#')) {
      if (end == text.size()) break;
      continue;
    }
    if (saw_head) c.fail("instruction after the MVLR head");
    const auto first = c.word();
    if (first == "registers") {
      p.register_count = c.index();
      saw_registers = true;
    } else if (first == "features") {
      p.feature_count = c.index();
    } else {
      const auto dest = detail::prefixed_index(first, 'R');
      if (!dest) c.fail("expected a destination register");
      if (!saw_registers) c.fail("'registers' header missing");
      c.expect('=');
      const auto fname = c.word();
      Instruction ins;
      ins.dest = *dest;
      if (fname == "MVLR") {
        if (*dest != kOutputRegister) c.fail("MVLR head must write R0");
        TunablePrimitiveState m{TunableKind::kMvlr, 0, 0, {}};
        c.expect('[');
        m.alpha = c.index();
        c.expect(':');
        m.beta = c.index();
        c.expect(']');
        m.coeffs = detail::parse_coeffs(c);
        if (m.alpha != 0 || m.coeffs.size() != m.beta + 2) c.fail("malformed MVLR head");
        p.mvlr = std::move(m);
        saw_head = true;
      } else {
        const auto f = function_from_name(fname);
        if (!f) c.fail("unknown function '" + std::string(fname) + "'");
        ins.func = *f;
        if (is_tunable(*f)) {
          ins.state = TunablePrimitiveState{kind_of(*f), 0, 0, detail::parse_coeffs(c)};
          if (ins.state->coeffs.size() != coefficient_count(ins.state->kind, 0)) {
            c.fail("wrong coefficient count for " + std::string(fname));
          }
        }
        c.expect('(');
        ins.op1 = detail::parse_operand(c);
        c.expect(',');
        ins.op2 = detail::parse_operand(c);
        c.expect(')');
        for (const Operand* op : {&ins.op1, &ins.op2}) {
          if (const auto* t = std::get_if<TunablePrimitiveState>(op)) {
            if (t->alpha > t->beta || t->coeffs.size() != coefficient_count(t->kind, t->width())) {
              c.fail("malformed terminal " + std::string(name(t->kind)));
            }
          }
        }
        p.instructions.push_back(std::move(ins));
      }
    }
    if (!c.at_end()) c.fail("trailing text");
    if (end == text.size()) break;
  }
  if (!saw_registers) throw ParseError("'registers' header missing", line_no);
  if (p.instructions.empty()) throw ParseError("program has no instructions", line_no);
  try {
    validate(p, p.feature_count ? p.feature_count : static_cast<std::size_t>(-1));
  } catch (const StructureError& e) {
    throw ParseError(e.what(), line_no);
  }
  return p;
}

}  // namespace tlgp

#endif  // TLGP_PROGRAM_HPP_
