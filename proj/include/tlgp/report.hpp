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

// Interpretability reports: Graphviz export of a model's effective dataflow
// and the terminal-coverage histogram over feature positions.

#ifndef TLGP_REPORT_HPP_
#define TLGP_REPORT_HPP_

#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tlgp/execute.hpp"
#include "tlgp/program.hpp"

namespace tlgp {

inline std::string format_4g(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

inline std::string rounded_coeffs(const std::vector<double>& w) {
  std::string s = "{";
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) s += ", ";
    s += format_4g(w[i]);
  }
  return s + "}";
}

// ---------------------------------------------------------------------------
// DAG

struct Dag {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::string dot;
};

namespace detail {

inline std::string dot_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out;
}

}  // namespace detail

// Nodes: one per effective instruction, one per distinct leaf (raw input,
// tunable terminal, or a register read before any write), and the output.
// Tunable terminals and tunable functions carry their own style classes.
inline Dag export_dag(const Program& p) {
  const auto mask = effective_instructions(p);
  std::ostringstream nodes;
  std::ostringstream edges;
  Dag dag;
  std::map<std::string, std::string> leaves;  // exact operand text -> node id

  const auto leaf = [&](const Operand& op) {
    const std::string key = to_string(op);
    if (const auto it = leaves.find(key); it != leaves.end()) return it->second;
    const std::string id = "l" + std::to_string(leaves.size());
    leaves.emplace(key, id);
    ++dag.nodes;
    if (const auto* t = std::get_if<TunablePrimitiveState>(&op)) {
      nodes << "  " << id << " [label=\"" << name(t->kind) << "[" << t->alpha << ":" << t->beta << "]\\n"
            << rounded_coeffs(t->coeffs)
            << "\", shape=box, style=filled, fillcolor=pink, class=\"tunable-terminal\"];\n";
    } else if (const auto* r = std::get_if<RegisterRef>(&op)) {
      nodes << "  " << id << " [label=\"R" << r->index << " = 0\", shape=plaintext, class=\"register\"];\n";
    } else {
      nodes << "  " << id << " [label=\"" << key << "\", shape=plaintext, class=\"input\"];\n";
    }
    return id;
  };

  std::vector<std::string> writer(p.register_count);  // current producer per register
  const auto source = [&](const Operand& op) {
    if (const auto* r = std::get_if<RegisterRef>(&op); r && !writer[r->index].empty()) return writer[r->index];
    return leaf(op);
  };
  const auto edge = [&](const std::string& from, const std::string& to, const std::string& label) {
    edges << "  " << from << " -> " << to;
    if (!label.empty()) edges << " [label=\"" << detail::dot_escape(label) << "\"]";
    edges << ";\n";
    ++dag.edges;
  };

  for (std::size_t i = 0; i < p.instructions.size(); ++i) {
    if (!mask[i]) continue;
    const auto& ins = p.instructions[i];
    const std::string id = "n" + std::to_string(i);
    const Operand* ops[2] = {&ins.op1, &ins.op2};
    std::string from[2];
    for (int k = 0; k < read_count(ins); ++k) from[k] = source(*ops[k]);
    ++dag.nodes;
    nodes << "  " << id << " [label=\"R" << ins.dest << " = ";
    if (ins.state) {
      nodes << name(ins.state->kind) << "\\n" << rounded_coeffs(ins.state->coeffs)
            << "\", shape=ellipse, style=filled, fillcolor=yellow, class=\"tunable-function\"];\n";
    } else {
      nodes << name(ins.func) << "\", shape=ellipse, class=\"function\"];\n";
    }
    for (int k = 0; k < read_count(ins); ++k) edge(from[k], id, read_count(ins) > 1 ? (k ? "b" : "a") : "");
    writer[ins.dest] = id;
  }

  ++dag.nodes;
  if (p.mvlr) {
    nodes << "  out [label=\"MVLR\\nintercept " << format_4g(p.mvlr->coeffs[0])
          << "\", shape=doublecircle, class=\"output\"];\n";
    // Unwritten registers hold 0 and contribute nothing.
    for (std::size_t r = 0; r < p.mvlr_inputs(); ++r) {
      if (!writer[r].empty()) edge(writer[r], "out", "w=" + format_4g(p.mvlr->coeffs[r + 1]));
    }
  } else {
    nodes << "  out [label=\"output\", shape=doublecircle, class=\"output\"];\n";
    edge(source(RegisterRef{kOutputRegister}), "out", "");
  }

  std::ostringstream os;
  os << "digraph model {\n  rankdir=LR;\n" << nodes.str() << edges.str() << "}\n";
  dag.dot = os.str();
  return dag;
}

// ---------------------------------------------------------------------------
// Terminal frequency

inline constexpr std::size_t kFrequencyBins = 100;

// Bins [floor(100 a / d), ceil(100 (b + 1) / d) - 1] touched by features a..b.
inline std::pair<std::size_t, std::size_t> coverage_bins(std::size_t alpha, std::size_t beta, std::size_t d) {
  const std::size_t lo = alpha * kFrequencyBins / d;
  const std::size_t hi = ((beta + 1) * kFrequencyBins + d - 1) / d - 1;
  return {lo, std::min(hi, kFrequencyBins - 1)};
}

class FrequencyTable {
 public:
  FrequencyTable() {
    for (auto& row : counts_) row.fill(0);
  }

  // Counts each effective tunable terminal of the model once per bin it covers.
  void add(const Program& p) {
    if (p.feature_count == 0) throw DataError("model lacks a 'features' line; coverage needs the feature count");
    const auto mask = effective_instructions(p);
    for (std::size_t i = 0; i < p.instructions.size(); ++i) {
      if (!mask[i]) continue;
      const auto& ins = p.instructions[i];
      const Operand* ops[2] = {&ins.op1, &ins.op2};
      for (int k = 0; k < read_count(ins); ++k) {
        const auto* t = std::get_if<TunablePrimitiveState>(ops[k]);
        if (!t) continue;
        const auto [lo, hi] = coverage_bins(t->alpha, t->beta, p.feature_count);
        for (std::size_t b = lo; b <= hi; ++b) ++counts_[row(t->kind)][b];
      }
    }
    ++models_;
  }

  std::size_t models() const { return models_; }
  std::size_t count(TunableKind kind, std::size_t bin) const { return counts_[row(kind)][bin]; }

  std::size_t total() const {
    std::size_t s = 0;
    for (const auto& r : counts_) {
      for (auto c : r) s += c;
    }
    return s;
  }

  // One row per terminal kind, one column per percentile bin.
  std::string to_tsv() const {
    std::ostringstream os;
    os << "kind";
    for (std::size_t b = 0; b < kFrequencyBins; ++b) os << "\tbin" << b;
    os << "\n";
    for (std::size_t k = 0; k < kAllTerminalKinds.size(); ++k) {
      os << name(kAllTerminalKinds[k]);
      for (auto c : counts_[k]) os << '\t' << c;
      os << "\n";
    }
    return os.str();
  }

 private:
  static std::size_t row(TunableKind kind) {
    for (std::size_t k = 0; k < kAllTerminalKinds.size(); ++k) {
      if (kAllTerminalKinds[k] == kind) return k;
    }
    throw StructureError(std::string(name(kind)) + " is not a terminal kind");
  }

  std::array<std::array<std::size_t, kFrequencyBins>, kTerminalKindCount> counts_{};
  std::size_t models_ = 0;
};

}  // namespace tlgp

#endif  // TLGP_REPORT_HPP_
