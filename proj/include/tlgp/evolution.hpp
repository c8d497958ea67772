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

// Generational search over linear programs. Each offspring comes from exactly
// one of four operators (macro mutation, micro mutation, crossover, swap), has
// its MVLR head refitted, and is scored by training MSE.

#ifndef TLGP_EVOLUTION_HPP_
#define TLGP_EVOLUTION_HPP_

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "tlgp/common.hpp"
#include "tlgp/execute.hpp"
#include "tlgp/numeric.hpp"
#include "tlgp/primitives.hpp"
#include "tlgp/program.hpp"

namespace tlgp {

// Runs fn(0..count-1) on up to `workers` threads. The first exception thrown
// by any task is rethrown after all threads join.
template <class Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const std::size_t n = std::min(workers, count);
  pool.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

enum class Mode { kFish, kSrbench, kCustom };

inline std::string_view name(Mode m) {
  switch (m) {
    case Mode::kFish: return "fish";
    case Mode::kSrbench: return "srbench";
    case Mode::kCustom: return "custom";
  }
  return "?";
}

struct OperatorRates {
  double macro = 0.3;
  double micro = 0.3;
  double crossover = 0.3;
  double swap = 0.1;
};

struct EvolutionConfig {
  Mode mode = Mode::kFish;
  std::size_t population_size = 250;
  std::size_t generations = 100;
  std::size_t max_program_size = 50;
  std::size_t register_count = 30;
  std::size_t mvlr_r = 20;
  OperatorRates rates;
  std::size_t tournament_size = 7;
  std::size_t elitism = 1;
  std::size_t gd_steps = 5;
  double step_size = 0.1;
  double cap_fraction = 0.5;
  std::uint64_t seed = 1;
  std::size_t init_max_length = 10;
  std::size_t crossover_max_segment = 10;
  std::size_t workers = 1;
  PrimitiveSet primitives = PrimitiveSet::fish();

  static EvolutionConfig fish() { return EvolutionConfig{}; }

  static EvolutionConfig srbench() {
    EvolutionConfig c;
    c.mode = Mode::kSrbench;
    c.population_size = 500;
    c.generations = 200;
    c.register_count = 8;
    c.mvlr_r = 4;
    c.cap_fraction = 0.1;
    c.primitives = PrimitiveSet::srbench();
    return c;
  }

  void validate() const {
    if (population_size == 0) throw ConfigError("population_size must be positive");
    if (register_count == 0) throw ConfigError("register_count must be positive");
    if (max_program_size == 0) throw ConfigError("max_program_size must be positive");
    if (init_max_length == 0) throw ConfigError("init_max_length must be positive");
    if (crossover_max_segment == 0) throw ConfigError("crossover_max_segment must be positive");
    if (tournament_size == 0) throw ConfigError("tournament_size must be positive");
    if (elitism >= population_size) throw ConfigError("elitism must be below population_size");
    if (primitives.mvlr && (mvlr_r == 0 || mvlr_r > register_count)) {
      throw ConfigError("mvlr_r must be in [1, register_count]");
    }
    if (!(cap_fraction > 0.0 && cap_fraction <= 1.0)) throw ConfigError("cap_fraction must be in (0, 1]");
    if (!(step_size > 0.0)) throw ConfigError("step_size must be positive");
    const double rs[] = {rates.macro, rates.micro, rates.crossover, rates.swap};
    double sum = 0.0;
    for (double r : rs) {
      if (!(r >= 0.0)) throw ConfigError("operator rates must be non-negative");
      sum += r;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("operator rates must sum to 1");
    if (primitives.functions.empty()) throw ConfigError("no functions enabled");
    for (auto k : primitives.terminals) {
      if (!is_terminal_kind(k)) throw ConfigError(std::string(name(k)) + " is not a terminal kind");
    }
    if (!primitives.raw_inputs && primitives.terminals.empty()) {
      throw ConfigError("no input terminals enabled (raw inputs or tunable terminals)");
    }
  }
};

struct Individual {
  Program program;
  double fitness = std::numeric_limits<double>::max();  // training MSE
  double r2 = 0.0;
};

struct GenerationRecord {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  double best_r2 = 0.0;
  double mean_effective_size = 0.0;
  // Best-so-far individual on the validation set; NaN without one.
  double test_r2 = std::numeric_limits<double>::quiet_NaN();
  double test_mse = std::numeric_limits<double>::quiet_NaN();
  double elapsed_seconds = 0.0;
};

struct EvolutionResult {
  Individual best;
  std::vector<GenerationRecord> history;
};

using ProgressSink = std::function<void(const GenerationRecord&)>;

class Lgp {
 public:
  Lgp(const EvolutionConfig& config, const Matrix& x, const Vector& y) : config_(config), x_(x), y_(y) {
    config_.validate();
    if (x.rows() == 0) throw DataError("training set is empty");
    if (x.rows() != y.size()) throw DataError("feature rows and targets differ in count");
    features_ = static_cast<std::size_t>(x.cols());
    if (config_.primitives.raw_inputs && features_ == 0) throw DataError("no input features");
    max_width_ = max_terminal_width(features_, config_.cap_fraction);
    for (auto k : config_.primitives.terminals) {
      if (features_ > 0 && min_width(k) <= max_width_) terminals_.push_back(k);
    }
    if (!config_.primitives.raw_inputs && terminals_.empty()) {
      throw ConfigError("no terminal kind fits " + std::to_string(features_) + " features");
    }
  }

  const EvolutionConfig& config() const { return config_; }

  // --- random construction ------------------------------------------------

  TunablePrimitiveState random_terminal(Rng& rng) const {
    const auto kind = terminals_[uniform(rng, terminals_.size())];
    const std::size_t lo = min_width(kind);
    const std::size_t width = lo + uniform(rng, max_width_ - lo + 1);
    const std::size_t alpha = uniform(rng, features_ - width + 1);
    return make_terminal(kind, alpha, alpha + width - 1, features_);
  }

  Operand random_operand(Rng& rng) const {
    const bool raw = config_.primitives.raw_inputs;
    const bool tunable = !terminals_.empty();
    if (std::bernoulli_distribution(0.5)(rng)) return RegisterRef{uniform(rng, config_.register_count)};
    if (raw && (!tunable || std::bernoulli_distribution(0.5)(rng))) return InputRef{uniform(rng, features_)};
    return random_terminal(rng);
  }

  TunablePrimitiveState random_function_state(Function f, Rng& rng) const {
    std::uniform_real_distribution<double> omega(-kOmegaBound, kOmegaBound);
    std::vector<double> w(coefficient_count(kind_of(f), 0));
    for (double& c : w) c = omega(rng);
    return make_function_state(kind_of(f), std::move(w));
  }

  void set_function(Instruction& ins, Function f, Rng& rng) const {
    ins.func = f;
    ins.state.reset();
    if (is_tunable(f)) ins.state = random_function_state(f, rng);
  }

  Instruction random_instruction(Rng& rng) const {
    Instruction ins;
    ins.dest = uniform(rng, config_.register_count);
    const auto& fs = config_.primitives.functions;
    set_function(ins, fs[uniform(rng, fs.size())], rng);
    ins.op1 = random_operand(rng);
    ins.op2 = random_operand(rng);
    return ins;
  }

  Program empty_program() const {
    Program p;
    p.register_count = config_.register_count;
    p.feature_count = features_;
    if (config_.primitives.mvlr) p.mvlr = make_mvlr(config_.mvlr_r);
    return p;
  }

  Program random_program(Rng& rng) const {
    Program p = empty_program();
    const std::size_t cap = std::min(config_.init_max_length, config_.max_program_size);
    const std::size_t len = 1 + uniform(rng, cap);
    for (std::size_t i = 0; i < len; ++i) p.instructions.push_back(random_instruction(rng));
    return p;
  }

  // --- fitness -------------------------------------------------------------

  // Refits the MVLR head on the final registers and scores the program.
  Individual finalize(Program p) const {
    const auto mask = effective_instructions(p);
    const Matrix registers = run_instructions(p, x_, &mask);
    if (p.mvlr) p = tune_mvlr(p, registers, y_);
    const Vector pred = apply_head(p, registers);
    Individual ind;
    ind.fitness = mean_squared_error(pred, y_);
    ind.r2 = r_squared(pred, y_);
    ind.program = std::move(p);
    return ind;
  }

  // Scores without touching any coefficient.
  Individual evaluate(const Program& p) const { return evaluate(p, x_, y_); }

  static Individual evaluate(const Program& p, const Matrix& x, const Vector& y) {
    const Vector pred = predict(p, x);
    return {p, mean_squared_error(pred, y), r_squared(pred, y)};
  }

  std::vector<Individual> init_population() const {
    std::vector<Individual> pop(config_.population_size);
    parallel_for(pop.size(), config_.workers, [&](std::size_t i) {
      Rng rng(derive_seed(config_.seed, 0, i));
      pop[i] = finalize(random_program(rng));
    });
    return pop;
  }

  // --- selection -------------------------------------------------------------

  // Tournament with replacement; ties go to the lower population index.
  std::size_t select(const std::vector<Individual>& pop, Rng& rng) const {
    if (pop.empty()) throw ConfigError("selection from an empty population");
    std::size_t best = uniform(rng, pop.size());
    for (std::size_t k = 1; k < config_.tournament_size; ++k) {
      const std::size_t c = uniform(rng, pop.size());
      if (better(pop[c], c, pop[best], best)) best = c;
    }
    return best;
  }

  // --- operators -------------------------------------------------------------
  // With retune = false the MVLR head is left as inherited.

  Program macro_mutate(const Program& p, Rng& rng, bool retune = true) const {
    Program out = p;
    const std::size_t len = out.size();
    bool insert = std::bernoulli_distribution(0.5)(rng);
    if (insert && len >= config_.max_program_size) insert = false;
    if (!insert && len <= 1) insert = true;
    if (insert && len >= config_.max_program_size) return finish(std::move(out), retune);
    auto& ins = out.instructions;
    if (insert) {
      const std::size_t pos = uniform(rng, len + 1);
      ins.insert(ins.begin() + static_cast<std::ptrdiff_t>(pos), random_instruction(rng));
    } else {
      ins.erase(ins.begin() + static_cast<std::ptrdiff_t>(uniform(rng, len)));
    }
    return finish(std::move(out), retune);
  }

  // Replaces the destination, function, or one operand of a random
  // instruction. A tunable site that is created or whose input changed is
  // fitted to the target from its immediate inputs.
  Program micro_mutate(const Program& p, Rng& rng, bool retune = true) const {
    Program out = p;
    if (out.instructions.empty()) return finish(std::move(out), retune);
    const std::size_t i = uniform(rng, out.size());
    Instruction& ins = out.instructions[i];
    const std::size_t parts = arity(ins.func) > 1 ? 4 : 3;
    std::size_t part = uniform(rng, parts);
    if (part == 0 && config_.register_count < 2) part = 1;
    if (part == 1 && config_.primitives.functions.size() < 2) part = 2;

    bool tune_function_site = false;
    std::optional<Slot> tune_terminal_slot;
    switch (part) {
      case 0: {
        std::size_t d = uniform(rng, config_.register_count - 1);
        if (d >= ins.dest) ++d;
        ins.dest = d;
        break;
      }
      case 1: {
        const auto& fs = config_.primitives.functions;
        Function f = ins.func;
        while (f == ins.func) f = fs[uniform(rng, fs.size())];
        set_function(ins, f, rng);
        tune_function_site = ins.state.has_value();
        break;
      }
      default: {
        Operand& op = part == 2 ? ins.op1 : ins.op2;
        op = random_operand(rng);
        if (std::holds_alternative<TunablePrimitiveState>(op)) {
          tune_terminal_slot = part == 2 ? Slot::kOp1 : Slot::kOp2;
        }
        tune_function_site = part == 2 && ins.state.has_value();
      }
    }
    if (tune_terminal_slot) {
      Operand& op = *tune_terminal_slot == Slot::kOp1 ? ins.op1 : ins.op2;
      auto& term = std::get<TunablePrimitiveState>(op);
      term = tune_terminal(term, site_inputs(out, x_, {i, *tune_terminal_slot}), y_);
    }
    if (tune_function_site) {
      const Matrix in = site_inputs(out, x_, {i, Slot::kFunction});
      auto& state = *out.instructions[i].state;
      state = tune_function(state, in.col(0), y_, config_.gd_steps, config_.step_size);
    }
    return finish(std::move(out), retune);
  }

  // Exchanges a contiguous segment (at most crossover_max_segment long) of
  // each parent. Children longer than max_program_size lose their tail.
  std::pair<Program, Program> crossover(const Program& a, const Program& b, Rng& rng,
                                        bool retune = true) const {
    const auto pick = [&](const Program& p) {
      const std::size_t len = std::min(config_.crossover_max_segment, p.size());
      const std::size_t seg = 1 + uniform(rng, len);
      const std::size_t start = uniform(rng, p.size() - seg + 1);
      return std::pair{start, seg};
    };
    const auto [sa, la] = pick(a);
    const auto [sb, lb] = pick(b);
    const auto splice = [&](const Program& host, std::size_t hs, std::size_t hl, const Program& donor,
                            std::size_t ds, std::size_t dl) {
      Program child = host;
      auto& ins = child.instructions;
      ins.clear();
      const auto& h = host.instructions;
      const auto& d = donor.instructions;
      ins.insert(ins.end(), h.begin(), h.begin() + static_cast<std::ptrdiff_t>(hs));
      ins.insert(ins.end(), d.begin() + static_cast<std::ptrdiff_t>(ds),
                 d.begin() + static_cast<std::ptrdiff_t>(ds + dl));
      ins.insert(ins.end(), h.begin() + static_cast<std::ptrdiff_t>(hs + hl), h.end());
      if (ins.size() > config_.max_program_size) ins.resize(config_.max_program_size);
      return child;
    };
    return {finish(splice(a, sa, la, b, sb, lb), retune), finish(splice(b, sb, lb, a, sa, la), retune)};
  }

  Program swap_mutate(const Program& p, Rng& rng, bool retune = true) const {
    Program out = p;
    if (out.size() >= 2) {
      const std::size_t k = uniform(rng, out.size() - 1);
      std::swap(out.instructions[k], out.instructions[k + 1]);
    }
    return finish(std::move(out), retune);
  }

  // One offspring from the parent snapshot: select, apply one operator drawn
  // by the configured rates, refit the head, score.
  Individual offspring(const std::vector<Individual>& pop, Rng& rng) const {
    const auto& r = config_.rates;
    std::discrete_distribution<int> op({r.macro, r.micro, r.crossover, r.swap});
    const Program& parent = pop[select(pop, rng)].program;
    switch (op(rng)) {
      case 0: return finalize(macro_mutate(parent, rng, false));
      case 1: return finalize(micro_mutate(parent, rng, false));
      case 2: {
        const Program& mate = pop[select(pop, rng)].program;
        return finalize(crossover(parent, mate, rng, false).first);
      }
      default: return finalize(swap_mutate(parent, rng, false));
    }
  }

  EvolutionResult evolve(const ProgressSink& sink = {}, const Matrix* x_val = nullptr,
                         const Vector* y_val = nullptr) const {
    const auto start = std::chrono::steady_clock::now();
    EvolutionResult result;
    std::vector<Individual> pop = init_population();
    std::size_t best_index = best_of(pop);
    result.best = pop[best_index];

    const auto record = [&](std::size_t gen) {
      GenerationRecord rec;
      rec.generation = gen;
      rec.best_fitness = pop[best_index].fitness;
      rec.best_r2 = pop[best_index].r2;
      const double n = static_cast<double>(pop.size());
      for (const auto& ind : pop) {
        rec.mean_fitness += ind.fitness / n;
        rec.mean_effective_size += static_cast<double>(effective_size(ind.program)) / n;
      }
      if (x_val && y_val && x_val->rows() > 0) {
        const auto test = evaluate(result.best.program, *x_val, *y_val);
        rec.test_mse = test.fitness;
        rec.test_r2 = test.r2;
      }
      rec.elapsed_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      result.history.push_back(rec);
      if (sink) sink(rec);
    };
    record(0);

    for (std::size_t gen = 1; gen <= config_.generations; ++gen) {
      std::vector<std::size_t> order(pop.size());
      for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return pop[a].fitness < pop[b].fitness; });
      std::vector<Individual> next(pop.size());
      for (std::size_t e = 0; e < config_.elitism; ++e) next[e] = pop[order[e]];
      parallel_for(pop.size() - config_.elitism, config_.workers, [&](std::size_t k) {
        const std::size_t slot = config_.elitism + k;
        Rng rng(derive_seed(config_.seed, gen, slot));
        next[slot] = offspring(pop, rng);
      });
      pop = std::move(next);
      best_index = best_of(pop);
      if (pop[best_index].fitness < result.best.fitness) result.best = pop[best_index];
      record(gen);
    }
    return result;
  }

 private:
  static std::size_t uniform(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  }

  static bool better(const Individual& a, std::size_t ia, const Individual& b, std::size_t ib) {
    if (a.fitness != b.fitness) return a.fitness < b.fitness;
    return ia < ib;
  }

  static std::size_t best_of(const std::vector<Individual>& pop) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pop.size(); ++i) {
      if (better(pop[i], i, pop[best], best)) best = i;
    }
    return best;
  }

  Program finish(Program p, bool retune) const { return retune ? finalize(std::move(p)).program : p; }

  EvolutionConfig config_;
  const Matrix& x_;
  const Vector& y_;
  std::size_t features_ = 0;
  std::size_t max_width_ = 1;
  std::vector<TunableKind> terminals_;
};

inline EvolutionResult evolve(const EvolutionConfig& config, const Matrix& x, const Vector& y,
                              const ProgressSink& sink = {}, const Matrix* x_val = nullptr,
                              const Vector* y_val = nullptr) {
  return Lgp(config, x, y).evolve(sink, x_val, y_val);
}

}  // namespace tlgp

#endif  // TLGP_EVOLUTION_HPP_
