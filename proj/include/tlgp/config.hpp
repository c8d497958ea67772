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

// Run configuration: a versioned `key = value` text file layered over a mode
// preset, with command-line overrides applied last.

#ifndef TLGP_CONFIG_HPP_
#define TLGP_CONFIG_HPP_

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "tlgp/common.hpp"
#include "tlgp/data.hpp"
#include "tlgp/evolution.hpp"

namespace tlgp {

inline constexpr int kSchemaVersion = 1;

struct RunConfig {
  EvolutionConfig evolution;
  std::size_t repeats = 10;
  std::size_t folds = 6;
  std::string preset = "none";
  AugmentConfig augment;

  static RunConfig for_mode(Mode mode) {
    RunConfig c;
    if (mode == Mode::kSrbench) {
      c.evolution = EvolutionConfig::srbench();
      c.folds = 4;
      c.augment.factor = 1.0;
    }
    return c;
  }

  void validate() const {
    evolution.validate();
    if (repeats == 0) throw ConfigError("repeats must be positive");
    if (folds < 2) throw ConfigError("folds must be at least 2");
    preset_steps(preset);
    augment_counts(1, augment);
    if (augment.scale < 0 || augment.offset < 0 || augment.tilt < 0 || augment.noise < 0) {
      throw ConfigError("augmentation magnitudes must be non-negative");
    }
  }
};

inline Mode mode_from_name(std::string_view s) {
  if (s == "fish") return Mode::kFish;
  if (s == "srbench") return Mode::kSrbench;
  throw ConfigError("unknown mode '" + std::string(s) + "' (expected fish or srbench)");
}

namespace detail {

inline std::size_t parse_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) {
    throw ConfigError(key + ": '" + v + "' is not a non-negative integer");
  }
  return out;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": '" + v + "' is not a seed");
  return out;
}

inline double parse_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!parse_double(v, out) || !std::isfinite(out)) throw ConfigError(key + ": '" + v + "' is not a number");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true") return true;
  if (v == "false") return false;
  throw ConfigError(key + ": '" + v + "' is not true or false");
}

inline std::vector<std::string> parse_list(const std::string& v) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
std::string join(const std::vector<T>& items) {
  std::string s;
  for (const auto& it : items) {
    if (!s.empty()) s += ',';
    s += name(it);
  }
  return s;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <class Member>
Field count_field(Member member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = parse_count(k, v); },
          [member](const RunConfig& c) {
            RunConfig copy = c;
            return std::to_string(member(copy));
          }};
}

template <class Member>
Field real_field(Member member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { member(c) = parse_real(k, v); },
          [member](const RunConfig& c) {
            RunConfig copy = c;
            return format_double(member(copy));
          }};
}

// Ordered so the resolved file reads top-down like a run description.
inline const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = [] {
    std::vector<std::pair<std::string, Field>> t;
    const auto count = [&](std::string key, std::size_t& (*m)(RunConfig&)) { t.emplace_back(key, count_field(m)); };
    const auto real = [&](std::string key, double& (*m)(RunConfig&)) { t.emplace_back(key, real_field(m)); };
    t.emplace_back("seed", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                   c.evolution.seed = parse_u64(k, v);
                                 },
                                 [](const RunConfig& c) { return std::to_string(c.evolution.seed); }});
    count("workers", [](RunConfig& c) -> std::size_t& { return c.evolution.workers; });
    count("repeats", [](RunConfig& c) -> std::size_t& { return c.repeats; });
    count("folds", [](RunConfig& c) -> std::size_t& { return c.folds; });
    t.emplace_back("preset", Field{[](RunConfig& c, const std::string&, const std::string& v) { c.preset = v; },
                                   [](const RunConfig& c) { return c.preset; }});
    count("population_size", [](RunConfig& c) -> std::size_t& { return c.evolution.population_size; });
    count("generations", [](RunConfig& c) -> std::size_t& { return c.evolution.generations; });
    count("max_program_size", [](RunConfig& c) -> std::size_t& { return c.evolution.max_program_size; });
    count("register_count", [](RunConfig& c) -> std::size_t& { return c.evolution.register_count; });
    count("mvlr_r", [](RunConfig& c) -> std::size_t& { return c.evolution.mvlr_r; });
    count("init_max_length", [](RunConfig& c) -> std::size_t& { return c.evolution.init_max_length; });
    count("tournament_size", [](RunConfig& c) -> std::size_t& { return c.evolution.tournament_size; });
    count("elitism", [](RunConfig& c) -> std::size_t& { return c.evolution.elitism; });
    count("crossover_max_segment", [](RunConfig& c) -> std::size_t& { return c.evolution.crossover_max_segment; });
    real("rate_macro", [](RunConfig& c) -> double& { return c.evolution.rates.macro; });
    real("rate_micro", [](RunConfig& c) -> double& { return c.evolution.rates.micro; });
    real("rate_crossover", [](RunConfig& c) -> double& { return c.evolution.rates.crossover; });
    real("rate_swap", [](RunConfig& c) -> double& { return c.evolution.rates.swap; });
    count("gd_steps", [](RunConfig& c) -> std::size_t& { return c.evolution.gd_steps; });
    real("step_size", [](RunConfig& c) -> double& { return c.evolution.step_size; });
    real("cap_fraction", [](RunConfig& c) -> double& { return c.evolution.cap_fraction; });
    t.emplace_back("functions", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                        std::vector<Function> fs;
                                        for (const auto& s : parse_list(v)) {
                                          const auto f = function_from_name(s);
                                          if (!f) throw ConfigError(k + ": unknown function '" + s + "'");
                                          fs.push_back(*f);
                                        }
                                        c.evolution.primitives.functions = fs;
                                      },
                                      [](const RunConfig& c) { return join(c.evolution.primitives.functions); }});
    t.emplace_back("terminals", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                        std::vector<TunableKind> ks;
                                        for (const auto& s : parse_list(v)) {
                                          const auto t = kind_from_name(s);
                                          if (!t || !is_terminal_kind(*t)) {
                                            throw ConfigError(k + ": unknown terminal kind '" + s + "'");
                                          }
                                          ks.push_back(*t);
                                        }
                                        c.evolution.primitives.terminals = ks;
                                      },
                                      [](const RunConfig& c) { return join(c.evolution.primitives.terminals); }});
    t.emplace_back("raw_inputs", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                         c.evolution.primitives.raw_inputs = parse_bool(k, v);
                                       },
                                       [](const RunConfig& c) {
                                         return std::string(c.evolution.primitives.raw_inputs ? "true" : "false");
                                       }});
    t.emplace_back("use_mvlr", Field{[](RunConfig& c, const std::string& k, const std::string& v) {
                                       c.evolution.primitives.mvlr = parse_bool(k, v);
                                     },
                                     [](const RunConfig& c) {
                                       return std::string(c.evolution.primitives.mvlr ? "true" : "false");
                                     }});
    real("augment_factor", [](RunConfig& c) -> double& { return c.augment.factor; });
    real("augment_spectral", [](RunConfig& c) -> double& { return c.augment.spectral; });
    real("augment_mixup", [](RunConfig& c) -> double& { return c.augment.mixup; });
    real("augment_gaussian", [](RunConfig& c) -> double& { return c.augment.gaussian; });
    real("augment_scale", [](RunConfig& c) -> double& { return c.augment.scale; });
    real("augment_offset", [](RunConfig& c) -> double& { return c.augment.offset; });
    real("augment_tilt", [](RunConfig& c) -> double& { return c.augment.tilt; });
    real("augment_noise", [](RunConfig& c) -> double& { return c.augment.noise; });
    return t;
  }();
  return table;
}

}  // namespace detail

// Raw `key = value` pairs in file order, each with its line number.
struct ConfigEntry {
  std::string key;
  std::string value;
  std::size_t line = 0;
};

inline std::vector<ConfigEntry> read_config_entries(std::istream& in) {
  std::vector<ConfigEntry> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    ConfigEntry e{detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)), line_no};
    if (e.key.empty()) throw ParseError("missing key", line_no);
    for (const auto& prev : out) {
      if (prev.key == e.key) throw ParseError("key '" + e.key + "' repeated", line_no);
    }
    out.push_back(std::move(e));
  }
  return out;
}

// Command-line values that override the file.
struct ConfigOverrides {
  std::optional<Mode> mode;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> preset;
};

struct ResolvedConfig {
  Mode mode = Mode::kFish;
  RunConfig run;
};

// Preset for the chosen mode, then the file entries, then the overrides.
inline ResolvedConfig resolve_config(const std::vector<ConfigEntry>& entries, const ConfigOverrides& cli = {}) {
  ResolvedConfig out;
  std::optional<Mode> file_mode;
  bool versioned = false;
  for (const auto& e : entries) {
    if (e.key == "schema_version") {
      if (e.value != std::to_string(kSchemaVersion)) {
        throw ConfigError("schema_version " + e.value + " is not supported (expected " +
                          std::to_string(kSchemaVersion) + ")");
      }
      versioned = true;
    } else if (e.key == "mode") {
      file_mode = mode_from_name(e.value);
    }
  }
  if (!entries.empty() && !versioned) throw ConfigError("configuration file lacks schema_version");
  out.mode = cli.mode.value_or(file_mode.value_or(Mode::kFish));
  out.run = RunConfig::for_mode(out.mode);
  const auto& table = detail::fields();
  for (const auto& e : entries) {
    if (e.key == "schema_version" || e.key == "mode") continue;
    const auto it = std::find_if(table.begin(), table.end(), [&](const auto& f) { return f.first == e.key; });
    if (it == table.end()) {
      throw ConfigError("unknown configuration key '" + e.key + "' (line " + std::to_string(e.line) + ")");
    }
    it->second.set(out.run, e.key, e.value);
  }
  if (cli.seed) out.run.evolution.seed = *cli.seed;
  if (cli.workers) out.run.evolution.workers = *cli.workers;
  if (cli.preset) out.run.preset = *cli.preset;
  out.run.evolution.mode = out.mode;
  out.run.validate();
  return out;
}

inline ResolvedConfig load_config(const std::string& path, const ConfigOverrides& cli = {}) {
  if (path.empty()) return resolve_config({}, cli);
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration " + path);
  try {
    return resolve_config(read_config_entries(in), cli);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line());
  }
}

// Every key with its effective value; parsing this text yields the same
// configuration.
inline std::string to_text(const ResolvedConfig& c) {
  std::ostringstream os;
  os << "schema_version = " << kSchemaVersion << "\n";
  os << "mode = " << name(c.mode) << "\n";
  for (const auto& [key, field] : detail::fields()) os << key << " = " << field.get(c.run) << "\n";
  return os.str();
}

}  // namespace tlgp

#endif  // TLGP_CONFIG_HPP_
