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

// Repeated grouped k-fold experiments and their on-disk reports.

#ifndef TLGP_EXPERIMENT_HPP_
#define TLGP_EXPERIMENT_HPP_

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "tlgp/config.hpp"
#include "tlgp/data.hpp"
#include "tlgp/evolution.hpp"
#include "tlgp/report.hpp"

namespace tlgp {

struct FoldResult {
  std::size_t repeat = 0;
  std::size_t fold = 0;
  std::size_t train_rows = 0;  // after augmentation
  std::size_t test_rows = 0;
  double train_r2 = 0.0;
  double train_mse = 0.0;
  double test_r2 = 0.0;
  double test_mse = 0.0;
  std::size_t effective_size = 0;
  Program model;
  std::vector<GenerationRecord> history;
  double seconds = 0.0;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for a single value
};

inline MeanStd mean_std(const std::vector<double>& v) {
  MeanStd m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(v.size() - 1));
  }
  return m;
}

inline std::uint64_t repeat_seed(std::uint64_t seed, std::size_t repeat) { return seed + repeat; }

// Trains on one split. The training side is augmented; the test side is not.
inline FoldResult run_fold(const RunConfig& cfg, const SpectralDataset& data, const Fold& split,
                           std::uint64_t seed, std::size_t fold_index) {
  const auto start = std::chrono::steady_clock::now();
  FoldResult r;
  r.fold = fold_index;
  SpectralDataset train = data.subset(split.train);
  const SpectralDataset test = data.subset(split.test);
  Rng aug_rng(derive_seed(seed, 2, fold_index));
  train = augment(train, cfg.augment, aug_rng);
  EvolutionConfig ev = cfg.evolution;
  ev.seed = derive_seed(seed, 3, fold_index);
  const auto result = evolve(ev, train.x, train.y, {}, &test.x, &test.y);
  r.train_rows = train.size();
  r.test_rows = test.size();
  r.model = result.best.program;
  r.train_mse = result.best.fitness;
  r.train_r2 = result.best.r2;
  const auto scored = Lgp::evaluate(r.model, test.x, test.y);
  r.test_mse = scored.fitness;
  r.test_r2 = scored.r2;
  r.effective_size = effective_size(r.model);
  r.history = result.history;
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

// All folds of one repeat, seeded from the repeat seed.
inline std::vector<FoldResult> run_repeat(const RunConfig& cfg, const SpectralDataset& data, std::size_t repeat,
                                          const std::function<void(const FoldResult&)>& progress = {}) {
  const std::uint64_t seed = repeat_seed(cfg.evolution.seed, repeat);
  Rng split_rng(derive_seed(seed, 1));
  const auto folds = grouped_kfold(data, cfg.folds, split_rng);
  std::vector<FoldResult> out;
  for (std::size_t k = 0; k < folds.size(); ++k) {
    out.push_back(run_fold(cfg, data, folds[k], seed, k));
    out.back().repeat = repeat;
    if (progress) progress(out.back());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string repeat_dir_name(std::size_t repeat) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "repeat_%02zu", repeat + 1);
  return buf;
}

// Deterministic: contains no wall-clock values.
inline std::string repeat_report(const ResolvedConfig& cfg, std::size_t repeat,
                                 const std::vector<FoldResult>& folds) {
  std::ostringstream os;
  os << "# tlgp run report\n";
  os << "repeat = " << repeat + 1 << "\n";
  os << "repeat_seed = " << repeat_seed(cfg.run.evolution.seed, repeat) << "\n\n";
  os << "[config]\n" << to_text(cfg) << "\n";
  os << "[folds]\nfold\ttrain_rows\ttest_rows\ttrain_r2\ttrain_mse\ttest_r2\ttest_mse\teffective_size\n";
  for (const auto& f : folds) {
    os << f.fold + 1 << '\t' << f.train_rows << '\t' << f.test_rows << '\t' << format_double(f.train_r2) << '\t'
       << format_double(f.train_mse) << '\t' << format_double(f.test_r2) << '\t' << format_double(f.test_mse)
       << '\t' << f.effective_size << "\n";
  }
  FrequencyTable freq;
  for (const auto& f : folds) {
    os << "\n[history fold " << f.fold + 1 << "]\n";
    os << "generation\tbest_mse\tmean_mse\tbest_r2\tmean_effective_size\ttest_r2\ttest_mse\n";
    for (const auto& h : f.history) {
      os << h.generation << '\t' << format_double(h.best_fitness) << '\t' << format_double(h.mean_fitness) << '\t'
         << format_double(h.best_r2) << '\t' << format_double(h.mean_effective_size) << '\t'
         << format_double(h.test_r2) << '\t' << format_double(h.test_mse) << "\n";
    }
    os << "\n[model fold " << f.fold + 1 << "]\n" << to_string(f.model);
    os << "\n[dag fold " << f.fold + 1 << "]\n" << export_dag(f.model).dot;
    freq.add(f.model);
  }
  os << "\n[terminal frequency]\n" << freq.to_tsv();
  return os.str();
}

inline std::string summary_tsv(const std::vector<FoldResult>& all) {
  std::ostringstream os;
  os << "repeat\tfold\ttrain_r2\ttest_r2\ttest_mse\teffective_size\n";
  std::vector<double> test_r2, train_r2, test_mse, size;
  for (const auto& f : all) {
    os << f.repeat + 1 << '\t' << f.fold + 1 << '\t' << format_double(f.train_r2) << '\t'
       << format_double(f.test_r2) << '\t' << format_double(f.test_mse) << '\t' << f.effective_size << "\n";
    train_r2.push_back(f.train_r2);
    test_r2.push_back(f.test_r2);
    test_mse.push_back(f.test_mse);
    size.push_back(static_cast<double>(f.effective_size));
  }
  const auto row = [&](const char* label, auto pick) {
    os << label << "\t-";
    for (const auto* v : {&train_r2, &test_r2, &test_mse, &size}) os << '\t' << format_double(pick(mean_std(*v)));
    os << "\n";
  };
  row("mean", [](const MeanStd& m) { return m.mean; });
  row("std", [](const MeanStd& m) { return m.std; });
  return os.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

// Runs every repeat and writes the report tree under `out`. An INCOMPLETE
// marker stays in place until the summary has been written.
inline std::vector<FoldResult> run_experiment(const ResolvedConfig& cfg, const SpectralDataset& raw,
                                              const std::filesystem::path& out,
                                              const std::function<void(const FoldResult&)>& progress = {}) {
  namespace fs = std::filesystem;
  fs::create_directories(out);
  write_text(out / "INCOMPLETE", "run in progress or aborted\n");
  write_text(out / "config.resolved", to_text(cfg));
  const SpectralDataset data = apply_preset(raw, cfg.run.preset);

  std::vector<FoldResult> all;
  std::ostringstream timing;
  timing << "repeat\tfold\tseconds\n";
  for (std::size_t r = 0; r < cfg.run.repeats; ++r) {
    const auto folds = run_repeat(cfg.run, data, r, progress);
    const fs::path dir = out / repeat_dir_name(r);
    fs::create_directories(dir);
    for (const auto& f : folds) {
      const std::string stem = "fold_" + std::to_string(f.fold + 1);
      write_text(dir / (stem + ".model"), to_string(f.model));
      write_text(dir / (stem + ".dot"), export_dag(f.model).dot);
      timing << r + 1 << '\t' << f.fold + 1 << '\t' << std::fixed << std::setprecision(3) << f.seconds << "\n";
    }
    write_text(dir / "report.txt", repeat_report(cfg, r, folds));
    all.insert(all.end(), folds.begin(), folds.end());
  }
  write_text(out / "summary.tsv", summary_tsv(all));
  write_text(out / "timing.tsv", timing.str());
  fs::remove(out / "INCOMPLETE");
  return all;
}

// Frequency table over every fold model below a run directory.
inline FrequencyTable frequency_from_run(const std::filesystem::path& run_dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(run_dir)) throw DataError(run_dir.string() + " is not a directory");
  std::vector<fs::path> models;
  for (const auto& entry : fs::recursive_directory_iterator(run_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".model") models.push_back(entry.path());
  }
  if (models.empty()) throw DataError("no .model files under " + run_dir.string());
  std::sort(models.begin(), models.end());
  FrequencyTable table;
  for (const auto& path : models) {
    std::ifstream in(path);
    std::stringstream text;
    text << in.rdbuf();
    try {
      table.add(parse_program(text.str()));
    } catch (const ParseError& e) {
      throw ParseError(path.string() + ": " + e.detail(), e.line());
    }
  }
  return table;
}

}  // namespace tlgp

#endif  // TLGP_EXPERIMENT_HPP_
