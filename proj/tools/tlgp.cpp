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

// Command-line front end: train, export-dag, report-frequency, preprocess.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "tlgp/config.hpp"
#include "tlgp/data.hpp"
#include "tlgp/experiment.hpp"
#include "tlgp/program.hpp"
#include "tlgp/report.hpp"

namespace {

using namespace tlgp;

void emit(const std::string& text, const std::string& out) {
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  write_text(out, text);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

struct Options {
  std::string config;
  std::string data;
  std::string out;
  std::string model;
  std::string run_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> mode;
  std::optional<std::string> preset;

  ConfigOverrides overrides() const {
    ConfigOverrides o;
    if (mode) o.mode = mode_from_name(*mode);
    o.seed = seed;
    o.workers = workers;
    o.preset = preset;
    return o;
  }
};

int train(const Options& o) {
  const auto cfg = load_config(o.config, o.overrides());
  const auto data = load_csv(o.data);
  std::cerr << "tlgp: " << data.size() << " rows, " << data.features() << " features, mode " << name(cfg.mode)
            << ", " << cfg.run.repeats << " x " << cfg.run.folds << " folds\n";
  const auto results = run_experiment(cfg, data, o.out, [](const FoldResult& f) {
    std::cerr << "repeat " << f.repeat + 1 << " fold " << f.fold + 1 << ": test R2 " << format_4g(f.test_r2)
              << ", effective size " << f.effective_size << "\n";
  });
  std::vector<double> r2;
  for (const auto& f : results) r2.push_back(f.test_r2);
  const auto m = mean_std(r2);
  std::cerr << "test R2 " << format_4g(m.mean) << " +/- " << format_4g(m.std) << "; reports in " << o.out << "\n";
  return 0;
}

int export_dag_cmd(const Options& o) {
  emit(export_dag(parse_program(read_file(o.model))).dot, o.out);
  return 0;
}

int report_frequency(const Options& o) {
  emit(frequency_from_run(o.run_dir).to_tsv(), o.out);
  return 0;
}

int preprocess(const Options& o) {
  std::string preset = "none";
  if (!o.config.empty() || o.mode) preset = load_config(o.config, o.overrides()).run.preset;
  if (o.preset) preset = *o.preset;
  const auto out = apply_preset(load_csv(o.data), preset);
  if (o.out.empty() || o.out == "-") {
    write_csv(out, std::cout);
  } else {
    save_csv(out, o.out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Linear genetic programming with tunable primitives"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "Configuration file (key = value, schema_version = 1)");
    sub->add_option("--seed", o.seed, "Master random seed");
    sub->add_option("--workers", o.workers, "Worker threads; results do not depend on this");
    sub->add_option("--mode", o.mode, "Parameter preset")->check(CLI::IsMember({"fish", "srbench"}));
    sub->add_option("--preset", o.preset, "Spectral treatment preset");
  };

  auto* train_cmd = app.add_subcommand("train", "Run repeated grouped k-fold training and write reports");
  common(train_cmd);
  train_cmd->add_option("--data", o.data, "Training CSV")->required();
  train_cmd->add_option("--out", o.out, "Output directory")->required();

  auto* dag_cmd = app.add_subcommand("export-dag", "Write a model's effective dataflow as Graphviz DOT");
  dag_cmd->add_option("model", o.model, "Model file")->required();
  dag_cmd->add_option("--out", o.out, "Output file (default stdout)");

  auto* freq_cmd = app.add_subcommand("report-frequency", "Terminal coverage over feature-position bins");
  freq_cmd->add_option("run_dir", o.run_dir, "Directory written by train")->required();
  freq_cmd->add_option("--out", o.out, "Output TSV (default stdout)");

  auto* pre_cmd = app.add_subcommand("preprocess", "Apply a treatment preset and write the transformed CSV");
  common(pre_cmd);
  pre_cmd->add_option("--data", o.data, "Input CSV")->required();
  pre_cmd->add_option("--out", o.out, "Output CSV (default stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train_cmd) return train(o);
    if (*dag_cmd) return export_dag_cmd(o);
    if (*freq_cmd) return report_frequency(o);
    if (*pre_cmd) return preprocess(o);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
