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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "tlgp/data.hpp"

namespace tlgp {
namespace {

namespace fs = std::filesystem;

struct Run {
  int status = -1;
  std::string output;  // stdout and stderr
};

Run run(const std::string& args) {
  const std::string cmd = std::string(TLGP_CLI) + " " + args + " 2>&1";
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (const std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) r.output.append(buf, n);
  const int raw = pclose(pipe);
  r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tlgp_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    SpectralDataset ds;
    Rng rng(3);
    std::normal_distribution<double> v(0.0, 1.0);
    ds.x.resize(10, 8);
    ds.y.resize(10);
    for (int f = 0; f < 8; ++f) ds.wavenumbers.push_back(500 + 2.0 * f);
    for (int i = 0; i < 10; ++i) {
      for (int f = 0; f < 8; ++f) ds.x(i, f) = 1 + v(rng);
      ds.y(i) = ds.x.row(i).head(4).sum() + 0.05 * v(rng);
      ds.groups.push_back("s" + std::to_string(i));
      ds.augmented.push_back(false);
    }
    save_csv(ds, (dir_ / "toy.csv").string());
    std::ofstream(dir_ / "toy.cfg") << "schema_version = 1\nrepeats = 1\nfolds = 2\npopulation_size = 10\n"
                                       "generations = 2\nregister_count = 4\nmvlr_r = 2\naugment_factor = 2\n";
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

TEST_F(Cli, TrainSmokeAndDeterminism) {
  const std::string base = "train --config " + path("toy.cfg") + " --data " + path("toy.csv") + " --seed 7 --out ";
  const auto a = run(base + path("a"));
  ASSERT_EQ(a.status, 0) << a.output;
  const auto b = run(base + path("b"));
  ASSERT_EQ(b.status, 0) << b.output;
  EXPECT_TRUE(fs::exists(dir_ / "a" / "repeat_01" / "fold_1.model"));
  EXPECT_TRUE(fs::exists(dir_ / "a" / "repeat_01" / "fold_2.model"));
  EXPECT_FALSE(fs::exists(dir_ / "a" / "INCOMPLETE"));
  for (const char* f : {"summary.tsv", "config.resolved", "repeat_01/report.txt", "repeat_01/fold_1.model"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  EXPECT_NE(slurp(dir_ / "a" / "config.resolved").find("seed = 7"), std::string::npos);
}

TEST_F(Cli, UnknownConfigKeyFails) {
  std::ofstream(dir_ / "bad.cfg") << "schema_version = 1\npopsize = 3\n";
  const auto r = run("train --config " + path("bad.cfg") + " --data " + path("toy.csv") + " --out " + path("o"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("popsize"), std::string::npos);
}

TEST_F(Cli, BadDataFails) {
  std::ofstream(dir_ / "bad.csv") << "1,2,target,group\n1,x,3,a\n";
  const auto r = run("train --data " + path("bad.csv") + " --out " + path("o"));
  EXPECT_NE(r.status, 0);
  EXPECT_NE(r.output.find("line 2"), std::string::npos);
}

TEST_F(Cli, ExportDag) {
  std::ofstream(dir_ / "m.model") << "registers 2\nR1 = add(x0, x1)\nR0 = MVLR[0:1]{0,0,2}\n";
  const auto r = run("export-dag " + path("m.model") + " --out " + path("m.dot"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_EQ(slurp(dir_ / "m.dot").rfind("digraph", 0), 0u);
  std::ofstream(dir_ / "bad.model") << "registers 2\nR1 = add(x0, x1)\nR1 = what(x0)\n";
  const auto bad = run("export-dag " + path("bad.model"));
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.output.find("line 3"), std::string::npos);
}

TEST_F(Cli, ReportFrequency) {
  fs::create_directories(dir_ / "run" / "repeat_01");
  std::ofstream(dir_ / "run" / "repeat_01" / "fold_1.model")
      << "registers 1\nfeatures 4\nR0 = add(Avg[0:3]{0,1}, R0)\n";
  const auto r = run("report-frequency " + path("run"));
  ASSERT_EQ(r.status, 0) << r.output;
  EXPECT_NE(r.output.find("Avg\t1\t1"), std::string::npos);
  EXPECT_NE(run("report-frequency " + path("nothing")).status, 0);
}

TEST_F(Cli, Preprocess) {
  const auto r = run("preprocess --data " + path("toy.csv") + " --preset ingaas_snv --out " + path("snv.csv"));
  ASSERT_EQ(r.status, 0) << r.output;
  const auto in = load_csv(path("toy.csv"));
  const auto out = load_csv(path("snv.csv"));
  EXPECT_TRUE(out.x.isApprox(snv(in.x), 1e-15));
  EXPECT_EQ(out.y, in.y);
  EXPECT_NE(run("preprocess --data " + path("toy.csv") + " --preset nope").status, 0);
}

TEST_F(Cli, MissingSubcommandFails) { EXPECT_NE(run("").status, 0); }

}  // namespace
}  // namespace tlgp
