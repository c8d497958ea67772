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

// Spectral datasets: CSV I/O, per-spectrum treatments, training-set
// augmentation, and replicate-aware k-fold splitting.
//
// CSV layout: a header of wavenumbers followed by `target` and `group`
// columns, then one row per scan. Scans sharing a group id are replicates of
// one physical sample.

#ifndef TLGP_DATA_HPP_
#define TLGP_DATA_HPP_

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "tlgp/common.hpp"

namespace tlgp {

struct SpectralDataset {
  Matrix x;                          // n x d intensities
  std::vector<double> wavenumbers;   // d, strictly monotone
  Vector y;                          // n
  std::vector<std::string> groups;   // n sample ids
  std::vector<bool> augmented;       // n
  bool descending = false;

  std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t features() const { return static_cast<std::size_t>(x.cols()); }

  void check() const {
    const auto n = size();
    if (static_cast<std::size_t>(y.size()) != n || groups.size() != n || augmented.size() != n) {
      throw DataError("dataset columns disagree on the row count");
    }
    if (wavenumbers.size() != features()) throw DataError("wavenumber axis does not match the feature count");
    for (std::size_t i = 1; i < wavenumbers.size(); ++i) {
      const bool up = wavenumbers[i] > wavenumbers[i - 1];
      const bool down = wavenumbers[i] < wavenumbers[i - 1];
      if (!(descending ? down : up)) throw DataError("wavenumber axis is not strictly monotone");
    }
  }

  SpectralDataset subset(const std::vector<std::size_t>& rows) const {
    SpectralDataset out;
    out.wavenumbers = wavenumbers;
    out.descending = descending;
    out.x.resize(static_cast<Eigen::Index>(rows.size()), x.cols());
    out.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(rows[i]);
      out.x.row(static_cast<Eigen::Index>(i)) = x.row(r);
      out.y(static_cast<Eigen::Index>(i)) = y(r);
      out.groups.push_back(groups[rows[i]]);
      out.augmented.push_back(augmented[rows[i]]);
    }
    return out;
  }
};

// ---------------------------------------------------------------------------
// CSV

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

inline std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace detail

// Errors carry the 1-based line number; the message names the column.
inline SpectralDataset read_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!detail::trim(line).empty()) break;
  }
  if (line_no == 0 || detail::trim(line).empty()) throw ParseError("empty file", line_no);
  const auto header = detail::split_csv_line(line);
  if (header.size() < 3 || detail::trim(header[header.size() - 2]) != "target" ||
      detail::trim(header.back()) != "group") {
    throw ParseError("header must end with 'target,group'", line_no);
  }
  const std::size_t d = header.size() - 2;
  SpectralDataset ds;
  for (std::size_t c = 0; c < d; ++c) {
    double w = 0.0;
    if (!parse_double(header[c], w) || !std::isfinite(w)) {
      throw ParseError("column " + std::to_string(c + 1) + ": '" + header[c] + "' is not a wavenumber", line_no);
    }
    for (std::size_t k = 0; k < c; ++k) {
      if (ds.wavenumbers[k] == w) {
        throw ParseError("column " + std::to_string(c + 1) + ": duplicate wavenumber " + header[c], line_no);
      }
    }
    ds.wavenumbers.push_back(w);
  }
  ds.descending = d > 1 && ds.wavenumbers[1] < ds.wavenumbers[0];
  for (std::size_t c = 1; c < d; ++c) {
    if ((ds.wavenumbers[c] < ds.wavenumbers[c - 1]) != ds.descending) {
      throw ParseError("column " + std::to_string(c + 1) + ": wavenumbers are not monotone", line_no);
    }
  }

  std::vector<double> values;
  std::vector<double> targets;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto cells = detail::split_csv_line(line);
    if (cells.size() != d + 2) {
      throw ParseError("row has " + std::to_string(cells.size()) + " cells, expected " + std::to_string(d + 2),
                       line_no);
    }
    for (std::size_t c = 0; c <= d; ++c) {
      double v = 0.0;
      if (!parse_double(cells[c], v) || !std::isfinite(v)) {
        throw ParseError("column " + std::to_string(c + 1) + " ('" + detail::trim(header[c]) + "'): '" +
                             detail::trim(cells[c]) + "' is not a number",
                         line_no);
      }
      (c < d ? values : targets).push_back(v);
    }
    const auto group = detail::trim(cells[d + 1]);
    if (group.empty()) throw ParseError("column " + std::to_string(d + 2) + " ('group') is empty", line_no);
    ds.groups.push_back(group);
  }
  const auto n = static_cast<Eigen::Index>(targets.size());
  ds.x = Eigen::Map<const Matrix>(values.data(), n, static_cast<Eigen::Index>(d));
  ds.y = Eigen::Map<const Vector>(targets.data(), n);
  ds.augmented.assign(targets.size(), false);
  ds.check();
  return ds;
}

inline SpectralDataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  try {
    return read_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.detail(), e.line());
  }
}

inline void write_csv(const SpectralDataset& ds, std::ostream& out) {
  for (double w : ds.wavenumbers) out << format_double(w) << ',';
  out << "target,group\n";
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (Eigen::Index c = 0; c < ds.x.cols(); ++c) out << format_double(ds.x(r, c)) << ',';
    out << format_double(ds.y(r)) << ',' << ds.groups[i] << '\n';
  }
}

inline void save_csv(const SpectralDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  write_csv(ds, out);
}

// ---------------------------------------------------------------------------
// Per-spectrum treatments

// Centre each row and scale by its population standard deviation. Flat rows
// become zeros.
inline Matrix snv(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  const double d = static_cast<double>(x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).sum() / d;
    const double sd = std::sqrt((x.row(i).array() - mean).square().sum() / d);
    if (sd > 0.0) {
      out.row(i) = (x.row(i).array() - mean) / sd;
    } else {
      out.row(i).setZero();
    }
  }
  return out;
}

// Subtracts the straight line through each spectrum's first and last point.
inline Matrix linear_baseline(const Matrix& x, const std::vector<double>& wavenumbers) {
  const auto d = x.cols();
  if (d < 2) throw DataError("linear baseline needs at least two features");
  if (static_cast<Eigen::Index>(wavenumbers.size()) != d) throw DataError("wavenumber axis size mismatch");
  const double w0 = wavenumbers.front();
  const double span = wavenumbers.back() - w0;
  Matrix out(x.rows(), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double first = x(i, 0);
    const double last = x(i, d - 1);
    for (Eigen::Index f = 0; f < d; ++f) {
      const double t = (wavenumbers[static_cast<std::size_t>(f)] - w0) / span;
      out(i, f) = x(i, f) - (first * (1.0 - t) + last * t);
    }
  }
  return out;
}

// Successive differences along each row (unit spacing): n x (d-1).
inline Matrix first_derivative(const Matrix& x) {
  if (x.cols() < 2) throw DataError("first derivative needs at least two features");
  return x.rightCols(x.cols() - 1) - x.leftCols(x.cols() - 1);
}

// Centred moving average; the window shrinks at the edges so the width stays d.
inline Matrix sliding_smooth(const Matrix& x, std::size_t window) {
  if (window % 2 == 0) throw ConfigError("smoothing window must be odd, got " + std::to_string(window));
  if (window > static_cast<std::size_t>(x.cols())) throw ConfigError("smoothing window exceeds the feature count");
  const auto half = static_cast<Eigen::Index>(window / 2);
  const auto d = x.cols();
  Matrix out(x.rows(), d);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index f = 0; f < d; ++f) {
      const Eigen::Index lo = std::max<Eigen::Index>(0, f - half);
      const Eigen::Index hi = std::min<Eigen::Index>(d - 1, f + half);
      out(i, f) = x.row(i).segment(lo, hi - lo + 1).sum() / static_cast<double>(hi - lo + 1);
    }
  }
  return out;
}

// Treatment steps: "snv", "lb" (linear baseline), "d1" (first derivative),
// "sw<odd>" (sliding window). Presets name the published pipelines.
inline std::vector<std::string> preset_steps(const std::string& preset) {
  static const std::map<std::string, std::vector<std::string>> presets = {
      {"none", {}},
      {"ingaas_snv", {"snv"}},
      {"ingaas_lb", {"lb"}},
      {"ft_snv", {"snv"}},
      {"ingaas_snv_d1_sw17", {"snv", "d1", "sw17"}},
  };
  const auto it = presets.find(preset);
  if (it == presets.end()) throw ConfigError("unknown preset '" + preset + "'");
  return it->second;
}

inline SpectralDataset apply_treatment(const SpectralDataset& ds, const std::string& step) {
  SpectralDataset out = ds;
  if (step == "snv") {
    out.x = snv(ds.x);
  } else if (step == "lb") {
    out.x = linear_baseline(ds.x, ds.wavenumbers);
  } else if (step == "d1") {
    out.x = first_derivative(ds.x);
    out.wavenumbers.clear();
    for (std::size_t i = 1; i < ds.wavenumbers.size(); ++i) {
      out.wavenumbers.push_back(0.5 * (ds.wavenumbers[i - 1] + ds.wavenumbers[i]));
    }
  } else if (step.size() > 2 && step.rfind("sw", 0) == 0) {
    std::size_t window = 0;
    for (char c : step.substr(2)) {
      if (c < '0' || c > '9') throw ConfigError("bad treatment step '" + step + "'");
      window = window * 10 + static_cast<std::size_t>(c - '0');
    }
    out.x = sliding_smooth(ds.x, window);
  } else {
    throw ConfigError("unknown treatment step '" + step + "'");
  }
  return out;
}

inline SpectralDataset apply_preset(const SpectralDataset& ds, const std::string& preset) {
  SpectralDataset out = ds;
  for (const auto& step : preset_steps(preset)) out = apply_treatment(out, step);
  return out;
}

// ---------------------------------------------------------------------------
// Augmentation

struct AugmentConfig {
  double factor = 50.0;  // output size as a multiple of the input size
  double spectral = 0.5;
  double mixup = 0.25;
  double gaussian = 0.25;
  double scale = 0.05;   // multiplicative scale s ~ U(1 - scale, 1 + scale)
  double offset = 0.05;  // additive offset ~ U(-offset, offset) * row sd
  double tilt = 0.05;    // endpoint tilt ~ U(-tilt, tilt) * row sd
  double noise = 0.01;   // per-feature noise sd as a fraction of the feature sd
};

struct AugmentCounts {
  std::size_t spectral = 0;
  std::size_t mixup = 0;
  std::size_t gaussian = 0;
  std::size_t total() const { return spectral + mixup + gaussian; }
};

inline AugmentCounts augment_counts(std::size_t n, const AugmentConfig& cfg) {
  if (!(cfg.factor >= 1.0)) throw ConfigError("augmentation factor must be at least 1");
  const double mix_sum = cfg.spectral + cfg.mixup + cfg.gaussian;
  if (!(mix_sum > 0.0) || cfg.spectral < 0 || cfg.mixup < 0 || cfg.gaussian < 0) {
    throw ConfigError("augmentation mix must be non-negative with a positive sum");
  }
  const auto total = static_cast<std::size_t>(std::llround((cfg.factor - 1.0) * static_cast<double>(n)));
  AugmentCounts c;
  c.spectral = static_cast<std::size_t>(std::llround(static_cast<double>(total) * cfg.spectral / mix_sum));
  c.mixup = std::min(total - c.spectral,
                     static_cast<std::size_t>(std::llround(static_cast<double>(total) * cfg.mixup / mix_sum)));
  c.gaussian = total - c.spectral - c.mixup;
  return c;
}

// Convex combination lambda * a + (1 - lambda) * b, applied to features and target.
inline std::pair<Eigen::RowVectorXd, double> mixup(const Eigen::RowVectorXd& xa, double ya,
                                                   const Eigen::RowVectorXd& xb, double yb, double lambda) {
  return {lambda * xa + (1.0 - lambda) * xb, lambda * ya + (1.0 - lambda) * yb};
}

// Appends augmented rows to a training fold: spectral perturbation (scale,
// offset, linear tilt), mixup of two rows, and Gaussian feature noise.
// `made`, when given, receives the number of rows emitted per kind.
inline SpectralDataset augment(const SpectralDataset& fold, const AugmentConfig& cfg, Rng& rng,
                               AugmentCounts* made = nullptr) {
  const std::size_t n = fold.size();
  if (n == 0) throw DataError("cannot augment an empty fold");
  const auto counts = augment_counts(n, cfg);
  const auto d = fold.x.cols();
  SpectralDataset out = fold;
  out.x.conservativeResize(static_cast<Eigen::Index>(n + counts.total()), d);
  out.y.conservativeResize(static_cast<Eigen::Index>(n + counts.total()));

  Eigen::RowVectorXd feature_sd(d);
  for (Eigen::Index f = 0; f < d; ++f) {
    const double m = fold.x.col(f).mean();
    feature_sd(f) = std::sqrt((fold.x.col(f).array() - m).square().mean());
  }
  const auto row_sd = [&](Eigen::Index r) {
    const double m = fold.x.row(r).mean();
    return std::sqrt((fold.x.row(r).array() - m).square().mean());
  };
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> lambda(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  auto row = static_cast<Eigen::Index>(n);
  if (made) *made = {};
  const auto emit = [&](const Eigen::RowVectorXd& xs, double ys, const std::string& group,
                        std::size_t AugmentCounts::*kind) {
    if (made) ++(made->*kind);
    out.x.row(row) = xs;
    out.y(row) = ys;
    out.groups.push_back(group);
    out.augmented.push_back(true);
    ++row;
  };
  for (std::size_t k = 0; k < counts.spectral; ++k) {
    const auto src = static_cast<Eigen::Index>(pick(rng));
    const double sd = row_sd(src);
    const double s = 1.0 + cfg.scale * unit(rng);
    const double o = cfg.offset * unit(rng) * sd;
    const double t = cfg.tilt * unit(rng) * sd;
    Eigen::RowVectorXd xs = s * fold.x.row(src);
    for (Eigen::Index f = 0; f < d; ++f) {
      const double pos = d > 1 ? 2.0 * static_cast<double>(f) / static_cast<double>(d - 1) - 1.0 : 0.0;
      xs(f) += o + t * pos;
    }
    emit(xs, fold.y(src), fold.groups[static_cast<std::size_t>(src)], &AugmentCounts::spectral);
  }
  for (std::size_t k = 0; k < counts.mixup; ++k) {
    const auto a = static_cast<Eigen::Index>(pick(rng));
    const auto b = static_cast<Eigen::Index>(pick(rng));
    const auto [xs, ys] = mixup(fold.x.row(a), fold.y(a), fold.x.row(b), fold.y(b), lambda(rng));
    emit(xs, ys, fold.groups[static_cast<std::size_t>(a)], &AugmentCounts::mixup);
  }
  for (std::size_t k = 0; k < counts.gaussian; ++k) {
    const auto src = static_cast<Eigen::Index>(pick(rng));
    Eigen::RowVectorXd xs = fold.x.row(src);
    for (Eigen::Index f = 0; f < d; ++f) xs(f) += cfg.noise * feature_sd(f) * gauss(rng);
    emit(xs, fold.y(src), fold.groups[static_cast<std::size_t>(src)], &AugmentCounts::gaussian);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grouped k-fold

struct Fold {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

// Shuffles the distinct groups of the real (non-augmented) rows and deals
// them round-robin into k folds, so replicates never straddle folds.
inline std::vector<Fold> grouped_kfold(const std::vector<std::string>& groups, const std::vector<bool>& augmented,
                                       std::size_t k, Rng& rng) {
  if (k < 2) throw ConfigError("need at least two folds");
  std::vector<std::string> order;
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (augmented[i]) continue;
    if (index.emplace(groups[i], order.size()).second) order.push_back(groups[i]);
  }
  if (order.size() < k) {
    throw ConfigError(std::to_string(order.size()) + " groups cannot fill " + std::to_string(k) + " folds");
  }
  std::vector<std::size_t> perm(order.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<std::size_t> fold_of(order.size());
  for (std::size_t pos = 0; pos < perm.size(); ++pos) fold_of[perm[pos]] = pos % k;

  std::vector<Fold> folds(k);
  for (std::size_t i = 0; i < groups.size(); ++i) {
    if (augmented[i]) continue;
    const std::size_t f = fold_of[index.at(groups[i])];
    for (std::size_t j = 0; j < k; ++j) (j == f ? folds[j].test : folds[j].train).push_back(i);
  }
  return folds;
}

inline std::vector<Fold> grouped_kfold(const SpectralDataset& ds, std::size_t k, Rng& rng) {
  return grouped_kfold(ds.groups, ds.augmented, k, rng);
}

}  // namespace tlgp

#endif  // TLGP_DATA_HPP_
