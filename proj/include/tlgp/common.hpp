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

#ifndef TLGP_COMMON_HPP_
#define TLGP_COMMON_HPP_

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>

#include <Eigen/Dense>

namespace tlgp {

// Instances are rows. Row-major keeps every feature slice [alpha..beta] of one
// instance contiguous, which is the access pattern of the tunable terminals.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Thrown for programs or primitive states that reference registers, features,
// or coefficient counts that do not exist.
class StructureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Text input (models, CSV files, configuration) that cannot be parsed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line), detail_(what) {}
  std::size_t line() const { return line_; }
  // The message without the line prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Magnitude bound for every value a primitive produces. Squares of bounded
// values stay far from overflow, so sums of squared errors remain finite.
inline constexpr double kValueLimit = 1e30;

inline double protect(double v) {
  if (std::isnan(v)) return 0.0;
  if (v > kValueLimit) return kValueLimit;
  if (v < -kValueLimit) return -kValueLimit;
  return v;
}

// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf.data(), end);
}

inline bool parse_double(std::string_view text, double& out) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  if (text.empty()) return false;
  if (text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Independent stream for (seed, a, b). Offspring streams depend only on the
// master seed and the offspring's position, never on scheduling.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ (b * 0xd1b54a32d192ed03ULL));
}

inline double mean_squared_error(const Vector& predictions, const Vector& targets) {
  if (targets.size() == 0) return 0.0;
  const double mse = (predictions - targets).squaredNorm() / static_cast<double>(targets.size());
  return std::isfinite(mse) ? mse : std::numeric_limits<double>::max();
}

// Coefficient of determination. A constant target has R^2 = 1 when it is hit
// exactly and 0 otherwise.
inline double r_squared(const Vector& predictions, const Vector& targets) {
  if (targets.size() == 0) return 0.0;
  const double ss_res = (predictions - targets).squaredNorm();
  const double ss_tot = (targets.array() - targets.mean()).square().sum();
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  const double r2 = 1.0 - ss_res / ss_tot;
  return std::isfinite(r2) ? r2 : -std::numeric_limits<double>::max();
}

}  // namespace tlgp

#endif  // TLGP_COMMON_HPP_
