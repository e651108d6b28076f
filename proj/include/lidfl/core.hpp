#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lidfl {

// Error hierarchy shared by every module.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct DataError : Error {
  using Error::Error;
};

using ClientId = std::size_t;
using ModelIndex = std::size_t;

/// Dense parameter vector (model weights, updates, momenta, gradients).
///
/// Arithmetic helpers below reject length mismatches with DimensionError and
/// sum coordinates left to right, so results are bit-stable on a platform.
class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  explicit ParamVector(std::vector<double> values) : values_(std::move(values)) {}
  ParamVector(std::initializer_list<double> values) : values_(values) {}

  static ParamVector zeros(std::size_t dim) { return ParamVector(dim, 0.0); }

  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] bool empty() const noexcept { return values_.empty(); }

  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double operator[](std::size_t i) const noexcept { return values_[i]; }

  [[nodiscard]] std::span<double> span() noexcept { return values_; }
  [[nodiscard]] std::span<const double> span() const noexcept { return values_; }
  [[nodiscard]] const std::vector<double>& values() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  [[nodiscard]] bool all_finite() const noexcept;

  friend bool operator==(const ParamVector&, const ParamVector&) = default;

 private:
  std::vector<double> values_;
};

void require_same_dim(const ParamVector& x, const ParamVector& y, std::string_view what);

/// a*x + y, inputs untouched.
ParamVector vec_axpy(double a, const ParamVector& x, const ParamVector& y);
/// In-place y += a*x.
void axpy_inplace(double a, const ParamVector& x, ParamVector& y);
ParamVector vec_add(const ParamVector& x, const ParamVector& y);
ParamVector vec_sub(const ParamVector& x, const ParamVector& y);
ParamVector vec_scale(double a, const ParamVector& x);
double dot(const ParamVector& x, const ParamVector& y);
double l2_norm(const ParamVector& x);
double l2_distance(const ParamVector& x, const ParamVector& y);
double squared_distance(const ParamVector& x, const ParamVector& y);

/// Counter-based random stream keyed by (seed, label).
///
/// Draw i of a stream is a pure function of (key, i), so a stream replays
/// identically on every run and platform, and child streams derived by label
/// never share state with their parent. Distribution helpers are implemented
/// here rather than through <random> distributions, whose algorithms are
/// implementation-defined.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::string_view label);

  [[nodiscard]] RngStream derive(std::string_view label) const;
  [[nodiscard]] RngStream derive(std::uint64_t index) const;

  std::uint64_t next_u64() noexcept;
  result_type operator()() noexcept { return next_u64(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer in [0, n); n must be positive.
  std::size_t below(std::size_t n);
  double normal() noexcept;
  bool bernoulli(double p) noexcept;

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  [[nodiscard]] std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] std::uint64_t position() const noexcept { return counter_; }

 private:
  explicit RngStream(std::uint64_t key) : key_(key) {}
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

RngStream derive_stream(std::uint64_t master_seed, std::string_view label);

std::uint64_t fnv1a64(std::string_view text) noexcept;
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Population mean and standard deviation of a sample.
struct MeanStd {
  double mean = 0.0;
  double std = 0.0;
};
MeanStd mean_std(std::span<const double> xs);
/// Sample (n-1) standard deviation; zero for fewer than two values.
double sample_std(std::span<const double> xs);

}  // namespace lidfl
