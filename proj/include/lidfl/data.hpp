#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lidfl/core.hpp"
#include "lidfl/model.hpp"

namespace lidfl {

enum class GeneratorKind { gaussian_mixture, file };

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(std::string_view text);

struct DatasetConfig {
  GeneratorKind generator = GeneratorKind::gaussian_mixture;
  std::size_t n = 0;
  std::size_t dim = 0;
  std::size_t classes = 2;
  /// Radius of the sphere the class means are placed on.
  double separation = 1.0;
  double noise_sigma = 1.0;
  std::string path;

  void validate() const;
};

/// Gaussian mixture: class means drawn once on a sphere of radius
/// `separation`, labels uniform, features mean + N(0, sigma^2 I).
/// File mode reads the CSV format of load_csv.
Dataset generate(const DatasetConfig& config, const RngStream& rng);

/// CSV with header `label,f0,f1,...`; labels are 0-based class indices.
Dataset load_csv(const std::string& path);

struct RoleRatios {
  double train = 4.0;
  double validation = 1.0;
  double test = 1.0;
};

enum class BalanceMode { balanced, imbalanced };

std::string to_string(BalanceMode mode);
BalanceMode parse_balance_mode(std::string_view text);

struct ClientSplit {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
  std::vector<std::size_t> test;

  [[nodiscard]] std::size_t total() const { return train.size() + validation.size() + test.size(); }
};

struct Partition {
  std::vector<ClientSplit> clients;
  BalanceMode mode = BalanceMode::balanced;
};

/// Shuffles [0, n), cuts it into per-client blocks and splits each block into
/// train/validation/test. Train and validation take floor(size * ratio); the
/// test role takes the remainder. Balanced blocks differ in size by at most 1;
/// imbalanced block weights are uniform on [1 - spread, 1 + spread].
Partition partition(std::size_t n, std::size_t clients, const RoleRatios& ratios, BalanceMode mode,
                    const RngStream& rng, double imbalance_spread = 0.5);

/// y -> classes - y - 1 on every example; features are copied untouched.
Dataset flip_labels(std::span<const LabeledExample> examples, std::size_t classes);

/// Copies the rows named by `indices`.
Dataset gather(std::span<const LabeledExample> pool, std::span<const std::size_t> indices);

}  // namespace lidfl
