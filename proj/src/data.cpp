#include "lidfl/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lidfl {

std::string to_string(GeneratorKind kind) {
  return kind == GeneratorKind::gaussian_mixture ? "gaussian-mixture" : "file";
}

GeneratorKind parse_generator_kind(std::string_view text) {
  if (text == "gaussian-mixture" || text == "gaussian_mixture") return GeneratorKind::gaussian_mixture;
  if (text == "file") return GeneratorKind::file;
  throw ConfigError("unknown data generator '" + std::string(text) + "'");
}

std::string to_string(BalanceMode mode) { return mode == BalanceMode::balanced ? "balanced" : "imbalanced"; }

BalanceMode parse_balance_mode(std::string_view text) {
  if (text == "balanced") return BalanceMode::balanced;
  if (text == "imbalanced") return BalanceMode::imbalanced;
  throw ConfigError("unknown balance mode '" + std::string(text) + "'");
}

void DatasetConfig::validate() const {
  if (generator == GeneratorKind::file) {
    if (path.empty()) throw ConfigError("data: file generator needs a path");
    return;
  }
  if (n == 0) throw ConfigError("data: n must be positive");
  if (dim == 0) throw ConfigError("data: feature dimension must be positive");
  if (classes < 2) throw ConfigError("data: need at least 2 classes");
  if (!(separation > 0.0)) throw ConfigError("data: separation must be > 0");
  if (!(noise_sigma > 0.0)) throw ConfigError("data: noise sigma must be > 0");
}

Dataset generate(const DatasetConfig& config, const RngStream& rng) {
  config.validate();
  if (config.generator == GeneratorKind::file) return load_csv(config.path);

  RngStream mean_rng = rng.derive("means");
  std::vector<std::vector<double>> means(config.classes, std::vector<double>(config.dim));
  for (auto& mean : means) {
    double sq = 0.0;
    for (double& v : mean) {
      v = mean_rng.normal();
      sq += v * v;
    }
    const double scale = config.separation / std::sqrt(sq);
    for (double& v : mean) v *= scale;
  }

  RngStream sample_rng = rng.derive("samples");
  Dataset out(config.n);
  for (auto& ex : out) {
    ex.label = sample_rng.below(config.classes);
    ex.features.resize(config.dim);
    const auto& mean = means[ex.label];
    for (std::size_t j = 0; j < config.dim; ++j) {
      ex.features[j] = mean[j] + config.noise_sigma * sample_rng.normal();
    }
  }
  return out;
}

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("load_csv: cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw DataError("load_csv: '" + path + "' is empty");
  std::size_t columns = 0;
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) ++columns;
    if (columns < 2 || line.rfind("label", 0) != 0) {
      throw DataError("load_csv: header must be 'label,f0,f1,...'");
    }
  }
  Dataset out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    LabeledExample ex;
    std::size_t col = 0;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        if (col == 0) {
          long long label = std::stoll(cell, &used);
          if (label < 0) throw std::invalid_argument("negative");
          ex.label = static_cast<std::size_t>(label);
        } else {
          double v = std::stod(cell, &used);
          if (!std::isfinite(v)) throw std::invalid_argument("non-finite");
          ex.features.push_back(v);
        }
      } catch (const std::exception&) {
        throw DataError("load_csv: bad value '" + cell + "' at line " + std::to_string(line_no));
      }
      ++col;
    }
    if (col != columns) {
      throw DataError("load_csv: line " + std::to_string(line_no) + " has " + std::to_string(col) +
                      " columns, expected " + std::to_string(columns));
    }
    out.push_back(std::move(ex));
  }
  if (out.empty()) throw DataError("load_csv: no rows in '" + path + "'");
  return out;
}

namespace {

std::vector<std::size_t> block_sizes(std::size_t n, std::size_t clients, BalanceMode mode, RngStream rng,
                                     double spread) {
  std::vector<std::size_t> sizes(clients, n / clients);
  if (mode == BalanceMode::balanced) {
    for (std::size_t j = 0; j < n % clients; ++j) ++sizes[j];
    return sizes;
  }
  std::vector<double> weights(clients);
  for (double& w : weights) w = rng.uniform(1.0 - spread, 1.0 + spread);
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<std::pair<double, std::size_t>> remainders;
  std::size_t assigned = 0;
  for (std::size_t j = 0; j < clients; ++j) {
    const double exact = static_cast<double>(n) * weights[j] / total;
    sizes[j] = static_cast<std::size_t>(std::floor(exact));
    assigned += sizes[j];
    remainders.emplace_back(exact - std::floor(exact), j);
  }
  // Largest remainder, ties toward the lower client id.
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t r = 0; assigned < n; ++r, ++assigned) ++sizes[remainders[r % clients].second];
  return sizes;
}

}  // namespace

Partition partition(std::size_t n, std::size_t clients, const RoleRatios& ratios, BalanceMode mode,
                    const RngStream& rng, double imbalance_spread) {
  if (clients == 0) throw ConfigError("partition: need at least one client");
  if (!(ratios.train > 0.0 && ratios.validation > 0.0 && ratios.test > 0.0)) {
    throw ConfigError("partition: role ratios must be positive");
  }
  if (!(imbalance_spread >= 0.0 && imbalance_spread < 1.0)) {
    throw ConfigError("partition: imbalance spread must be in [0, 1)");
  }
  if (n < 3 * clients) {
    throw DataError("partition: n=" + std::to_string(n) + " is too small for " + std::to_string(clients) +
                    " clients with three roles each");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  RngStream shuffle_rng = rng.derive("shuffle");
  shuffle_rng.shuffle(order);

  const auto sizes = block_sizes(n, clients, mode, rng.derive("sizes"), imbalance_spread);
  const double ratio_sum = ratios.train + ratios.validation + ratios.test;

  Partition out;
  out.mode = mode;
  out.clients.resize(clients);
  std::size_t cursor = 0;
  for (std::size_t j = 0; j < clients; ++j) {
    const std::size_t size = sizes[j];
    const auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(size) * ratios.train / ratio_sum));
    const auto n_val =
        static_cast<std::size_t>(std::floor(static_cast<double>(size) * ratios.validation / ratio_sum));
    const std::size_t n_test = size - n_train - n_val;
    if (n_train == 0 || n_val == 0 || n_test == 0) {
      throw DataError("partition: insufficient n; client " + std::to_string(j) + " with " + std::to_string(size) +
                      " examples leaves a role empty");
    }
    auto& split = out.clients[j];
    auto take = [&](std::vector<std::size_t>& dst, std::size_t count) {
      dst.assign(order.begin() + static_cast<std::ptrdiff_t>(cursor),
                 order.begin() + static_cast<std::ptrdiff_t>(cursor + count));
      cursor += count;
    };
    take(split.train, n_train);
    take(split.validation, n_val);
    take(split.test, n_test);
  }
  return out;
}

Dataset flip_labels(std::span<const LabeledExample> examples, std::size_t classes) {
  Dataset out(examples.begin(), examples.end());
  for (auto& ex : out) {
    if (ex.label >= classes) {
      throw DataError("flip_labels: label " + std::to_string(ex.label) + " >= class count " +
                      std::to_string(classes));
    }
    ex.label = classes - ex.label - 1;
  }
  return out;
}

Dataset gather(std::span<const LabeledExample> pool, std::span<const std::size_t> indices) {
  Dataset out;
  out.reserve(indices.size());
  for (std::size_t i : indices) {
    if (i >= pool.size()) throw DataError("gather: index out of range");
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace lidfl
