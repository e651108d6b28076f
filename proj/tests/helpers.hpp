#pragma once

#include <vector>

#include "lidfl/core.hpp"
#include "lidfl/model.hpp"

namespace testing_helpers {

inline lidfl::Dataset random_dataset(std::size_t p, std::size_t classes, std::size_t n, lidfl::RngStream& rng) {
  lidfl::Dataset out;
  for (std::size_t i = 0; i < n; ++i) {
    lidfl::LabeledExample ex;
    for (std::size_t f = 0; f < p; ++f) ex.features.push_back(rng.normal());
    ex.label = rng.below(classes);
    out.push_back(std::move(ex));
  }
  return out;
}

inline lidfl::ParamVector random_vector(std::size_t d, double scale, lidfl::RngStream& rng) {
  lidfl::ParamVector w(d);
  for (double& v : w) v = scale * rng.normal();
  return w;
}

}  // namespace testing_helpers
