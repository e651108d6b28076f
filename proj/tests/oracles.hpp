#pragma once

// Independent reference implementations used only by tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "lidfl/core.hpp"
#include "lidfl/model.hpp"

namespace oracle {

using lidfl::ParamVector;

/// Per-coordinate median via a full sort.
inline ParamVector cwm_by_sort(const std::vector<ParamVector>& u) {
  const std::size_t d = u.front().size();
  ParamVector out(d);
  for (std::size_t c = 0; c < d; ++c) {
    std::vector<double> col;
    for (const auto& x : u) col.push_back(x[c]);
    std::sort(col.begin(), col.end());
    const std::size_t n = col.size();
    out[c] = n % 2 == 1 ? col[n / 2] : (col[n / 2 - 1] + col[n / 2]) / 2.0;
  }
  return out;
}

inline double dist(const ParamVector& a, const ParamVector& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

/// The k points of `remaining` nearest to `center` (center first), found by
/// repeated linear minimum scans with ties to the lowest index.
inline std::vector<std::size_t> knn_scan(const std::vector<ParamVector>& u, std::vector<std::size_t> remaining,
                                         std::size_t center, std::size_t k) {
  std::vector<std::size_t> group{center};
  remaining.erase(std::find(remaining.begin(), remaining.end(), center));
  while (group.size() < k && !remaining.empty()) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < remaining.size(); ++i) {
      const double di = dist(u[remaining[i]], u[center]);
      const double db = dist(u[remaining[best]], u[center]);
      if (di < db || (di == db && remaining[i] < remaining[best])) best = i;
    }
    group.push_back(remaining[best]);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best));
  }
  return group;
}

inline ParamVector average(const std::vector<ParamVector>& u, const std::vector<std::size_t>& g) {
  ParamVector out(u.front().size(), 0.0);
  for (std::size_t r : g) {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += u[r][i];
  }
  for (double& v : out) v /= static_cast<double>(g.size());
  return out;
}

inline void drop(std::vector<std::size_t>& remaining, const std::vector<std::size_t>& g) {
  for (std::size_t r : g) remaining.erase(std::find(remaining.begin(), remaining.end(), r));
}

struct GroupingRun {
  std::vector<std::size_t> starts;  // positions within the remaining list
  std::vector<std::vector<std::size_t>> groups;
};

/// Every start-choice sequence of the random-kNN grouping with its groups.
inline std::vector<GroupingRun> rknn_all(const std::vector<ParamVector>& u, std::size_t k) {
  std::vector<GroupingRun> out;
  std::function<void(std::vector<std::size_t>, GroupingRun)> rec = [&](std::vector<std::size_t> remaining,
                                                                       GroupingRun run) {
    if (remaining.empty()) {
      out.push_back(std::move(run));
      return;
    }
    if (remaining.size() <= k) {
      run.groups.push_back(remaining);
      out.push_back(std::move(run));
      return;
    }
    for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
      GroupingRun next = run;
      next.starts.push_back(pos);
      auto g = knn_scan(u, remaining, remaining[pos], k);
      auto rest = remaining;
      drop(rest, g);
      next.groups.push_back(std::move(g));
      rec(std::move(rest), std::move(next));
    }
  };
  std::vector<std::size_t> all(u.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  rec(all, GroupingRun{});
  return out;
}

/// Minimum-radius grouping; radius = distance to the k-th nearest point.
inline std::vector<std::vector<std::size_t>> meb_groups(const std::vector<ParamVector>& u, std::size_t k) {
  std::vector<std::size_t> remaining(u.size());
  std::iota(remaining.begin(), remaining.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> out;
  while (!remaining.empty()) {
    if (remaining.size() <= k) {
      out.push_back(remaining);
      break;
    }
    std::vector<std::size_t> best_group;
    double best_radius = INFINITY;
    for (std::size_t c : remaining) {
      auto g = knn_scan(u, remaining, c, k);
      const double r = dist(u[g.back()], u[c]);
      if (r < best_radius) {
        best_radius = r;
        best_group = g;
      }
    }
    drop(remaining, best_group);
    out.push_back(best_group);
  }
  return out;
}

/// Central finite-difference gradient of the loss along one coordinate.
inline double fd_partial(const lidfl::ModelSpec& spec, const ParamVector& w, const lidfl::Batch& batch,
                         std::size_t coord, double h) {
  ParamVector plus = w;
  ParamVector minus = w;
  plus[coord] += h;
  minus[coord] -= h;
  return (lidfl::loss(spec, plus, batch) - lidfl::loss(spec, minus, batch)) / (2.0 * h);
}

/// Calls fn on every vector of `parts` non-negative counts summing to total.
inline void for_each_composition(std::size_t total, std::size_t parts,
                                 const std::function<void(const std::vector<std::size_t>&)>& fn) {
  std::vector<std::size_t> c(parts, 0);
  std::function<void(std::size_t, std::size_t)> rec = [&](std::size_t i, std::size_t left) {
    if (i + 1 == parts) {
      c[i] = left;
      fn(c);
      return;
    }
    for (std::size_t v = 0; v <= left; ++v) {
      c[i] = v;
      rec(i + 1, left - v);
    }
  };
  rec(0, total);
}

}  // namespace oracle
