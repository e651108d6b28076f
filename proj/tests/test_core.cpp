#include <doctest.h>

#include <cmath>
#include <set>

#include "lidfl/core.hpp"

using namespace lidfl;

TEST_CASE("vec_axpy examples") {
  CHECK(vec_axpy(0.0, ParamVector{1, 2}, ParamVector{3, 4}) == ParamVector{3, 4});
  CHECK(vec_axpy(1.0, ParamVector{1, 2}, ParamVector{0, 0}) == ParamVector{1, 2});
  const ParamVector epr = vec_axpy(-1.1 * 14.0 / 21.0, ParamVector{3, 0}, ParamVector{0, 0});
  CHECK(epr[0] == doctest::Approx(-2.2).epsilon(1e-15));
  CHECK(epr[1] == 0.0);
}

TEST_CASE("vec_axpy leaves inputs untouched and rejects bad input") {
  const ParamVector x{1, 2};
  const ParamVector y{5, 6};
  const ParamVector out = vec_axpy(2.0, x, y);
  CHECK(out == ParamVector{7, 10});
  CHECK(x == ParamVector{1, 2});
  CHECK(y == ParamVector{5, 6});
  CHECK_THROWS_AS(vec_axpy(1.0, ParamVector{1, 2}, ParamVector{1, 2, 3}), DimensionError);
  CHECK_THROWS(vec_axpy(NAN, x, y));
}

TEST_CASE("l2_norm examples") {
  CHECK(l2_norm(ParamVector{0, 0, 0}) == 0.0);
  CHECK(l2_norm(ParamVector{3, 4}) == 5.0);
  CHECK(l2_norm(ParamVector{1, 1, 1, 1}) == 2.0);
}

TEST_CASE("vector helpers") {
  const ParamVector a{1, -2, 3};
  const ParamVector b{4, 0, -1};
  CHECK(vec_add(a, b) == ParamVector{5, -2, 2});
  CHECK(vec_sub(a, b) == ParamVector{-3, -2, 4});
  CHECK(vec_scale(-2.0, a) == ParamVector{-2, 4, -6});
  CHECK(dot(a, b) == 1.0);
  CHECK(squared_distance(a, b) == 9.0 + 4.0 + 16.0);
  CHECK(l2_distance(ParamVector{0, 0}, ParamVector{3, 4}) == 5.0);
  CHECK(ParamVector::zeros(3) == ParamVector{0, 0, 0});
  CHECK_FALSE(ParamVector{1, NAN}.all_finite());
  CHECK_THROWS_AS(dot(a, ParamVector{1}), DimensionError);
}

TEST_CASE("derive_stream replays identically") {
  RngStream a = derive_stream(42, "sampling");
  RngStream b = derive_stream(42, "sampling");
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct labels and seeds give distinct first draws") {
  int same_label = 0;
  int same_seed = 0;
  for (std::uint64_t s = 0; s < 1000; ++s) {
    if (derive_stream(s, "sampling").next_u64() == derive_stream(s, "data").next_u64()) ++same_label;
    if (derive_stream(s, "x").next_u64() == derive_stream(s + 1, "x").next_u64()) ++same_seed;
  }
  CHECK(same_label == 0);
  CHECK(same_seed == 0);
}

TEST_CASE("derived children are deterministic and independent of parent position") {
  RngStream parent(7, "root");
  const RngStream before = parent.derive("child");
  parent.next_u64();
  const RngStream after = parent.derive("child");
  CHECK(before.key() == after.key());
  CHECK(parent.derive(std::uint64_t{1}).key() != parent.derive(std::uint64_t{2}).key());
  CHECK(parent.derive("a").key() != parent.derive("b").key());
}

TEST_CASE("uniform, below and normal have the expected ranges and moments") {
  RngStream rng(3, "moments");
  double sum = 0.0;
  double sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
  }
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[rng.below(7)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 500);
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  CHECK(std::abs(sum / n) < 0.01);
  CHECK(std::abs(sq / n - 1.0) < 0.02);
  CHECK_THROWS(rng.below(0));
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.uniform(-2.0, 3.0);
    CHECK_UNARY(v >= -2.0);
    CHECK_UNARY(v < 3.0);
  }
}

TEST_CASE("shuffle is a permutation") {
  RngStream rng(5, "shuffle");
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[i] = i;
  rng.shuffle(v);
  std::set<int> s(v.begin(), v.end());
  CHECK(s.size() == 50);
  CHECK(*s.begin() == 0);
  CHECK(*s.rbegin() == 49);
}

TEST_CASE("mean_std uses the population convention") {
  const std::vector<double> x{1, 2, 3, 4};
  const MeanStd ms = mean_std(x);
  CHECK(ms.mean == 2.5);
  CHECK(ms.std == doctest::Approx(std::sqrt(1.25)));
  CHECK(sample_std(x) == doctest::Approx(std::sqrt(5.0 / 3.0)));
}
