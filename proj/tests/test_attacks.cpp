#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "lidfl/attacks.hpp"

using namespace lidfl;
using testing_helpers::random_vector;

namespace {

ParamVector naive_mean(const std::vector<ParamVector>& us) {
  ParamVector out(us.front().size(), 0.0);
  for (const auto& u : us) axpy_inplace(1.0, u, out);
  return vec_scale(1.0 / static_cast<double>(us.size()), out);
}

}  // namespace

TEST_CASE("omniscient view statistics") {
  const OmniscientView one = make_omniscient_view({ParamVector{1.0, -2.0}});
  CHECK(one.mean == ParamVector{1.0, -2.0});
  CHECK(one.std == ParamVector{0.0, 0.0});

  const OmniscientView same = make_omniscient_view({ParamVector{3.0, 1.0}, ParamVector{3.0, 1.0}, ParamVector{3.0, 1.0}});
  CHECK(same.std == ParamVector{0.0, 0.0});

  const OmniscientView two = make_omniscient_view({ParamVector{0.0, 1.0}, ParamVector{2.0, 1.5}});
  CHECK(two.mean[0] == doctest::Approx(1.0));
  CHECK(two.mean[1] == doctest::Approx(1.25));
  CHECK(two.std[0] == doctest::Approx(1.0));
  CHECK(two.std[1] == doctest::Approx(0.25));

  CHECK_THROWS_AS(make_omniscient_view({}), ConfigError);
  CHECK_THROWS_AS(make_omniscient_view({ParamVector{1.0}, ParamVector{1.0, 2.0}}), DimensionError);
}

TEST_CASE("epr scales the honest mean") {
  const OmniscientView view = make_omniscient_view({ParamVector{3.0, 0.0}});
  const ParamVector u = craft_epr(view, 2, 5);
  CHECK(u[0] == doctest::Approx(-2.2).epsilon(1e-14));
  CHECK(u[1] == 0.0);
  CHECK(craft_epr(make_omniscient_view({ParamVector::zeros(3)}), 2, 5) == ParamVector::zeros(3));
  CHECK_THROWS_AS(craft_epr(view, 5, 5), ConfigError);

  RngStream rng(1, "epr");
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<ParamVector> hs;
    const std::size_t k = 1 + rng.below(10);
    for (std::size_t i = 0; i < k; ++i) hs.push_back(random_vector(4, 1.0, rng));
    const OmniscientView v = make_omniscient_view(hs);
    CHECK(dot(craft_epr(v, k, k + 1 + rng.below(10)), v.mean) <= 0.0);
  }
}

TEST_CASE("gauss uses the spread of the client's own update") {
  RngStream rng(2, "gauss");
  CHECK(craft_gauss(ParamVector(5, 0.7), rng).update == ParamVector::zeros(5));

  RngStream src(3, "src");
  ParamVector u(10000);
  for (double& v : u) v = 2.0 * src.normal() + 5.0;
  const double sigma = mean_std(u.span()).std;
  const GaussCraft g = craft_gauss(u, rng);
  CHECK_FALSE(g.degenerate_sigma);
  const MeanStd ms = mean_std(g.update.span());
  CHECK(std::abs(ms.std - sigma) / sigma <= 0.03);
  CHECK(std::abs(ms.mean) <= 0.1);

  RngStream a(4, "g");
  RngStream b(4, "g");
  CHECK(craft_gauss(u, a).update == craft_gauss(u, b).update);

  const GaussCraft scalar = craft_gauss(ParamVector{-3.0}, rng);
  CHECK(scalar.degenerate_sigma);
  CHECK_THROWS(craft_gauss(ParamVector{1.0, NAN}, rng));
}

TEST_CASE("lie shifts the mean by z standard deviations") {
  const OmniscientView view = make_omniscient_view({ParamVector{0.5, 0.75}, ParamVector{1.5, 1.25}});
  CHECK(craft_lie(view, 0.0) == view.mean);
  const ParamVector u = craft_lie(view, 2.0);
  CHECK(u[0] == doctest::Approx(0.0));
  CHECK(u[1] == doctest::Approx(0.5));
}

TEST_CASE("omn hits the target mean exactly") {
  RngStream rng(5, "omn");
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t k = 1 + rng.below(12);
    const std::size_t m = k + 1 + rng.below(12);
    std::vector<ParamVector> hs;
    for (std::size_t i = 0; i < k; ++i) hs.push_back(random_vector(3, 2.0, rng));
    const OmniscientView view = make_omniscient_view(hs);
    const ParamVector target = rng.bernoulli(0.5) ? omn_default_target(view, 1.0) : random_vector(3, 1.0, rng);
    const ParamVector adv = craft_omn(view, k, m, target);
    std::vector<ParamVector> all = hs;
    for (std::size_t i = k; i < m; ++i) all.push_back(adv);
    const ParamVector got = naive_mean(all);
    for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(got[c] - target[c]) <= 1e-9);
  }

  const OmniscientView view = make_omniscient_view({ParamVector{1.5, 1.5}, ParamVector{1.5, 1.5}});
  const ParamVector u = craft_omn(view, 2, 5, ParamVector{0.0, 0.0});
  CHECK(u[0] == doctest::Approx(-1.0));
  CHECK(u[1] == doctest::Approx(-1.0));

  // k = m - 1: the single attacker carries the whole correction.
  const OmniscientView v3 = make_omniscient_view({ParamVector{1.0}, ParamVector{2.0}, ParamVector{3.0}});
  CHECK(craft_omn(v3, 3, 4, omn_default_target(v3, 1.0))[0] == doctest::Approx(-14.0));

  CHECK_THROWS_AS(craft_omn(v3, 3, 3, ParamVector{0.0}), ConfigError);
  CHECK_THROWS_AS(craft_omn(v3, 2, 5, ParamVector{0.0}), ConfigError);
}

TEST_CASE("sign flip") {
  CHECK(craft_sf(ParamVector{1.0, -2.0, 0.0}) == ParamVector{-1.0, 2.0, -0.0});
  RngStream rng(6, "sf");
  for (int i = 0; i < 50; ++i) {
    const ParamVector u = random_vector(7, 3.0, rng);
    CHECK(craft_sf(craft_sf(u)) == u);
  }
}

TEST_CASE("attack kinds parse and need the right view") {
  for (const char* name : {"none", "epr", "gauss", "lf", "lie", "omn", "sf"}) {
    CHECK(to_string(parse_attack_kind(name)) == name);
  }
  CHECK_THROWS_AS(parse_attack_kind("alie"), ConfigError);
  CHECK(needs_omniscient_view(AttackKind::epr));
  CHECK(needs_omniscient_view(AttackKind::lie));
  CHECK(needs_omniscient_view(AttackKind::omn));
  CHECK_FALSE(needs_omniscient_view(AttackKind::sf));
  CHECK_FALSE(needs_omniscient_view(AttackKind::gauss));
  CHECK_FALSE(needs_omniscient_view(AttackKind::lf));
}
