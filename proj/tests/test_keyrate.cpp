#include <doctest.h>

#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "qkdnar/keyrate.hpp"

using namespace qkdnar;

TEST_CASE("anchor values and interpolation") {
  KeyRateTable t;
  CHECK(t.rate_for_distance(10) == doctest::Approx(23));
  CHECK(t.rate_for_distance(20) == doctest::Approx(13));
  CHECK(t.rate_for_distance(30) == doctest::Approx(7));
  CHECK(t.rate_for_distance(40) == doctest::Approx(3.5));
  CHECK(t.rate_for_distance(50) == doctest::Approx(1.9));
  CHECK(t.rate_for_distance(25) == doctest::Approx(10));
  CHECK(t.rate_for_distance(55) == 0.0);
  CHECK(t.rate_for_distance(0) == doctest::Approx(23));
  CHECK(t.rate_for_distance(4.5) == doctest::Approx(23));
  CHECK_THROWS(t.rate_for_distance(-1));
}

TEST_CASE("rate_for_distance matches the hand table everywhere") {
  KeyRateTable t;
  for (int i = 0; i <= 6000; ++i) {
    const double km = i * 0.01;
    REQUIRE(t.rate_for_distance(km) == doctest::Approx(oracle::rate(km)).epsilon(1e-12));
  }
}

TEST_CASE("rate is non-increasing in distance") {
  KeyRateTable t;
  double prev = t.rate_for_distance(0);
  for (int i = 1; i <= 7000; ++i) {
    const double r = t.rate_for_distance(i * 0.01);
    REQUIRE(r <= prev);
    prev = r;
  }
}

TEST_CASE("bypass penalty per crossed node") {
  KeyRateTable t;
  auto one = fx::chain(2, 20.0);
  CHECK(ob_route_rate(t, fx::route(one, {0, 1})) == doctest::Approx(13));
  auto two = fx::chain(3, 10.0);
  CHECK(ob_route_rate(t, fx::route(two, {0, 1, 2})) == doctest::Approx(11.57));
  auto three = fx::chain(4, 10.0);
  CHECK(ob_route_rate(t, fx::route(three, {0, 1, 2, 3})) == doctest::Approx(5.5447));
}

TEST_CASE("relay chain rate is the bottleneck hop") {
  KeyRateTable t;
  std::vector<Node> nodes{{"A", 4}, {"B", 4}, {"C", 4}};
  Topology topo(nodes, {{0, 1, 10.0}, {1, 2, 30.0}}, 2);
  std::vector<Route> hops{fx::route(topo, {0, 1}), fx::route(topo, {1, 2})};
  CHECK(tr_chain_rate(t, hops) == doctest::Approx(7));

  std::vector<Route> single{fx::route(topo, {0, 1, 2})};
  CHECK(tr_chain_rate(t, single) == doctest::Approx(ob_route_rate(t, single[0])));

  Topology far(nodes, {{0, 1, 10.0}, {1, 2, 60.0}}, 2);
  std::vector<Route> broken{fx::route(far, {0, 1}), fx::route(far, {1, 2})};
  CHECK(tr_chain_rate(t, broken) == 0.0);

  CHECK_THROWS_AS(tr_chain_rate(t, std::vector<Route>{}), std::invalid_argument);
}

TEST_CASE("penalty bound and chain bound on random routes") {
  KeyRateTable t;
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto topo = fx::random_topology(rng, 6, 0.4, 2, 4, 3.0, 20.0);
    RouteCache cache(topo, 6);
    for (NodeId a = 0; a < topo.node_count(); ++a) {
      for (NodeId b = 0; b < topo.node_count(); ++b) {
        if (a == b) continue;
        for (const auto& r : cache.get(a, b)) {
          const double full = t.rate_for_distance(r.km);
          const double ob = ob_route_rate(t, r);
          REQUIRE(ob == doctest::Approx(oracle::ob_rate(r.km, r.crossings())));
          if (r.crossings() == 0)
            REQUIRE(ob == doctest::Approx(full));
          else if (full > 0)
            REQUIRE(ob < full);
          auto hops = per_link_hops(topo, r);
          double bound = 1e9;
          for (const auto& h : hops) bound = std::min(bound, t.rate_for_distance(h.km));
          REQUIRE(tr_chain_rate(t, hops) <= bound + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("custom tables are validated") {
  CHECK_THROWS(KeyRateTable({{10, 23}, {20, 30}}, 0.11));
  CHECK_THROWS(KeyRateTable({{20, 23}, {10, 13}}, 0.11));
  CHECK_THROWS(KeyRateTable({{10, 23}, {20, 13}}, 1.5));
  KeyRateTable ok({{10, 20}, {30, 10}}, 0.2);
  CHECK(ok.rate_for_distance(20) == doctest::Approx(15));
  CHECK(ok.max_reach_km() == 30);
}
