#include <cmath>
#include <numbers>

#include "doctest.h"
#include "killed_walk_oracle.hpp"
#include "toppler/diagnostics.hpp"
#include "toppler/strategies.hpp"

using namespace toppler;
using toppler::testing::killed_walk_law;

namespace {

double law_error(const MassDist& mu, const std::map<VertexKey, double>& law) {
  double err = 0;
  for (const auto& [k, m] : law) err = std::max(err, std::abs(mu.at(k) - m));
  mu.for_each([&](VertexId v, double m) {
    if (!law.contains(mu.table().key(v))) err = std::max(err, m);
  });
  return err;
}

double greedy_bound(int d, double p, std::int64_t n) {
  double fact = 1;
  for (int i = 2; i <= d; ++i) fact *= i;
  return std::pow(2.0, d) / ((1 - p) * fact) * std::pow(static_cast<double>(n), d + 2);
}

}  // namespace

TEST_CASE("greedy on the line") {
  auto z = make_graph("lattice:d=1");
  CHECK(greedy(z, 1, 0.5).moves == 1);
  auto r = greedy(z, 2, 0.5);
  CHECK(r.moves == 3);
  CHECK(r.terminated);
  CHECK(r.dist.mass_outside(2) >= 0.5 - 1e-9);
  CHECK_THROWS_AS(greedy(z, 0, 0.5), ParameterError);
  CHECK_THROWS_AS(greedy(z, 3, 1.0), ParameterError);
}

TEST_CASE("greedy respects the volume bound") {
  struct Case {
    int d;
    std::int64_t n;
    double p;
  };
  for (auto c : {Case{1, 8, 0.5}, Case{1, 20, 0.9}, Case{2, 16, 0.5}, Case{2, 10, 0.25}, Case{3, 6, 0.5}}) {
    CAPTURE(c.d);
    CAPTURE(c.n);
    for (auto tie : {TieRule::Lexicographic, TieRule::Symmetric}) {
      GreedyOptions o;
      o.tie = tie;
      auto r = greedy(make_graph("lattice:d=" + std::to_string(c.d)), c.n, c.p, o);
      REQUIRE(r.terminated);
      CHECK(static_cast<double>(r.moves) < greedy_bound(c.d, c.p, c.n));
    }
  }
}

TEST_CASE("second moment along a greedy trace") {
  GreedyOptions o;
  o.trace = true;
  auto r = greedy(make_graph("lattice:d=2"), 6, 0.5, o);
  double sum = 0;
  for (auto& rec : r.dist.trace().records) sum += rec.mass;
  CHECK(std::abs(second_moment(r.dist) - sum) < 1e-9);
  CHECK(r.dist.trace().records.size() == r.moves);
  for (std::size_t i = 0; i < r.dist.trace().records.size(); ++i) CHECK(r.dist.trace().records[i].index == i + 1);
}

TEST_CASE("greedy on the binary tree grows like 2^n") {
  auto g = make_graph("dary:d=2");
  for (int n = 6; n <= 14; ++n) {
    auto r = greedy(g, n, 0.5);
    const double ratio = static_cast<double>(r.moves) / std::pow(2.0, n);
    CHECK(ratio >= 0.1);
    CHECK(ratio <= 10);
    CHECK(static_cast<double>(r.moves) >= 0.49 * std::pow(2.0, n - 1));
  }
}

TEST_CASE("greedy is reproducible and respects its budget") {
  auto g = make_graph("lattice:d=2");
  auto a = greedy(g, 8, 0.5), b = greedy(g, 8, 0.5);
  CHECK(a.moves == b.moves);
  CHECK(max_discrepancy(a.dist, b.dist) == 0.0);
  GreedyOptions o;
  o.budget = 100;
  auto c = greedy(g, 8, 0.5, o);
  CHECK(c.budget_exhausted);
  CHECK(!c.terminated);
  CHECK(c.moves == 100);
}

TEST_CASE("symmetric sweeps keep the lattice symmetric") {
  GreedyOptions o;
  o.tie = TieRule::Symmetric;
  auto r = greedy_sweeps(make_graph("lattice:d=2"), 2000, o);
  CHECK(r.rounds == 2000);
  r.dist.for_each([&](VertexId v, double m) {
    auto k = r.dist.table().key(v);
    CHECK(r.dist.at(VertexKey{-k.c[0], k.c[1]}) == doctest::Approx(m).epsilon(1e-9));
    CHECK(r.dist.at(VertexKey{k.c[1], k.c[0]}) == doctest::Approx(m).epsilon(1e-9));
  });
}

TEST_CASE("round robin reproduces the killed walk") {
  auto z = make_graph("lattice:d=1");
  auto r = round_robin_killed_rw(z, ball(*z, 2), 2);
  CHECK(r.dist.at(VertexKey{-2}) == 0.25);
  CHECK(r.dist.at(VertexKey{0}) == 0.5);
  CHECK(r.dist.at(VertexKey{2}) == 0.25);
  CHECK(r.moves == 3);

  auto none = round_robin_killed_rw(make_graph("lattice:d=2"), ball(*make_graph("lattice:d=2"), 3), 0);
  CHECK(none.moves == 0);
  CHECK(none.dist.at(VertexKey{0, 0}) == 1.0);

  for (auto [spec, n] : {std::pair{"lattice:d=1", 8}, {"lattice:d=2", 4}, {"lattice:d=2", 5}, {"dary:d=2", 4}, {"comb", 5}}) {
    CAPTURE(spec);
    auto g = make_graph(spec);
    auto region = ball(*g, n);
    for (int rounds : {1, 5, 8, 16}) {
      auto law = killed_walk_law(*g, region, rounds);
      for (auto engine : {Engine::Kernel, Engine::Reference}) {
        RoundRobinOptions o;
        o.engine = engine;
        auto res = round_robin_killed_rw(g, region, rounds, o);
        CHECK(law_error(res.dist, law) <= 1e-12);
      }
    }
  }
}

TEST_CASE("kernel and reference engines agree on moves and mass") {
  auto g = make_graph("comb");
  auto region = comb_region(16, 2.0);
  RoundRobinOptions k, ref;
  ref.engine = Engine::Reference;
  auto a = round_robin_killed_rw(g, region, 40, k);
  auto b = round_robin_killed_rw(g, region, 40, ref);
  CHECK(a.moves == b.moves);
  CHECK(max_discrepancy(a.dist, b.dist) <= 1e-12);
  CHECK_THROWS_AS(round_robin_killed_rw(g, {VertexKey{1, 0}}, 3), ParameterError);
}

TEST_CASE("mass out of a region within the exit-time bound") {
  auto z = make_graph("lattice:d=1");
  auto region = ball(*z, 2);
  auto r = rw_until_mass_out(z, region, 0.5, 1000);
  REQUIRE(r.terminated);
  const double et = exact_exit_time(*z, region);
  CHECK(et == doctest::Approx(4.0));
  CHECK(static_cast<double>(r.moves) <= 1 / 0.5 * 3 * et);

  CHECK(rw_until_mass_out(z, ball(*z, 1), 1.0, 10).moves == 1);

  auto tree = make_graph("dary:d=2");
  auto b3 = ball(*tree, 3);
  auto t = rw_until_mass_out(tree, b3, 0.5, 1000);
  REQUIRE(t.terminated);
  auto mc = mc_exit_time(*tree, b3, 100000, 11);
  CHECK(static_cast<double>(t.moves) <= 1 / 0.5 * static_cast<double>(b3.size()) * (mc.estimate + 3 * mc.std_error));

  RoundRobinOptions o;
  auto capped = rw_until_mass_out(z, ball(*z, 6), 0.9, 3, o);
  CHECK(capped.budget_exhausted);
}

TEST_CASE("comb strategy") {
  auto small = comb_strategy(4, 0.1, 2.0, 10000);
  CHECK(small.terminated);
  auto r = comb_strategy(16, 0.5, 2.0, 100000);
  REQUIRE(r.terminated);
  CHECK(r.dist.mass_outside(16) >= 0.5 - 1e-9);
  CHECK(static_cast<double>(r.moves) <= 10.0 * static_cast<double>(comb_region(16, 2.0).size()) * 256);

  auto wide = comb_strategy(64, 0.5, 3.0, 1000000);
  auto narrow = comb_strategy(64, 0.5, 1.0, 1000000);
  CHECK(wide.stranded <= narrow.stranded);

  auto tight = comb_strategy(64, 0.9, 0.3, 1000000);
  CHECK(tight.unreachable);
  CHECK(tight.stranded > 0.1);
}

TEST_CASE("restricted walk on a ball or the comb rectangle matches round robin") {
  auto g = make_graph("lattice:d=2");
  auto a = restricted_rw(g, ball(*g, 4), 9);
  auto b = round_robin_killed_rw(g, ball(*g, 4), 9);
  CHECK(max_discrepancy(a.dist, b.dist) == 0.0);
  CHECK(a.moves == b.moves);

  auto c = restricted_rw(make_graph("comb"), comb_region(16, 2.0), 50);
  auto d = round_robin_killed_rw(make_graph("comb"), comb_region(16, 2.0), 50);
  CHECK(max_discrepancy(c.dist, d.dist) == 0.0);
}

TEST_CASE("divisible sandpile small cases") {
  auto one = sandpile_stabilize(2, 1.0, 1e-8);
  CHECK(one.moves == 0);
  CHECK(one.occupied().size() == 1);

  auto four = sandpile_stabilize(2, 4.0, 1e-8);
  CHECK(four.moves == 1);
  CHECK(four.at(std::vector<std::int64_t>{0, 0}) == 1.0);
  for (auto x : {std::vector<std::int64_t>{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) CHECK(four.at(x) == 0.75);
  CHECK(four.occupied() == std::vector<std::vector<std::int64_t>>{{0, 0}});

  SandpileOptions big;
  big.threshold = 1.5;
  auto still = sandpile_stabilize(3, 1.0, 1e-8, big);
  CHECK(still.moves == 0);
}

TEST_CASE("divisible sandpile is order independent") {
  SandpileOptions rev;
  rev.order = SweepOrder::Reversed;
  for (double m : {50.0, 700.0}) {
    auto a = sandpile_stabilize(2, m, 1e-13), b = sandpile_stabilize(2, m, 1e-13, rev);
    REQUIRE(a.half_width == b.half_width);
    double diff = 0;
    for (std::size_t i = 0; i < a.mass.size(); ++i) diff = std::max(diff, std::abs(a.mass[i] - b.mass[i]));
    CHECK(diff <= 1e-10);
  }
}

TEST_CASE("divisible sandpile fills a disc") {
  auto r = sandpile_stabilize(2, 2000.0, 1e-8);
  const double rad = std::sqrt(2000.0 / std::numbers::pi);
  CHECK(rad - r.inner_radius() <= 2);
  CHECK(r.outer_radius() - rad <= 2);
  double total = 0;
  for (double m : r.mass) total += m;
  CHECK(total == doctest::Approx(2000.0).epsilon(1e-12));
}

TEST_CASE("smoothing to a near-uniform measure") {
  CHECK(closed_ball_count(1, 5) == 11);
  CHECK(closed_ball_count(2, 1) == 5);
  CHECK(closed_ball_count(2, std::sqrt(2.0)) == 9);

  auto mu = smooth_to_uniform(2, 40, 0.5, 1e-8);
  const double cap = 2.0 / static_cast<double>(closed_ball_count(2, 20));
  mu.for_each([&](VertexId v, double m) {
    CHECK(m <= cap);
    const auto& k = mu.table().key(v).c;
    CHECK(std::hypot(double(k[0]), double(k[1])) <= 20);
  });
  CHECK(mu.total() == doctest::Approx(1.0).epsilon(1e-12));

  auto line = smooth_to_uniform(1, 10, 0.5, 1e-8);
  line.for_each([&](VertexId v, double m) {
    CHECK(m <= 2.0 / 11);
    CHECK(std::abs(line.table().key(v).c[0]) <= 5);
  });

  CHECK_THROWS_AS(smooth_to_uniform(2, 3, 0.5, 1e-8), ParameterError);
  CHECK_THROWS_AS(smooth_to_uniform(2, 40, 1.5, 1e-8), ParameterError);
}

TEST_CASE("typical sets") {
  CHECK(r_of_n(*make_graph("dary:d=2"), 7) == 3);
  CHECK(r_of_n(*make_graph("dary:d=2"), 6) == 2);

  auto g = make_graph("prodtree:d=2,k=2");
  auto cf = closed_forms(2, 2);
  const std::int64_t n = 8;
  const double eps = 0.5;
  const auto t_star = static_cast<std::uint64_t>(std::ceil((1 + eps) * n / cf.ell));
  auto u = build_Utn(g, n, eps, t_star, 20000, 3);
  CHECK(!u.insufficient);
  CHECK(u.support.size() < ball_volume(*g, n));
  for (auto& k : u.support) CHECK(g->distance(k) < n);

  // A vacuous window keeps every site seen inside B_n.
  auto all = build_Utn(g, 4, 1000.0, 12, 2000, 5);
  std::set<VertexKey> got(all.support.begin(), all.support.end());
  auto w = g->walker();
  for (std::uint64_t s = 0; s < 2000; ++s) {
    Rng rng = substream(5, s);
    w->reset();
    for (int t = 1; t <= 12; ++t) {
      w->step(rng);
      if (w->distance() < 4) CHECK(got.contains(w->key()));
    }
  }
  CHECK_THROWS_AS(build_Utn(make_graph("dary:d=2"), 4, 0.5, 10, 10, 1), ParameterError);
}

TEST_CASE("restricted walk on the typical set moves the mass out") {
  auto g = make_graph("prodtree:d=2,k=1");
  auto cf = closed_forms(2, 1);
  const std::int64_t n = 8;
  const double eps = 0.5;
  const auto rounds = static_cast<std::uint64_t>(std::ceil((1 + eps) * n / cf.ell));
  auto u = build_Utn(g, n, eps, rounds, 100000, 21);
  auto r = restricted_rw(g, u.support, rounds);
  CHECK(r.dist.mass_outside(n) >= 0.5);
}

TEST_CASE("greedy from a given start") {
  auto g = make_graph("lattice:d=2");
  auto a = greedy(g, 10, 0.5);
  auto b = greedy_from(MassDist::unit(g), 10, 0.5);
  CHECK(a.moves == b.moves);
  CHECK(max_discrepancy(a.dist, b.dist) == 0.0);

  auto mu = smooth_to_uniform(2, 16, 0.5, 1e-8);
  const auto smoothing = mu.moves();
  CHECK(smoothing > 0);
  auto r = greedy_from(std::move(mu), 16, 0.5);
  REQUIRE(r.terminated);
  CHECK(r.moves > smoothing);
  CHECK(r.dist.mass_outside(16) >= 0.5 - 1e-9);
}
