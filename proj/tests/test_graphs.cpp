#include <algorithm>
#include <set>

#include "bfs_oracle.hpp"
#include "doctest.h"
#include "toppler/errors.hpp"
#include "toppler/graphs.hpp"

using namespace toppler;
using toppler::testing::bfs_distances;

namespace {

const char* kFamilies[] = {"lattice:d=1", "lattice:d=2",  "lattice:d=3",     "comb",
                           "dary:d=2",    "dary:d=3",     "regtree:d=2",     "prodtree:d=2,k=1",
                           "prodtree:d=3,k=2", "gw:dist=1:0.5,2:0.5;seed=42;depth=10", "lamplighter"};

std::set<VertexKey> as_set(const std::vector<VertexKey>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST_CASE("lattice neighbors of the Z^2 origin") {
  auto g = make_graph("lattice:d=2");
  auto nb = g->neighbors({0, 0});
  CHECK(as_set(nb) == std::set<VertexKey>{{1, 0}, {-1, 0}, {0, 1}, {0, -1}});
  CHECK(std::is_sorted(nb.begin(), nb.end()));
}

TEST_CASE("comb teeth have no horizontal edges") {
  auto g = make_graph("comb");
  CHECK(as_set(g->neighbors({2, 3})) == std::set<VertexKey>{{2, 2}, {2, 4}});
  CHECK(g->neighbors({2, 0}).size() == 4);
  CHECK(g->distance({2, 3}) == 5);
}

TEST_CASE("lamplighter identity has eight neighbors") {
  auto g = make_graph("lamplighter");
  auto nb = g->neighbors(g->origin());
  CHECK(nb.size() == 8);
  CHECK(as_set(nb).size() == 8);
  CHECK(g->distance(g->decode("{3}@0")) == 6);
}

TEST_CASE("closed-form distances") {
  CHECK(make_graph("lattice:d=3")->distance({1, -2, 0}) == 3);
  auto t = make_graph("dary:d=3");
  CHECK(t->distance(t->decode("/2/0/1")) == 3);
  auto p = make_graph("prodtree:d=3,k=2");
  CHECK(p->distance(p->decode("(/3/1,/0)")) == 3);
}

TEST_CASE("distance agrees with breadth-first search on every family") {
  for (auto spec : kFamilies) {
    CAPTURE(spec);
    auto g = make_graph(spec);
    const std::int64_t radius = std::string_view(spec) == "lamplighter" ? 8 : 6;
    auto bfs = bfs_distances(*g, radius);
    for (auto& [v, d] : bfs) {
      CAPTURE(g->encode(v));
      REQUIRE(g->distance(v) == d);
    }
  }
}

TEST_CASE("adjacency is symmetric and degrees are regular where expected") {
  Rng rng(7);
  for (auto spec : kFamilies) {
    CAPTURE(spec);
    auto g = make_graph(spec);
    auto w = g->walker();
    for (int i = 0; i < 1000; ++i) {
      w->reset();
      const int len = std::uniform_int_distribution<int>(0, 12)(rng);
      for (int s = 0; s < len; ++s) w->step(rng);
      auto v = w->key();
      REQUIRE(g->valid(v));
      auto nb = g->neighbors(v);
      for (auto& u : nb) {
        auto back = g->neighbors(u);
        REQUIRE(std::find(back.begin(), back.end(), v) != back.end());
      }
      const auto& sp = g->spec();
      switch (sp.family) {
        case Family::Lattice: CHECK(nb.size() == static_cast<std::size_t>(2 * sp.d)); break;
        case Family::Comb: CHECK(nb.size() == (v.c[1] == 0 ? 4u : 2u)); break;
        case Family::ProductTree: CHECK(nb.size() == static_cast<std::size_t>(sp.d + sp.k + 2)); break;
        case Family::Lamplighter: CHECK(nb.size() == 8u); break;
        case Family::RegularTree: CHECK(nb.size() == static_cast<std::size_t>(sp.d + 1)); break;
        case Family::DaryTree: CHECK(nb.size() == static_cast<std::size_t>(v.c.empty() ? sp.d : sp.d + 1)); break;
        default: break;
      }
    }
  }
}

TEST_CASE("walker distance matches the graph's distance") {
  Rng rng(11);
  for (auto spec : kFamilies) {
    CAPTURE(spec);
    auto g = make_graph(spec);
    auto w = g->walker();
    for (int s = 0; s < 300; ++s) {
      w->step(rng);
      REQUIRE(w->distance() == g->distance(w->key()));
    }
  }
}

TEST_CASE("balls") {
  CHECK(ball_volume(*make_graph("lattice:d=2"), 2) == 5);
  CHECK(ball_volume(*make_graph("comb"), 3) == 13);
  CHECK(ball_volume(*make_graph("dary:d=2"), 4) == 15);
  CHECK(ball(*make_graph("lattice:d=2"), 0).empty());
  for (auto spec : kFamilies) {
    CAPTURE(spec);
    auto g = make_graph(spec);
    auto bfs = bfs_distances(*g, 5);
    std::set<VertexKey> expect;
    for (auto& [v, d] : bfs)
      if (d < 4) expect.insert(v);
    CHECK(as_set(ball(*g, 4)) == expect);
  }
  CHECK_THROWS_AS(ball(*make_graph("lattice:d=2"), 50, 100), ResourceLimit);
}

TEST_CASE("vertex table ball matches free ball") {
  auto g = make_graph("comb");
  VertexTable t(g);
  auto ids = t.ball(5);
  auto keys = ball(*g, 5);
  REQUIRE(ids.size() == keys.size());
  for (std::size_t i = 0; i < ids.size(); ++i) CHECK(t.key(ids[i]) == keys[i]);
}

TEST_CASE("encode/decode round trip and invalid keys") {
  for (auto spec : kFamilies) {
    CAPTURE(spec);
    auto g = make_graph(spec);
    for (auto& v : ball(*g, 4)) CHECK(g->decode(g->encode(v)) == v);
  }
  CHECK_THROWS_AS(make_graph("dary:d=2")->neighbors({5}), StructuralError);
  CHECK_THROWS_AS(make_graph("lamplighter")->neighbors({0, 3, 1}), StructuralError);
  CHECK_THROWS_AS(make_graph("lattice:d=2")->neighbors({1}), StructuralError);
}

TEST_CASE("graph spec parsing") {
  CHECK(GraphSpec::parse("prodtree:d=3,k=2").to_string() == "prodtree:d=3,k=2");
  CHECK_THROWS_AS(GraphSpec::parse("prodtree:d=1,k=1"), ParameterError);
  CHECK_THROWS_AS(GraphSpec::parse("prodtree:d=2,k=3"), ParameterError);
  CHECK_THROWS_AS(GraphSpec::parse("dary:d=1"), ParameterError);
  CHECK_THROWS_AS(GraphSpec::parse("hexagon"), StructuralError);
  CHECK_THROWS_AS(GraphSpec::parse("gw:dist=0:0.5,2:0.4;seed=1"), ParameterError);
  CHECK_THROWS_AS(GraphSpec::parse("gw:dist=1:1;seed=1"), ParameterError);
  CHECK_THROWS_AS(GraphSpec::parse("gw:dist=0:0.5,2:0.5;seed=42"), ParameterError);  // critical, m = 1
  auto gw = GraphSpec::parse("gw:dist=0:0.25,2:0.75;seed=42");
  CHECK(gw.seed == 42);
  CHECK(gw.offspring.law.size() == 2);
}

TEST_CASE("galton-watson materialization") {
  auto binary = gw_materialize(Offspring{{{2, 1.0}}}, 3, 5);
  CHECK(binary->level_sizes(5) == std::vector<std::size_t>{1, 2, 4, 8, 16, 32});

  Offspring mixed{{{1, 0.5}, {2, 0.5}}};
  auto a = gw_materialize(mixed, 42, 10);
  auto b = gw_materialize(mixed, 42, 10);
  CHECK(a->level_sizes(10) == b->level_sizes(10));

  Offspring thin{{{0, 0.6}, {3, 0.4}}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto t = gw_materialize(thin, seed, 8);
    for (auto s : t->level_sizes(8)) CHECK(s > 0);
  }
  CHECK_THROWS_AS(gw_materialize(Offspring{{{2, 0.7}}}, 1, 3), ParameterError);
}

TEST_CASE("galton-watson shape does not depend on access order") {
  Offspring law{{{1, 0.3}, {2, 0.4}, {3, 0.3}}};
  auto a = gw_materialize(law, 9, 2);
  auto b = gw_materialize(law, 9, 2);
  // Expand a deep node in `a` first, then compare level profiles.
  std::int64_t v = 0;
  for (int i = 0; i < 6; ++i) {
    auto kids = a->children(v);
    if (kids.empty()) break;
    v = kids.back();
  }
  CHECK(a->level_sizes(7) == b->level_sizes(7));
}
