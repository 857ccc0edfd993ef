#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "toppler/random.hpp"

namespace toppler {

// Canonical vertex encoding. Interpretation depends on the family:
//   lattice      coordinates (x_1, ..., x_d)
//   comb         (x, y)
//   dary/regtree child indices from the root; the root is empty
//   prodtree     [len_1, path_1..., path_2...]
//   gw           [arena node index]
//   lamplighter  [y, on-lamp positions sorted ascending]
// Two keys are equal iff they denote the same vertex.
struct VertexKey {
  std::vector<std::int64_t> c;

  VertexKey() = default;
  VertexKey(std::initializer_list<std::int64_t> v) : c(v) {}
  explicit VertexKey(std::vector<std::int64_t> v) : c(std::move(v)) {}

  friend bool operator==(const VertexKey&, const VertexKey&) = default;
  friend auto operator<=>(const VertexKey& a, const VertexKey& b) { return a.c <=> b.c; }
};

struct VertexKeyHash {
  std::size_t operator()(const VertexKey& k) const noexcept {
    std::uint64_t h = 0x243f6a8885a308d3ULL ^ k.c.size();
    for (auto v : k.c) h = splitmix64(h ^ static_cast<std::uint64_t>(v));
    return static_cast<std::size_t>(h);
  }
};

enum class Family { Lattice, Comb, DaryTree, RegularTree, ProductTree, GaltonWatson, Lamplighter };

// Offspring law for Galton-Watson trees: (child count, probability) pairs.
struct Offspring {
  std::vector<std::pair<int, double>> law;

  double mean() const;
  void validate() const;  // throws ParameterError
};

// Family tag plus parameters; round-trips through the CLI spec string.
struct GraphSpec {
  Family family = Family::Lattice;
  int d = 2;
  int k = 0;
  Offspring offspring;
  std::uint64_t seed = 0;
  int gw_depth = 12;  // eager materialization depth for gw

  static GraphSpec parse(std::string_view text);
  std::string to_string() const;
  void validate() const;
  bool rooted_tree() const { return family == Family::DaryTree || family == Family::RegularTree || family == Family::GaltonWatson; }
  bool euclidean() const { return family == Family::Lattice || family == Family::Comb; }
};

// Random walk state held in a family-specific compact form.
class Walker {
 public:
  virtual ~Walker() = default;
  virtual void reset() = 0;  // back to the origin
  virtual void step(Rng& rng) = 0;
  virtual std::int64_t distance() const = 0;
  virtual VertexKey key() const = 0;
  // Cheap state hash; equal states give equal fingerprints.
  virtual std::uint64_t fingerprint() const { return VertexKeyHash{}(key()); }
};

class Graph {
 public:
  virtual ~Graph() = default;

  virtual const GraphSpec& spec() const = 0;
  virtual VertexKey origin() const = 0;
  virtual bool valid(const VertexKey& v) const = 0;
  // Sorted lexicographically; throws StructuralError on an invalid key.
  virtual std::vector<VertexKey> neighbors(const VertexKey& v) const = 0;
  virtual std::int64_t distance(const VertexKey& v) const = 0;
  virtual std::string encode(const VertexKey& v) const = 0;
  virtual VertexKey decode(std::string_view text) const = 0;
  virtual std::unique_ptr<Walker> walker() const;

  std::size_t degree(const VertexKey& v) const { return neighbors(v).size(); }
  void require_valid(const VertexKey& v) const;
};

using GraphPtr = std::shared_ptr<const Graph>;

GraphPtr make_graph(const GraphSpec& spec);
GraphPtr make_graph(std::string_view spec_text);

// Open ball {v : d(v, o) < n}, ordered by (distance, key). Breadth-first from
// the origin; throws ResourceLimit once more than `cap` vertices are found.
std::vector<VertexKey> ball(const Graph& g, std::int64_t n, std::size_t cap = 5'000'000);
std::size_t ball_volume(const Graph& g, std::int64_t n, std::size_t cap = 5'000'000);

// Galton-Watson arena. Children of a node are drawn from a stream derived
// from the node's ancestry, so the shape never depends on access order.
// Node indices are assigned in expansion order and are only meaningful
// within the arena that produced them.
class GwArena {
 public:
  struct Node {
    std::int64_t parent = -1;
    std::int32_t level = 0;
    std::uint64_t stream = 0;
    std::int64_t first_child = -1;
    std::int32_t child_count = -1;  // -1 until sampled
  };

  // Materializes breadth-first to `depth`; extinct samples are rejected and
  // redrawn with an advanced seed. `seed_used` records the accepted seed.
  GwArena(Offspring offspring, std::uint64_t seed, int depth);

  std::size_t size() const;
  Node node(std::int64_t index) const;
  // Samples children on first access.
  std::vector<std::int64_t> children(std::int64_t index) const;
  std::vector<std::size_t> level_sizes(int depth) const;
  std::uint64_t seed_used() const { return seed_used_; }
  const Offspring& offspring() const { return offspring_; }

 private:
  void expand_locked(std::int64_t index) const;
  bool try_build(std::uint64_t seed, int depth);

  Offspring offspring_;
  std::uint64_t seed_used_ = 0;
  mutable std::shared_mutex mu_;
  mutable std::vector<Node> nodes_;
};

std::shared_ptr<GwArena> gw_materialize(const Offspring& offspring, std::uint64_t seed, int depth);

using VertexId = std::uint32_t;

// Per-run interning of vertices into dense ids with cached adjacency and
// distance. Not thread-safe; each run owns its own table.
class VertexTable {
 public:
  explicit VertexTable(GraphPtr g);

  const Graph& graph() const { return *graph_; }
  const GraphPtr& graph_ptr() const { return graph_; }

  VertexId intern(const VertexKey& v);
  std::optional<VertexId> find(const VertexKey& v) const;
  VertexId origin() const { return 0; }

  std::span<const VertexId> neighbors(VertexId id);
  std::size_t degree(VertexId id) { return neighbors(id).size(); }
  std::int64_t distance(VertexId id) const { return dist_[id]; }
  const VertexKey& key(VertexId id) const { return keys_[id]; }
  std::size_t size() const { return keys_.size(); }

  std::vector<VertexId> ball(std::int64_t n, std::size_t cap = 5'000'000);

 private:
  GraphPtr graph_;
  std::vector<VertexKey> keys_;
  std::vector<std::int64_t> dist_;
  std::vector<std::vector<VertexId>> adj_;
  std::vector<char> expanded_;
  std::unordered_map<VertexKey, VertexId, VertexKeyHash> index_;
};

// Lamplighter word length from the identity; exposed for testing.
std::int64_t lamplighter_distance(std::span<const std::int64_t> lamps, std::int64_t y);
// What the lamplighter walker's fingerprint() returns in state (lamps, y).
std::uint64_t lamplighter_fingerprint(std::span<const std::int64_t> lamps, std::int64_t y);

}  // namespace toppler
