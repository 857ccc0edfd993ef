#pragma once

#include <deque>
#include <unordered_map>

#include "toppler/graphs.hpp"

namespace toppler::testing {

// Breadth-first distances from the origin using only neighbors(); exact for
// every vertex within `radius`.
inline std::unordered_map<VertexKey, std::int64_t, VertexKeyHash> bfs_distances(const Graph& g, std::int64_t radius) {
  std::unordered_map<VertexKey, std::int64_t, VertexKeyHash> dist;
  std::deque<VertexKey> q;
  dist[g.origin()] = 0;
  q.push_back(g.origin());
  while (!q.empty()) {
    auto v = q.front();
    q.pop_front();
    const auto dv = dist[v];
    if (dv == radius) continue;
    for (auto& u : g.neighbors(v)) {
      if (dist.contains(u)) continue;
      dist[u] = dv + 1;
      q.push_back(u);
    }
  }
  return dist;
}

}  // namespace toppler::testing
