#pragma once

#include <map>
#include <set>

#include "toppler/graphs.hpp"

namespace toppler::testing {

// r-step law of the walk from the origin killed on leaving `region`, by
// repeated convolution over an ordered map.
inline std::map<VertexKey, double> killed_walk_law(const Graph& g, const std::vector<VertexKey>& region, int rounds) {
  std::set<VertexKey> inside(region.begin(), region.end());
  std::map<VertexKey, double> law{{g.origin(), 1.0}};
  for (int r = 0; r < rounds; ++r) {
    std::map<VertexKey, double> next;
    for (const auto& [x, m] : law) {
      if (!inside.contains(x)) {
        next[x] += m;
        continue;
      }
      auto nb = g.neighbors(x);
      for (const auto& y : nb) next[y] += m / static_cast<double>(nb.size());
    }
    law = std::move(next);
  }
  return law;
}

}  // namespace toppler::testing
