#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toppler/graphs.hpp"
#include "toppler/mass.hpp"

namespace toppler {

inline constexpr std::size_t kOracleMaxBall = 12;
inline constexpr int kOracleMaxDepth = 12;

struct OracleResult {
  std::optional<int> moves;  // absent when nothing within depth_cap reaches p
  std::vector<VertexKey> witness;
  std::uint64_t nodes = 0;
  std::size_t ball_size = 0;
  int depth_cap = 0;
};

// A search state: masses on B_n in (distance, key) order, reduced, plus the
// mass already outside. The string form is the memo key.
struct SearchNode {
  std::vector<Rational> inside;
  Rational outside;
  int depth = 0;

  std::string canonical() const;
};

// Fewest toppling moves taking mass >= p outside B_n. Only full topples at
// vertices of B_n are searched; mass outside B_n is never moved again.
OracleResult min_moves_exact(const ExactMassDist& mu0, std::int64_t n, const Rational& p, int depth_cap);
OracleResult min_moves_exact(const GraphPtr& g, std::int64_t n, const Rational& p, int depth_cap);

// Same question by plain enumeration of every full-topple sequence, with no
// memo. Used to check the memoized search; tighter guard on depth.
OracleResult min_moves_exhaustive(const ExactMassDist& mu0, std::int64_t n, const Rational& p, int depth_cap);
OracleResult min_moves_exhaustive(const GraphPtr& g, std::int64_t n, const Rational& p, int depth_cap);

}  // namespace toppler
