#include "toppler/oracle.hpp"

#include <unordered_map>

namespace toppler {

std::string SearchNode::canonical() const {
  std::string s;
  for (const auto& m : inside) {
    s += m.get_str();
    s += '|';
  }
  return s;
}

namespace {

constexpr std::uint64_t kNodeCap = 20'000'000;
constexpr std::uint64_t kExhaustiveCap = 50'000'000;
constexpr int kExhaustiveMaxDepth = 9;

struct Instance {
  std::vector<VertexId> ball;
  std::vector<std::vector<int>> nbr;  // slot of each neighbour, -1 outside
  std::vector<long> degree;
  SearchNode start;
  Rational p;
};

Instance prepare(const ExactMassDist& mu0, std::int64_t n, const Rational& p, int depth_cap) {
  if (n < 1) throw ParameterError("oracle: n must be >= 1");
  if (p < 0) throw ParameterError("oracle: p must be >= 0");
  if (depth_cap < 0) throw ParameterError("oracle: depth cap must be >= 0");
  auto& table = mu0.table();
  Instance in;
  try {
    in.ball = table.ball(n, 4 * kOracleMaxBall);
  } catch (const ResourceLimit&) {
    throw ResourceLimit("oracle refuses: |B_" + std::to_string(n) + "| > " + std::to_string(4 * kOracleMaxBall) + " (max " +
                        std::to_string(kOracleMaxBall) + ")");
  }
  if (in.ball.size() > kOracleMaxBall || depth_cap > kOracleMaxDepth)
    throw ResourceLimit("oracle refuses: |B_n| = " + std::to_string(in.ball.size()) + " (max " + std::to_string(kOracleMaxBall) +
                        "), depth cap = " + std::to_string(depth_cap) + " (max " + std::to_string(kOracleMaxDepth) + ")");
  std::unordered_map<VertexId, int> slot;
  for (std::size_t i = 0; i < in.ball.size(); ++i) slot[in.ball[i]] = static_cast<int>(i);
  for (auto v : in.ball) {
    auto nb = table.neighbors(v);
    std::vector<int> s;
    for (auto u : nb) {
      auto it = slot.find(u);
      s.push_back(it == slot.end() ? -1 : it->second);
    }
    in.nbr.push_back(std::move(s));
    in.degree.push_back(static_cast<long>(nb.size()));
  }
  in.start.inside.resize(in.ball.size());
  Rational total(0);
  mu0.for_each([&](VertexId, const Rational& m) { total += m; });
  for (std::size_t i = 0; i < in.ball.size(); ++i) {
    in.start.inside[i] = mu0.at(in.ball[i]);
    in.start.inside[i].canonicalize();
    total -= in.start.inside[i];
  }
  in.start.outside = total;
  in.p = p;
  in.p.canonicalize();
  return in;
}

SearchNode topple(const Instance& in, const SearchNode& s, std::size_t i) {
  SearchNode next = s;
  Rational share = s.inside[i] / in.degree[i];
  next.inside[i] = 0;
  for (int j : in.nbr[i]) {
    if (j < 0)
      next.outside += share;
    else
      next.inside[j] += share;
  }
  next.depth = s.depth + 1;
  return next;
}

class Search {
 public:
  Search(const Instance& in, bool memo, std::uint64_t cap) : in_(in), memo_on_(memo), cap_(cap) {}

  // True if some sequence of at most `left` topples from s reaches p.
  bool reach(const SearchNode& s, int left) {
    if (++nodes_ > cap_) throw ResourceLimit("oracle search exceeded " + std::to_string(cap_) + " nodes");
    if (s.outside >= in_.p) return true;
    if (left == 0) return false;
    std::string key;
    if (memo_on_) {
      key = s.canonical();
      auto it = failed_.find(key);
      if (it != failed_.end() && it->second >= left) return false;
    }
    for (std::size_t i = 0; i < s.inside.size(); ++i) {
      if (sgn(s.inside[i]) == 0) continue;
      if (reach(topple(in_, s, i), left - 1)) {
        path_.push_back(i);
        return true;
      }
    }
    if (memo_on_) {
      auto& f = failed_[key];
      f = std::max(f, left);
    }
    return false;
  }

  std::uint64_t nodes() const { return nodes_; }
  std::vector<std::size_t> path() const { return {path_.rbegin(), path_.rend()}; }

 private:
  const Instance& in_;
  bool memo_on_;
  std::uint64_t cap_;
  std::uint64_t nodes_ = 0;
  std::unordered_map<std::string, int> failed_;
  std::vector<std::size_t> path_;
};

OracleResult run(const ExactMassDist& mu0, std::int64_t n, const Rational& p, int depth_cap, bool memo) {
  auto in = prepare(mu0, n, p, depth_cap);
  OracleResult r;
  r.ball_size = in.ball.size();
  r.depth_cap = depth_cap;
  if (!memo && depth_cap > kExhaustiveMaxDepth)
    throw ResourceLimit("exhaustive oracle refuses depth cap " + std::to_string(depth_cap) + " (max " +
                        std::to_string(kExhaustiveMaxDepth) + ")");
  Search search(in, memo, memo ? kNodeCap : kExhaustiveCap);
  // Iterative deepening, so the first success is a minimum.
  for (int limit = 0; limit <= depth_cap; ++limit) {
    if (search.reach(in.start, limit)) {
      r.moves = limit;
      for (auto i : search.path()) r.witness.push_back(mu0.table().key(in.ball[i]));
      break;
    }
  }
  r.nodes = search.nodes();
  return r;
}

}  // namespace

OracleResult min_moves_exact(const ExactMassDist& mu0, std::int64_t n, const Rational& p, int depth_cap) {
  return run(mu0, n, p, depth_cap, true);
}

OracleResult min_moves_exact(const GraphPtr& g, std::int64_t n, const Rational& p, int depth_cap) {
  return min_moves_exact(ExactMassDist::unit(g), n, p, depth_cap);
}

OracleResult min_moves_exhaustive(const ExactMassDist& mu0, std::int64_t n, const Rational& p, int depth_cap) {
  return run(mu0, n, p, depth_cap, false);
}

OracleResult min_moves_exhaustive(const GraphPtr& g, std::int64_t n, const Rational& p, int depth_cap) {
  return min_moves_exhaustive(ExactMassDist::unit(g), n, p, depth_cap);
}

}  // namespace toppler
