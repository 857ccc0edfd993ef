#include "toppler/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "toppler/diagnostics.hpp"
#include "toppler/errors.hpp"
#include "toppler/kernels.hpp"

namespace toppler {

TieRule parse_tie(std::string_view s) {
  if (s == "lex") return TieRule::Lexicographic;
  if (s == "sym") return TieRule::Symmetric;
  throw ParameterError("tie rule must be lex or sym, got '" + std::string(s) + "'");
}

// ---- greedy ----------------------------------------------------------------

namespace {

struct Entry {
  double mass;
  VertexId v;
  std::uint32_t version;
};

// Max-heap of (mass, smaller key) with stale-entry skipping: every update
// pushes a fresh entry and bumps the vertex version.
class GreedyQueue {
  struct Less;

 public:
  explicit GreedyQueue(const VertexTable& t) : t_(t) {}

  void update(VertexId v, double m, bool eligible) {
    if (v >= version_.size()) version_.resize(t_.size() + 1, 0);
    ++version_[v];
    if (!eligible || !(m > 0)) return;
    heap_.push_back({m, v, version_[v]});
    std::push_heap(heap_.begin(), heap_.end(), cmp());
    if (heap_.size() > 2 * compacted_ + (1u << 20)) compact();
  }

  std::optional<Entry> top() {
    while (!heap_.empty()) {
      const Entry& e = heap_.front();
      if (e.v < version_.size() && e.version == version_[e.v]) return e;
      pop();
    }
    return std::nullopt;
  }

  void pop() {
    std::pop_heap(heap_.begin(), heap_.end(), cmp());
    heap_.pop_back();
  }

 private:
  struct Less {
    const VertexTable* t;
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.mass != b.mass) return a.mass < b.mass;
      return t->key(b.v) < t->key(a.v);
    }
  };
  Less cmp() const { return Less{&t_}; }

  void compact() {
    std::erase_if(heap_, [&](const Entry& e) { return e.version != version_[e.v]; });
    std::make_heap(heap_.begin(), heap_.end(), cmp());
    compacted_ = heap_.size();
  }

  const VertexTable& t_;
  std::vector<Entry> heap_;
  std::vector<std::uint32_t> version_;
  std::size_t compacted_ = 0;
};

RunResult run_greedy(MassDist mu, std::int64_t n, std::optional<double> p, std::optional<std::uint64_t> sweeps,
                     const GreedyOptions& opt) {
  auto t = mu.table_ptr();
  if (opt.trace) mu.enable_trace();
  if (n >= 0) mu.register_radius(n);
  auto eligible = [&](VertexId v) { return n < 0 || t->distance(v) < n; };
  GreedyQueue q(*t);
  mu.for_each([&](VertexId v, double m) { q.update(v, m, eligible(v)); });

  RunResult r(mu);
  auto reached = [&] { return p && mu.outside() >= *p - 1e-12; };
  std::vector<VertexId> affected;
  std::vector<std::pair<VertexId, double>> tied;
  std::vector<char> seen;
  while (true) {
    if (reached()) {
      r.terminated = true;
      break;
    }
    if (sweeps && r.rounds >= *sweeps) {
      r.terminated = true;
      break;
    }
    if (mu.moves() >= opt.budget) {
      r.budget_exhausted = true;
      break;
    }
    auto first = q.top();
    if (!first) break;
    tied.clear();
    if (opt.tie == TieRule::Lexicographic) {
      tied.emplace_back(first->v, first->mass);
      q.pop();
    } else {
      const double floor = first->mass * (1 - opt.tie_tolerance);
      while (auto e = q.top()) {
        if (e->mass < floor) break;
        tied.emplace_back(e->v, e->mass);
        q.pop();
      }
      std::sort(tied.begin(), tied.end(), [&](auto& a, auto& b) { return t->key(a.first) < t->key(b.first); });
    }
    affected.clear();
    for (auto [v, m] : tied) {
      mu.topple(v, m);
      affected.push_back(v);
      for (auto u : t->neighbors(v)) affected.push_back(u);
    }
    seen.resize(t->size(), 0);
    for (auto v : affected) {
      if (seen[v]) continue;
      seen[v] = 1;
      q.update(v, mu.at(v), eligible(v));
    }
    for (auto v : affected) seen[v] = 0;
    ++r.rounds;
  }
  r.moves = mu.moves();
  r.target_mass = n >= 0 ? mu.outside() : 0.0;
  r.dist = std::move(mu);
  return r;
}

}  // namespace

RunResult greedy(GraphPtr g, std::int64_t n, double p, GreedyOptions opt) {
  if (n < 1) throw ParameterError("n must be >= 1");
  if (!(p > 0 && p < 1)) throw ParameterError("p must lie in (0, 1)");
  return run_greedy(MassDist::unit(std::move(g)), n, p, std::nullopt, opt);
}

RunResult greedy_from(MassDist mu0, std::int64_t n, double p, GreedyOptions opt) {
  if (n < 1) throw ParameterError("n must be >= 1");
  if (!(p > 0 && p < 1)) throw ParameterError("p must lie in (0, 1)");
  return run_greedy(std::move(mu0), n, p, std::nullopt, opt);
}

RunResult greedy_sweeps(GraphPtr g, std::uint64_t sweeps, GreedyOptions opt) {
  return run_greedy(MassDist::unit(std::move(g)), -1, std::nullopt, sweeps, opt);
}

// ---- round robin -----------------------------------------------------------

namespace {

struct Target {
  std::int64_t n = 0;             // mass outside the region counts if at distance >= n
  std::optional<double> p;        // stop once the counted mass reaches p
  std::uint64_t max_rounds = 0;
};

struct Tally {
  double target = 0, stranded = 0;
};

// Returns true when the run should stop before another round.
bool settle(RunResult& r, const Tally& s, const Target& spec) {
  r.target_mass = s.target;
  r.stranded = s.stranded;
  if (spec.p) {
    if (s.target >= *spec.p - 1e-12) {
      r.terminated = true;
      return true;
    }
    if (s.stranded > 1 - *spec.p + 1e-12) {
      r.unreachable = true;
      return true;
    }
  }
  if (r.rounds >= spec.max_rounds) {
    if (spec.p)
      r.budget_exhausted = true;
    else
      r.terminated = true;
    return true;
  }
  return false;
}

RunResult drive_kernel(const std::shared_ptr<VertexTable>& t, const std::vector<VertexId>& ids, const Target& spec,
                       const RoundRobinOptions& opt) {
  KilledWalkOperator op(*t, ids);
  const std::size_t R = op.region_size();
  std::vector<char> counts(op.size(), 0);
  for (std::size_t u = R; u < op.size(); ++u) counts[u] = t->distance(op.vertices()[u]) >= spec.n;
  std::vector<double> cur(op.size(), 0.0), next;
  cur[op.slot(t->origin())] = 1.0;

  RunResult r{MassDist(t)};
  std::uint64_t moves = 0;
  while (true) {
    Tally s;
    for (std::size_t u = R; u < op.size(); ++u) (counts[u] ? s.target : s.stranded) += cur[u];
    if (settle(r, s, spec)) break;
    if (moves >= opt.budget) {
      r.budget_exhausted = true;
      break;
    }
    moves += op.step(cur, next);
    std::swap(cur, next);
    ++r.rounds;
  }
  for (std::size_t u = 0; u < op.size(); ++u)
    if (cur[u] > 0) r.dist.set(op.vertices()[u], cur[u]);
  r.dist.credit_moves(moves);
  r.moves = moves;
  return r;
}

RunResult drive_reference(const std::shared_ptr<VertexTable>& t, const std::vector<VertexId>& ids, const Target& spec,
                          const RoundRobinOptions& opt) {
  std::unordered_set<VertexId> inside(ids.begin(), ids.end());
  RunResult r{MassDist::point(t, t->origin())};
  auto& mu = r.dist;
  if (opt.trace) mu.enable_trace();
  std::vector<std::pair<VertexId, double>> start;
  while (true) {
    Tally s;
    mu.for_each([&](VertexId v, double m) {
      if (inside.contains(v)) return;
      (t->distance(v) >= spec.n ? s.target : s.stranded) += m;
    });
    if (settle(r, s, spec)) break;
    if (mu.moves() >= opt.budget) {
      r.budget_exhausted = true;
      break;
    }
    start.clear();
    for (auto v : ids)
      if (mu.at(v) > 0) start.emplace_back(v, mu.at(v));
    for (auto [v, m] : start) mu.topple(v, m);
    ++r.rounds;
  }
  r.moves = mu.moves();
  return r;
}

RunResult drive(GraphPtr g, const std::vector<VertexKey>& region, const Target& spec, const RoundRobinOptions& opt) {
  auto t = std::make_shared<VertexTable>(std::move(g));
  std::vector<VertexId> ids;
  ids.reserve(region.size());
  bool has_origin = false;
  for (const auto& k : region) {
    t->graph().require_valid(k);
    ids.push_back(t->intern(k));
    has_origin |= ids.back() == t->origin();
  }
  if (!has_origin) throw ParameterError("region must contain the origin");
  if (opt.trace && opt.engine != Engine::Reference) throw ParameterError("tracing needs the reference engine");
  return opt.engine == Engine::Kernel ? drive_kernel(t, ids, spec, opt) : drive_reference(t, ids, spec, opt);
}

}  // namespace

RunResult round_robin_killed_rw(GraphPtr g, const std::vector<VertexKey>& region, std::uint64_t rounds, RoundRobinOptions opt) {
  return drive(std::move(g), region, Target{0, std::nullopt, rounds}, opt);
}

RunResult rw_until_mass_out(GraphPtr g, const std::vector<VertexKey>& region, double p, std::uint64_t round_cap,
                            RoundRobinOptions opt) {
  if (!(p > 0 && p <= 1)) throw ParameterError("p must lie in (0, 1]");
  return drive(std::move(g), region, Target{0, p, round_cap}, opt);
}

std::vector<VertexKey> comb_region(std::int64_t n, double C) {
  if (!(C > 0)) throw ParameterError("C must be positive");
  if (n < 1) throw ParameterError("n must be >= 1");
  const double w = C * std::sqrt(static_cast<double>(n));
  auto keys = ball(*make_graph("comb"), n);
  std::erase_if(keys, [&](const VertexKey& k) { return std::abs(static_cast<double>(k.c[0])) > w; });
  return keys;
}

RunResult comb_strategy(std::int64_t n, double p, double C, std::uint64_t round_cap, RoundRobinOptions opt) {
  if (!(p > 0 && p < 1)) throw ParameterError("p must lie in (0, 1)");
  return drive(make_graph("comb"), comb_region(n, C), Target{n, p, round_cap}, opt);
}

RunResult restricted_until_mass_out(GraphPtr g, const std::vector<VertexKey>& support, std::int64_t n, double p,
                                    std::uint64_t round_cap, RoundRobinOptions opt) {
  if (!(p > 0 && p < 1)) throw ParameterError("p must lie in (0, 1)");
  return drive(std::move(g), support, Target{n, p, round_cap}, opt);
}

RunResult restricted_rw(GraphPtr g, const std::vector<VertexKey>& support, std::uint64_t rounds, RoundRobinOptions opt) {
  return round_robin_killed_rw(std::move(g), support, rounds, opt);
}

// ---- divisible sandpile ----------------------------------------------------

double SandpileResult::at(std::span<const std::int64_t> x) const {
  std::size_t idx = 0;
  for (auto v : x) {
    if (v < -half_width || v > half_width) return 0.0;
    idx = idx * (2 * half_width + 1) + static_cast<std::size_t>(v + half_width);
  }
  return mass[idx];
}

std::vector<std::int64_t> SandpileResult::coords(std::size_t index) const {
  std::vector<std::int64_t> x(d);
  const std::size_t side = 2 * half_width + 1;
  for (int i = d - 1; i >= 0; --i) {
    x[i] = static_cast<std::int64_t>(index % side) - half_width;
    index /= side;
  }
  return x;
}

std::vector<std::vector<std::int64_t>> SandpileResult::occupied() const {
  std::vector<std::vector<std::int64_t>> out;
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (mass[i] >= threshold * (1 - eps)) out.push_back(coords(i));
  return out;
}

namespace {

double norm2(const std::vector<std::int64_t>& x) {
  double s = 0;
  for (auto v : x) s += static_cast<double>(v) * static_cast<double>(v);
  return std::sqrt(s);
}

}  // namespace

double SandpileResult::inner_radius() const {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (mass[i] < threshold * (1 - eps)) r = std::min(r, norm2(coords(i)));
  return r;
}

double SandpileResult::outer_radius() const {
  double r = 0;
  for (std::size_t i = 0; i < mass.size(); ++i)
    if (mass[i] >= threshold * (1 - eps)) r = std::max(r, norm2(coords(i)));
  return r;
}

namespace {

// One attempt on the grid [-W, W]^d; nullopt when mass needs to leave it.
std::optional<SandpileResult> sandpile_on_grid(int d, double m, double eps, const SandpileOptions& opt, int W) {
  const std::size_t side = 2 * W + 1;
  double total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<double>(side);
  if (total > 5e7) throw ResourceLimit("sandpile grid too large");
  const std::size_t cells = static_cast<std::size_t>(total);
  std::vector<std::size_t> stride(d);
  {
    std::size_t s = 1;
    for (int i = d - 1; i >= 0; --i) {
      stride[i] = s;
      s *= side;
    }
  }
  SandpileResult res;
  res.d = d;
  res.half_width = W;
  res.threshold = opt.threshold;
  res.eps = eps;
  res.mass.assign(cells, 0.0);

  // Sites ordered by (L1 distance, coordinates); first[k] = first position
  // with distance k.
  std::vector<std::int32_t> l1(cells);
  std::vector<char> edge(cells, 0);
  for (std::size_t c = 0; c < cells; ++c) {
    auto x = res.coords(c);
    std::int64_t s = 0;
    for (auto v : x) {
      s += std::abs(v);
      if (std::abs(v) == W) edge[c] = 1;
    }
    l1[c] = static_cast<std::int32_t>(s);
  }
  std::vector<std::uint32_t> order(cells);
  for (std::size_t c = 0; c < cells; ++c) order[c] = static_cast<std::uint32_t>(c);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return l1[a] < l1[b]; });
  std::vector<std::size_t> upto;  // upto[k] = number of sites with distance <= k
  for (std::size_t i = 0; i < cells; ++i) {
    const auto k = static_cast<std::size_t>(l1[order[i]]);
    if (upto.size() <= k) upto.resize(k + 1, i);
  }
  std::vector<std::size_t> count(upto.size());
  for (std::size_t k = 0; k < upto.size(); ++k) count[k] = k + 1 < upto.size() ? upto[k + 1] : cells;

  const std::size_t origin = cells / 2;
  res.mass[origin] = m;
  const double h = opt.threshold;
  const double limit = h * (1 + eps);
  const double w = 1.0 / (2 * d);
  std::int32_t reach = 0;
  while (true) {
    double top = 0;
    const std::size_t span = count[std::min<std::size_t>(reach, count.size() - 1)];
    for (std::size_t i = 0; i < span; ++i) top = std::max(top, res.mass[order[i]]);
    if (top <= limit) break;
    if (res.sweeps >= opt.sweep_cap) throw ResourceLimit("sandpile did not stabilize within the sweep cap");
    std::int32_t new_reach = reach;
    for (std::size_t j = 0; j < span; ++j) {
      const std::size_t c = order[opt.order == SweepOrder::DistanceLex ? j : span - 1 - j];
      const double excess = res.mass[c] - h;
      if (!(excess > 0)) continue;
      if (edge[c]) return std::nullopt;
      res.mass[c] = h;
      const double share = excess * w;
      for (int i = 0; i < d; ++i) {
        res.mass[c - stride[i]] += share;
        res.mass[c + stride[i]] += share;
      }
      ++res.moves;
      new_reach = std::max(new_reach, l1[c] + 1);
    }
    reach = new_reach;
    ++res.sweeps;
  }
  return res;
}

}  // namespace

SandpileResult sandpile_stabilize(int d, double m, double eps, SandpileOptions opt) {
  if (d < 1) throw ParameterError("d must be >= 1");
  if (!(m > 0) || !(eps > 0) || !(opt.threshold > 0)) throw ParameterError("sandpile needs m > 0, eps > 0 and a positive threshold");
  const double omega = std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0 + 1);
  const double r = std::pow(m / opt.threshold / omega, 1.0 / d);
  int W = static_cast<int>(std::ceil(1.25 * r + 4));
  while (true) {
    if (auto res = sandpile_on_grid(d, m, eps, opt, W)) return std::move(*res);
    W = static_cast<int>(std::ceil(W * 1.5)) + 2;
  }
}

std::uint64_t closed_ball_count(int d, double R) {
  if (d < 1 || R < 0) throw ParameterError("closed_ball_count needs d >= 1 and R >= 0");
  std::function<std::uint64_t(int, double)> rec = [&](int k, double r2) -> std::uint64_t {
    if (k == 0) return 1;
    const auto lim = static_cast<std::int64_t>(std::floor(std::sqrt(r2) + 1e-9));
    std::uint64_t s = 0;
    for (std::int64_t x = -lim; x <= lim; ++x) {
      const double rest = r2 - static_cast<double>(x * x);
      if (rest >= -1e-9) s += rec(k - 1, std::max(rest, 0.0));
    }
    return s;
  };
  return rec(d, R * R);
}

MassDist smooth_to_uniform(int d, std::int64_t n, double c, double eps) {
  if (!(c > 0 && c < 1)) throw ParameterError("c must lie in (0, 1)");
  if (n < 1) throw ParameterError("n must be >= 1");
  const double radius = c * static_cast<double>(n);
  if (radius < 2) throw ParameterError("cn must be >= 2");
  const double cap = 2.0 / static_cast<double>(closed_ball_count(d, radius));
  SandpileOptions opt;
  // Stops at h (1 + eps) < cap.
  opt.threshold = cap / (1 + 2 * eps);
  auto res = sandpile_stabilize(d, 1.0, eps, opt);

  auto t = std::make_shared<VertexTable>(make_graph("lattice:d=" + std::to_string(d)));
  MassDist mu(t);
  for (std::size_t i = 0; i < res.mass.size(); ++i) {
    if (res.mass[i] == 0) continue;
    auto x = res.coords(i);
    if (res.mass[i] > cap) throw ParameterError("smoothed mass exceeds the cap");
    if (norm2(x) > radius + 1e-9)
      throw ParameterError("cn = " + std::to_string(radius) + " is too small: smoothed support reaches radius " + std::to_string(norm2(x)));
    mu.set(t->intern(VertexKey(x)), res.mass[i]);
  }
  mu.credit_moves(res.moves);
  return mu;
}

// ---- typical-set construction ------------------------------------------------

std::int64_t r_of_n(const Graph& g, std::int64_t n) {
  std::int64_t r = 0;
  while (ball_volume(g, r + 1) <= static_cast<std::size_t>(n)) ++r;
  return r;
}

UtnResult build_Utn(GraphPtr g, std::int64_t n, double eps, std::uint64_t t_star, std::uint64_t samples, std::uint64_t seed,
                    std::optional<double> h) {
  if (n < 1 || !(eps > 0) || samples == 0) throw ParameterError("build_Utn needs n >= 1, eps > 0, samples >= 1");
  const auto& sp = g->spec();
  if (!h) {
    if (sp.family != Family::ProductTree) throw ParameterError("entropy h must be supplied for " + sp.to_string());
    h = closed_forms(sp.d, sp.k).h;
  }
  UtnResult u;
  u.r_n = r_of_n(*g, n);
  u.t_star = t_star;
  std::vector<VertexKey> base = ball(*g, u.r_n);
  u.from_ball = base.size();

  const auto t0 = static_cast<std::uint64_t>(u.r_n);
  std::vector<std::unordered_map<std::uint64_t, std::uint64_t>> hits(t_star + 1);
  std::unordered_map<std::uint64_t, VertexKey> keys;
  auto walker = g->walker();
  for (std::uint64_t s = 0; s < samples; ++s) {
    Rng rng = substream(seed, s);
    walker->reset();
    for (std::uint64_t t = 1; t <= t_star; ++t) {
      walker->step(rng);
      if (t < t0 || walker->distance() >= n) continue;
      const auto fp = walker->fingerprint();
      ++hits[t][fp];
      if (!keys.contains(fp)) keys.emplace(fp, walker->key());
    }
  }
  std::set<VertexKey> chosen(base.begin(), base.end());
  const double lo = -*h * (1 + eps), hi = -*h * (1 - eps);
  std::size_t typical = 0;
  for (std::uint64_t t = std::max<std::uint64_t>(t0, 1); t <= t_star; ++t) {
    for (auto [fp, c] : hits[t]) {
      const double rate = std::log(static_cast<double>(c) / static_cast<double>(samples)) / static_cast<double>(t);
      if (rate > lo && rate < hi) {
        ++typical;
        chosen.insert(keys.at(fp));
      }
    }
  }
  u.insufficient = typical == 0;
  u.support.assign(chosen.begin(), chosen.end());
  std::stable_sort(u.support.begin(), u.support.end(),
                   [&](const VertexKey& a, const VertexKey& b) { return g->distance(a) < g->distance(b); });
  u.from_typical = u.support.size() - u.from_ball;
  return u;
}

}  // namespace toppler
