#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "toppler/graphs.hpp"
#include "toppler/mass.hpp"

namespace toppler {

inline constexpr std::uint64_t kDefaultBudget = 100'000'000;

enum class TieRule { Lexicographic, Symmetric };

TieRule parse_tie(std::string_view s);

struct RunResult {
  explicit RunResult(MassDist d) : dist(std::move(d)) {}

  MassDist dist;                 // final distribution; trace inside when enabled
  std::uint64_t moves = 0;
  std::uint64_t rounds = 0;      // rounds or sweeps
  bool terminated = false;       // target reached
  bool budget_exhausted = false;
  bool unreachable = false;      // stranded mass makes the target impossible
  double target_mass = 0;        // mass counted toward the target at the end
  double stranded = 0;           // left the region but still inside B_n
};

// ---- greedy ----------------------------------------------------------------

struct GreedyOptions {
  TieRule tie = TieRule::Lexicographic;
  std::uint64_t budget = kDefaultBudget;
  bool trace = false;
  // Symmetric mode: masses within this relative distance of the maximum count
  // as tied, absorbing rounding differences between mirror-image vertices.
  double tie_tolerance = 1e-9;
};

// Full topples of the heaviest vertex of B_n until mass >= p sits at distance
// >= n. Lexicographic mode breaks ties by the smaller VertexKey; symmetric
// mode topples every tied maximum in one sweep, each with the mass it held
// when the sweep began, and checks the target after the sweep.
RunResult greedy(GraphPtr g, std::int64_t n, double p, GreedyOptions opt = {});

// Greedy continued from mu0; moves already credited to mu0 are kept.
RunResult greedy_from(MassDist mu0, std::int64_t n, double p, GreedyOptions opt = {});

// Global greedy with no target: exactly `sweeps` greedy steps.
RunResult greedy_sweeps(GraphPtr g, std::uint64_t sweeps, GreedyOptions opt = {});

// ---- round robin / killed walk ----------------------------------------------

enum class Engine { Kernel, Reference };

struct RoundRobinOptions {
  Engine engine = Engine::Kernel;
  std::uint64_t budget = kDefaultBudget;
  bool trace = false;  // reference engine only
};

// `rounds` rounds of round-robin toppling over `region`, starting from the
// unit mass at the origin.
RunResult round_robin_killed_rw(GraphPtr g, const std::vector<VertexKey>& region, std::uint64_t rounds,
                                RoundRobinOptions opt = {});

// Rounds until mass >= p has left the region.
RunResult rw_until_mass_out(GraphPtr g, const std::vector<VertexKey>& region, double p, std::uint64_t round_cap,
                            RoundRobinOptions opt = {});

// Killed walk over the comb rectangle [-C sqrt n, C sqrt n] x [-n, n] cut to
// B_n. Mass leaving through the spine ends is stranded inside B_n and never
// counts; the run stops early if it exceeds 1 - p.
RunResult comb_strategy(std::int64_t n, double p, double C, std::uint64_t round_cap, RoundRobinOptions opt = {});
std::vector<VertexKey> comb_region(std::int64_t n, double C);

// Same dynamics with the walk killed on leaving `support`.
RunResult restricted_rw(GraphPtr g, const std::vector<VertexKey>& support, std::uint64_t rounds, RoundRobinOptions opt = {});
// Rounds until mass >= p sits outside `support` at distance >= n.
RunResult restricted_until_mass_out(GraphPtr g, const std::vector<VertexKey>& support, std::int64_t n, double p,
                                    std::uint64_t round_cap, RoundRobinOptions opt = {});

// ---- divisible sandpile ----------------------------------------------------

enum class SweepOrder { DistanceLex, Reversed };

struct SandpileOptions {
  double threshold = 1.0;  // mass each site keeps
  SweepOrder order = SweepOrder::DistanceLex;
  std::uint64_t sweep_cap = 50'000'000;
};

struct SandpileResult {
  int d = 0;
  int half_width = 0;          // grid is [-W, W]^d
  double threshold = 1.0;
  double eps = 0;
  std::vector<double> mass;    // dense, row-major
  std::uint64_t sweeps = 0;
  std::uint64_t moves = 0;

  double at(std::span<const std::int64_t> x) const;
  std::vector<std::int64_t> coords(std::size_t index) const;
  // Sites with mass >= threshold (1 - eps).
  std::vector<std::vector<std::int64_t>> occupied() const;
  // min ||x||_2 over grid sites outside the occupied set, and max over sites
  // inside it.
  double inner_radius() const;
  double outer_radius() const;
};

SandpileResult sandpile_stabilize(int d, double m, double eps, SandpileOptions opt = {});

// Lattice points with ||x||_2 <= R.
std::uint64_t closed_ball_count(int d, double R);

// Unit mass smoothed by the divisible sandpile with site cap
// 2 / |{||x||_2 <= cn}| / (1 + eps); throws ParameterError unless the result
// satisfies mu <= 2 / |{||x||_2 <= cn}| and support within ||x||_2 <= cn.
MassDist smooth_to_uniform(int d, std::int64_t n, double c, double eps);

// ---- typical-set construction ------------------------------------------------

struct UtnResult {
  std::vector<VertexKey> support;  // ordered by (distance, key)
  std::int64_t r_n = 0;
  std::uint64_t t_star = 0;
  std::size_t from_ball = 0;       // |B_{r_n}|
  std::size_t from_typical = 0;    // vertices added by the V_{t,n}
  bool insufficient = false;       // no V_{t,n} resolved with these samples
};

std::int64_t r_of_n(const Graph& g, std::int64_t n);

// U_n = B_{r_n} union V_{t,n} for r_n <= t <= t_star, with p_t(o, .) estimated
// from `samples` walks. `h` defaults to the closed form on products of trees.
UtnResult build_Utn(GraphPtr g, std::int64_t n, double eps, std::uint64_t t_star, std::uint64_t samples, std::uint64_t seed,
                    std::optional<double> h = std::nullopt);

}  // namespace toppler
