// Acceptance run: one PASS/FAIL line per criterion. Artifacts (heatmaps,
// sweep CSVs) go to the directory given as the first argument.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>

#include "killed_walk_oracle.hpp"
#include "toppler/harness.hpp"
#include "toppler/oracle.hpp"

using namespace toppler;

namespace {

int failures = 0;
std::filesystem::path artifacts = "acceptance_artifacts";

struct Verdict {
  bool ok = false;
  std::string detail;
};

void criterion(int id, const char* title, const std::function<Verdict()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = body();
  } catch (const std::exception& e) {
    v = {false, std::string("threw: ") + e.what()};
  }
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.ok) ++failures;
  std::printf("%s %2d %s: %s (%.1f s)\n", v.ok ? "PASS" : "FAIL", id, title, v.detail.c_str(), s);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double greedy_bound(int d, double p, std::int64_t n) {
  double fact = 1;
  for (int i = 2; i <= d; ++i) fact *= i;
  return std::pow(2.0, d) / ((1 - p) * fact) * std::pow(static_cast<double>(n), d + 2);
}

// Every completed greedy run on Z^d seen by criteria 1-3.
struct BoundLedger {
  int runs = 0, violations = 0;
  void add(int d, double p, std::int64_t n, std::uint64_t moves) {
    ++runs;
    if (static_cast<double>(moves) > greedy_bound(d, p, n)) ++violations;
  }
} bound_ledger;

ScalingReport lattice_scan(int d, std::vector<std::int64_t> ns) {
  ExperimentConfig c;
  c.graph = "lattice:d=" + std::to_string(d);
  c.ns = std::move(ns);
  c.out_dir = (artifacts / ("z" + std::to_string(d) + "_greedy")).string();
  auto r = scan(c);
  for (const auto& row : r.rows)
    if (row.terminated) bound_ledger.add(d, row.p, row.n, row.moves);
  return r;
}

Verdict slope_in(const ScalingReport& r, double lo, double hi) {
  if (!r.fitted || !r.excluded.empty()) return {false, "fit incomplete, " + std::to_string(r.excluded.size()) + " rows excluded"};
  return {r.fit.slope >= lo && r.fit.slope <= hi, fmt("slope %.4f +- %.4f, want [%.1f, %.1f]", r.fit.slope, r.fit.slope_stderr, lo, hi)};
}

// Random support vertex with ||x||_inf < lim, if there is one.
template <class S>
std::optional<VertexId> pick(const BasicMassDist<S>& mu, Rng& rng, std::int64_t lim) {
  std::vector<VertexId> c;
  mu.for_each([&](VertexId v, const S&) {
    for (auto x : mu.table().key(v).c)
      if (std::abs(x) >= lim) return;
    c.push_back(v);
  });
  if (c.empty()) return std::nullopt;
  return c[std::uniform_int_distribution<std::size_t>(0, c.size() - 1)(rng)];
}

}  // namespace

int main(int argc, char** argv) {
  if (argc > 1) artifacts = argv[1];
  std::filesystem::create_directories(artifacts);
  std::printf("threads: %d, artifacts: %s\n", configured_threads(), artifacts.string().c_str());

  criterion(1, "Z^1 greedy scaling", [] { return slope_in(lattice_scan(1, {8, 12, 16, 24, 32, 48, 64}), 2.8, 3.2); });

  criterion(2, "Z^2 greedy scaling", [] { return slope_in(lattice_scan(2, {8, 12, 16, 24, 32}), 3.6, 4.4); });

  criterion(3, "greedy volume bound", [] {
    for (int d = 1; d <= 3; ++d) {
      const std::int64_t top = d == 1 ? 40 : d == 2 ? 16 : 8;
      for (std::int64_t n = 2; n <= top; n += d == 1 ? 2 : 1)
        for (double p : {0.1, 0.5, 0.9})
          for (auto tie : {TieRule::Lexicographic, TieRule::Symmetric}) {
            GreedyOptions o;
            o.tie = tie;
            auto r = greedy(make_graph("lattice:d=" + std::to_string(d)), n, p, o);
            if (r.terminated) bound_ledger.add(d, p, n, r.moves);
          }
    }
    return Verdict{bound_ledger.violations == 0,
                   std::to_string(bound_ledger.violations) + " violations over " + std::to_string(bound_ledger.runs) + " runs"};
  });

  criterion(4, "comb scaling", [] {
    ExperimentConfig c;
    c.graph = "comb";
    c.strategy = "comb";
    c.ns = {16, 24, 32, 48, 64};
    c.comb_c = 2.0;
    c.out_dir = (artifacts / "comb").string();
    return slope_in(scan(c), 3.2, 3.8);
  });

  criterion(5, "binary tree scaling", [] {
    ExperimentConfig c;
    c.graph = "dary:d=2";
    c.ns = {6, 7, 8, 9, 10, 11, 12, 13, 14};
    c.out_dir = (artifacts / "tree_greedy").string();
    auto r = scan(c);
    int below = 0;
    for (const auto& row : r.rows)
      if (static_cast<double>(row.moves) < (c.p - 0.01) * std::pow(2.0, static_cast<double>(row.n - 1))) ++below;
    const bool ok = r.fitted && std::abs(r.fit.slope - std::numbers::ln2) <= 0.15 * std::numbers::ln2 && below == 0;
    return Verdict{ok, fmt("slope %.4f vs ln 2 = %.4f, %.0f rows under the lower bound", r.fit.slope, std::numbers::ln2, below)};
  });

  criterion(6, "killed-walk equivalence", [] {
    double worst = 0;
    for (auto [spec, n] : {std::pair{"lattice:d=1", 8}, {"lattice:d=2", 5}, {"dary:d=2", 4}}) {
      auto g = make_graph(spec);
      auto region = ball(*g, n);
      for (int rounds = 0; rounds <= 16; ++rounds) {
        auto law = toppler::testing::killed_walk_law(*g, region, rounds);
        auto r = round_robin_killed_rw(g, region, static_cast<std::uint64_t>(rounds));
        for (const auto& [k, m] : law) worst = std::max(worst, std::abs(r.dist.at(k) - m));
        r.dist.for_each([&](VertexId v, double m) {
          if (!law.contains(r.dist.table().key(v))) worst = std::max(worst, m);
        });
      }
    }
    return Verdict{worst <= 1e-12, fmt("max error %.3g over rounds 0..16", worst)};
  });

  criterion(7, "exact per-step identities", [] {
    Rng rng = substream(7, 0);
    int exact_bad = 0;
    double float_worst = 0;
    // M2 increment on Z^2, rational and float, 10^3 steps.
    {
      auto e = ExactMassDist::unit(make_graph("lattice:d=2"));
      auto f = MassDist::unit(make_graph("lattice:d=2"));
      Rational m2e = 0;
      double m2f = 0;
      for (int i = 0; i < 1000; ++i) {
        auto v = *pick(e, rng, 1 << 20);
        const int q = std::uniform_int_distribution<int>(1, 4)(rng);
        const Rational m = e.at(v) * q / 4;
        e.topple(v, m);
        const Rational next = second_moment(e);
        if (next - m2e != m) ++exact_bad;
        m2e = next;
        auto fv = *pick(f, rng, 1 << 20);
        const double fm = f.at(fv) * q / 4.0;
        f.topple(fv, fm);
        const double fnext = second_moment(f);
        float_worst = std::max(float_worst, std::abs(fnext - m2f - fm));
        m2f = fnext;
      }
    }
    // Energy increment 2 m mu(v) - m^2 on Z, 10^3 steps inside the kernel box.
    {
      auto k1 = potential_kernel(1, 64, 1e-9);
      auto e = ExactMassDist::unit(make_graph("lattice:d=1"));
      auto f = MassDist::unit(make_graph("lattice:d=1"));
      Rational ee = 0;
      double ef = 0;
      for (int i = 0; i < 1000; ++i) {
        const int q = std::uniform_int_distribution<int>(1, 4)(rng);
        auto v = *pick(e, rng, 32);
        const Rational mv = e.at(v), m = mv * q / 4;
        e.topple(v, m);
        const Rational next = energy(e, k1);
        if (next - ee != 2 * m * mv - m * m) ++exact_bad;
        ee = next;
        auto fv = *pick(f, rng, 32);
        const double fmv = f.at(fv), fm = fmv * q / 4.0;
        f.topple(fv, fm);
        const double fnext = energy(f, k1);
        float_worst = std::max(float_worst, std::abs(fnext - ef - (2 * fm * fmv - fm * fm)));
        ef = fnext;
      }
    }
    return Verdict{exact_bad == 0 && float_worst <= 1e-12,
                   fmt("%.0f exact mismatches, float max deviation %.3g", exact_bad, float_worst)};
  });

  criterion(8, "energy lower bound on random traces", [] {
    Rng rng = substream(8, 0);
    struct K {
      int d;
      KernelTable k;
    };
    std::vector<K> ks;
    ks.push_back({1, potential_kernel(1, 64, 1e-9)});
    ks.push_back({2, potential_kernel(2, 30, 1e-9)});
    ks.push_back({3, potential_kernel(3, 12, 1e-7)});
    int runs = 0, bad = 0;
    double worst_margin = 1e300;
    for (auto& [d, k] : ks) {
      auto g = make_graph("lattice:d=" + std::to_string(d));
      for (int trial = 0; trial < 1000; ++trial) {
        auto mu0 = MassDist::unit(g);
        auto mu = mu0;
        mu.enable_trace();
        const int len = std::uniform_int_distribution<int>(1, 40)(rng);
        for (int i = 0; i < len; ++i) {
          auto v = pick(mu, rng, k.L / 2);
          if (!v) break;
          mu.topple(*v, mu.at(*v) * std::uniform_int_distribution<int>(1, 4)(rng) / 4.0);
        }
        auto c = check_energy_m2(mu0, mu.trace(), k);
        ++runs;
        if (!c.ok) ++bad;
        worst_margin = std::min(worst_margin, c.slack);
      }
    }
    return Verdict{bad == 0, fmt("%.0f violations over %.0f traces, smallest lhs - rhs %.3g", bad, runs, worst_margin)};
  });

  criterion(9, "oracle agreement", [] {
    auto z = make_graph("lattice:d=1");
    const Rational half(1, 2);
    const bool line = greedy(z, 1, 0.5).moves == 1 && min_moves_exact(z, 1, half, 12).moves == 1 && greedy(z, 2, 0.5).moves == 3 &&
                      min_moves_exact(z, 2, half, 12).moves == 3;
    struct Tiny {
      const char* spec;
      std::int64_t n;
    };
    int runs = 0, beaten = 0, unvalidated = 0;
    for (auto t : {Tiny{"lattice:d=1", 1}, {"lattice:d=1", 2}, {"lattice:d=1", 3}, {"lattice:d=1", 4}, {"lattice:d=1", 5},
                   {"lattice:d=2", 1}, {"lattice:d=2", 2}, {"lattice:d=3", 2}, {"dary:d=2", 1}, {"dary:d=2", 2},
                   {"dary:d=3", 2}, {"comb", 2}, {"regtree:d=3", 2}}) {
      auto g = make_graph(t.spec);
      for (const Rational& p : std::vector<Rational>{Rational(1, 4), half, Rational(3, 4)}) {
        auto o = min_moves_exact(g, t.n, p, 12);
        // The memoized answer is checked by plain enumeration where that is feasible.
        if (!o.moves || *o.moves <= 7) {
          auto ex = min_moves_exhaustive(g, t.n, p, o.moves ? *o.moves : 7);
          if (ex.moves != o.moves) ++unvalidated;
        }
        for (auto tie : {TieRule::Lexicographic, TieRule::Symmetric}) {
          GreedyOptions go;
          go.tie = tie;
          auto r = greedy(g, t.n, p.get_d(), go);
          ++runs;
          if (o.moves ? r.moves < static_cast<std::uint64_t>(*o.moves) : r.moves <= 12) ++beaten;
        }
      }
    }
    return Verdict{line && beaten == 0 && unvalidated == 0,
                   std::string(line ? "Z line 1 and 3 moves match" : "Z line values wrong") + ", " + std::to_string(beaten) +
                       " greedy runs below the oracle over " + std::to_string(runs) + ", " + std::to_string(unvalidated) +
                       " oracle values disagreeing with enumeration"};
  });

  criterion(10, "divisible sandpile shape", [] {
    auto r = sandpile_stabilize(2, 1e4, 1e-8);
    const double rad = std::sqrt(1e4 / std::numbers::pi);
    const double c = rad - r.inner_radius(), cp = r.outer_radius() - rad;
    SandpileOptions rev;
    rev.order = SweepOrder::Reversed;
    auto a = sandpile_stabilize(2, 1e4, 1e-13), b = sandpile_stabilize(2, 1e4, 1e-13, rev);
    double diff = a.half_width == b.half_width ? 0 : 1e300;
    if (a.half_width == b.half_width)
      for (std::size_t i = 0; i < a.mass.size(); ++i) diff = std::max(diff, std::abs(a.mass[i] - b.mass[i]));
    return Verdict{c <= 2 && cp <= 2 && diff <= 1e-10,
                   fmt("r = %.3f, c = %.3f, c' = %.3f, order difference %.3g at eps 1e-13", rad, c, cp, diff)};
  });

  criterion(11, "product-tree speed", [] {
    struct DK {
      int d, k;
    };
    std::string detail;
    bool ok = true;
    std::uint64_t seed = 11;
    for (auto [d, k] : {DK{2, 2}, {3, 2}, {3, 1}}) {
      auto s = mc_speed(*make_graph("prodtree:d=" + std::to_string(d) + ",k=" + std::to_string(k)), 1000, 10000, seed++);
      const double want = double(d + k - 2) / (d + k + 2);
      const double rel = std::abs(s.asymptotic - want) / want;
      ok &= rel <= 0.02;
      detail += fmt("(%.0f,%.0f) %.4f vs %.4f", d, k, s.asymptotic, want) + fmt(" [raw %.4f]; ", s.estimate);
    }
    double worst = 0;
    for (int d = 1; d <= 6; ++d)
      for (int k = 1; k <= d; ++k) {
        if (d + k < 3) continue;
        auto cf = closed_forms(d, k);
        worst = std::max(worst, std::abs(std::exp(cf.h / cf.ell) - cf.theta) / cf.theta);
      }
    ok &= worst <= 1e-12;
    return Verdict{ok, detail + fmt("identity max rel error %.3g", worst)};
  });

  criterion(12, "lamplighter decay and growth", [] {
    auto g = make_graph("lamplighter");
    auto decay = mc_green_decay(*g, 6, 100000, 12);
    ExperimentConfig c;
    c.graph = "lamplighter";
    c.ns = {3, 4, 5, 6, 7};
    c.out_dir = (artifacts / "lamplighter_greedy").string();
    auto growth = scan(c);
    const double z = -decay.slope / decay.slope_stderr;
    const bool ok = decay.slope < 0 && z > 3 && growth.fitted && growth.excluded.empty() && growth.fit.slope > 0;
    return Verdict{ok, fmt("log-Green slope %.4f (|slope|/stderr %.1f), greedy log-linear slope %.4f", decay.slope, z,
                           growth.fit.slope)};
  });

  criterion(13, "comb symmetric greedy reference count", [] {
    GreedyOptions o;
    o.tie = TieRule::Symmetric;
    auto r = greedy_sweeps(make_graph("comb"), 1'000'000, o);
    const double rel = std::abs(static_cast<double>(r.moves) - 3439472.0) / 3439472.0;
    render_heatmap(r.dist, 40, (artifacts / "comb_sym_1e6.pgm").string(), Scale::Log);
    auto fig1 = greedy_sweeps(make_graph("lattice:d=2"), 100'000, o);
    render_heatmap(fig1.dist, 40, (artifacts / "z2_sym_1e5.pgm").string(), Scale::Linear);
    return Verdict{rel <= 0.10, fmt("%.0f moves vs 3439472 (%.2f%% off)", static_cast<double>(r.moves), 100 * rel)};
  });

  std::printf("%s: %d of 13 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
