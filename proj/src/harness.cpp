#include "toppler/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "toppler/oracle.hpp"

namespace toppler {

Axes axes_for(const GraphSpec& spec) {
  return spec.euclidean() ? Axes::LogLog : Axes::LinearLog;
}

std::string to_string(Axes a) { return a == Axes::LogLog ? "log-log" : "linear-log"; }

void ExperimentConfig::validate() const {
  if (ns.empty()) throw ParameterError("scan needs at least one n");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) throw ParameterError("n must be >= 1");
    if (i > 0 && ns[i] <= ns[i - 1]) throw ParameterError("n list must be strictly increasing");
  }
  if (!(p > 0 && p < 1)) throw ParameterError("p must lie in (0, 1)");
  if (seeds.empty()) throw ParameterError("scan needs at least one seed");
  if (std::find(kStrategies.begin(), kStrategies.end(), strategy) == kStrategies.end())
    throw ParameterError("unknown strategy '" + strategy + "'");
  GraphSpec::parse(graph).validate();
}

// ---- strategies --------------------------------------------------------------

const std::vector<std::string> kStrategies{"greedy", "roundrobin", "comb", "sandpile-smooth", "restricted"};

RunResult run_strategy(const RunSpec& s) {
  auto g = make_graph(s.graph);
  const auto& gs = g->spec();
  RoundRobinOptions rr;
  rr.budget = s.budget;
  if (s.strategy == "greedy") {
    GreedyOptions o;
    o.tie = s.tie;
    o.budget = s.budget;
    return greedy(g, s.n, s.p, o);
  }
  if (s.strategy == "roundrobin") return rw_until_mass_out(g, ball(*g, s.n), s.p, s.budget, rr);
  if (s.strategy == "comb") {
    if (gs.family != Family::Comb) throw ParameterError("comb strategy runs on the comb only");
    return comb_strategy(s.n, s.p, s.comb_c, s.budget, rr);
  }
  if (s.strategy == "sandpile-smooth") {
    if (gs.family != Family::Lattice) throw ParameterError("sandpile-smooth runs on Z^d only");
    GreedyOptions o;
    o.tie = s.tie;
    o.budget = s.budget;
    return greedy_from(smooth_to_uniform(gs.d, s.n, 0.5, 1e-8), s.n, s.p, o);
  }
  if (s.strategy == "restricted") {
    if (gs.family != Family::ProductTree) throw ParameterError("restricted strategy needs a product of trees");
    const double eps = 0.5;
    const auto cf = closed_forms(gs.d, gs.k);
    const auto t_star = static_cast<std::uint64_t>(std::ceil((1 + eps) * static_cast<double>(s.n) / cf.ell));
    auto u = build_Utn(g, s.n, eps, t_star, 20000, s.seed);
    return restricted_until_mass_out(g, u.support, s.n, s.p, s.budget, rr);
  }
  throw ParameterError("unknown strategy '" + s.strategy + "'");
}

// ---- scan --------------------------------------------------------------------

LineFit fit_exponent(std::span<const double> n, std::span<const double> moves, Axes axes) {
  if (n.size() != moves.size()) throw ParameterError("fit needs matching columns");
  if (n.size() < 3) throw ParameterError("fit needs at least 3 rows");
  std::vector<double> x, y;
  for (std::size_t i = 0; i < n.size(); ++i) {
    if (!(n[i] > 0) || !(moves[i] > 0)) throw ParameterError("fit needs positive values");
    x.push_back(axes == Axes::LogLog ? std::log(n[i]) : n[i]);
    y.push_back(std::log(moves[i]));
  }
  return fit_line(x, y);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string num(double v, int precision = 12) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

void write_rows_csv(const std::vector<RunRow>& rows, std::ostream& os) {
  os << "graph,strategy,n,p,seed,moves,wall_ms,terminated\n";
  for (const auto& r : rows) {
    os << csv_field(r.graph) << ',' << csv_field(r.strategy) << ',' << r.n << ',' << num(r.p) << ',' << r.seed << ','
       << r.moves << ',' << std::fixed << std::setprecision(3) << r.wall_ms << std::defaultfloat << ','
       << (r.terminated ? "true" : "false") << '\n';
  }
}

void write_report(const ScalingReport& r, std::ostream& os) {
  const auto& c = r.config;
  os << "graph: " << c.graph << "\nstrategy: " << c.strategy << "\np: " << num(c.p) << "\ntie: "
     << (c.tie == TieRule::Lexicographic ? "lex" : "sym") << "\naxes: " << to_string(r.axes) << "\nrows: " << r.rows.size()
     << "\nexcluded: " << r.excluded.size() << '\n';
  for (const auto& e : r.excluded)
    os << "  n=" << e.n << " seed=" << e.seed << " moves=" << e.moves << (e.budget_exhausted ? " budget exhausted" : " not terminated")
       << '\n';
  if (r.fitted) {
    os << "slope: " << num(r.fit.slope, 6) << "\nslope_stderr: " << num(r.fit.slope_stderr, 6) << "\nintercept: " << num(r.fit.intercept, 6)
       << "\nresidual_max: " << num(r.fit.residual_max, 6) << '\n';
  } else {
    os << "slope: none (fewer than 3 usable rows)\n";
  }
}

ScalingReport scan(const ExperimentConfig& config) {
  config.validate();
  ScalingReport rep;
  rep.config = config;
  rep.axes = axes_for(GraphSpec::parse(config.graph));

  std::vector<RunSpec> jobs;
  for (auto n : config.ns)
    for (auto seed : config.seeds)
      jobs.push_back({config.graph, config.strategy, n, config.p, config.tie, config.budget, seed, config.comb_c});
  // Largest runs first so the dynamic schedule balances.
  std::vector<std::size_t> order(jobs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = order.size() - 1 - i;

  std::vector<RunRow> rows(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  const auto count = static_cast<std::int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(configured_threads())
  for (std::int64_t k = 0; k < count; ++k) {
    const auto i = order[static_cast<std::size_t>(k)];
    try {
      const auto t0 = std::chrono::steady_clock::now();
      auto res = run_strategy(jobs[i]);
      const auto t1 = std::chrono::steady_clock::now();
      auto& row = rows[i];
      row.graph = jobs[i].graph;
      row.strategy = jobs[i].strategy;
      row.n = jobs[i].n;
      row.p = jobs[i].p;
      row.seed = jobs[i].seed;
      row.moves = res.moves;
      row.terminated = res.terminated;
      row.budget_exhausted = res.budget_exhausted;
      row.wall_ms = config.timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::sort(rows.begin(), rows.end(), [](const RunRow& a, const RunRow& b) { return std::tie(a.n, a.seed) < std::tie(b.n, b.seed); });
  rep.rows = rows;
  std::vector<double> xs, ys;
  for (const auto& r : rows) {
    if (!r.terminated) {
      rep.excluded.push_back(r);
      continue;
    }
    xs.push_back(static_cast<double>(r.n));
    ys.push_back(static_cast<double>(r.moves));
  }
  std::vector<double> distinct = xs;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (distinct.size() >= 2 && xs.size() >= 3) {
    rep.fit = fit_exponent(xs, ys, rep.axes);
    rep.fitted = true;
  }

  if (!config.out_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    const auto dir = std::filesystem::path(config.out_dir);
    std::ofstream csv(dir / "scan.csv", std::ios::binary);
    std::ofstream report(dir / "report.txt", std::ios::binary);
    if (!csv || !report) throw IoError("cannot write to " + config.out_dir);
    write_rows_csv(rep.rows, csv);
    write_report(rep, report);
  }
  return rep;
}

// ---- rendering ---------------------------------------------------------------

Scale parse_scale(std::string_view s) {
  if (s == "linear") return Scale::Linear;
  if (s == "log") return Scale::Log;
  throw ParameterError("scale must be linear or log");
}

std::vector<std::uint8_t> heatmap_pixels(const MassDist& mu, std::int64_t bound, Scale scale) {
  const auto& spec = mu.table().graph().spec();
  const bool line = spec.family == Family::Lattice && spec.d == 1;
  if (!(spec.family == Family::Comb || (spec.family == Family::Lattice && spec.d <= 2)))
    throw Unsupported("heatmaps cover Z, Z^2 and the comb");
  if (bound < 0) throw ParameterError("bound must be >= 0");
  const std::int64_t w = 2 * bound + 1, h = line ? 1 : w;
  std::vector<double> cell(static_cast<std::size_t>(w * h), 0.0);
  mu.for_each([&](VertexId v, double m) {
    const auto& k = mu.table().key(v).c;
    const std::int64_t x = k[0], y = line ? 0 : k[1];
    if (std::abs(x) > bound || std::abs(y) > bound) return;
    cell[static_cast<std::size_t>((line ? 0 : bound - y) * w + (x + bound))] = m;
  });
  double lo = 0, hi = 0;
  for (double m : cell) {
    if (!(m > 0)) continue;
    hi = std::max(hi, m);
    lo = lo == 0 ? m : std::min(lo, m);
  }
  std::vector<std::uint8_t> px(cell.size(), 255);
  for (std::size_t i = 0; i < cell.size(); ++i) {
    const double m = cell[i];
    if (!(m > 0)) continue;
    double f;  // 0 for the lightest positive mass, 1 for the heaviest
    if (scale == Scale::Linear)
      f = m / hi;
    else
      f = hi > lo ? (std::log(m) - std::log(lo)) / (std::log(hi) - std::log(lo)) : 1.0;
    // Positive mass never maps to pure white.
    px[i] = static_cast<std::uint8_t>(std::lround(254.0 * (1.0 - std::clamp(f, 0.0, 1.0))));
  }
  return px;
}

void render_heatmap(const MassDist& mu, std::int64_t bound, const std::string& path, Scale scale) {
  const auto px = heatmap_pixels(mu, bound, scale);
  const auto& spec = mu.table().graph().spec();
  const std::int64_t w = 2 * bound + 1, h = spec.family == Family::Lattice && spec.d == 1 ? 1 : w;
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  os << "P5\n" << w << ' ' << h << "\n255\n";
  os.write(reinterpret_cast<const char*>(px.data()), static_cast<std::streamsize>(px.size()));
  if (!os) throw IoError("write to " + path + " failed");
}

// ---- invariant suite ---------------------------------------------------------

Scope parse_scope(std::string_view s) {
  if (s == "fast") return Scope::Fast;
  if (s == "oracle") return Scope::Oracle;
  if (s == "full") return Scope::Full;
  throw ParameterError("scope must be fast, oracle or full");
}

void engine_topple(MassDist& mu, VertexId v, double m) { mu.topple(v, m); }

void faulty_topple(MassDist& mu, VertexId v, double m) {
  auto nb = mu.table().neighbors(v);
  std::vector<VertexId> targets(nb.begin(), nb.end());
  const double share = m / static_cast<double>(targets.size() + 1);
  mu.set(v, mu.at(v) - m);
  for (auto u : targets) mu.set(u, mu.at(u) + share);
}

bool SuiteReport::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.ok; });
}

std::string SuiteReport::json() const {
  nlohmann::json j;
  j["scope"] = scope == Scope::Fast ? "fast" : scope == Scope::Oracle ? "oracle" : "full";
  j["ok"] = ok();
  j["checks"] = nlohmann::json::array();
  for (const auto& c : checks) j["checks"].push_back({{"name", c.name}, {"ok", c.ok}, {"detail", c.detail}, {"seconds", c.seconds}});
  return j.dump(2);
}

namespace {

using Body = std::function<bool(std::ostringstream&)>;

void run_check(SuiteReport& rep, const std::string& name, const Body& body) {
  CheckResult c;
  c.name = name;
  std::ostringstream detail;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    c.ok = body(detail);
  } catch (const std::exception& e) {
    c.ok = false;
    detail << "threw: " << e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  c.detail = detail.str();
  rep.checks.push_back(std::move(c));
}

template <class S>
VertexId random_support_vertex(const BasicMassDist<S>& mu, Rng& rng) {
  auto s = mu.support();
  return s[std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng)];
}

// Quarter, half, three quarters or all of the mass at a random support vertex.
void random_topple(MassDist& mu, Rng& rng, const ToppleRule& rule) {
  auto v = random_support_vertex(mu, rng);
  const int q = std::uniform_int_distribution<int>(1, 4)(rng);
  rule(mu, v, mu.at(v) * q / 4.0);
}

std::map<VertexKey, std::int64_t> bfs(const Graph& g, std::int64_t radius) {
  std::map<VertexKey, std::int64_t> dist{{g.origin(), 0}};
  std::deque<VertexKey> q{g.origin()};
  while (!q.empty()) {
    auto v = q.front();
    q.pop_front();
    const auto dv = dist[v];
    if (dv == radius) continue;
    for (auto& u : g.neighbors(v))
      if (dist.emplace(u, dv + 1).second) q.push_back(u);
  }
  return dist;
}

struct Tiny {
  const char* spec;
  std::int64_t n;
};

const Tiny kTiny[] = {{"lattice:d=1", 1}, {"lattice:d=1", 2}, {"lattice:d=1", 3}, {"lattice:d=1", 4}, {"lattice:d=2", 1},
                      {"lattice:d=2", 2}, {"dary:d=2", 1},    {"dary:d=2", 2},    {"comb", 2},        {"lattice:d=3", 2}};

void fast_checks(SuiteReport& rep, const SuiteOptions& opt) {
  run_check(rep, "mass conservation", [&](std::ostringstream& out) {
    Rng rng = substream(opt.seed, 1);
    double worst = 0;
    for (auto spec : {"lattice:d=2", "comb", "dary:d=2", "prodtree:d=2,k=1", "lamplighter"}) {
      auto mu = MassDist::unit(make_graph(spec));
      for (int i = 0; i < 300; ++i) random_topple(mu, rng, opt.topple);
      worst = std::max(worst, std::abs(mu.recompute_total() - 1.0));
    }
    out << "max |total - 1| = " << worst;
    return worst <= 1e-12;
  });

  run_check(rep, "second moment grows by the toppled mass", [&](std::ostringstream& out) {
    Rng rng = substream(opt.seed, 2);
    double worst = 0;
    for (int d = 1; d <= 3; ++d) {
      auto mu = MassDist::unit(make_graph("lattice:d=" + std::to_string(d)));
      double m2 = 0;
      for (int i = 0; i < 300; ++i) {
        auto v = random_support_vertex(mu, rng);
        const double m = mu.at(v) * std::uniform_int_distribution<int>(1, 4)(rng) / 4.0;
        opt.topple(mu, v, m);
        const double next = second_moment(mu);
        worst = std::max(worst, std::abs(next - m2 - m) / std::max(1.0, next));
        m2 = next;
      }
    }
    out << "max relative deviation " << worst;
    return worst <= 1e-12;
  });

  run_check(rep, "exact identities in rational mode", [&](std::ostringstream& out) {
    Rng rng = substream(opt.seed, 3);
    auto k1 = potential_kernel(1, 64, 1e-9);
    auto e = ExactMassDist::unit(make_graph("lattice:d=1"));
    auto z2 = ExactMassDist::unit(make_graph("lattice:d=2"));
    int bad = 0;
    for (int i = 0; i < 30; ++i) {
      auto v = random_support_vertex(e, rng);
      const Rational mv = e.at(v);
      const Rational m = mv * Rational(std::uniform_int_distribution<int>(1, 3)(rng)) / 3;
      const Rational before = energy(e, k1);
      e.topple(v, m);
      if (energy(e, k1) - before != 2 * m * mv - m * m) ++bad;
    }
    for (int i = 0; i < 100; ++i) {
      auto v = random_support_vertex(z2, rng);
      const Rational m = z2.at(v) * Rational(std::uniform_int_distribution<int>(1, 3)(rng)) / 3;
      const Rational before = second_moment(z2);
      z2.topple(v, m);
      if (second_moment(z2) - before != m) ++bad;
      if (z2.recompute_total() != 1) ++bad;
    }
    out << bad << " violations";
    return bad == 0;
  });

  run_check(rep, "topples at distinct vertices commute", [&](std::ostringstream& out) {
    auto g = make_graph("lattice:d=2");
    auto t = std::make_shared<VertexTable>(g);
    ExactMassDist a = ExactMassDist::point(t, t->origin());
    a.full_topple(t->origin());
    auto b = a;
    const auto x = t->intern(VertexKey{1, 0}), y = t->intern(VertexKey{0, 1});
    a.topple(x, Rational(1, 8));
    a.topple(y, Rational(1, 16));
    b.topple(y, Rational(1, 16));
    b.topple(x, Rational(1, 8));
    bool same = true;
    a.for_each([&](VertexId v, const Rational& m) { same &= b.at(v) == m; });
    b.for_each([&](VertexId v, const Rational& m) { same &= a.at(v) == m; });
    out << (same ? "equal" : "differ");
    return same;
  });

  run_check(rep, "distance matches breadth-first search", [&](std::ostringstream& out) {
    std::size_t checked = 0, bad = 0;
    for (auto spec : {"lattice:d=2", "lattice:d=3", "comb", "dary:d=3", "regtree:d=3", "prodtree:d=2,k=1", "lamplighter",
                      "gw:dist=1:0.5,2:0.5;seed=42"}) {
      auto g = make_graph(spec);
      for (const auto& [k, d] : bfs(*g, 5)) {
        ++checked;
        if (g->distance(k) != d) ++bad;
      }
    }
    out << bad << " mismatches over " << checked << " vertices";
    return bad == 0;
  });

  run_check(rep, "greedy volume bound", [&](std::ostringstream& out) {
    struct C {
      int d;
      std::int64_t n;
    };
    int runs = 0, bad = 0;
    for (auto c : {C{1, 4}, C{1, 8}, C{1, 16}, C{2, 4}, C{2, 8}, C{2, 12}, C{3, 3}, C{3, 5}}) {
      for (double p : {0.25, 0.5, 0.75}) {
        auto r = greedy(make_graph("lattice:d=" + std::to_string(c.d)), c.n, p);
        double fact = 1;
        for (int i = 2; i <= c.d; ++i) fact *= i;
        const double bound = std::pow(2.0, c.d) / ((1 - p) * fact) * std::pow(static_cast<double>(c.n), c.d + 2);
        ++runs;
        if (!r.terminated || static_cast<double>(r.moves) > bound) ++bad;
      }
    }
    out << bad << " violations over " << runs << " runs";
    return bad == 0;
  });

  run_check(rep, "round-robin engines agree", [&](std::ostringstream& out) {
    double worst = 0;
    bool moves_equal = true;
    std::vector<std::pair<GraphPtr, std::vector<VertexKey>>> cases;
    for (auto [spec, n] : {std::pair{"lattice:d=2", 5}, {"dary:d=2", 4}, {"lattice:d=1", 8}}) {
      auto g = make_graph(spec);
      cases.emplace_back(g, ball(*g, n));
    }
    cases.emplace_back(make_graph("comb"), comb_region(16, 2.0));
    for (auto& [g, region] : cases) {
      RoundRobinOptions ref;
      ref.engine = Engine::Reference;
      auto a = round_robin_killed_rw(g, region, 16);
      auto b = round_robin_killed_rw(g, region, 16, ref);
      worst = std::max(worst, max_discrepancy(a.dist, b.dist));
      moves_equal &= a.moves == b.moves;
    }
    out << "max difference " << worst << (moves_equal ? "" : ", move counts differ");
    return worst <= 1e-12 && moves_equal;
  });

  run_check(rep, "divisible sandpile is abelian", [&](std::ostringstream& out) {
    SandpileOptions rev;
    rev.order = SweepOrder::Reversed;
    auto a = sandpile_stabilize(2, 300, 1e-13), b = sandpile_stabilize(2, 300, 1e-13, rev);
    if (a.half_width != b.half_width) {
      out << "grids differ";
      return false;
    }
    double diff = 0;
    for (std::size_t i = 0; i < a.mass.size(); ++i) diff = std::max(diff, std::abs(a.mass[i] - b.mass[i]));
    out << "max difference " << diff;
    return diff <= 1e-10;
  });

  run_check(rep, "energy bound on random traces", [&](std::ostringstream& out) {
    Rng rng = substream(opt.seed, 4);
    auto k1 = potential_kernel(1, 64, 1e-9);
    auto k2 = potential_kernel(2, 20, 1e-8);
    int runs = 0, bad = 0;
    for (auto [spec, k, steps] : {std::tuple{"lattice:d=1", &k1, 30}, {"lattice:d=2", &k2, 10}}) {
      for (int trial = 0; trial < 100; ++trial) {
        auto mu0 = MassDist::unit(make_graph(spec));
        auto mu = mu0;
        mu.enable_trace();
        const int len = std::uniform_int_distribution<int>(1, steps)(rng);
        for (int i = 0; i < len; ++i) random_topple(mu, rng, engine_topple);
        ++runs;
        if (!check_energy_m2(mu0, mu.trace(), *k).ok) ++bad;
      }
    }
    out << bad << " violations over " << runs << " traces";
    return bad == 0;
  });

  run_check(rep, "speed and entropy identity", [&](std::ostringstream& out) {
    double worst = 0;
    for (int d = 1; d <= 6; ++d)
      for (int k = 1; k <= d; ++k) {
        if (d + k < 3) continue;  // T_1 x T_1 is Z^2: zero speed
        auto cf = closed_forms(d, k);
        worst = std::max(worst, std::abs(std::exp(cf.h / cf.ell) - cf.theta) / cf.theta);
      }
    out << "max relative error " << worst;
    return worst <= 1e-12;
  });

  run_check(rep, "exponent fit on exact power law", [&](std::ostringstream& out) {
    std::vector<double> n{2, 3, 5, 8, 13}, m;
    for (double v : n) m.push_back(v * v * v);
    auto f = fit_exponent(n, m, Axes::LogLog);
    out << "slope " << std::setprecision(15) << f.slope;
    return std::abs(f.slope - 3) <= 1e-12;
  });

  run_check(rep, "scan is reproducible", [&](std::ostringstream& out) {
    ExperimentConfig c;
    c.graph = "lattice:d=2";
    c.ns = {3, 4, 5, 6};
    c.tie = TieRule::Symmetric;
    std::ostringstream a, b;
    write_rows_csv(scan(c).rows, a);
    write_rows_csv(scan(c).rows, b);
    out << a.str().size() << " bytes";
    return a.str() == b.str();
  });
}

void oracle_checks(SuiteReport& rep) {
  run_check(rep, "greedy never beats the oracle", [&](std::ostringstream& out) {
    int runs = 0, bad = 0;
    for (const auto& t : kTiny) {
      for (const Rational& p : std::vector<Rational>{Rational(1, 4), Rational(1, 2), Rational(3, 4)}) {
        auto g = make_graph(t.spec);
        auto o = min_moves_exact(g, t.n, p, 12);
        for (auto tie : {TieRule::Lexicographic, TieRule::Symmetric}) {
          GreedyOptions go;
          go.tie = tie;
          auto r = greedy(g, t.n, p.get_d(), go);
          ++runs;
          if (o.moves ? static_cast<std::uint64_t>(*o.moves) > r.moves : r.moves <= 12) ++bad;
        }
      }
    }
    auto z = make_graph("lattice:d=1");
    const bool line = greedy(z, 1, 0.5).moves == 1 && min_moves_exact(z, 1, Rational(1, 2), 12).moves == 1 &&
                      greedy(z, 2, 0.5).moves == 3 && min_moves_exact(z, 2, Rational(1, 2), 12).moves == 3;
    out << bad << " violations over " << runs << " runs" << (line ? "" : "; Z line values wrong");
    return bad == 0 && line;
  });

  run_check(rep, "oracle agrees with plain enumeration", [&](std::ostringstream& out) {
    int runs = 0, bad = 0;
    for (const auto& t : kTiny) {
      for (const Rational& p : std::vector<Rational>{Rational(1, 8), Rational(1, 2)}) {
        auto g = make_graph(t.spec);
        ++runs;
        if (min_moves_exact(g, t.n, p, 6).moves != min_moves_exhaustive(g, t.n, p, 6).moves) ++bad;
      }
    }
    out << bad << " disagreements over " << runs << " instances";
    return bad == 0;
  });

  run_check(rep, "oracle is monotone in p", [&](std::ostringstream& out) {
    int bad = 0;
    for (const auto& t : kTiny) {
      auto g = make_graph(t.spec);
      int prev = 0;
      bool lost = false;
      for (int k = 0; k <= 8; ++k) {
        auto r = min_moves_exact(g, t.n, Rational(k, 8), 9);
        if (!r.moves) {
          lost = true;
          continue;
        }
        if (lost || *r.moves < prev) ++bad;
        prev = *r.moves;
      }
    }
    out << bad << " violations";
    return bad == 0;
  });
}

void full_checks(SuiteReport& rep) {
  run_check(rep, "Z greedy exponent", [&](std::ostringstream& out) {
    ExperimentConfig c;
    c.ns = {8, 12, 16, 24, 32, 48, 64};
    auto r = scan(c);
    out << "slope " << r.fit.slope;
    return r.fitted && r.fit.slope >= 2.8 && r.fit.slope <= 3.2;
  });

  run_check(rep, "binary tree greedy growth", [&](std::ostringstream& out) {
    ExperimentConfig c;
    c.graph = "dary:d=2";
    c.ns = {6, 7, 8, 9, 10, 11, 12, 13, 14};
    auto r = scan(c);
    out << "slope " << r.fit.slope << " vs ln 2";
    return r.fitted && std::abs(r.fit.slope - std::numbers::ln2) <= 0.15 * std::numbers::ln2;
  });

  run_check(rep, "planar potential kernel constant", [&](std::ostringstream& out) {
    auto k = potential_kernel(2, 30, 1e-9);
    double lo = 1e9, hi = -1e9;
    for (std::int64_t x = -30; x <= 30; ++x)
      for (std::int64_t y = -30; y <= 30; ++y) {
        const double r = std::hypot(double(x), double(y));
        if (r < 10 || r > 30) continue;
        const double kappa = k.a(std::vector<std::int64_t>{x, y}) - 2 / std::numbers::pi * std::log(r);
        lo = std::min(lo, kappa);
        hi = std::max(hi, kappa);
      }
    out << "kappa in [" << lo << ", " << hi << "]";
    return hi - lo < 0.01;
  });
}

}  // namespace

SuiteReport invariant_suite(Scope scope, const SuiteOptions& opt) {
  SuiteReport rep;
  rep.scope = scope;
  if (scope == Scope::Fast || scope == Scope::Full) fast_checks(rep, opt);
  if (scope == Scope::Oracle || scope == Scope::Full) oracle_checks(rep);
  if (scope == Scope::Full) full_checks(rep);
  return rep;
}

}  // namespace toppler
