#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "toppler/harness.hpp"
#include "toppler/oracle.hpp"

using namespace toppler;

namespace {

enum Exit { kOk = 0, kInvariant = 1, kUsage = 2, kBudget = 3 };

// "1/2", "3", or a decimal such as "0.25", read exactly.
Rational parse_rational(const std::string& s) {
  if (s.find('/') != std::string::npos) {
    Rational q(s);
    q.canonicalize();
    return q;
  }
  const auto dot = s.find('.');
  if (dot == std::string::npos) return Rational(s);
  std::string digits = s.substr(0, dot) + s.substr(dot + 1);
  std::string den = "1" + std::string(s.size() - dot - 1, '0');
  Rational q{mpz_class(digits), mpz_class(den)};
  q.canonicalize();
  return q;
}

void print_run(const RunResult& r) {
  std::cout << "moves: " << r.moves << "\nrounds: " << r.rounds << "\nterminated: " << std::boolalpha << r.terminated
            << "\nbudget_exhausted: " << r.budget_exhausted << "\nunreachable: " << r.unreachable
            << "\ntarget_mass: " << std::setprecision(12) << r.target_mass << "\nstranded: " << r.stranded
            << "\nsupport: " << r.dist.support_size() << '\n';
}

void write_dump(const MassDist& mu, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path + " for writing");
  write_csv(mu, os);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Controlled diffusion toppling experiments"};
  app.require_subcommand(1);

  // run
  RunSpec run;
  std::string run_tie = "lex", dump;
  auto* run_cmd = app.add_subcommand("run", "One strategy run");
  run_cmd->add_option("--graph", run.graph, "graph spec, e.g. lattice:d=2")->required();
  run_cmd->add_option("--n", run.n, "target radius")->required();
  run_cmd->add_option("--p", run.p, "mass to move outside B_n")->capture_default_str();
  run_cmd->add_option("--strategy", run.strategy)
      ->check(CLI::IsMember({"greedy", "roundrobin", "comb", "sandpile-smooth", "restricted"}))
      ->default_val("greedy");
  run_cmd->add_option("--tie", run_tie)->check(CLI::IsMember({"lex", "sym"}))->capture_default_str();
  run_cmd->add_option("--budget", run.budget)->capture_default_str();
  run_cmd->add_option("--seed", run.seed)->capture_default_str();
  run_cmd->add_option("--comb-c", run.comb_c, "comb rectangle width constant")->capture_default_str();
  run_cmd->add_option("--dump", dump, "write the final distribution as CSV");

  // scan
  ExperimentConfig cfg;
  std::string scan_tie = "lex";
  auto* scan_cmd = app.add_subcommand("scan", "Scaling sweep over n");
  scan_cmd->add_option("--graph", cfg.graph)->required();
  scan_cmd->add_option("--strategy", cfg.strategy)->capture_default_str();
  scan_cmd->add_option("--n", cfg.ns, "comma-separated, increasing")->delimiter(',')->required();
  scan_cmd->add_option("--p", cfg.p)->capture_default_str();
  scan_cmd->add_option("--tie", scan_tie)->check(CLI::IsMember({"lex", "sym"}))->capture_default_str();
  scan_cmd->add_option("--seeds", cfg.seeds)->delimiter(',');
  scan_cmd->add_option("--budget", cfg.budget)->capture_default_str();
  scan_cmd->add_option("--comb-c", cfg.comb_c)->capture_default_str();
  scan_cmd->add_option("--out", cfg.out_dir, "directory for scan.csv and report.txt");
  scan_cmd->add_flag("--timing", cfg.timing, "record wall_ms (makes the CSV non-reproducible)");

  // oracle
  std::string o_graph, o_p = "1/2";
  std::int64_t o_n = 1;
  int o_cap = kOracleMaxDepth;
  auto* oracle_cmd = app.add_subcommand("oracle", "Exact minimum number of moves on a tiny instance");
  oracle_cmd->add_option("--graph", o_graph)->required();
  oracle_cmd->add_option("--n", o_n)->required();
  oracle_cmd->add_option("--p", o_p, "fraction, e.g. 1/2 or 0.25")->capture_default_str();
  oracle_cmd->add_option("--cap", o_cap, "depth cap")->capture_default_str();

  // kernel
  int k_d = 2, k_L = 30;
  double k_tol = 1e-9;
  std::string k_out;
  auto* kernel_cmd = app.add_subcommand("kernel", "Potential kernel table");
  kernel_cmd->add_option("--d", k_d)->capture_default_str();
  kernel_cmd->add_option("--L", k_L)->capture_default_str();
  kernel_cmd->add_option("--tol", k_tol)->capture_default_str();
  kernel_cmd->add_option("--out", k_out, "CSV path");

  // stats
  std::string s_graph, s_kind = "speed";
  std::uint64_t s_t = 1000, s_samples = 10000, s_seed = 1, s_walk = 400;
  std::int64_t s_n = 4, s_dist = 6;
  auto* stats_cmd = app.add_subcommand("stats", "Random walk statistics");
  stats_cmd->add_option("--graph", s_graph)->required();
  stats_cmd->add_option("--kind", s_kind)->check(CLI::IsMember({"speed", "exit", "green"}))->capture_default_str();
  stats_cmd->add_option("--t", s_t, "walk length (speed)")->capture_default_str();
  stats_cmd->add_option("--samples", s_samples)->capture_default_str();
  stats_cmd->add_option("--seed", s_seed)->capture_default_str();
  stats_cmd->add_option("--n", s_n, "ball radius (exit)")->capture_default_str();
  stats_cmd->add_option("--max-dist", s_dist, "largest lighter offset (green)")->capture_default_str();
  stats_cmd->add_option("--walk-length", s_walk, "(green)")->capture_default_str();

  // render
  std::string r_graph = "lattice:d=2", r_tie = "sym", r_scale = "linear", r_out, r_input;
  std::uint64_t r_sweeps = 100000;
  std::int64_t r_bound = -1;
  auto* render_cmd = app.add_subcommand("render", "PGM heatmap of greedy sweeps or a dumped distribution");
  render_cmd->add_option("--graph", r_graph)->capture_default_str();
  render_cmd->add_option("--sweeps", r_sweeps)->capture_default_str();
  render_cmd->add_option("--tie", r_tie)->check(CLI::IsMember({"lex", "sym"}))->capture_default_str();
  render_cmd->add_option("--bound", r_bound, "half-width of the window; default fits the support");
  render_cmd->add_option("--scale", r_scale)->check(CLI::IsMember({"linear", "log"}))->capture_default_str();
  render_cmd->add_option("--input", r_input, "distribution CSV instead of running sweeps");
  render_cmd->add_option("--out", r_out)->required();

  // check
  std::string c_scope = "fast", c_json;
  bool c_fault = false;
  auto* check_cmd = app.add_subcommand("check", "Invariant suite");
  check_cmd->add_option("--scope", c_scope)->check(CLI::IsMember({"fast", "oracle", "full"}))->capture_default_str();
  check_cmd->add_option("--json", c_json, "also write the summary here");
  check_cmd->add_flag("--inject-fault", c_fault, "topple with m/(deg+1) per neighbour");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*run_cmd) {
      run.tie = parse_tie(run_tie);
      auto r = run_strategy(run);
      print_run(r);
      if (!dump.empty()) write_dump(r.dist, dump);
      return r.budget_exhausted ? kBudget : kOk;
    }
    if (*scan_cmd) {
      cfg.tie = parse_tie(scan_tie);
      auto rep = scan(cfg);
      write_report(rep, std::cout);
      if (cfg.out_dir.empty()) write_rows_csv(rep.rows, std::cout);
      for (const auto& r : rep.rows)
        if (r.budget_exhausted) return kBudget;
      return kOk;
    }
    if (*oracle_cmd) {
      auto r = min_moves_exact(make_graph(o_graph), o_n, parse_rational(o_p), o_cap);
      std::cout << "ball: " << r.ball_size << "\ncap: " << r.depth_cap << "\nnodes: " << r.nodes << '\n';
      if (!r.moves) {
        std::cout << "moves: none within cap\n";
        return kOk;
      }
      auto g = make_graph(o_graph);
      std::cout << "moves: " << *r.moves << "\nwitness:";
      for (const auto& k : r.witness) std::cout << ' ' << g->encode(k);
      std::cout << '\n';
      return kOk;
    }
    if (*kernel_cmd) {
      auto k = potential_kernel(k_d, k_L, k_tol);
      std::cout << "d: " << k.d << "\nL: " << k.L << "\nbox_radius: " << k.box_radius << "\niterations: " << k.iterations
                << "\nachieved: " << k.achieved << "\nconverged: " << std::boolalpha << k.converged << '\n';
      if (k.d >= 3) std::cout << "g_origin: " << std::setprecision(10) << k.g_origin << '\n';
      if (!k_out.empty()) {
        std::ofstream os(k_out, std::ios::binary);
        if (!os) throw IoError("cannot open " + k_out + " for writing");
        k.write_csv(os);
      }
      return k.converged ? kOk : kBudget;
    }
    if (*stats_cmd) {
      auto g = make_graph(s_graph);
      std::cout << std::setprecision(10);
      if (s_kind == "speed") {
        auto r = mc_speed(*g, s_t, s_samples, s_seed);
        std::cout << "kind,t,samples,estimate,std_error,asymptotic,asymptotic_stderr\n"
                  << "speed," << s_t << ',' << r.samples << ',' << r.estimate << ',' << r.std_error << ',' << r.asymptotic << ','
                  << r.asymptotic_stderr << '\n';
      } else if (s_kind == "exit") {
        auto region = ball(*g, s_n);
        auto r = mc_exit_time(*g, region, s_samples, s_seed);
        std::cout << "kind,n,samples,estimate,std_error\n"
                  << "exit," << s_n << ',' << r.samples << ',' << r.estimate << ',' << r.std_error << '\n';
      } else {
        auto r = mc_green_decay(*g, s_dist, s_samples, s_seed, s_walk);
        std::cout << "distance,g_hat,std_error,visits\n";
        for (const auto& sh : r.shells) std::cout << sh.distance << ',' << sh.g_hat << ',' << sh.std_error << ',' << sh.visits << '\n';
        std::cout << "# slope " << r.slope << " stderr " << r.slope_stderr << " dropped " << r.dropped.size() << '\n';
      }
      return kOk;
    }
    if (*render_cmd) {
      auto g = make_graph(r_graph);
      std::optional<MassDist> mu;
      if (!r_input.empty()) {
        std::ifstream is(r_input);
        if (!is) throw IoError("cannot read " + r_input);
        mu = read_csv(g, is);
      } else {
        GreedyOptions o;
        o.tie = parse_tie(r_tie);
        mu = greedy_sweeps(g, r_sweeps, o).dist;
      }
      std::int64_t bound = r_bound;
      if (bound < 0) {
        bound = 0;
        mu->for_each([&](VertexId v, double) {
          for (auto c : mu->table().key(v).c) bound = std::max<std::int64_t>(bound, std::abs(c));
        });
      }
      render_heatmap(*mu, bound, r_out, parse_scale(r_scale));
      std::cout << "wrote " << r_out << " (" << 2 * bound + 1 << " px wide)\n";
      return kOk;
    }
    if (*check_cmd) {
      SuiteOptions opt;
      if (c_fault) opt.topple = faulty_topple;
      auto rep = invariant_suite(parse_scope(c_scope), opt);
      const auto js = rep.json();
      std::cout << js << '\n';
      if (!c_json.empty()) {
        std::ofstream os(c_json, std::ios::binary);
        if (!os) throw IoError("cannot open " + c_json + " for writing");
        os << js << '\n';
      }
      return rep.ok() ? kOk : kInvariant;
    }
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const StructuralError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const Unsupported& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ResourceLimit& e) {
    std::cerr << "refused: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << '\n';
    return kInvariant;
  }
  return kOk;
}
