#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "toppler/diagnostics.hpp"
#include "toppler/strategies.hpp"

namespace toppler {

// How a scaling sweep is fitted: log(moves) against log(n) for polynomial
// families, against n for exponential ones.
enum class Axes { LogLog, LinearLog };

Axes axes_for(const GraphSpec& spec);
std::string to_string(Axes a);

struct ExperimentConfig {
  std::string graph = "lattice:d=1";
  std::string strategy = "greedy";
  std::vector<std::int64_t> ns;
  double p = 0.5;
  TieRule tie = TieRule::Lexicographic;
  std::vector<std::uint64_t> seeds{0};
  std::uint64_t budget = kDefaultBudget;
  std::string out_dir;   // empty: nothing written
  double comb_c = 2.0;   // comb strategy width constant
  bool timing = false;   // wall_ms stays 0 unless set, keeping CSVs reproducible

  void validate() const;  // throws ParameterError
};

// One strategy run on one instance.
struct RunSpec {
  std::string graph;
  std::string strategy;
  std::int64_t n = 0;
  double p = 0.5;
  TieRule tie = TieRule::Lexicographic;
  std::uint64_t budget = kDefaultBudget;
  std::uint64_t seed = 0;
  double comb_c = 2.0;
};

extern const std::vector<std::string> kStrategies;

// greedy | roundrobin | comb | sandpile-smooth | restricted
RunResult run_strategy(const RunSpec& spec);

struct RunRow {
  std::string graph, strategy;
  std::int64_t n = 0;
  double p = 0;
  std::uint64_t seed = 0;
  std::uint64_t moves = 0;
  double wall_ms = 0;
  bool terminated = false;
  bool budget_exhausted = false;
};

struct ScalingReport {
  ExperimentConfig config;
  std::vector<RunRow> rows;      // sorted by (n, seed)
  std::vector<RunRow> excluded;  // not terminated; left out of the fit
  Axes axes = Axes::LogLog;
  bool fitted = false;
  LineFit fit;
};

// Least squares on the transformed axes; needs >= 3 rows with positive values.
LineFit fit_exponent(std::span<const double> n, std::span<const double> moves, Axes axes);

// Runs every (n, seed) row, concurrently when threads allow, and fits the
// terminated ones. Writes scan.csv and report.txt when out_dir is set.
ScalingReport scan(const ExperimentConfig& config);

// graph,strategy,n,p,seed,moves,wall_ms,terminated
void write_rows_csv(const std::vector<RunRow>& rows, std::ostream& os);
void write_report(const ScalingReport& r, std::ostream& os);

// ---- rendering ---------------------------------------------------------------

enum class Scale { Linear, Log };
Scale parse_scale(std::string_view s);

// Binary PGM (P5, maxval 255) of the window [-bound, bound]^2, y up; one
// pixel per vertex, darker for more mass. Z^1 renders as a single row.
// Lattice and comb only.
void render_heatmap(const MassDist& mu, std::int64_t bound, const std::string& path, Scale scale = Scale::Linear);
std::vector<std::uint8_t> heatmap_pixels(const MassDist& mu, std::int64_t bound, Scale scale);

// ---- invariant suite ---------------------------------------------------------

enum class Scope { Fast, Oracle, Full };
Scope parse_scope(std::string_view s);

using ToppleRule = std::function<void(MassDist&, VertexId, double)>;

// The engine's own topple.
void engine_topple(MassDist& mu, VertexId v, double m);
// Mutant that hands each neighbour m/(deg+1); for checking that the suite
// notices.
void faulty_topple(MassDist& mu, VertexId v, double m);

struct SuiteOptions {
  ToppleRule topple = engine_topple;
  std::uint64_t seed = 1;
};

struct CheckResult {
  std::string name;
  bool ok = false;
  std::string detail;
  double seconds = 0;
};

struct SuiteReport {
  Scope scope = Scope::Fast;
  std::vector<CheckResult> checks;

  bool ok() const;
  std::string json() const;
};

SuiteReport invariant_suite(Scope scope, const SuiteOptions& opt = {});

}  // namespace toppler
