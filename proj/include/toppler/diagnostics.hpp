#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "toppler/errors.hpp"
#include "toppler/graphs.hpp"
#include "toppler/kernels.hpp"
#include "toppler/mass.hpp"

namespace toppler {

// ---- moments ---------------------------------------------------------------

template <class S>
S second_moment(const BasicMassDist<S>& mu);
template <class S>
S avg_level(const BasicMassDist<S>& mu);

// A vertex at level <= level with mass >= d^-(level+1)/4, preferring larger
// mass. Rooted regular trees only.
std::optional<VertexId> find_large_mass(const MassDist& mu, int level);

// ---- potential kernel ------------------------------------------------------

// a(x) on the cube ||x||_inf <= L (and g(x) for d >= 3), stored on the
// fundamental domain of the cube's symmetry group.
struct KernelTable {
  int d = 1;
  int L = 0;
  int box_radius = 0;  // absorbing box used by the walk
  double tol = 0;      // requested
  double achieved = 0; // last change of the accelerated estimate
  std::uint64_t iterations = 0;
  bool converged = true;
  double g_origin = std::nan("");  // d >= 3
  double tail_ratio = std::nan("");

  std::shared_ptr<const SymmetricBoxWalk> cells;  // indexing only
  std::vector<double> a_values;    // accelerated
  std::vector<double> a_raw;       // partial sums, no tail
  std::vector<double> g_values;    // d >= 3

  bool covers(std::span<const std::int64_t> x) const;
  double a(std::span<const std::int64_t> x) const;  // throws RangeError
  double g(std::span<const std::int64_t> x) const;
  void write_csv(std::ostream& os) const;
};

struct KernelOptions {
  int pad = -1;                        // defaults to 2L
  std::uint64_t max_iterations = 4'000'000;
};

KernelTable potential_kernel(int d, int L, double tol, KernelOptions opt = {});

// sum_k P(X_k = o) for simple random walk on Z^d, d >= 3.
double return_green_origin(int d, int horizon = 4096);

// ---- energy ----------------------------------------------------------------

template <class S>
S energy(const BasicMassDist<S>& mu, const KernelTable& k);

struct EnergyCheck {
  std::uint64_t t = 0;
  double lhs = 0;  // t (E_t - E_0)
  double rhs = 0;  // (M2_t - M2_0)^2
  double slack = 0;
  double tolerance = 0;
  bool ok = true;
};

// Replays `trace` from mu0 and compares both sides of the energy bound.
EnergyCheck check_energy_m2(const MassDist& mu0, const RunTrace& trace, const KernelTable& k);

// ---- random walk statistics ------------------------------------------------

enum class StatKind { Speed, ExitTime, TransitionProb, GreenDecay };

struct RwStats {
  StatKind kind = StatKind::Speed;
  double estimate = 0;
  double std_error = 0;
  std::uint64_t samples = 0;
  // Speed only: per-replica least-squares slope of d(X_s) against
  // (s, sqrt(s), 1) at ten checkpoints, which removes the diffusive bias a
  // recurrent factor such as T_1 = Z adds to d(X_t)/t.
  double asymptotic = std::nan("");
  double asymptotic_stderr = std::nan("");
};

RwStats mc_speed(const Graph& g, std::uint64_t t, std::uint64_t samples, std::uint64_t seed);

double exact_exit_time(const Graph& g, const std::vector<VertexKey>& region);
RwStats mc_exit_time(const Graph& g, const std::vector<VertexKey>& region, std::uint64_t samples, std::uint64_t seed,
                     std::uint64_t step_cap = 10'000'000);

struct ClosedForms {
  double ell, h, theta;
};
ClosedForms closed_forms(int d, int k);

struct GreenShell {
  std::int64_t distance = 0;
  double g_hat = 0;
  double std_error = 0;
  std::uint64_t visits = 0;
};

struct GreenDecay {
  std::vector<GreenShell> shells;   // kept shells
  std::vector<std::int64_t> dropped;  // shells with no visits
  double slope = 0, intercept = 0, slope_stderr = 0;
  std::uint64_t samples = 0, walk_length = 0;
};

// Visit counts to (lamps off, lighter at +-k) over walks of fixed length.
GreenDecay mc_green_decay(const Graph& g, std::int64_t max_dist, std::uint64_t samples, std::uint64_t seed,
                          std::uint64_t walk_length = 400);

// ---- least squares ---------------------------------------------------------

struct LineFit {
  double slope = 0, intercept = 0, slope_stderr = 0, residual_max = 0;
};
LineFit fit_line(std::span<const double> x, std::span<const double> y);

}  // namespace toppler
