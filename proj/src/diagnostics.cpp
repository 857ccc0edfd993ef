#include "toppler/diagnostics.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <unordered_map>

namespace toppler {

namespace {

void require_lattice(const Graph& g, const char* what) {
  if (g.spec().family != Family::Lattice) throw Unsupported(std::string(what) + " needs a lattice graph, got " + g.spec().to_string());
}

template <class S>
S from_double(double x) {
  if constexpr (std::is_same_v<S, double>)
    return x;
  else
    return Rational(x);
}

struct Neumaier {
  double sum = 0, c = 0;
  void add(double x) {
    const double t = sum + x;
    c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

double mean(std::span<const double> v) {
  Neumaier s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

double std_error(std::span<const double> v, double m) {
  if (v.size() < 2) return 0.0;
  Neumaier s;
  for (double x : v) s.add((x - m) * (x - m));
  return std::sqrt(s.value() / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

}  // namespace

// ---- moments ---------------------------------------------------------------

template <class S>
S second_moment(const BasicMassDist<S>& mu) {
  auto& t = mu.table();
  require_lattice(t.graph(), "second_moment");
  if constexpr (std::is_same_v<S, double>) {
    Neumaier acc;
    mu.for_each([&](VertexId v, double m) {
      double r2 = 0;
      for (auto x : t.key(v).c) r2 += static_cast<double>(x) * static_cast<double>(x);
      acc.add(m * r2);
    });
    return acc.value();
  } else {
    S acc(0);
    mu.for_each([&](VertexId v, const S& m) {
      long r2 = 0;
      for (auto x : t.key(v).c) r2 += static_cast<long>(x * x);
      acc += m * S(r2);
    });
    return acc;
  }
}

template <class S>
S avg_level(const BasicMassDist<S>& mu) {
  auto& t = mu.table();
  if (!t.graph().spec().rooted_tree()) throw Unsupported("avg_level needs a rooted tree");
  S acc(0);
  mu.for_each([&](VertexId v, const S& m) { acc += m * S(static_cast<long>(t.distance(v))); });
  return acc;
}

template double second_moment(const MassDist&);
template Rational second_moment(const ExactMassDist&);
template double avg_level(const MassDist&);
template Rational avg_level(const ExactMassDist&);

std::optional<VertexId> find_large_mass(const MassDist& mu, int level) {
  auto& t = mu.table();
  const auto& sp = t.graph().spec();
  if (sp.family != Family::DaryTree && sp.family != Family::RegularTree) throw Unsupported("find_large_mass needs a regular rooted tree");
  const double threshold = std::pow(static_cast<double>(sp.d), -(level + 1)) / 4.0;
  std::optional<VertexId> best;
  mu.for_each([&](VertexId v, double m) {
    if (t.distance(v) > level || m < threshold) return;
    if (!best || m > mu.at(*best) || (m == mu.at(*best) && t.key(v) < t.key(*best))) best = v;
  });
  return best;
}

// ---- potential kernel ------------------------------------------------------

bool KernelTable::covers(std::span<const std::int64_t> x) const {
  if (static_cast<int>(x.size()) != d) return false;
  for (auto v : x)
    if (v > L || v < -L) return false;
  return true;
}

double KernelTable::a(std::span<const std::int64_t> x) const {
  if (!covers(x)) throw RangeError("kernel lookup outside the box of radius " + std::to_string(L));
  return a_values[cells->cell_of(x)];
}

double KernelTable::g(std::span<const std::int64_t> x) const {
  if (d < 3) throw Unsupported("g is only tabulated for d >= 3");
  if (!covers(x)) throw RangeError("kernel lookup outside the box of radius " + std::to_string(L));
  return g_values[cells->cell_of(x)];
}

void KernelTable::write_csv(std::ostream& os) const {
  for (int i = 0; i < d; ++i) os << "x" << i + 1 << ",";
  os << "a,a_raw";
  if (d >= 3) os << ",g";
  os << "\n";
  os.precision(17);
  std::vector<std::int64_t> x(d, -L);
  while (true) {
    const auto c = cells->cell_of(x);
    for (auto v : x) os << v << ",";
    os << a_values[c] << "," << a_raw[c];
    if (d >= 3) os << "," << g_values[c];
    os << "\n";
    int i = d - 1;
    while (i >= 0 && x[i] == L) x[i--] = -L;
    if (i < 0) break;
    ++x[i];
  }
}

double return_green_origin(int d, int horizon) {
  if (d < 3) throw ParameterError("the walk is recurrent for d < 3");
  if (horizon < 256 || horizon % 16) throw ParameterError("horizon must be a multiple of 16 and >= 256");
  const int K = horizon;
  std::vector<double> lf(K + 1);
  for (int i = 0; i <= K; ++i) lf[i] = std::lgamma(i + 1.0);
  std::vector<double> q(K + 1, 0.0);
  for (int i = 0; i <= K; i += 2) q[i] = std::exp(lf[i] - 2 * lf[i / 2] - i * std::numbers::ln2);
  std::vector<double> P = q, next(K + 1);
  for (int m = 2; m <= d; ++m) {
    const double lp = std::log(1.0 / m), lq = std::log(1.0 - 1.0 / m);
    for (int k = 0; k <= K; k += 2) {
      double acc = 0;
      for (int i = 0; i <= k; i += 2) acc += std::exp(lf[k] - lf[i] - lf[k - i] + i * lp + (k - i) * lq) * q[i] * P[k - i];
      next[k] = acc;
    }
    std::swap(P, next);
  }
  // Partial sums up to 2J for four J, extrapolated in J^-((d-2)/2 + r).
  Eigen::Matrix4d A;
  Eigen::Vector4d b;
  for (int row = 0; row < 4; ++row) {
    const int J = (K / 2) >> (3 - row);
    double s = 0;
    for (int k = 0; k <= 2 * J; k += 2) s += P[k];
    A(row, 0) = 1.0;
    for (int r = 0; r < 3; ++r) A(row, r + 1) = std::pow(static_cast<double>(J), -((d - 2) / 2.0 + r));
    b(row) = s;
  }
  return A.fullPivLu().solve(b)(0);
}

KernelTable potential_kernel(int d, int L, double tol, KernelOptions opt) {
  if (d < 1) throw ParameterError("d must be >= 1");
  if (L < 1 || L > 64) throw ParameterError("L must lie in [1, 64]");
  if (!(tol > 0)) throw ParameterError("tol must be positive");
  KernelTable t;
  t.d = d;
  t.L = L;
  t.tol = tol;
  t.cells = std::make_shared<SymmetricBoxWalk>(d, L);
  const std::size_t n = t.cells->cells();
  if (d == 1) {
    t.a_values.resize(n);
    for (std::size_t c = 0; c < n; ++c) t.a_values[c] = t.cells->point(c)[0];
    t.a_raw = t.a_values;
    t.achieved = 0;
    return t;
  }

  const int pad = opt.pad < 0 ? 2 * L : opt.pad;
  if (pad < 1) throw ParameterError("pad must be >= 1");
  const int R = L + pad;
  t.box_radius = R;
  SymmetricBoxWalk W(d, R);
  std::vector<std::int64_t> map(n);
  for (std::size_t c = 0; c < n; ++c) {
    auto p = t.cells->point(c);
    std::vector<std::int64_t> x(p.begin(), p.end());
    map[c] = W.cell_of(x);
  }

  auto survival = [&](const std::vector<double>& v) {
    Neumaier s;
    for (std::size_t c = 0; c < v.size(); ++c)
      if (v[c] != 0) s.add(v[c] * static_cast<double>(W.orbit(c)));
    return s.value();
  };

  std::vector<double> p = W.delta_origin(), q;
  std::vector<double> S(n, 0.0), D(n, 0.0), acc(n), prev;
  const std::uint64_t check = std::max<std::uint64_t>(8, static_cast<std::uint64_t>(R) * R / 64);
  const std::uint64_t min_pairs = static_cast<std::uint64_t>(R);
  std::uint64_t pairs = 0;
  int stable = 0;
  double m_before = 0;
  t.converged = false;
  while (t.iterations < opt.max_iterations) {
    const bool measure = (pairs + 1) % check == 0;
    if (measure) m_before = survival(p);
    for (std::size_t c = 0; c < n; ++c) D[c] = p[map[c]];
    W.step(p, q);
    for (std::size_t c = 0; c < n; ++c) {
      D[c] += q[map[c]];
      S[c] += D[c];
    }
    W.step(q, p);
    t.iterations += 2;
    ++pairs;
    if (!measure) continue;
    const double rho = m_before > 0 ? survival(p) / m_before : 0.0;
    if (!(rho > 0 && rho < 1)) continue;
    t.tail_ratio = rho;
    const double f = rho / (1 - rho);
    for (std::size_t c = 0; c < n; ++c) acc[c] = S[c] + D[c] * f;
    const double at_origin = acc[0];
    for (std::size_t c = 0; c < n; ++c) acc[c] = at_origin - acc[c];
    if (!prev.empty()) {
      double diff = 0;
      for (std::size_t c = 0; c < n; ++c) diff = std::max(diff, std::abs(acc[c] - prev[c]));
      t.achieved = diff;
      stable = (diff < tol && pairs >= min_pairs) ? stable + 1 : 0;
    }
    prev = acc;
    if (stable >= 2) {
      t.converged = true;
      break;
    }
  }
  if (prev.empty()) {
    prev.resize(n);
    for (std::size_t c = 0; c < n; ++c) prev[c] = S[0] - S[c];
    t.achieved = std::numeric_limits<double>::infinity();
  }
  t.a_values = prev;
  t.a_values[0] = 0.0;
  t.a_raw.resize(n);
  for (std::size_t c = 0; c < n; ++c) t.a_raw[c] = S[0] - S[c];
  if (d >= 3) {
    t.g_origin = return_green_origin(d);
    t.g_values.resize(n);
    for (std::size_t c = 0; c < n; ++c) t.g_values[c] = t.g_origin - t.a_values[c];
  }
  return t;
}

// ---- energy ----------------------------------------------------------------

template <class S>
S energy(const BasicMassDist<S>& mu, const KernelTable& k) {
  auto& t = mu.table();
  require_lattice(t.graph(), "energy");
  if (t.graph().spec().d != k.d) throw ParameterError("kernel dimension does not match the graph");
  std::vector<VertexId> ids;
  std::vector<S> m;
  mu.for_each([&](VertexId v, const S& x) {
    ids.push_back(v);
    m.push_back(x);
  });
  S e(0);
  std::vector<std::int64_t> diff(k.d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const auto& xi = t.key(ids[i]).c;
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      const auto& xj = t.key(ids[j]).c;
      for (int c = 0; c < k.d; ++c) diff[c] = xi[c] - xj[c];
      e += S(2) * from_double<S>(k.a(diff)) * m[i] * m[j];
    }
  }
  return e;
}

template double energy(const MassDist&, const KernelTable&);
template Rational energy(const ExactMassDist&, const KernelTable&);

EnergyCheck check_energy_m2(const MassDist& mu0, const RunTrace& trace, const KernelTable& k) {
  EnergyCheck r;
  MassDist mu = mu0;
  for (const auto& rec : trace.records) mu.topple(rec.vertex, rec.mass);
  r.t = trace.records.size();
  const double dE = energy(mu, k) - energy(mu0, k);
  const double dM = second_moment(mu) - second_moment(mu0);
  r.lhs = static_cast<double>(r.t) * dE;
  r.rhs = dM * dM;
  r.slack = r.lhs - r.rhs;
  const double kernel_err = k.d == 1 ? 0.0 : 10.0 * std::max(k.tol, k.achieved);
  r.tolerance = 2.0 * static_cast<double>(r.t) * kernel_err + 1e-9 * std::max(1.0, r.rhs);
  r.ok = r.slack >= -r.tolerance;
  return r;
}

// ---- random walk statistics ------------------------------------------------

namespace {

struct SpeedSample {
  double raw = 0, fit = 0;
};

}  // namespace

RwStats mc_speed(const Graph& g, std::uint64_t t, std::uint64_t samples, std::uint64_t seed) {
  if (t == 0 || samples == 0) throw ParameterError("mc_speed needs t >= 1 and samples >= 1");
  std::vector<std::uint64_t> marks;
  Eigen::RowVectorXd w;
  const bool fit = t >= 30;
  if (fit) {
    Eigen::MatrixXd X(10, 3);
    for (int j = 1; j <= 10; ++j) {
      marks.push_back(t * j / 10);
      const double s = static_cast<double>(marks.back());
      X(j - 1, 0) = s;
      X(j - 1, 1) = std::sqrt(s);
      X(j - 1, 2) = 1.0;
    }
    Eigen::MatrixXd pinv = (X.transpose() * X).inverse() * X.transpose();
    w = pinv.row(0);
  }
  auto out = replicas<SpeedSample>(samples, seed, [&](std::uint64_t, Rng& rng) {
    auto walker = g.walker();
    SpeedSample s;
    std::size_t next = 0;
    for (std::uint64_t step = 1; step <= t; ++step) {
      walker->step(rng);
      if (fit && next < marks.size() && marks[next] == step) s.fit += w(static_cast<Eigen::Index>(next++)) * static_cast<double>(walker->distance());
    }
    s.raw = static_cast<double>(walker->distance()) / static_cast<double>(t);
    return s;
  });
  std::vector<double> raw(samples), fitted(samples);
  for (std::size_t i = 0; i < samples; ++i) {
    raw[i] = out[i].raw;
    fitted[i] = out[i].fit;
  }
  RwStats r;
  r.kind = StatKind::Speed;
  r.samples = samples;
  r.estimate = mean(raw);
  r.std_error = std_error(raw, r.estimate);
  if (fit) {
    r.asymptotic = mean(fitted);
    r.asymptotic_stderr = std_error(fitted, r.asymptotic);
  }
  return r;
}

double exact_exit_time(const Graph& g, const std::vector<VertexKey>& region) {
  if (region.size() > 10'000) throw ResourceLimit("exact exit time is limited to 10^4 unknowns, got " + std::to_string(region.size()));
  std::unordered_map<VertexKey, int, VertexKeyHash> index;
  for (const auto& v : region) {
    g.require_valid(v);
    index.emplace(v, static_cast<int>(index.size()));
  }
  auto o = index.find(g.origin());
  if (o == index.end()) return 0.0;
  const int n = static_cast<int>(index.size());
  std::vector<Eigen::Triplet<double>> trips;
  for (const auto& [v, i] : index) {
    trips.emplace_back(i, i, 1.0);
    auto nb = g.neighbors(v);
    const double w = 1.0 / static_cast<double>(nb.size());
    for (const auto& u : nb) {
      auto it = index.find(u);
      if (it != index.end()) trips.emplace_back(i, it->second, -w);
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(A);
  if (lu.info() != Eigen::Success) throw std::runtime_error("exit-time system could not be factorized");
  Eigen::VectorXd rhs = Eigen::VectorXd::Ones(n);
  Eigen::VectorXd h = lu.solve(rhs);
  return h(o->second);
}

RwStats mc_exit_time(const Graph& g, const std::vector<VertexKey>& region, std::uint64_t samples, std::uint64_t seed,
                     std::uint64_t step_cap) {
  if (samples == 0) throw ParameterError("samples must be >= 1");
  std::unordered_set<VertexKey, VertexKeyHash> inside(region.begin(), region.end());
  auto out = replicas<double>(samples, seed, [&](std::uint64_t, Rng& rng) {
    auto walker = g.walker();
    std::uint64_t steps = 0;
    while (inside.contains(walker->key())) {
      walker->step(rng);
      if (++steps > step_cap) throw ResourceLimit("exit-time replica exceeded the step cap");
    }
    return static_cast<double>(steps);
  });
  RwStats r;
  r.kind = StatKind::ExitTime;
  r.samples = samples;
  r.estimate = mean(out);
  r.std_error = std_error(out, r.estimate);
  return r;
}

ClosedForms closed_forms(int d, int k) {
  if (!(d >= k && k >= 1 && d + k >= 3)) throw ParameterError("closed forms need d >= k >= 1 and d + k >= 3");
  const double D = d, K = k;
  ClosedForms c;
  c.ell = (D + K - 2) / (D + K + 2);
  c.h = (D - 1) / (D + K + 2) * std::log(D) + (K - 1) / (D + K + 2) * std::log(K);
  c.theta = std::pow(D, (D - 1) / (D + K - 2)) * std::pow(K, (K - 1) / (D + K - 2));
  if (std::abs(std::exp(c.h / c.ell) - c.theta) > 1e-12 * c.theta) throw std::logic_error("exp(h/l) != theta");
  return c;
}

GreenDecay mc_green_decay(const Graph& g, std::int64_t max_dist, std::uint64_t samples, std::uint64_t seed,
                          std::uint64_t walk_length) {
  if (g.spec().family != Family::Lamplighter) throw Unsupported("green decay is implemented for the lamplighter graph");
  if (max_dist < 1 || samples < 2) throw ParameterError("need max_dist >= 1 and samples >= 2");
  // Targets: no lamps on, lighter at y.
  const std::int64_t K = max_dist;
  std::unordered_map<std::uint64_t, std::int64_t> target;
  for (std::int64_t y = -K; y <= K; ++y) target[lamplighter_fingerprint({}, y)] = y;
  using Counts = std::vector<std::uint32_t>;
  auto out = replicas<Counts>(samples, seed, [&](std::uint64_t, Rng& rng) {
    Counts c(2 * K + 1, 0);
    auto walker = g.walker();
    c[K] = 1;
    for (std::uint64_t s = 0; s < walk_length; ++s) {
      walker->step(rng);
      auto it = target.find(walker->fingerprint());
      if (it != target.end()) ++c[it->second + K];
    }
    return c;
  });
  GreenDecay r;
  r.samples = samples;
  r.walk_length = walk_length;
  std::vector<double> xs, ys;
  for (std::int64_t k = 0; k <= K; ++k) {
    std::vector<double> v(samples);
    std::uint64_t visits = 0;
    for (std::size_t i = 0; i < samples; ++i) {
      const double a = out[i][K + k], b = out[i][K - k];
      v[i] = k == 0 ? a : (a + b) / 2;
      visits += k == 0 ? out[i][K] : out[i][K + k] + out[i][K - k];
    }
    if (visits == 0) {
      r.dropped.push_back(k);
      continue;
    }
    GreenShell sh;
    sh.distance = k;
    sh.g_hat = mean(v);
    sh.std_error = std_error(v, sh.g_hat);
    sh.visits = visits;
    r.shells.push_back(sh);
    if (k >= 1) {
      xs.push_back(static_cast<double>(k));
      ys.push_back(std::log(sh.g_hat));
    }
  }
  if (xs.size() >= 3) {
    auto f = fit_line(xs, ys);
    r.slope = f.slope;
    r.intercept = f.intercept;
    r.slope_stderr = f.slope_stderr;
  } else {
    r.slope = r.intercept = r.slope_stderr = std::nan("");
  }
  return r;
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) throw ParameterError("line fit needs at least two points");
  const double n = static_cast<double>(x.size());
  const double mx = mean(x), my = mean(y);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw ParameterError("degenerate abscissae");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ssr = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ssr += r * r;
    f.residual_max = std::max(f.residual_max, std::abs(r));
  }
  f.slope_stderr = x.size() > 2 ? std::sqrt(ssr / (n - 2) / sxx) : 0.0;
  return f;
}

}  // namespace toppler
