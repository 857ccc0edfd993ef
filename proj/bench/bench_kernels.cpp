// Serial references against the OpenMP kernels. Thread count comes from
// TOPPLER_THREADS (default: all cores). Pass --quick for a smoke-sized run.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>

#include "toppler/kernels.hpp"

using namespace toppler;

namespace {

template <class F>
double time_ms(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void row(const char* name, const char* size, double serial, double parallel, double diff) {
  std::printf("%-22s %-16s %10.2f %10.2f %8.2fx %10.2e\n", name, size, serial, parallel, serial / parallel, diff);
}

}  // namespace

int main(int argc, char** argv) {
  const bool quick = argc > 1 && std::strcmp(argv[1], "--quick") == 0;
  const int rounds = quick ? 5 : 200;
  std::printf("threads: %d\n", configured_threads());
  std::printf("%-22s %-16s %10s %10s %9s %10s\n", "kernel", "size", "serial_ms", "openmp_ms", "speedup", "max_diff");

  {
    // One killed-walk round per iteration over a Z^2 ball.
    const int n = quick ? 20 : 120;
    VertexTable t(make_graph("lattice:d=2"));
    auto region = t.ball(n);
    KilledWalkOperator op(t, region);
    std::vector<double> a(op.size(), 0.0), b, na, nb;
    a[0] = 1.0;
    b = a;
    const double ser = time_ms([&] {
      for (int r = 0; r < rounds; ++r) {
        op.step_reference(b, nb);
        std::swap(b, nb);
      }
    });
    const double par = time_ms([&] {
      for (int r = 0; r < rounds; ++r) {
        op.step(a, na);
        std::swap(a, na);
      }
    });
    double diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    char size[32];
    std::snprintf(size, sizeof size, "B_%d x %d", n, rounds);
    row("killed walk round", size, ser, par, diff);
  }

  {
    // Potential-kernel DP step: full cube scatter against the fundamental
    // domain gather. The serial side does 2^d d! times the work by design.
    const int d = 3, R = quick ? 10 : 60;
    SymmetricBoxWalk sym(d, R);
    DenseBoxWalk dense(d, R);
    auto a = sym.delta_origin(), b = dense.delta_origin();
    std::vector<double> na, nb;
    const double ser = time_ms([&] {
      for (int r = 0; r < rounds; ++r) {
        dense.step(b, nb);
        std::swap(b, nb);
      }
    });
    const double par = time_ms([&] {
      for (int r = 0; r < rounds; ++r) {
        sym.step(a, na);
        std::swap(a, na);
      }
    });
    double diff = 0;
    for (std::size_t c = 0; c < sym.cells(); ++c) {
      auto p = sym.point(c);
      std::vector<std::int64_t> x(p.begin(), p.end());
      diff = std::max(diff, std::abs(a[c] - b[static_cast<std::size_t>(dense.index(x))]));
    }
    char size[32];
    std::snprintf(size, sizeof size, "d=3 R=%d x %d", R, rounds);
    row("box walk step", size, ser, par, diff);
  }

  {
    // Independent random-walk replicas.
    const std::uint64_t count = quick ? 200 : 20000;
    auto g = make_graph("prodtree:d=3,k=2");
    std::function<double(std::uint64_t, Rng&)> fn = [&](std::uint64_t, Rng& rng) {
      auto w = g->walker();
      for (int s = 0; s < 1000; ++s) w->step(rng);
      return static_cast<double>(w->distance());
    };
    std::vector<double> a, b;
    const double ser = time_ms([&] { b = replicas_reference<double>(count, 5, fn); });
    const double par = time_ms([&] { a = replicas<double>(count, 5, fn); });
    double diff = 0;
    for (std::size_t i = 0; i < a.size(); ++i) diff = std::max(diff, std::abs(a[i] - b[i]));
    char size[32];
    std::snprintf(size, sizeof size, "%llu walks", static_cast<unsigned long long>(count));
    row("walk replicas", size, ser, par, diff);
  }
  return 0;
}
