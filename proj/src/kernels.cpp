#include "toppler/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <numeric>

#include "toppler/errors.hpp"

namespace toppler {

namespace {

int g_threads = 0;

int threads_from_env() {
  if (const char* s = std::getenv("TOPPLER_THREADS")) {
    const int n = std::atoi(s);
    if (n > 0) return n;
  }
  return omp_get_max_threads();
}

}  // namespace

int configured_threads() {
  if (g_threads <= 0) g_threads = threads_from_env();
  return g_threads;
}

void set_threads(int n) { g_threads = n > 0 ? n : threads_from_env(); }

// ---------------------------------------------------------------------------

KilledWalkOperator::KilledWalkOperator(VertexTable& table, std::span<const VertexId> region) {
  for (auto v : region) {
    if (slot_.contains(v)) throw StructuralError("region lists a vertex twice");
    slot_[v] = static_cast<std::int64_t>(vertices_.size());
    vertices_.push_back(v);
  }
  region_size_ = vertices_.size();
  out_nb_.resize(region_size_);
  std::vector<std::vector<std::pair<std::int32_t, double>>> incoming;
  for (std::size_t i = 0; i < region_size_; ++i) {
    auto nb = table.neighbors(vertices_[i]);
    const double w = 1.0 / static_cast<double>(nb.size());
    for (auto u : nb) {
      auto [it, fresh] = slot_.try_emplace(u, static_cast<std::int64_t>(vertices_.size()));
      if (fresh) vertices_.push_back(u);
      const auto s = static_cast<std::int32_t>(it->second);
      out_nb_[i].push_back(s);
      if (incoming.size() < vertices_.size()) incoming.resize(vertices_.size());
      incoming[s].emplace_back(static_cast<std::int32_t>(i), w);
    }
  }
  incoming.resize(vertices_.size());
  in_start_.assign(vertices_.size() + 1, 0);
  for (std::size_t u = 0; u < vertices_.size(); ++u) {
    // Sources in slot order keep the gather sum order fixed.
    std::sort(incoming[u].begin(), incoming[u].end());
    in_start_[u + 1] = in_start_[u] + incoming[u].size();
    for (auto [s, w] : incoming[u]) {
      in_src_.push_back(s);
      in_w_.push_back(w);
    }
  }
}

std::int64_t KilledWalkOperator::slot(VertexId v) const {
  auto it = slot_.find(v);
  return it == slot_.end() ? -1 : it->second;
}

std::uint64_t KilledWalkOperator::step(const std::vector<double>& in, std::vector<double>& out) const {
  const auto n = static_cast<std::int64_t>(vertices_.size());
  const auto r = static_cast<std::int64_t>(region_size_);
  out.resize(vertices_.size());
  std::uint64_t active = 0;
#pragma omp parallel for schedule(static) reduction(+ : active) num_threads(configured_threads())
  for (std::int64_t u = 0; u < n; ++u) {
    double acc = u < r ? 0.0 : in[u];
    for (auto j = in_start_[u]; j < in_start_[u + 1]; ++j) acc += in_w_[j] * in[in_src_[j]];
    out[u] = acc;
    if (u < r && in[u] > 0) ++active;
  }
  return active;
}

std::uint64_t KilledWalkOperator::step_reference(const std::vector<double>& in, std::vector<double>& out) const {
  out.assign(in.begin(), in.end());
  std::uint64_t active = 0;
  for (std::size_t i = 0; i < region_size_; ++i) out[i] = 0.0;
  for (std::size_t i = 0; i < region_size_; ++i) {
    if (!(in[i] > 0)) continue;
    ++active;
    const double share = in[i] / static_cast<double>(out_nb_[i].size());
    for (auto s : out_nb_[i]) out[s] += share;
  }
  return active;
}

// ---------------------------------------------------------------------------

namespace {

void canonicalize(std::vector<std::int64_t>& x) {
  for (auto& v : x) v = v < 0 ? -v : v;
  std::sort(x.begin(), x.end(), std::greater<>());
}

std::uint64_t orbit_size(std::span<const int> p) {
  // |signs| * |distinct permutations|
  std::uint64_t signs = 1;
  for (int v : p)
    if (v != 0) signs *= 2;
  std::uint64_t perms = 1;
  for (std::size_t i = 2; i <= p.size(); ++i) perms *= i;
  std::size_t i = 0;
  while (i < p.size()) {
    std::size_t j = i;
    while (j < p.size() && p[j] == p[i]) ++j;
    for (std::size_t k = 2; k <= j - i; ++k) perms /= k;
    i = j;
  }
  return signs * perms;
}

}  // namespace

SymmetricBoxWalk::SymmetricBoxWalk(int d, int R) : d_(d), R_(R) {
  if (d < 1 || R < 1) throw ParameterError("box walk needs d >= 1 and R >= 1");
  double dense = 1;
  for (int i = 0; i < d; ++i) dense *= R + 1;
  if (dense > 5e7) throw ResourceLimit("box of radius " + std::to_string(R) + " in dimension " + std::to_string(d) + " is too large");
  lookup_.assign(static_cast<std::size_t>(dense), -1);

  // Enumerate non-increasing tuples in lexicographic order.
  std::vector<int> p(d, 0);
  auto dense_index = [&](std::span<const std::int64_t> c) {
    std::size_t idx = 0;
    for (auto v : c) idx = idx * (R + 1) + static_cast<std::size_t>(v);
    return idx;
  };
  std::function<void(int, int)> rec = [&](int pos, int hi) {
    if (pos == d) {
      std::vector<std::int64_t> c(p.begin(), p.end());
      lookup_[dense_index(c)] = static_cast<std::int64_t>(points_.size() / d);
      points_.insert(points_.end(), p.begin(), p.end());
      return;
    }
    for (int v = 0; v <= hi; ++v) {
      p[pos] = v;
      rec(pos + 1, v);
    }
  };
  rec(0, R);
  const std::size_t n = points_.size() / d;
  orbit_.resize(n);
  nb_.assign(n * 2 * d, -1);
  std::vector<std::int64_t> y(d);
  for (std::size_t c = 0; c < n; ++c) {
    orbit_[c] = orbit_size(point(c));
    for (int i = 0; i < d; ++i) {
      for (int s = 0; s < 2; ++s) {
        for (int j = 0; j < d; ++j) y[j] = points_[c * d + j];
        y[i] += s ? 1 : -1;
        nb_[c * 2 * d + 2 * i + s] = static_cast<std::int32_t>(cell_of(y));
      }
    }
  }
}

std::int64_t SymmetricBoxWalk::cell_of(std::span<const std::int64_t> x) const {
  if (static_cast<int>(x.size()) != d_) throw StructuralError("dimension mismatch");
  std::vector<std::int64_t> c(x.begin(), x.end());
  canonicalize(c);
  if (c[0] > R_) return -1;
  std::size_t idx = 0;
  for (auto v : c) idx = idx * (R_ + 1) + static_cast<std::size_t>(v);
  return lookup_[idx];
}

std::vector<double> SymmetricBoxWalk::delta_origin() const {
  std::vector<double> v(cells(), 0.0);
  v[0] = 1.0;
  return v;
}

void SymmetricBoxWalk::step(const std::vector<double>& in, std::vector<double>& out) const {
  const auto n = static_cast<std::int64_t>(cells());
  const int k = 2 * d_;
  const double w = 1.0 / k;
  out.resize(cells());
#pragma omp parallel for schedule(static) num_threads(configured_threads())
  for (std::int64_t c = 0; c < n; ++c) {
    double acc = 0.0;
    const auto* nb = nb_.data() + c * k;
    for (int j = 0; j < k; ++j)
      if (nb[j] >= 0) acc += in[nb[j]];
    out[c] = acc * w;
  }
}

// ---------------------------------------------------------------------------

DenseBoxWalk::DenseBoxWalk(int d, int R) : d_(d), R_(R), stride_(d) {
  double total = 1;
  for (int i = 0; i < d; ++i) total *= 2 * R + 1;
  if (total > 5e7) throw ResourceLimit("dense box too large");
  cells_ = static_cast<std::size_t>(total);
  std::size_t s = 1;
  for (int i = d - 1; i >= 0; --i) {
    stride_[i] = s;
    s *= 2 * R + 1;
  }
}

std::int64_t DenseBoxWalk::index(std::span<const std::int64_t> x) const {
  std::size_t idx = 0;
  for (int i = 0; i < d_; ++i) {
    if (x[i] < -R_ || x[i] > R_) return -1;
    idx += static_cast<std::size_t>(x[i] + R_) * stride_[i];
  }
  return static_cast<std::int64_t>(idx);
}

std::vector<double> DenseBoxWalk::delta_origin() const {
  std::vector<double> v(cells_, 0.0);
  std::vector<std::int64_t> o(d_, 0);
  v[index(o)] = 1.0;
  return v;
}

void DenseBoxWalk::step(const std::vector<double>& in, std::vector<double>& out) const {
  out.assign(cells_, 0.0);
  const double w = 1.0 / (2 * d_);
  const std::size_t side = 2 * R_ + 1;
  for (std::size_t c = 0; c < cells_; ++c) {
    if (in[c] == 0.0) continue;
    const double share = in[c] * w;
    for (int i = 0; i < d_; ++i) {
      const std::size_t coord = (c / stride_[i]) % side;
      if (coord > 0) out[c - stride_[i]] += share;
      if (coord + 1 < side) out[c + stride_[i]] += share;
    }
  }
}

}  // namespace toppler
