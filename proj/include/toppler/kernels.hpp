#pragma once

// Hot loops with two implementations each: an OpenMP kernel used by the
// library and a plain serial reference that the tests and bench/ compare
// against.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "toppler/graphs.hpp"
#include "toppler/random.hpp"

namespace toppler {

// Thread count for OpenMP regions; reads TOPPLER_THREADS once if set.
int configured_threads();
void set_threads(int n);

// One round of round-robin toppling over a finite region, i.e. one step of
// the walk killed on leaving the region. Local slots are the region (in the
// given order) followed by its exterior boundary; boundary mass is frozen.
class KilledWalkOperator {
 public:
  KilledWalkOperator(VertexTable& table, std::span<const VertexId> region);

  std::size_t size() const { return vertices_.size(); }
  std::size_t region_size() const { return region_size_; }
  const std::vector<VertexId>& vertices() const { return vertices_; }
  // Local slot of a table id, or -1.
  std::int64_t slot(VertexId v) const;

  // Both return the number of region slots that held positive mass, which
  // is the number of toppling moves the round costs.
  std::uint64_t step(const std::vector<double>& in, std::vector<double>& out) const;  // gather, OpenMP
  std::uint64_t step_reference(const std::vector<double>& in, std::vector<double>& out) const;  // scatter, serial

 private:
  std::vector<VertexId> vertices_;
  std::size_t region_size_ = 0;
  std::unordered_map<VertexId, std::int64_t> slot_;
  // Gather lists: for slot u, incoming (source slot, weight) from region slots.
  std::vector<std::size_t> in_start_;
  std::vector<std::int32_t> in_src_;
  std::vector<double> in_w_;
  // Scatter lists for the reference: neighbors of each region slot.
  std::vector<std::vector<std::int32_t>> out_nb_;
};

// Simple random walk on Z^d killed outside the cube ||x||_inf <= R, started
// at the origin. Because the start is symmetric, the law lives on the
// fundamental domain R >= x_1 >= ... >= x_d >= 0.
class SymmetricBoxWalk {
 public:
  SymmetricBoxWalk(int d, int R);

  int dim() const { return d_; }
  int radius() const { return R_; }
  std::size_t cells() const { return points_.size() / d_; }
  // Canonical point of each cell, flattened d per cell.
  std::span<const int> point(std::size_t cell) const { return {points_.data() + cell * d_, static_cast<std::size_t>(d_)}; }
  // Cell of an arbitrary lattice point, or -1 outside the cube.
  std::int64_t cell_of(std::span<const std::int64_t> x) const;
  // Number of lattice points the cell stands for (orbit size).
  std::uint64_t orbit(std::size_t cell) const { return orbit_[cell]; }

  std::vector<double> delta_origin() const;
  void step(const std::vector<double>& in, std::vector<double>& out) const;  // OpenMP gather

 private:
  int d_, R_;
  std::vector<int> points_;
  std::vector<std::int32_t> nb_;  // 2d per cell, -1 when killed
  std::vector<std::int64_t> lookup_;  // dense (R+1)^d table of canonical coords -> cell
  std::vector<std::uint64_t> orbit_;
};

// Full-cube reference for SymmetricBoxWalk: dense array over [-R, R]^d,
// scatter form, serial.
class DenseBoxWalk {
 public:
  DenseBoxWalk(int d, int R);
  std::size_t cells() const { return cells_; }
  std::int64_t index(std::span<const std::int64_t> x) const;  // -1 outside
  std::vector<double> delta_origin() const;
  void step(const std::vector<double>& in, std::vector<double>& out) const;

 private:
  int d_, R_;
  std::size_t cells_;
  std::vector<std::size_t> stride_;
};

// Runs fn(i, rng_i) for i in [0, count) with rng_i = substream(seed, i) and
// stores results by index, so the output does not depend on scheduling.
template <class T>
std::vector<T> replicas(std::uint64_t count, std::uint64_t seed, const std::function<T(std::uint64_t, Rng&)>& fn);
template <class T>
std::vector<T> replicas_reference(std::uint64_t count, std::uint64_t seed, const std::function<T(std::uint64_t, Rng&)>& fn);

}  // namespace toppler

#include "toppler/kernels_impl.hpp"
