#pragma once

#include <gmpxx.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "toppler/errors.hpp"
#include "toppler/graphs.hpp"

namespace toppler {

using Rational = mpq_class;

inline double to_double(double x) { return x; }
inline double to_double(const Rational& x) { return x.get_d(); }

enum class NumericMode { Float64, ExactRational };

template <class S>
struct ToppleRecord {
  std::uint64_t index = 0;  // 1-based
  VertexId vertex = 0;
  S mass{};                 // mass toppled
  S before{};               // mass at the vertex just before the move
};

struct Snapshot {
  std::uint64_t move = 0;
  double second_moment = std::numeric_limits<double>::quiet_NaN();
  double avg_level = std::numeric_limits<double>::quiet_NaN();
  double energy = std::numeric_limits<double>::quiet_NaN();
  double outside = std::numeric_limits<double>::quiet_NaN();
};

template <class S>
struct BasicRunTrace {
  std::vector<ToppleRecord<S>> records;
  std::vector<Snapshot> snapshots;
};

using RunTrace = BasicRunTrace<double>;

// Rounding casualties in float mode and, when pruning is enabled, discarded mass.
struct MassLedger {
  std::uint64_t clamps = 0;
  double clamped_mass = 0.0;
  std::uint64_t pruned = 0;
  double pruned_mass = 0.0;
};

inline constexpr double kClampFloor = -1e-12;

// Sparse mass field over the vertices of one VertexTable. Entries are stored
// densely by interned id, so the field only ever covers vertices the run has
// touched. The move counter and optional trace advance with every topple.
template <class S>
class BasicMassDist {
 public:
  static constexpr NumericMode mode = std::is_same_v<S, double> ? NumericMode::Float64 : NumericMode::ExactRational;

  explicit BasicMassDist(std::shared_ptr<VertexTable> table) : table_(std::move(table)) {}

  static BasicMassDist point(std::shared_ptr<VertexTable> table, VertexId v, const S& mass = S(1)) {
    BasicMassDist d(std::move(table));
    d.set(v, mass);
    return d;
  }
  static BasicMassDist unit(GraphPtr g) {
    auto t = std::make_shared<VertexTable>(std::move(g));
    return point(t, t->origin());
  }

  VertexTable& table() const { return *table_; }
  const std::shared_ptr<VertexTable>& table_ptr() const { return table_; }

  S at(VertexId v) const { return v < mass_.size() ? mass_[v] : S(0); }
  S at(const VertexKey& k) const {
    auto id = table_->find(k);
    return id ? at(*id) : S(0);
  }

  // Raw assignment; does not count as a move.
  void set(VertexId v, const S& m) {
    if (m < 0) throw InvalidMove("negative mass");
    grow(v);
    if (radius_ >= 0 && table_->distance(v) >= radius_) outside_ += m - mass_[v];
    total_ += m - mass_[v];
    mass_[v] = m;
  }

  void topple(VertexId v, const S& m) {
    if (!(m > 0)) throw InvalidMove("toppled mass must be positive");
    if (m > at(v)) throw InvalidMove("toppled mass exceeds mass at " + table_->graph().encode(table_->key(v)));
    apply(v, m, false);
  }

  void full_topple(VertexId v) {
    if (!(at(v) > 0)) throw InvalidMove("no mass at " + table_->graph().encode(table_->key(v)));
    apply(v, mass_[v], true);
  }

  // Keeps mass_outside(n) current after every topple.
  void register_radius(std::int64_t n) {
    radius_ = n;
    outside_ = mass_outside(n);
  }
  std::int64_t radius() const { return radius_; }
  S outside() const { return outside_; }

  S mass_outside(std::int64_t n) const {
    S s(0);
    for (std::size_t v = 0; v < mass_.size(); ++v)
      if (mass_[v] != 0 && table_->distance(static_cast<VertexId>(v)) >= n) s += mass_[v];
    return s;
  }

  S total() const { return total_; }
  S recompute_total() const {
    S s(0);
    for (const auto& m : mass_) s += m;
    return s;
  }

  std::uint64_t moves() const { return moves_; }
  // For kernels that apply a whole round of topples outside the engine.
  void credit_moves(std::uint64_t k) { moves_ += k; }
  const MassLedger& ledger() const { return ledger_; }

  template <class F>
  void for_each(F&& f) const {
    for (std::size_t v = 0; v < mass_.size(); ++v)
      if (mass_[v] != 0) f(static_cast<VertexId>(v), mass_[v]);
  }

  std::vector<VertexId> support() const {
    std::vector<VertexId> out;
    for_each([&](VertexId v, const S&) { out.push_back(v); });
    return out;
  }
  std::size_t support_size() const { return support().size(); }

  void enable_trace(bool on = true) { tracing_ = on; }
  const BasicRunTrace<S>& trace() const { return trace_; }
  BasicRunTrace<S>& trace() { return trace_; }

  // Drops entries below `threshold`, recording what was discarded.
  void prune(double threshold) {
    for (std::size_t v = 0; v < mass_.size(); ++v) {
      if (mass_[v] != 0 && to_double(mass_[v]) < threshold) {
        ledger_.pruned += 1;
        ledger_.pruned_mass += to_double(mass_[v]);
        set(static_cast<VertexId>(v), S(0));
      }
    }
  }

  // Float-mode adjustment with the clamping rule: results in [-1e-12, 0)
  // become 0 and are counted; anything lower is a logic error.
  void add(VertexId v, const S& delta) {
    grow(v);
    S next = mass_[v] + delta;
    if (next < 0) {
      if constexpr (std::is_same_v<S, double>) {
        if (next < kClampFloor) throw InvalidMove("mass went negative beyond rounding: " + std::to_string(next));
        ledger_.clamps += 1;
        ledger_.clamped_mass += -next;
        next = 0;
      } else {
        throw InvalidMove("mass went negative");
      }
    }
    set(v, next);
  }

 private:
  void grow(VertexId v) {
    if (v >= mass_.size()) mass_.resize(std::max<std::size_t>(table_->size(), v + 1), S(0));
  }

  void apply(VertexId v, S m, bool full) {
    auto nb = table_->neighbors(v);
    grow(static_cast<VertexId>(table_->size() - 1));
    if (tracing_) trace_.records.push_back({moves_ + 1, v, m, mass_[v]});
    const S share = m / S(static_cast<long>(nb.size()));
    if (full)
      mass_[v] = 0;
    else
      mass_[v] -= m;
    for (auto u : nb) mass_[u] += share;
    if (radius_ >= 0) {
      if (table_->distance(v) >= radius_) outside_ -= m;
      for (auto u : nb)
        if (table_->distance(u) >= radius_) outside_ += share;
    }
    ++moves_;
  }

  std::shared_ptr<VertexTable> table_;
  std::vector<S> mass_;
  S total_{0};
  std::int64_t radius_ = -1;
  S outside_{0};
  std::uint64_t moves_ = 0;
  bool tracing_ = false;
  BasicRunTrace<S> trace_;
  MassLedger ledger_;
};

using MassDist = BasicMassDist<double>;
using ExactMassDist = BasicMassDist<Rational>;

extern template class BasicMassDist<double>;
extern template class BasicMassDist<Rational>;

// Exact copy of a float field (every double is a dyadic rational).
ExactMassDist to_exact(const MassDist& d);

// Max over the union of supports of |float - exact|, matched by vertex key.
double max_discrepancy(const MassDist& f, const ExactMassDist& e);
double max_discrepancy(const MassDist& a, const MassDist& b);

// CSV `vertex_encoding,mass`, rows in key order. Encodings containing commas
// are double-quoted.
void write_csv(const MassDist& d, std::ostream& os);
MassDist read_csv(GraphPtr g, std::istream& is);

}  // namespace toppler
