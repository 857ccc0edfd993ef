#include <deque>

#include "toppler/errors.hpp"
#include "toppler/graphs.hpp"

namespace toppler {

namespace {

constexpr int kMaxResamples = 100000;

int sample_children(const Offspring& off, std::uint64_t stream) {
  Rng rng(stream);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (auto [count, prob] : off.law) {
    if (u < prob) return count;
    u -= prob;
  }
  return off.law.back().first;
}

}  // namespace

GwArena::GwArena(Offspring offspring, std::uint64_t seed, int depth) : offspring_(std::move(offspring)) {
  offspring_.validate();
  if (depth < 0) throw ParameterError("gw depth must be >= 0");
  for (int attempt = 0; attempt < kMaxResamples; ++attempt) {
    if (try_build(seed + static_cast<std::uint64_t>(attempt), depth)) {
      seed_used_ = seed + static_cast<std::uint64_t>(attempt);
      return;
    }
  }
  throw ResourceLimit("no surviving Galton-Watson sample after " + std::to_string(kMaxResamples) + " draws");
}

bool GwArena::try_build(std::uint64_t seed, int depth) {
  nodes_.clear();
  nodes_.push_back(Node{-1, 0, splitmix64(seed), -1, -1});
  std::vector<std::int64_t> level{0};
  for (int lv = 0; lv < depth; ++lv) {
    std::vector<std::int64_t> next;
    for (auto v : level) {
      expand_locked(v);
      const auto& n = nodes_[v];
      for (std::int32_t i = 0; i < n.child_count; ++i) next.push_back(n.first_child + i);
    }
    if (next.empty()) return false;
    level = std::move(next);
  }
  return true;
}

void GwArena::expand_locked(std::int64_t index) const {
  if (nodes_[index].child_count >= 0) return;
  const Node parent = nodes_[index];
  const int count = sample_children(offspring_, parent.stream);
  const auto first = static_cast<std::int64_t>(nodes_.size());
  for (int i = 0; i < count; ++i)
    nodes_.push_back(Node{index, parent.level + 1, splitmix64(parent.stream ^ splitmix64(static_cast<std::uint64_t>(i) + 1)), -1, -1});
  nodes_[index].first_child = first;
  nodes_[index].child_count = count;
}

std::size_t GwArena::size() const {
  std::shared_lock lock(mu_);
  return nodes_.size();
}

GwArena::Node GwArena::node(std::int64_t index) const {
  std::shared_lock lock(mu_);
  return nodes_.at(static_cast<std::size_t>(index));
}

std::vector<std::int64_t> GwArena::children(std::int64_t index) const {
  {
    std::shared_lock lock(mu_);
    const auto& n = nodes_.at(static_cast<std::size_t>(index));
    if (n.child_count >= 0) {
      std::vector<std::int64_t> out(n.child_count);
      for (int i = 0; i < n.child_count; ++i) out[i] = n.first_child + i;
      return out;
    }
  }
  std::unique_lock lock(mu_);
  expand_locked(index);
  const auto& n = nodes_[index];
  std::vector<std::int64_t> out(n.child_count);
  for (int i = 0; i < n.child_count; ++i) out[i] = n.first_child + i;
  return out;
}

std::vector<std::size_t> GwArena::level_sizes(int depth) const {
  std::vector<std::size_t> sizes;
  std::vector<std::int64_t> level{0};
  for (int lv = 0; lv <= depth; ++lv) {
    sizes.push_back(level.size());
    if (lv == depth) break;
    std::vector<std::int64_t> next;
    for (auto v : level)
      for (auto c : children(v)) next.push_back(c);
    level = std::move(next);
  }
  return sizes;
}

std::shared_ptr<GwArena> gw_materialize(const Offspring& offspring, std::uint64_t seed, int depth) {
  return std::make_shared<GwArena>(offspring, seed, depth);
}

}  // namespace toppler
