#include "toppler/graphs.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

#include "toppler/errors.hpp"

namespace toppler {

namespace {

std::int64_t parse_int(std::string_view s, std::string_view what) {
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw StructuralError("bad integer for " + std::string(what) + ": '" + std::string(s) + "'");
  return v;
}

double parse_double(std::string_view s, std::string_view what) {
  try {
    std::size_t used = 0;
    std::string str(s);
    double v = std::stod(str, &used);
    if (used != str.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw StructuralError("bad number for " + std::string(what) + ": '" + std::string(s) + "'");
  }
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join_ints(std::span<const std::int64_t> v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += std::to_string(v[i]);
  }
  return out;
}

std::vector<std::int64_t> parse_int_list(std::string_view body, char sep, std::string_view what) {
  std::vector<std::int64_t> out;
  if (body.empty()) return out;
  for (auto part : split(body, sep)) out.push_back(parse_int(part, what));
  return out;
}

void sort_keys(std::vector<VertexKey>& v) { std::sort(v.begin(), v.end()); }

// ---------------------------------------------------------------- lattice

class LatticeGraph final : public Graph {
 public:
  explicit LatticeGraph(GraphSpec s) : spec_(std::move(s)) {}
  const GraphSpec& spec() const override { return spec_; }
  VertexKey origin() const override { return VertexKey(std::vector<std::int64_t>(spec_.d, 0)); }
  bool valid(const VertexKey& v) const override { return v.c.size() == static_cast<std::size_t>(spec_.d); }

  std::vector<VertexKey> neighbors(const VertexKey& v) const override {
    require_valid(v);
    std::vector<VertexKey> out;
    out.reserve(2 * spec_.d);
    for (int i = 0; i < spec_.d; ++i)
      for (int s : {-1, 1}) {
        VertexKey u = v;
        u.c[i] += s;
        out.push_back(std::move(u));
      }
    sort_keys(out);
    return out;
  }

  std::int64_t distance(const VertexKey& v) const override {
    require_valid(v);
    std::int64_t s = 0;
    for (auto x : v.c) s += std::abs(x);
    return s;
  }

  std::string encode(const VertexKey& v) const override { return "(" + join_ints(v.c, ',') + ")"; }

  VertexKey decode(std::string_view t) const override {
    if (t.size() < 2 || t.front() != '(' || t.back() != ')') throw StructuralError("lattice vertex must look like (x,y,...)");
    VertexKey v(parse_int_list(t.substr(1, t.size() - 2), ',', "coordinate"));
    require_valid(v);
    return v;
  }

  std::unique_ptr<Walker> walker() const override;

 private:
  GraphSpec spec_;
};

class LatticeWalker final : public Walker {
 public:
  explicit LatticeWalker(int d) : x_(d, 0) {}
  void reset() override {
    std::fill(x_.begin(), x_.end(), 0);
    dist_ = 0;
  }
  void step(Rng& rng) override {
    auto j = std::uniform_int_distribution<int>(0, 2 * static_cast<int>(x_.size()) - 1)(rng);
    auto& c = x_[j >> 1];
    dist_ -= std::abs(c);
    c += (j & 1) ? 1 : -1;
    dist_ += std::abs(c);
  }
  std::int64_t distance() const override { return dist_; }
  VertexKey key() const override { return VertexKey(x_); }

 private:
  std::vector<std::int64_t> x_;
  std::int64_t dist_ = 0;
};

std::unique_ptr<Walker> LatticeGraph::walker() const { return std::make_unique<LatticeWalker>(spec_.d); }

// ------------------------------------------------------------------- comb

class CombGraph final : public Graph {
 public:
  explicit CombGraph(GraphSpec s) : spec_(std::move(s)) {}
  const GraphSpec& spec() const override { return spec_; }
  VertexKey origin() const override { return {0, 0}; }
  bool valid(const VertexKey& v) const override { return v.c.size() == 2; }

  std::vector<VertexKey> neighbors(const VertexKey& v) const override {
    require_valid(v);
    const auto x = v.c[0], y = v.c[1];
    std::vector<VertexKey> out{{x, y - 1}, {x, y + 1}};
    if (y == 0) {
      out.push_back({x - 1, 0});
      out.push_back({x + 1, 0});
    }
    sort_keys(out);
    return out;
  }

  std::int64_t distance(const VertexKey& v) const override {
    require_valid(v);
    return std::abs(v.c[0]) + std::abs(v.c[1]);
  }

  std::string encode(const VertexKey& v) const override { return "(" + join_ints(v.c, ',') + ")"; }
  VertexKey decode(std::string_view t) const override {
    if (t.size() < 2 || t.front() != '(' || t.back() != ')') throw StructuralError("comb vertex must look like (x,y)");
    VertexKey v(parse_int_list(t.substr(1, t.size() - 2), ',', "coordinate"));
    require_valid(v);
    return v;
  }

  std::unique_ptr<Walker> walker() const override;

 private:
  GraphSpec spec_;
};

class CombWalker final : public Walker {
 public:
  void reset() override { x_ = y_ = 0; }
  void step(Rng& rng) override {
    if (y_ == 0) {
      switch (std::uniform_int_distribution<int>(0, 3)(rng)) {
        case 0: --x_; break;
        case 1: ++x_; break;
        case 2: --y_; break;
        default: ++y_; break;
      }
    } else {
      y_ += std::uniform_int_distribution<int>(0, 1)(rng) ? 1 : -1;
    }
  }
  std::int64_t distance() const override { return std::abs(x_) + std::abs(y_); }
  VertexKey key() const override { return {x_, y_}; }

 private:
  std::int64_t x_ = 0, y_ = 0;
};

std::unique_ptr<Walker> CombGraph::walker() const { return std::make_unique<CombWalker>(); }

// ------------------------------------------------------------------ trees

// Children per node: `root_children` at the root, `children` elsewhere.
struct TreeShape {
  int root_children;
  int children;

  bool valid_path(std::span<const std::int64_t> p) const {
    for (std::size_t i = 0; i < p.size(); ++i) {
      const int limit = i == 0 ? root_children : children;
      if (p[i] < 0 || p[i] >= limit) return false;
    }
    return true;
  }
  int degree(std::size_t depth) const { return depth == 0 ? root_children : children + 1; }
};

std::string encode_path(std::span<const std::int64_t> p) {
  if (p.empty()) return "/";
  std::string out;
  for (auto v : p) out += "/" + std::to_string(v);
  return out;
}

std::vector<std::int64_t> decode_path(std::string_view t) {
  if (t.empty() || t.front() != '/') throw StructuralError("tree vertex must look like / or /0/1");
  if (t == "/") return {};
  return parse_int_list(t.substr(1), '/', "child index");
}

class TreeGraph final : public Graph {
 public:
  TreeGraph(GraphSpec s, TreeShape shape) : spec_(std::move(s)), shape_(shape) {}
  const GraphSpec& spec() const override { return spec_; }
  VertexKey origin() const override { return {}; }
  bool valid(const VertexKey& v) const override { return shape_.valid_path(v.c); }

  std::vector<VertexKey> neighbors(const VertexKey& v) const override {
    require_valid(v);
    std::vector<VertexKey> out;
    if (!v.c.empty()) out.emplace_back(std::vector<std::int64_t>(v.c.begin(), v.c.end() - 1));
    const int kids = v.c.empty() ? shape_.root_children : shape_.children;
    for (int i = 0; i < kids; ++i) {
      VertexKey u = v;
      u.c.push_back(i);
      out.push_back(std::move(u));
    }
    sort_keys(out);
    return out;
  }

  std::int64_t distance(const VertexKey& v) const override {
    require_valid(v);
    return static_cast<std::int64_t>(v.c.size());
  }
  std::string encode(const VertexKey& v) const override { return encode_path(v.c); }
  VertexKey decode(std::string_view t) const override {
    VertexKey v(decode_path(t));
    require_valid(v);
    return v;
  }
  std::unique_ptr<Walker> walker() const override;

 private:
  GraphSpec spec_;
  TreeShape shape_;
};

// Walk on a tree with an explicit path stack.
class PathWalk {
 public:
  explicit PathWalk(TreeShape s) : shape_(s) {}
  void reset() { path_.clear(); }
  int degree() const { return shape_.degree(path_.size()); }
  // Moves to neighbor j in [0, degree()): 0 is the parent for non-root nodes.
  void move(int j) {
    if (!path_.empty()) {
      if (j == 0) {
        path_.pop_back();
        return;
      }
      --j;
    }
    path_.push_back(j);
  }
  const std::vector<std::int64_t>& path() const { return path_; }

 private:
  TreeShape shape_;
  std::vector<std::int64_t> path_;
};

class TreeWalker final : public Walker {
 public:
  explicit TreeWalker(TreeShape s) : walk_(s) {}
  void reset() override { walk_.reset(); }
  void step(Rng& rng) override { walk_.move(std::uniform_int_distribution<int>(0, walk_.degree() - 1)(rng)); }
  std::int64_t distance() const override { return static_cast<std::int64_t>(walk_.path().size()); }
  VertexKey key() const override { return VertexKey(walk_.path()); }

 private:
  PathWalk walk_;
};

std::unique_ptr<Walker> TreeGraph::walker() const { return std::make_unique<TreeWalker>(shape_); }

// ----------------------------------------------------------- tree product

class ProductTreeGraph final : public Graph {
 public:
  explicit ProductTreeGraph(GraphSpec s)
      : spec_(std::move(s)), a_{spec_.d + 1, spec_.d}, b_{spec_.k + 1, spec_.k} {}
  const GraphSpec& spec() const override { return spec_; }
  VertexKey origin() const override { return {0}; }

  bool valid(const VertexKey& v) const override {
    if (v.c.empty()) return false;
    const auto len1 = v.c[0];
    if (len1 < 0 || static_cast<std::size_t>(len1) + 1 > v.c.size()) return false;
    std::span<const std::int64_t> all(v.c);
    return a_.valid_path(all.subspan(1, len1)) && b_.valid_path(all.subspan(1 + len1));
  }

  std::vector<VertexKey> neighbors(const VertexKey& v) const override {
    require_valid(v);
    const auto len1 = v.c[0];
    std::vector<std::int64_t> p1(v.c.begin() + 1, v.c.begin() + 1 + len1);
    std::vector<std::int64_t> p2(v.c.begin() + 1 + len1, v.c.end());
    std::vector<VertexKey> out;
    auto emit = [&](const std::vector<std::int64_t>& q1, const std::vector<std::int64_t>& q2) {
      VertexKey u;
      u.c.reserve(1 + q1.size() + q2.size());
      u.c.push_back(static_cast<std::int64_t>(q1.size()));
      u.c.insert(u.c.end(), q1.begin(), q1.end());
      u.c.insert(u.c.end(), q2.begin(), q2.end());
      out.push_back(std::move(u));
    };
    for (auto& q : tree_moves(p1, a_)) emit(q, p2);
    for (auto& q : tree_moves(p2, b_)) emit(p1, q);
    sort_keys(out);
    return out;
  }

  std::int64_t distance(const VertexKey& v) const override {
    require_valid(v);
    return static_cast<std::int64_t>(v.c.size()) - 1;
  }

  std::string encode(const VertexKey& v) const override {
    require_valid(v);
    std::span<const std::int64_t> all(v.c);
    return "(" + encode_path(all.subspan(1, v.c[0])) + "," + encode_path(all.subspan(1 + v.c[0])) + ")";
  }

  VertexKey decode(std::string_view t) const override {
    if (t.size() < 2 || t.front() != '(' || t.back() != ')') throw StructuralError("product vertex must look like (/0,/1)");
    auto parts = split(t.substr(1, t.size() - 2), ',');
    if (parts.size() != 2) throw StructuralError("product vertex needs two paths");
    auto p1 = decode_path(parts[0]);
    auto p2 = decode_path(parts[1]);
    VertexKey v;
    v.c.push_back(static_cast<std::int64_t>(p1.size()));
    v.c.insert(v.c.end(), p1.begin(), p1.end());
    v.c.insert(v.c.end(), p2.begin(), p2.end());
    require_valid(v);
    return v;
  }

  std::unique_ptr<Walker> walker() const override;

 private:
  static std::vector<std::vector<std::int64_t>> tree_moves(const std::vector<std::int64_t>& p, TreeShape s) {
    std::vector<std::vector<std::int64_t>> out;
    if (!p.empty()) out.emplace_back(p.begin(), p.end() - 1);
    const int kids = p.empty() ? s.root_children : s.children;
    for (int i = 0; i < kids; ++i) {
      auto q = p;
      q.push_back(i);
      out.push_back(std::move(q));
    }
    return out;
  }

  GraphSpec spec_;
  TreeShape a_, b_;
};

class ProductWalker final : public Walker {
 public:
  ProductWalker(TreeShape a, TreeShape b) : a_(a), b_(b) {}
  void reset() override {
    a_.reset();
    b_.reset();
  }
  void step(Rng& rng) override {
    // Every vertex of a product of regular trees has the same degree.
    const int da = a_.degree(), db = b_.degree();
    const int j = std::uniform_int_distribution<int>(0, da + db - 1)(rng);
    if (j < da)
      a_.move(j);
    else
      b_.move(j - da);
  }
  std::int64_t distance() const override { return static_cast<std::int64_t>(a_.path().size() + b_.path().size()); }
  VertexKey key() const override {
    VertexKey v;
    v.c.push_back(static_cast<std::int64_t>(a_.path().size()));
    v.c.insert(v.c.end(), a_.path().begin(), a_.path().end());
    v.c.insert(v.c.end(), b_.path().begin(), b_.path().end());
    return v;
  }

 private:
  PathWalk a_, b_;
};

std::unique_ptr<Walker> ProductTreeGraph::walker() const { return std::make_unique<ProductWalker>(a_, b_); }

// ------------------------------------------------------------ galton-watson

class GwGraph final : public Graph {
 public:
  GwGraph(GraphSpec s, std::shared_ptr<GwArena> arena) : spec_(std::move(s)), arena_(std::move(arena)) {}
  const GraphSpec& spec() const override { return spec_; }
  VertexKey origin() const override { return {0}; }
  bool valid(const VertexKey& v) const override {
    return v.c.size() == 1 && v.c[0] >= 0 && static_cast<std::size_t>(v.c[0]) < arena_->size();
  }
  std::vector<VertexKey> neighbors(const VertexKey& v) const override {
    require_valid(v);
    std::vector<VertexKey> out;
    auto n = arena_->node(v.c[0]);
    if (n.parent >= 0) out.push_back({n.parent});
    for (auto c : arena_->children(v.c[0])) out.push_back({c});
    sort_keys(out);
    return out;
  }
  std::int64_t distance(const VertexKey& v) const override {
    require_valid(v);
    return arena_->node(v.c[0]).level;
  }
  std::string encode(const VertexKey& v) const override { return "#" + std::to_string(v.c.at(0)); }
  VertexKey decode(std::string_view t) const override {
    if (t.empty() || t.front() != '#') throw StructuralError("gw vertex must look like #index");
    VertexKey v{parse_int(t.substr(1), "node index")};
    require_valid(v);
    return v;
  }
  const GwArena& arena() const { return *arena_; }

 private:
  GraphSpec spec_;
  std::shared_ptr<GwArena> arena_;
};

// ------------------------------------------------------------- lamplighter

// Generators of one step: randomize the lamp at y, move to y+s, randomize the
// lamp at y+s. The eight (a, s, b) combinations give eight distinct neighbors.
class LamplighterGraph final : public Graph {
 public:
  explicit LamplighterGraph(GraphSpec s) : spec_(std::move(s)) {}
  const GraphSpec& spec() const override { return spec_; }
  VertexKey origin() const override { return {0}; }
  bool valid(const VertexKey& v) const override {
    if (v.c.empty()) return false;
    for (std::size_t i = 2; i < v.c.size(); ++i)
      if (v.c[i - 1] >= v.c[i]) return false;
    return true;
  }

  std::vector<VertexKey> neighbors(const VertexKey& v) const override {
    require_valid(v);
    const auto y = v.c[0];
    std::vector<VertexKey> out;
    out.reserve(8);
    for (int s : {-1, 1})
      for (int a : {0, 1})
        for (int b : {0, 1}) {
          std::set<std::int64_t> lamps(v.c.begin() + 1, v.c.end());
          auto flip = [&](std::int64_t pos) {
            if (!lamps.erase(pos)) lamps.insert(pos);
          };
          if (a) flip(y);
          if (b) flip(y + s);
          VertexKey u;
          u.c.push_back(y + s);
          u.c.insert(u.c.end(), lamps.begin(), lamps.end());
          out.push_back(std::move(u));
        }
    sort_keys(out);
    return out;
  }

  std::int64_t distance(const VertexKey& v) const override {
    require_valid(v);
    return lamplighter_distance(std::span<const std::int64_t>(v.c).subspan(1), v.c[0]);
  }

  std::string encode(const VertexKey& v) const override {
    require_valid(v);
    return "{" + join_ints(std::span<const std::int64_t>(v.c).subspan(1), ',') + "}@" + std::to_string(v.c[0]);
  }

  VertexKey decode(std::string_view t) const override {
    auto at = t.find("}@");
    if (t.empty() || t.front() != '{' || at == std::string_view::npos) throw StructuralError("lamplighter vertex must look like {1,3}@y");
    auto lamps = parse_int_list(t.substr(1, at - 1), ',', "lamp");
    VertexKey v;
    v.c.push_back(parse_int(t.substr(at + 2), "position"));
    v.c.insert(v.c.end(), lamps.begin(), lamps.end());
    require_valid(v);
    return v;
  }

  std::unique_ptr<Walker> walker() const override;

 private:
  GraphSpec spec_;
};

std::uint64_t lamp_hash(std::int64_t pos) { return splitmix64(static_cast<std::uint64_t>(pos) * 0x9e3779b97f4a7c15ULL + 17); }
std::uint64_t position_hash(std::int64_t y) { return splitmix64(static_cast<std::uint64_t>(y) ^ 0xa5a5a5a5ULL); }

class LamplighterWalker final : public Walker {
 public:
  void reset() override {
    lamps_.clear();
    y_ = 0;
    hash_ = 0;
  }
  void step(Rng& rng) override {
    auto bits = std::uniform_int_distribution<int>(0, 7)(rng);
    if (bits & 1) flip(y_);
    y_ += (bits & 2) ? 1 : -1;
    if (bits & 4) flip(y_);
  }
  std::int64_t distance() const override {
    std::vector<std::int64_t> l(lamps_.begin(), lamps_.end());
    return lamplighter_distance(l, y_);
  }
  VertexKey key() const override {
    VertexKey v;
    v.c.push_back(y_);
    v.c.insert(v.c.end(), lamps_.begin(), lamps_.end());
    return v;
  }
  std::uint64_t fingerprint() const override { return hash_ ^ position_hash(y_); }

 private:
  void flip(std::int64_t pos) {
    if (!lamps_.erase(pos)) lamps_.insert(pos);
    hash_ ^= lamp_hash(pos);
  }
  std::set<std::int64_t> lamps_;
  std::int64_t y_ = 0;
  std::uint64_t hash_ = 0;
};

std::unique_ptr<Walker> LamplighterGraph::walker() const { return std::make_unique<LamplighterWalker>(); }

}  // namespace

std::uint64_t lamplighter_fingerprint(std::span<const std::int64_t> lamps, std::int64_t y) {
  std::uint64_t h = 0;
  for (auto p : lamps) h ^= lamp_hash(p);
  return h ^ position_hash(y);
}

namespace {

// Fallback walker that goes through neighbors(); used for GW trees.
class GenericWalker final : public Walker {
 public:
  explicit GenericWalker(const Graph& g) : g_(g), v_(g.origin()) {}
  void reset() override { v_ = g_.origin(); }
  void step(Rng& rng) override {
    auto nb = g_.neighbors(v_);
    v_ = std::move(nb[std::uniform_int_distribution<std::size_t>(0, nb.size() - 1)(rng)]);
  }
  std::int64_t distance() const override { return g_.distance(v_); }
  VertexKey key() const override { return v_; }

 private:
  const Graph& g_;
  VertexKey v_;
};

}  // namespace

// ------------------------------------------------------------------ public

std::int64_t lamplighter_distance(std::span<const std::int64_t> lamps, std::int64_t y) {
  std::int64_t l = std::min<std::int64_t>(0, y), r = std::max<std::int64_t>(0, y);
  if (!lamps.empty()) {
    l = std::min(l, lamps.front());
    r = std::max(r, lamps.back());
  }
  const std::int64_t left_first = -l + (r - l) + std::abs(r - y);
  const std::int64_t right_first = r + (r - l) + std::abs(y - l);
  const std::int64_t cost = std::min(left_first, right_first);
  // Lamp at the origin alone with the lighter at home: needs a round trip.
  if (cost == 0 && !lamps.empty()) return 2;
  return cost;
}

std::unique_ptr<Walker> Graph::walker() const { return std::make_unique<GenericWalker>(*this); }

void Graph::require_valid(const VertexKey& v) const {
  if (!valid(v)) throw StructuralError("invalid vertex key for " + spec().to_string());
}

double Offspring::mean() const {
  double m = 0;
  for (auto [c, p] : law) m += c * p;
  return m;
}

void Offspring::validate() const {
  if (law.empty()) throw ParameterError("offspring law is empty");
  double total = 0;
  for (auto [c, p] : law) {
    if (c < 0 || p < 0) throw ParameterError("offspring law needs nonnegative counts and probabilities");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("offspring probabilities sum to " + std::to_string(total) + ", not 1");
  if (mean() <= 1.0) throw ParameterError("offspring mean must exceed 1 (supercritical)");
}

void GraphSpec::validate() const {
  switch (family) {
    case Family::Lattice:
      if (d < 1) throw ParameterError("lattice needs d >= 1");
      break;
    case Family::DaryTree:
    case Family::RegularTree:
      if (d < 2) throw ParameterError("trees need d >= 2");
      break;
    case Family::ProductTree:
      if (!(d >= k && k >= 1 && d + k >= 3)) throw ParameterError("prodtree needs d >= k >= 1 and d + k >= 3");
      break;
    case Family::GaltonWatson:
      offspring.validate();
      if (gw_depth < 0) throw ParameterError("gw depth must be >= 0");
      break;
    case Family::Comb:
    case Family::Lamplighter:
      break;
  }
}

GraphSpec GraphSpec::parse(std::string_view text) {
  GraphSpec s;
  auto colon = text.find(':');
  auto name = text.substr(0, colon);
  auto params = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  auto kv = [&](char sep) {
    std::vector<std::pair<std::string_view, std::string_view>> out;
    if (params.empty()) return out;
    for (auto item : split(params, sep)) {
      auto eq = item.find('=');
      if (eq == std::string_view::npos) throw StructuralError("expected key=value in graph spec: '" + std::string(item) + "'");
      out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
    }
    return out;
  };

  if (name == "lattice" || name == "dary" || name == "regtree" || name == "prodtree") {
    s.family = name == "lattice" ? Family::Lattice
               : name == "dary"  ? Family::DaryTree
               : name == "regtree" ? Family::RegularTree
                                   : Family::ProductTree;
    s.d = -1;
    for (auto [key, val] : kv(',')) {
      if (key == "d")
        s.d = static_cast<int>(parse_int(val, "d"));
      else if (key == "k" && s.family == Family::ProductTree)
        s.k = static_cast<int>(parse_int(val, "k"));
      else
        throw StructuralError("unknown parameter '" + std::string(key) + "' for " + std::string(name));
    }
    if (s.d < 0) throw StructuralError(std::string(name) + " needs d=");
    if (s.family == Family::ProductTree && s.k == 0) throw StructuralError("prodtree needs k=");
  } else if (name == "comb" || name == "lamplighter") {
    if (!params.empty()) throw StructuralError(std::string(name) + " takes no parameters");
    s.family = name == "comb" ? Family::Comb : Family::Lamplighter;
    s.d = 2;
  } else if (name == "gw") {
    s.family = Family::GaltonWatson;
    bool have_dist = false;
    for (auto [key, val] : kv(';')) {
      if (key == "dist") {
        have_dist = true;
        for (auto pair : split(val, ',')) {
          auto c = pair.find(':');
          if (c == std::string_view::npos) throw StructuralError("offspring entry must look like count:prob");
          s.offspring.law.emplace_back(static_cast<int>(parse_int(pair.substr(0, c), "count")),
                                       parse_double(pair.substr(c + 1), "probability"));
        }
      } else if (key == "seed") {
        s.seed = static_cast<std::uint64_t>(parse_int(val, "seed"));
      } else if (key == "depth") {
        s.gw_depth = static_cast<int>(parse_int(val, "depth"));
      } else {
        throw StructuralError("unknown gw parameter '" + std::string(key) + "'");
      }
    }
    if (!have_dist) throw StructuralError("gw needs dist=");
  } else {
    throw StructuralError("unknown graph family '" + std::string(name) + "'");
  }
  s.validate();
  return s;
}

std::string GraphSpec::to_string() const {
  std::ostringstream os;
  switch (family) {
    case Family::Lattice: os << "lattice:d=" << d; break;
    case Family::Comb: os << "comb"; break;
    case Family::DaryTree: os << "dary:d=" << d; break;
    case Family::RegularTree: os << "regtree:d=" << d; break;
    case Family::ProductTree: os << "prodtree:d=" << d << ",k=" << k; break;
    case Family::Lamplighter: os << "lamplighter"; break;
    case Family::GaltonWatson: {
      os << "gw:dist=";
      for (std::size_t i = 0; i < offspring.law.size(); ++i)
        os << (i ? "," : "") << offspring.law[i].first << ":" << offspring.law[i].second;
      os << ";seed=" << seed << ";depth=" << gw_depth;
      break;
    }
  }
  return os.str();
}

GraphPtr make_graph(const GraphSpec& spec) {
  spec.validate();
  switch (spec.family) {
    case Family::Lattice: return std::make_shared<LatticeGraph>(spec);
    case Family::Comb: return std::make_shared<CombGraph>(spec);
    case Family::DaryTree: return std::make_shared<TreeGraph>(spec, TreeShape{spec.d, spec.d});
    case Family::RegularTree: return std::make_shared<TreeGraph>(spec, TreeShape{spec.d + 1, spec.d});
    case Family::ProductTree: return std::make_shared<ProductTreeGraph>(spec);
    case Family::Lamplighter: return std::make_shared<LamplighterGraph>(spec);
    case Family::GaltonWatson:
      return std::make_shared<GwGraph>(spec, gw_materialize(spec.offspring, spec.seed, spec.gw_depth));
  }
  throw StructuralError("unhandled family");
}

GraphPtr make_graph(std::string_view spec_text) { return make_graph(GraphSpec::parse(spec_text)); }

std::vector<VertexKey> ball(const Graph& g, std::int64_t n, std::size_t cap) {
  std::vector<VertexKey> out;
  if (n <= 0) return out;
  std::unordered_map<VertexKey, char, VertexKeyHash> seen;
  std::deque<VertexKey> frontier;
  auto o = g.origin();
  seen.emplace(o, 1);
  frontier.push_back(o);
  while (!frontier.empty()) {
    auto v = std::move(frontier.front());
    frontier.pop_front();
    out.push_back(v);
    if (out.size() > cap) throw ResourceLimit("ball of radius " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
    for (auto& u : g.neighbors(v)) {
      if (seen.contains(u)) continue;
      seen.emplace(u, 1);
      if (g.distance(u) < n) frontier.push_back(std::move(u));
    }
  }
  std::sort(out.begin(), out.end(), [&](const VertexKey& a, const VertexKey& b) {
    auto da = g.distance(a), db = g.distance(b);
    return da != db ? da < db : a < b;
  });
  return out;
}

std::size_t ball_volume(const Graph& g, std::int64_t n, std::size_t cap) { return ball(g, n, cap).size(); }

// ------------------------------------------------------------- VertexTable

VertexTable::VertexTable(GraphPtr g) : graph_(std::move(g)) { intern(graph_->origin()); }

VertexId VertexTable::intern(const VertexKey& v) {
  if (auto it = index_.find(v); it != index_.end()) return it->second;
  graph_->require_valid(v);
  const auto id = static_cast<VertexId>(keys_.size());
  keys_.push_back(v);
  dist_.push_back(graph_->distance(v));
  adj_.emplace_back();
  expanded_.push_back(0);
  index_.emplace(v, id);
  return id;
}

std::optional<VertexId> VertexTable::find(const VertexKey& v) const {
  if (auto it = index_.find(v); it != index_.end()) return it->second;
  return std::nullopt;
}

std::span<const VertexId> VertexTable::neighbors(VertexId id) {
  if (!expanded_[id]) {
    auto nb = graph_->neighbors(keys_[id]);
    std::vector<VertexId> ids;
    ids.reserve(nb.size());
    for (auto& u : nb) ids.push_back(intern(u));
    adj_[id] = std::move(ids);
    expanded_[id] = 1;
  }
  return adj_[id];
}

std::vector<VertexId> VertexTable::ball(std::int64_t n, std::size_t cap) {
  std::vector<VertexId> out;
  if (n <= 0) return out;
  std::vector<char> seen(size(), 0);
  std::deque<VertexId> frontier{origin()};
  seen[origin()] = 1;
  while (!frontier.empty()) {
    auto v = frontier.front();
    frontier.pop_front();
    out.push_back(v);
    if (out.size() > cap) throw ResourceLimit("ball of radius " + std::to_string(n) + " exceeds cap " + std::to_string(cap));
    for (auto u : neighbors(v)) {
      if (u >= seen.size()) seen.resize(size(), 0);
      if (seen[u]) continue;
      seen[u] = 1;
      if (distance(u) < n) frontier.push_back(u);
    }
  }
  std::sort(out.begin(), out.end(), [&](VertexId a, VertexId b) {
    return dist_[a] != dist_[b] ? dist_[a] < dist_[b] : keys_[a] < keys_[b];
  });
  return out;
}

}  // namespace toppler
