#include "interlace/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstring>
#include <deque>
#include <limits>

#include "interlace/errors.hpp"

namespace interlace {

namespace {

constexpr int kMaxTreeDegree = 255;
constexpr int kMaxLatticeDim = 16;

std::int32_t load_coord(const std::string& bytes, std::size_t i) {
  std::uint32_t u = 0;
  for (int b = 3; b >= 0; --b) {
    u = (u << 8) | static_cast<unsigned char>(bytes[4 * i + static_cast<std::size_t>(b)]);
  }
  return static_cast<std::int32_t>(u);
}

void store_coord(std::string& bytes, std::size_t i, std::int32_t value) {
  auto u = static_cast<std::uint32_t>(value);
  for (int b = 0; b < 4; ++b) {
    bytes[4 * i + static_cast<std::size_t>(b)] = static_cast<char>(u & 0xFFu);
    u >>= 8;
  }
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw EncodingError("malformed " + std::string(what) + ": '" + std::string(text) + "'");
  }
  return value;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return static_cast<std::size_t>(r + 0.5);
}

std::size_t saturating_add(std::size_t a, std::size_t b) {
  return a > std::numeric_limits<std::size_t>::max() - b ? std::numeric_limits<std::size_t>::max() : a + b;
}

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > std::numeric_limits<std::size_t>::max() / a) return std::numeric_limits<std::size_t>::max();
  return a * b;
}

// Number of points of Z^dim at L1 norm exactly r.
std::size_t lattice_sphere(int dim, int r) {
  if (r < 0) return 0;
  if (r == 0) return 1;
  std::size_t total = 0;
  for (int k = 1; k <= std::min(dim, r); ++k) {
    total = saturating_add(total, saturating_mul(saturating_mul(std::size_t{1} << k, binomial(dim, k)), binomial(r - 1, k - 1)));
  }
  return total;
}

std::size_t tree_sphere(int d, int r) {
  if (r < 0) return 0;
  if (r == 0) return 1;
  std::size_t n = static_cast<std::size_t>(d);
  for (int i = 1; i < r; ++i) n = saturating_mul(n, static_cast<std::size_t>(d - 1));
  return n;
}

// Child-index word <-> generator word of the free product of Z/2's.
std::vector<int> to_generators(std::span<const int> word) {
  std::vector<int> gens(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (i == 0) {
      gens[i] = word[i];
    } else {
      gens[i] = word[i] < gens[i - 1] ? word[i] : word[i] + 1;
    }
  }
  return gens;
}

std::vector<int> from_generators(std::span<const int> gens) {
  std::vector<int> word(gens.size());
  for (std::size_t i = 0; i < gens.size(); ++i) {
    if (i == 0) {
      word[i] = gens[i];
    } else {
      word[i] = gens[i] < gens[i - 1] ? gens[i] : gens[i] - 1;
    }
  }
  return word;
}

}  // namespace

std::vector<Vertex> sorted(const VertexSet& set) {
  std::vector<Vertex> out(set.begin(), set.end());
  std::sort(out.begin(), out.end());
  return out;
}

Graph::Graph(GraphKind kind, int tree_degree, int lattice_dim)
    : kind_(kind), tree_degree_(tree_degree), lattice_dim_(lattice_dim) {
  degree_ = (kind == GraphKind::Lattice ? 0 : tree_degree) + 2 * lattice_dim;
}

Graph Graph::lattice(int dim) {
  if (dim < 1 || dim > kMaxLatticeDim) throw EncodingError("lattice dimension must be in [1, 16]");
  return Graph(GraphKind::Lattice, 0, dim);
}

Graph Graph::tree(int degree) {
  if (degree < 3 || degree > kMaxTreeDegree) throw EncodingError("tree degree must be in [3, 255]");
  return Graph(GraphKind::RegularTree, degree, 0);
}

Graph Graph::product(int tree_degree, int lattice_dim) {
  if (tree_degree < 3 || tree_degree > kMaxTreeDegree) throw EncodingError("tree degree must be in [3, 255]");
  if (lattice_dim < 1 || lattice_dim > kMaxLatticeDim) throw EncodingError("lattice dimension must be in [1, 16]");
  return Graph(GraphKind::Product, tree_degree, lattice_dim);
}

Graph Graph::parse(std::string_view spec) {
  spec = trim(spec);
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw EncodingError("graph spec needs '<kind>:<params>': '" + std::string(spec) + "'");
  const auto kind = spec.substr(0, colon);
  const auto params = spec.substr(colon + 1);
  if (kind == "z") return lattice(parse_int(params, "lattice dimension"));
  if (kind == "tree") return tree(parse_int(params, "tree degree"));
  if (kind == "treez") {
    const auto x = params.find('x');
    if (x == std::string_view::npos) throw EncodingError("product spec must be treez:<d>x<d'>");
    return product(parse_int(params.substr(0, x), "tree degree"), parse_int(params.substr(x + 1), "lattice dimension"));
  }
  throw EncodingError("unknown graph kind '" + std::string(kind) + "'");
}

std::string Graph::spec() const {
  switch (kind_) {
    case GraphKind::Lattice:
      return "z:" + std::to_string(lattice_dim_);
    case GraphKind::RegularTree:
      return "tree:" + std::to_string(tree_degree_);
    case GraphKind::Product:
      return "treez:" + std::to_string(tree_degree_) + "x" + std::to_string(lattice_dim_);
  }
  return {};
}

bool Graph::transient() const { return kind_ != GraphKind::Lattice || lattice_dim_ >= 3; }

Vertex Graph::origin() const { return Vertex(std::string(lattice_bytes(), '\0')); }

void Graph::validate(const Vertex& v) const {
  const auto& b = v.bytes();
  const std::size_t lb = lattice_bytes();
  if (kind_ == GraphKind::Lattice) {
    if (b.size() != lb) throw EncodingError("lattice vertex has wrong encoding length");
    return;
  }
  if (b.size() < lb) throw EncodingError("vertex encoding too short");
  for (std::size_t i = lb; i < b.size(); ++i) {
    const int s = static_cast<unsigned char>(b[i]);
    const int limit = (i == lb) ? tree_degree_ : tree_degree_ - 1;
    if (s >= limit) throw EncodingError("tree word is not reduced");
  }
}

std::vector<Vertex> Graph::neighbors(const Vertex& v) const {
  validate(v);
  std::vector<Vertex> out;
  out.reserve(static_cast<std::size_t>(degree_));
  for (int k = 0; k < degree_; ++k) out.push_back(neighbor(v, k));
  return out;
}

void Graph::step(Vertex& v, int k) const {
  std::string& b = v.mutable_bytes();
  const std::size_t lb = lattice_bytes();
  const int tm = tree_moves();
  if (k < tm) {
    if (b.size() == lb) {
      b.push_back(static_cast<char>(k));
    } else if (k == 0) {
      b.pop_back();
    } else {
      b.push_back(static_cast<char>(k - 1));
    }
    return;
  }
  const int lk = k - tm;
  const auto axis = static_cast<std::size_t>(lk / 2);
  const std::int32_t delta = (lk % 2 == 0) ? 1 : -1;
  store_coord(b, axis, load_coord(b, axis) + delta);
}

int Graph::distance(const Vertex& a, const Vertex& b) const {
  const auto& x = a.bytes();
  const auto& y = b.bytes();
  const std::size_t lb = lattice_bytes();
  int d = 0;
  for (std::size_t i = 0; i < static_cast<std::size_t>(lattice_dim_); ++i) {
    const std::int64_t diff = static_cast<std::int64_t>(load_coord(x, i)) - load_coord(y, i);
    d += static_cast<int>(diff < 0 ? -diff : diff);
  }
  if (kind_ != GraphKind::Lattice) {
    const std::size_t lx = x.size() - lb;
    const std::size_t ly = y.size() - lb;
    const std::size_t m = std::min(lx, ly);
    std::size_t common = 0;
    while (common < m && x[lb + common] == y[lb + common]) ++common;
    d += static_cast<int>(lx + ly - 2 * common);
  }
  return d;
}

int Graph::tree_depth(const Vertex& v) const {
  return static_cast<int>(v.bytes().size() - lattice_bytes());
}

namespace {

struct BfsResult {
  std::vector<Vertex> members;
  std::vector<int> depth;
  std::vector<Vertex> boundary;
  VertexMap<std::uint32_t> index;
};

BfsResult bfs(const Graph& g, std::span<const Vertex> sources, int radius, std::size_t budget) {
  BfsResult r;
  for (const auto& s : sources) {
    g.validate(s);
    if (r.index.emplace(s, static_cast<std::uint32_t>(r.members.size())).second) {
      r.members.push_back(s);
      r.depth.push_back(0);
    }
  }
  VertexSet boundary_seen;
  for (std::size_t head = 0; head < r.members.size(); ++head) {
    const int dep = r.depth[head];
    for (int k = 0; k < g.degree(); ++k) {
      Vertex w = g.neighbor(r.members[head], k);
      if (r.index.contains(w)) continue;
      if (dep == radius) {
        if (boundary_seen.insert(w).second) r.boundary.push_back(std::move(w));
        continue;
      }
      if (r.members.size() >= budget) {
        throw ResourceError("ball exceeds memory budget of " + std::to_string(budget) + " vertices",
                            r.members.size() * 2);
      }
      r.index.emplace(w, static_cast<std::uint32_t>(r.members.size()));
      r.members.push_back(std::move(w));
      r.depth.push_back(dep + 1);
    }
  }
  return r;
}

}  // namespace

Ball Graph::ball(const Vertex& center, int radius, std::size_t budget) const {
  if (radius < 0) throw ArgumentError("ball radius must be nonnegative");
  const std::size_t need = ball_size(radius);
  if (need > budget) throw ResourceError("ball of radius " + std::to_string(radius) + " exceeds memory budget", need);
  const Vertex sources[] = {center};
  BfsResult r = bfs(*this, sources, radius, budget);
  Ball b;
  b.center = center;
  b.radius = radius;
  b.members = std::move(r.members);
  b.depth = std::move(r.depth);
  b.boundary = std::move(r.boundary);
  b.index = std::move(r.index);
  b.adjacency.resize(b.members.size());
  for (std::size_t i = 0; i < b.members.size(); ++i) {
    for (int k = 0; k < degree_; ++k) {
      auto it = b.index.find(neighbor(b.members[i], k));
      if (it != b.index.end()) b.adjacency[i].push_back(it->second);
    }
  }
  return b;
}

Neighborhood Graph::neighborhood(std::span<const Vertex> sources, int radius, std::size_t budget) const {
  if (radius < 0) throw ArgumentError("neighborhood radius must be nonnegative");
  if (sources.empty()) throw ArgumentError("neighborhood needs at least one source");
  const std::size_t need = saturating_mul(ball_size(radius), sources.size());
  if (sources.size() == 1 && need > budget) {
    throw ResourceError("neighborhood of radius " + std::to_string(radius) + " exceeds memory budget", need);
  }
  BfsResult r = bfs(*this, sources, radius, budget);
  return Neighborhood{std::move(r.members), std::move(r.depth), std::move(r.boundary), std::move(r.index)};
}

std::size_t Graph::sphere_size(int radius) const {
  switch (kind_) {
    case GraphKind::Lattice:
      return lattice_sphere(lattice_dim_, radius);
    case GraphKind::RegularTree:
      return tree_sphere(tree_degree_, radius);
    case GraphKind::Product: {
      std::size_t total = 0;
      for (int j = 0; j <= radius; ++j) {
        total = saturating_add(total, saturating_mul(tree_sphere(tree_degree_, j), lattice_sphere(lattice_dim_, radius - j)));
      }
      return total;
    }
  }
  return 0;
}

std::size_t Graph::ball_size(int radius) const {
  std::size_t total = 0;
  for (int r = 0; r <= radius; ++r) total = saturating_add(total, sphere_size(r));
  return total;
}

std::vector<int> Graph::coords(const Vertex& v) const {
  std::vector<int> out(static_cast<std::size_t>(lattice_dim_));
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = load_coord(v.bytes(), i);
  return out;
}

std::vector<int> Graph::tree_word(const Vertex& v) const {
  const auto& b = v.bytes();
  std::vector<int> out;
  for (std::size_t i = lattice_bytes(); i < b.size(); ++i) out.push_back(static_cast<unsigned char>(b[i]));
  return out;
}

Vertex Graph::make_vertex(std::span<const int> word, std::span<const int> xs) const {
  if (xs.size() != static_cast<std::size_t>(lattice_dim_)) throw EncodingError("wrong number of lattice coordinates");
  if (kind_ == GraphKind::Lattice && !word.empty()) throw EncodingError("lattice vertex has no tree component");
  std::string b(lattice_bytes(), '\0');
  for (std::size_t i = 0; i < xs.size(); ++i) store_coord(b, i, xs[i]);
  for (int s : word) {
    if (s < 0 || s > 255) throw EncodingError("tree symbol out of range");
    b.push_back(static_cast<char>(s));
  }
  Vertex v(std::move(b));
  validate(v);
  return v;
}

Vertex Graph::translate(const Vertex& v, const Vertex& by) const {
  validate(v);
  validate(by);
  std::vector<int> xs = coords(v);
  const std::vector<int> shift = coords(by);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] += shift[i];
  std::vector<int> word;
  if (kind_ != GraphKind::Lattice) {
    std::vector<int> gens = to_generators(tree_word(by));
    for (int g : to_generators(tree_word(v))) {
      if (!gens.empty() && gens.back() == g) {
        gens.pop_back();
      } else {
        gens.push_back(g);
      }
    }
    word = from_generators(gens);
  }
  return make_vertex(word, xs);
}

std::string Graph::format(const Vertex& v) const {
  std::string out;
  if (kind_ != GraphKind::Lattice) {
    const auto word = to_generators(tree_word(v));
    if (word.empty()) {
      out = "o";
    } else {
      for (std::size_t i = 0; i < word.size(); ++i) {
        if (tree_degree_ > 10 && i > 0) out.push_back('.');
        out += std::to_string(word[i]);
      }
    }
  }
  if (kind_ == GraphKind::Product) out.push_back('|');
  if (kind_ != GraphKind::RegularTree) {
    const auto xs = coords(v);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i > 0) out.push_back(',');
      out += std::to_string(xs[i]);
    }
  }
  return out;
}

Vertex Graph::parse_vertex(std::string_view text) const {
  text = trim(text);
  std::string_view tree_part;
  std::string_view lattice_part;
  if (kind_ == GraphKind::Lattice) {
    lattice_part = text;
  } else if (kind_ == GraphKind::RegularTree) {
    tree_part = text;
  } else {
    const auto bar = text.find('|');
    if (bar == std::string_view::npos) throw EncodingError("product vertex must be '<tree>|<coords>'");
    tree_part = trim(text.substr(0, bar));
    lattice_part = trim(text.substr(bar + 1));
  }
  std::vector<int> word;
  if (kind_ != GraphKind::Lattice && !tree_part.empty() && tree_part != "o") {
    if (tree_part.find('.') != std::string_view::npos || tree_degree_ > 10) {
      std::size_t pos = 0;
      while (pos <= tree_part.size()) {
        const auto dot = tree_part.find('.', pos);
        const auto piece = tree_part.substr(pos, dot == std::string_view::npos ? std::string_view::npos : dot - pos);
        word.push_back(parse_int(piece, "tree symbol"));
        if (dot == std::string_view::npos) break;
        pos = dot + 1;
      }
    } else {
      for (char c : tree_part) {
        if (c < '0' || c > '9') throw EncodingError("malformed tree word '" + std::string(tree_part) + "'");
        word.push_back(c - '0');
      }
    }
  }
  for (std::size_t i = 0; i < word.size(); ++i) {
    if (word[i] < 0 || word[i] >= tree_degree_) throw EncodingError("tree symbol out of range in '" + std::string(tree_part) + "'");
    if (i > 0 && word[i] == word[i - 1]) throw EncodingError("tree word is not reduced: '" + std::string(tree_part) + "'");
  }
  word = from_generators(word);
  std::vector<int> xs;
  if (kind_ != GraphKind::RegularTree) {
    if (lattice_part.size() >= 2 && lattice_part.front() == '(' && lattice_part.back() == ')') {
      lattice_part = lattice_part.substr(1, lattice_part.size() - 2);
    }
    std::size_t pos = 0;
    while (true) {
      const auto comma = lattice_part.find(',', pos);
      const auto piece = trim(lattice_part.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos));
      xs.push_back(parse_int(piece, "lattice coordinate"));
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
  }
  return make_vertex(word, xs);
}

std::vector<Vertex> Graph::parse_vertex_list(std::string_view text) const {
  std::vector<Vertex> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto semi = text.find(';', pos);
    const auto piece = trim(text.substr(pos, semi == std::string_view::npos ? std::string_view::npos : semi - pos));
    if (!piece.empty()) out.push_back(parse_vertex(piece));
    if (semi == std::string_view::npos) break;
    pos = semi + 1;
  }
  return out;
}

}  // namespace interlace
