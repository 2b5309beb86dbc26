#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace interlace {

/// A vertex of one of the supported infinite graphs, stored as its canonical
/// byte encoding.
///
/// Encodings:
///   lattice  4 bytes per coordinate, little-endian two's complement int32
///   tree     one byte per symbol of the reduced child-index word (root = "")
///   product  lattice coordinates first, then the tree word
///
/// Two vertices are equal iff their encodings are byte-equal, and the
/// canonical order is the byte-lexicographic order of the encodings.
class Vertex {
 public:
  Vertex() = default;
  explicit Vertex(std::string bytes) : bytes_(std::move(bytes)) {}

  const std::string& bytes() const { return bytes_; }
  std::string& mutable_bytes() { return bytes_; }

  friend bool operator==(const Vertex&, const Vertex&) = default;
  friend std::strong_ordering operator<=>(const Vertex& a, const Vertex& b) {
    const int c = a.bytes_.compare(b.bytes_);
    return c < 0 ? std::strong_ordering::less : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  std::string bytes_;
};

struct VertexHash {
  std::size_t operator()(const Vertex& v) const noexcept { return std::hash<std::string>{}(v.bytes()); }
};

using VertexSet = std::unordered_set<Vertex, VertexHash>;
template <class T>
using VertexMap = std::unordered_map<Vertex, T, VertexHash>;

/// Sorted copy of a vertex set (canonical order).
std::vector<Vertex> sorted(const VertexSet& set);

enum class GraphKind { Lattice, RegularTree, Product };

inline constexpr std::size_t kDefaultBallBudget = 4'000'000;

/// Finite set of vertices within graph distance `radius` of `center`, with its
/// outer vertex boundary and in-ball adjacency.
struct Ball {
  Vertex center;
  int radius = 0;
  std::vector<Vertex> members;       // breadth-first order, members[0] == center
  std::vector<int> depth;            // distance to center, aligned with members
  std::vector<Vertex> boundary;      // vertices at distance radius + 1
  std::vector<std::vector<std::uint32_t>> adjacency;  // in-ball neighbor indices
  VertexMap<std::uint32_t> index;

  std::size_t size() const { return members.size(); }
  bool contains(const Vertex& v) const { return index.contains(v); }
  std::optional<std::uint32_t> index_of(const Vertex& v) const {
    auto it = index.find(v);
    if (it == index.end()) return std::nullopt;
    return it->second;
  }
};

/// Vertices within distance R of a finite set K; used by the potential solvers.
struct Neighborhood {
  std::vector<Vertex> members;    // sources first, then breadth-first order
  std::vector<int> depth;         // distance to K
  std::vector<Vertex> boundary;   // vertices at distance R + 1 from K
  VertexMap<std::uint32_t> index;
};

/// Immutable descriptor of Z^d', the d-regular tree, or their product.
///
/// All three are Cayley graphs: the lattice of Z^d' with unit generators, the
/// tree of the free product of d copies of Z/2. `translate` is left
/// multiplication in that group and is a graph automorphism.
class Graph {
 public:
  static Graph lattice(int dim);
  static Graph tree(int degree);
  static Graph product(int tree_degree, int lattice_dim);
  /// "z:<d>", "tree:<d>", or "treez:<d>x<d'>".
  static Graph parse(std::string_view spec);

  GraphKind kind() const { return kind_; }
  int tree_degree() const { return tree_degree_; }
  int lattice_dim() const { return lattice_dim_; }
  /// Common vertex degree (all kinds are vertex-transitive).
  int degree() const { return degree_; }
  bool transient() const;
  bool amenable() const { return kind_ == GraphKind::Lattice; }
  std::string spec() const;

  Vertex origin() const;
  void validate(const Vertex& v) const;

  /// Neighbors in the fixed order: lattice +e1,-e1,+e2,...; tree parent first
  /// then children ascending; product tree moves then lattice moves.
  std::vector<Vertex> neighbors(const Vertex& v) const;
  /// Moves `v` in place to its k-th neighbor (k < degree()).
  void step(Vertex& v, int k) const;
  Vertex neighbor(const Vertex& v, int k) const {
    Vertex w = v;
    step(w, k);
    return w;
  }
  bool adjacent(const Vertex& a, const Vertex& b) const { return distance(a, b) == 1; }

  int distance(const Vertex& a, const Vertex& b) const;
  /// Distance of the tree component from the tree root (product and tree only).
  int tree_depth(const Vertex& v) const;

  Ball ball(const Vertex& center, int radius, std::size_t budget = kDefaultBallBudget) const;
  Neighborhood neighborhood(std::span<const Vertex> sources, int radius,
                            std::size_t budget = kDefaultBallBudget) const;
  /// Exact member count of a ball of the given radius.
  std::size_t ball_size(int radius) const;
  /// Exact number of vertices at distance exactly `radius` from a vertex.
  std::size_t sphere_size(int radius) const;

  /// Group product by * v; maps the origin to `by`.
  Vertex translate(const Vertex& v, const Vertex& by) const;

  std::string format(const Vertex& v) const;
  Vertex parse_vertex(std::string_view text) const;
  std::vector<Vertex> parse_vertex_list(std::string_view text) const;

  // Component access and construction. tree_word is the internal child-index
  // word (first symbol < d, later ones < d-1); the text form from format() is
  // the generator word instead, where a child of generator g is any symbol != g.
  std::vector<int> coords(const Vertex& v) const;
  std::vector<int> tree_word(const Vertex& v) const;
  Vertex make_vertex(std::span<const int> tree_word, std::span<const int> coords) const;

  friend bool operator==(const Graph&, const Graph&) = default;

 private:
  Graph(GraphKind kind, int tree_degree, int lattice_dim);

  std::size_t lattice_bytes() const { return 4 * static_cast<std::size_t>(lattice_dim_); }
  int tree_moves() const { return kind_ == GraphKind::Lattice ? 0 : tree_degree_; }

  GraphKind kind_;
  int tree_degree_ = 0;
  int lattice_dim_ = 0;
  int degree_ = 0;
};

}  // namespace interlace
