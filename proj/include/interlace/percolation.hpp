#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "interlace/graph.hpp"
#include "interlace/soup.hpp"
#include "interlace/stats.hpp"

namespace interlace {

/// Disjoint-set forest with path halving and union by size.
class UnionFind {
 public:
  explicit UnionFind(std::size_t n = 0) { reset(n); }
  void reset(std::size_t n);
  std::uint32_t find(std::uint32_t a);
  bool unite(std::uint32_t a, std::uint32_t b);  // true if two sets were merged
  std::size_t set_size(std::uint32_t a) { return size_[find(a)]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint32_t> size_;
};

inline constexpr std::uint32_t kNoCluster = UINT32_MAX;

/// Connected components of an occupied subset of a window, using edges that
/// join two window members.
struct ClusterDecomposition {
  std::vector<std::uint32_t> root;  // per window index; kNoCluster when unoccupied
  std::size_t cluster_count = 0;

  bool occupied(std::size_t i) const { return root[i] != kNoCluster; }
  bool connected(std::size_t a, std::size_t b) const { return occupied(a) && root[a] == root[b]; }
  std::vector<std::size_t> cluster_sizes() const;
};

ClusterDecomposition clusters(const Ball& window, const std::vector<std::uint8_t>& occupied);
ClusterDecomposition clusters(const Ball& window, std::span<const Vertex> occupied);

struct FrequencyEstimate {
  Frequency freq;
  double estimate = 0.0;
  double ci = 0.0;  // binomial 3 sigma
};

/// P[x and y in the same trace cluster of the window].
FrequencyEstimate two_point(const Graph& g, double u, const Vertex& x, const Vertex& y, const Ball& window,
                            std::size_t n_samples, std::uint64_t seed, int workers = 1, int kill_radius = -1);

/// P[center vacant and its vacant window cluster reaches distance R].
FrequencyEstimate eta_proxy(const Graph& g, double u, int radius, std::size_t n_samples, std::uint64_t seed,
                            int workers = 1, int kill_radius = -1);

enum class Observable { EtaProxy, TwoPoint, TraceClusterCount };

struct SweepRow {
  double u = 0.0;
  std::uint64_t n = 0;
  double estimate = 0.0;
  double ci = 0.0;
};

struct SweepReport {
  std::string graph;
  Observable observable = Observable::EtaProxy;
  std::string observable_name;
  Vertex center;
  int window_radius = 0;
  int kill_radius = 0;
  std::uint64_t seed = 0;
  std::vector<double> grid;
  std::vector<SweepRow> rows;
  std::uint64_t monotonicity_violations = 0;  // per-sample, across consecutive levels
};

struct SweepOptions {
  Observable observable = Observable::EtaProxy;
  std::optional<Vertex> x, y;  // two-point pair, defaults to the center
  int kill_radius = -1;  // -1 selects the default
};

/// One layered sample per index covers the whole grid, so the sweep is a
/// monotone coupling across u.
SweepReport sweep(const Graph& g, std::span<const double> u_grid, const Ball& window, std::size_t n_samples,
                  std::uint64_t seed, int workers = 1, SweepOptions options = {});

std::string observable_name(Observable o);
Observable parse_observable(std::string_view name);

struct BoundsReport {
  std::string graph;
  int max_degree = 0;
  double rho = 0.0;
  double escape_origin = 0.0;
  std::optional<double> kappa_v, kappa_e;
  double u_c_lower = 0.0;
  std::optional<double> u_star_lower, u_star_upper;
  bool amenable = false;
  std::vector<std::string> notes;
};

BoundsReport bounds_report(const Graph& g);

}  // namespace interlace
