#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "interlace/graph.hpp"
#include "interlace/rng.hpp"
#include "interlace/soup.hpp"
#include "interlace/stats.hpp"

namespace interlace {

enum class ThinningStage : std::uint8_t {
  Soup,  // frog particle kept as an interlacement trajectory
  Brw,   // fresh circle child kept as a frog particle
};

struct Acceptance {
  Vertex site;
  std::uint32_t particle = 0;
  ThinningStage stage = ThinningStage::Soup;
  bool accepted = false;
};

/// Joint sample of the interlacement cluster of the center, the frog trace and
/// (optionally) the branching random walk trace, all inside one window.
struct CoupledRun {
  Vertex center;
  int window_radius = 0;
  int kill_radius = 0;
  std::vector<Vertex> interlacement_cluster;  // sorted
  std::vector<Vertex> frog_trace;             // sorted
  std::optional<std::vector<Vertex>> brw_trace;
  std::vector<Acceptance> acceptance_log;
  VertexMap<std::uint64_t> particle_counts;  // frog particles per activated site
  std::vector<Vertex> site_order;             // frog sites in the order they were opened
  int rounds = 0;
  bool brw_truncated = false;  // node budget or generation cap hit before the window was covered
  std::uint64_t brw_nodes = 0;
  std::uint64_t violations = 0;  // containment failures (must stay 0)
};

CoupledRun couple_soup_frog(const Graph& g, double u, const Vertex& x, const Ball& window, int kill_radius,
                            Rng& rng);

inline constexpr std::size_t kDefaultNodeBudget = 2'000'000;

CoupledRun couple_frog_brw(const Graph& g, double u, const Vertex& x, const Ball& window, int kill_radius, int n_max,
                           Rng& rng, std::size_t node_budget = kDefaultNodeBudget);

/// Cluster of the center built from a soup sample with kept paths, revealed the
/// same way the coupling reveals it: trajectories meeting the current set,
/// then the window-clipped closure of their ranges.
std::vector<Vertex> revealed_cluster(const Ball& window, const SoupSample& sample);

struct SizeSummary {
  MeanStat mean;
  std::vector<std::uint64_t> histogram;  // histogram[k] = runs with size k

  void add(std::size_t size);
  void merge(const SizeSummary& other);
};

struct ChainReport {
  std::uint64_t runs = 0;
  std::uint64_t violations = 0;
  std::uint64_t order_violations = 0;  // |cluster| <= |frog| <= |brw| failures
  std::uint64_t brw_truncated = 0;
  SizeSummary cluster, frog, brw;
  std::vector<Vertex> probes;
  std::vector<Frequency> cluster_hits, frog_hits;  // aligned with probes

  void merge(const ChainReport& other);
};

/// Runs both couplings end to end, n_runs times.
ChainReport chain_report(const Graph& g, double u, const Vertex& x, const Ball& window, int kill_radius, int n_max,
                         std::size_t n_runs, std::uint64_t seed, int workers = 1,
                         std::vector<Vertex> probes = {});

}  // namespace interlace
