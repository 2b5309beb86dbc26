#include "interlace/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "interlace/brw.hpp"
#include "interlace/errors.hpp"
#include "interlace/frog.hpp"
#include "interlace/parallel.hpp"

namespace interlace {

namespace {

// A truncated walk seen through the window: cells[t] is the window index of
// the t-th position, or -1 outside the window.
using Cells = std::vector<std::int32_t>;

struct Particle {
  Cells forward;
  Cells backward;
};

std::vector<Vertex> collect(const Ball& window, const std::vector<std::uint8_t>& flags) {
  std::vector<Vertex> out;
  for (std::size_t i = 0; i < flags.size(); ++i) {
    if (flags[i]) out.push_back(window.members[i]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

class Engine {
 public:
  Engine(const Graph& g, double u, const Ball& window, int kill_radius, bool with_brw, int n_max,
         std::size_t node_budget, Rng& rng)
      : g_(g), u_(u), w_(window), kill_(kill_radius), with_brw_(with_brw), n_max_(n_max), budget_(node_budget),
        rng_(rng), lambda_(branching_mean(u, g.degree())) {
    if (!(u >= 0) || !std::isfinite(u)) throw ArgumentError("intensity u must be finite and nonnegative");
    if (kill_radius < window.radius) throw ArgumentError("kill radius must be at least the window radius");
    if (with_brw && n_max < 0) throw ArgumentError("n_max must be nonnegative");
    const std::size_t n = w_.size();
    order_.resize(n);
    std::iota(order_.begin(), order_.end(), 0u);
    std::sort(order_.begin(), order_.end(), [&](auto a, auto b) { return w_.members[a] < w_.members[b]; });
    particles_.resize(n);
    frog_active_.assign(n, 0);
    frog_open_.assign(n, 0);
    frog_reached_.assign(n, 0);
    soup_active_.assign(n, 0);
    soup_open_.assign(n, 0);
    soup_reached_.assign(n, 0);
    brw_reached_.assign(n, 0);
  }

  CoupledRun run() {
    frog_active_[0] = 1;
    soup_active_[0] = 1;
    if (with_brw_) {
      // Generation 0 of the tree: Poisson(lambda) circles at the center.
      const std::uint64_t roots = rng_.poisson(lambda_);
      for (std::uint64_t r = 0; r < roots; ++r) root_circles_.push_back(add_node(-1, NodeType::Circle, 0, w_.center));
    }
    for (;;) {
      ++out_.rounds;
      for (auto i : order_) {
        if (frog_active_[i] && !frog_open_[i]) open_frog_site(i);
      }
      for (auto i : order_) {
        if (soup_active_[i] && !soup_open_[i]) open_soup_site(i);
      }
      auto frog_next = window_closure(w_, frog_reached_);
      auto soup_next = window_closure(w_, soup_reached_);
      const bool same = frog_next == frog_active_ && soup_next == soup_active_;
      frog_active_ = std::move(frog_next);
      soup_active_ = std::move(soup_next);
      if (same) break;
    }
    if (with_brw_) complete_brw();

    out_.center = w_.center;
    out_.window_radius = w_.radius;
    out_.kill_radius = kill_;
    out_.interlacement_cluster = collect(w_, soup_reached_);
    out_.frog_trace = collect(w_, frog_reached_);
    for (std::size_t i = 0; i < w_.size(); ++i) {
      if (soup_reached_[i] && !frog_reached_[i]) ++out_.violations;
      if (with_brw_ && frog_reached_[i] && !brw_reached_[i]) ++out_.violations;
    }
    if (with_brw_) {
      out_.brw_trace = collect(w_, brw_reached_);
      out_.brw_nodes = nodes_.size();
    }
    return std::move(out_);
  }

 private:
  struct Node {
    std::int64_t parent;
    NodeType type;
    int generation;
    Vertex pos;
    bool kids_done = false;  // the bullet child (children for a circle) already exist or fell outside
  };

  std::int32_t cell_of(const Vertex& v, int dist) const {
    return dist <= w_.radius ? static_cast<std::int32_t>(w_.index.at(v)) : -1;
  }

  Cells random_walk(const Vertex& start) {
    Cells cells;
    Vertex v = start;
    const auto deg = static_cast<std::uint32_t>(g_.degree());
    for (;;) {
      const int dist = g_.distance(w_.center, v);
      if (dist > kill_) break;
      cells.push_back(cell_of(v, dist));
      g_.step(v, static_cast<int>(rng_.below(deg)));
    }
    return cells;
  }

  std::uint32_t add_node(std::int64_t parent, NodeType type, int generation, const Vertex& pos) {
    const auto id = static_cast<std::uint32_t>(nodes_.size());
    nodes_.push_back(Node{parent, type, generation, pos});
    const int dist = g_.distance(w_.center, pos);
    if (dist <= w_.radius) brw_reached_[w_.index.at(pos)] = 1;
    if (dist <= w_.radius + 1) nodes_at_[pos].push_back(id);
    return id;
  }

  // The bullet line hanging off `from`: a walk from its position, cut at the kill radius.
  Cells grow_line(std::uint32_t from) {
    Cells cells;
    Vertex v = nodes_[from].pos;
    cells.push_back(cell_of(v, g_.distance(w_.center, v)));
    std::uint32_t prev = from;
    const auto deg = static_cast<std::uint32_t>(g_.degree());
    for (;;) {
      g_.step(v, static_cast<int>(rng_.below(deg)));
      const int dist = g_.distance(w_.center, v);
      if (dist > kill_) break;
      const std::uint32_t next = add_node(prev, NodeType::Bullet, nodes_[prev].generation + 1, v);
      nodes_[prev].kids_done = true;
      cells.push_back(cell_of(v, dist));
      prev = next;
    }
    nodes_[prev].kids_done = true;
    return cells;
  }

  void mark(const Cells& cells, std::vector<std::uint8_t>& reached) {
    for (auto c : cells) {
      if (c >= 0) reached[static_cast<std::size_t>(c)] = 1;
    }
  }

  void open_frog_site(std::uint32_t i) {
    frog_open_[i] = 1;
    const Vertex& y = w_.members[i];
    out_.site_order.push_back(y);
    auto& bucket = particles_[i];
    const double target = u_ * g_.degree();
    if (!with_brw_) {
      const std::uint64_t count = rng_.poisson(target);
      for (std::uint64_t p = 0; p < count; ++p) bucket.push_back(Particle{random_walk(y), random_walk(y)});
    } else {
      // Candidate circles at y and their total intensity.
      std::vector<std::uint32_t> candidates;
      double intensity = 0;
      if (i == 0) {
        candidates = root_circles_;
        intensity = lambda_;
      } else {
        std::vector<std::uint32_t> parents;
        for (int k = 0; k < g_.degree(); ++k) {
          const Vertex z = g_.neighbor(y, k);
          auto it = nodes_at_.find(z);
          if (it == nodes_at_.end()) continue;
          const int back = direction(z, y);
          for (auto id : it->second) {
            if (expanded_.insert(key(id, back)).second) parents.push_back(id);
          }
        }
        intensity = static_cast<double>(parents.size()) * lambda_ / g_.degree();
        const std::uint64_t fresh = rng_.poisson(intensity);
        for (std::uint64_t c = 0; c < fresh; ++c) {
          const std::uint32_t parent = parents[rng_.below(static_cast<std::uint32_t>(parents.size()))];
          candidates.push_back(add_node(parent, NodeType::Circle, nodes_[parent].generation + 1, y));
        }
      }
      if (target > 0 && intensity < target * (1 - 1e-12)) {
        throw std::logic_error("circle intensity below the frog intensity at " + g_.format(y));
      }
      const double keep = intensity > 0 ? std::min(1.0, target / intensity) : 0.0;
      std::uint32_t index = 0;
      for (auto c : candidates) {
        const bool accepted = rng_.bernoulli(keep);
        out_.acceptance_log.push_back(Acceptance{y, index++, ThinningStage::Brw, accepted});
        if (!accepted) continue;
        Cells forward = grow_line(c);
        Cells backward = grow_line(c);
        bucket.push_back(Particle{std::move(forward), std::move(backward)});
      }
    }
    out_.particle_counts[y] = bucket.size();
    for (const auto& p : bucket) {
      mark(p.forward, frog_reached_);
      mark(p.backward, frog_reached_);
    }
  }

  void open_soup_site(std::uint32_t i) {
    // B is the set of sites opened before this one.
    const auto y = static_cast<std::int32_t>(i);
    auto avoids = [&](const Cells& cells, bool skip_start_revisit) {
      for (std::size_t t = 0; t < cells.size(); ++t) {
        const auto c = cells[t];
        if (c < 0) continue;
        if (skip_start_revisit && t > 0 && c == y) return false;
        if (soup_open_[static_cast<std::size_t>(c)]) return false;
      }
      return true;
    };
    std::uint32_t index = 0;
    for (const auto& p : particles_[i]) {
      const bool accepted = avoids(p.backward, true) && avoids(p.forward, false);
      out_.acceptance_log.push_back(Acceptance{w_.members[i], index++, ThinningStage::Soup, accepted});
      if (!accepted) continue;
      mark(p.forward, soup_reached_);
      mark(p.backward, soup_reached_);
    }
    soup_open_[i] = 1;
  }

  int direction(const Vertex& from, const Vertex& to) const {
    for (int k = 0; k < g_.degree(); ++k) {
      if (g_.neighbor(from, k) == to) return k;
    }
    throw std::logic_error("vertices are not adjacent");
  }

  std::uint64_t key(std::uint32_t id, int dir) const {
    return static_cast<std::uint64_t>(id) * static_cast<std::uint64_t>(g_.degree()) + static_cast<std::uint64_t>(dir);
  }

  bool covered() const { return std::all_of(brw_reached_.begin(), brw_reached_.end(), [](auto f) { return f != 0; }); }

  // Fill in every offspring the frog stage did not reveal, generation by
  // generation, until the window is covered or a cap is hit.
  void complete_brw() {
    const auto deg = static_cast<std::uint32_t>(g_.degree());
    const double per_direction = lambda_ / g_.degree();
    bool capped = false;
    for (std::size_t id = 0; id < nodes_.size(); ++id) {
      if (covered()) return;
      if (nodes_.size() >= budget_) {
        out_.brw_truncated = true;
        return;
      }
      const int gen = nodes_[id].generation;
      if (gen >= n_max_) {
        capped = true;
        continue;
      }
      const auto self = static_cast<std::int64_t>(id);
      if (!nodes_[id].kids_done) {
        nodes_[id].kids_done = true;
        const int bullets = nodes_[id].type == NodeType::Circle ? 2 : 1;
        for (int b = 0; b < bullets; ++b) {
          const Vertex v = g_.neighbor(nodes_[id].pos, static_cast<int>(rng_.below(deg)));
          if (g_.distance(w_.center, v) <= kill_) add_node(self, NodeType::Bullet, gen + 1, v);
        }
      }
      for (int k = 0; k < g_.degree(); ++k) {
        if (expanded_.contains(key(static_cast<std::uint32_t>(id), k))) continue;
        const std::uint64_t kids = rng_.poisson(per_direction);
        if (kids == 0) continue;
        const Vertex v = g_.neighbor(nodes_[id].pos, k);
        if (g_.distance(w_.center, v) > kill_) continue;
        for (std::uint64_t c = 0; c < kids; ++c) add_node(self, NodeType::Circle, gen + 1, v);
      }
    }
    if (capped && !covered()) out_.brw_truncated = true;
  }

  const Graph& g_;
  double u_;
  const Ball& w_;
  int kill_;
  bool with_brw_;
  int n_max_;
  std::size_t budget_;
  Rng& rng_;
  double lambda_;

  std::vector<std::uint32_t> order_;
  std::vector<std::vector<Particle>> particles_;
  std::vector<std::uint8_t> frog_active_, frog_open_, frog_reached_;
  std::vector<std::uint8_t> soup_active_, soup_open_, soup_reached_;
  std::vector<std::uint8_t> brw_reached_;

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> root_circles_;
  VertexMap<std::vector<std::uint32_t>> nodes_at_;
  std::unordered_set<std::uint64_t> expanded_;

  CoupledRun out_;
};

void check_center(const Vertex& x, const Ball& window) {
  if (!(x == window.center)) throw ArgumentError("coupled runs start at the window center");
}

}  // namespace

CoupledRun couple_soup_frog(const Graph& g, double u, const Vertex& x, const Ball& window, int kill_radius,
                            Rng& rng) {
  check_center(x, window);
  return Engine(g, u, window, kill_radius, false, 0, 0, rng).run();
}

CoupledRun couple_frog_brw(const Graph& g, double u, const Vertex& x, const Ball& window, int kill_radius, int n_max,
                           Rng& rng, std::size_t node_budget) {
  check_center(x, window);
  return Engine(g, u, window, kill_radius, true, n_max, node_budget, rng).run();
}

std::vector<Vertex> revealed_cluster(const Ball& window, const SoupSample& sample) {
  const std::size_t n = window.size();
  std::vector<std::vector<std::uint32_t>> ranges;
  for (const auto& path : sample.trajectories) {
    std::vector<std::uint32_t> cells;
    auto visit = [&](const Vertex& v) {
      if (auto i = window.index_of(v)) cells.push_back(*i);
    };
    visit(path.start);
    for (const auto& v : path.steps) visit(v);
    ranges.push_back(std::move(cells));
  }
  std::vector<std::uint8_t> active(n, 0), reached(n, 0), used(ranges.size(), 0);
  active[0] = 1;
  for (;;) {
    for (std::size_t t = 0; t < ranges.size(); ++t) {
      if (used[t]) continue;
      const bool meets = std::any_of(ranges[t].begin(), ranges[t].end(), [&](auto c) { return active[c] != 0; });
      if (!meets) continue;
      used[t] = 1;
      for (auto c : ranges[t]) reached[c] = 1;
    }
    auto next = window_closure(window, reached);
    if (next == active) break;
    active = std::move(next);
  }
  return collect(window, reached);
}

void SizeSummary::add(std::size_t size) {
  mean.add(static_cast<double>(size));
  if (histogram.size() <= size) histogram.resize(size + 1, 0);
  ++histogram[size];
}

void SizeSummary::merge(const SizeSummary& other) {
  mean.merge(other.mean);
  if (histogram.size() < other.histogram.size()) histogram.resize(other.histogram.size(), 0);
  for (std::size_t k = 0; k < other.histogram.size(); ++k) histogram[k] += other.histogram[k];
}

void ChainReport::merge(const ChainReport& other) {
  runs += other.runs;
  violations += other.violations;
  order_violations += other.order_violations;
  brw_truncated += other.brw_truncated;
  cluster.merge(other.cluster);
  frog.merge(other.frog);
  brw.merge(other.brw);
  for (std::size_t i = 0; i < cluster_hits.size(); ++i) {
    cluster_hits[i].merge(other.cluster_hits[i]);
    frog_hits[i].merge(other.frog_hits[i]);
  }
}

ChainReport chain_report(const Graph& g, double u, const Vertex& x, const Ball& window, int kill_radius, int n_max,
                         std::size_t n_runs, std::uint64_t seed, int workers, std::vector<Vertex> probes) {
  check_center(x, window);
  if (probes.empty()) {
    probes.push_back(window.center);
    for (std::size_t i = 1; i < window.size() && probes.size() < 3; ++i) {
      if (window.depth[i] == static_cast<int>(probes.size())) probes.push_back(window.members[i]);
    }
  }
  for (const auto& p : probes) {
    if (!window.contains(p)) throw ArgumentError("probe " + g.format(p) + " is outside the window");
  }
  ChainReport prototype;
  prototype.probes = probes;
  prototype.cluster_hits.resize(probes.size());
  prototype.frog_hits.resize(probes.size());

  return run_samples<ChainReport>(
      n_runs, seed, workers,
      [&](std::size_t, Rng& rng, ChainReport& acc) {
        const CoupledRun run = couple_frog_brw(g, u, x, window, kill_radius, n_max, rng);
        ++acc.runs;
        acc.violations += run.violations;
        acc.brw_truncated += run.brw_truncated ? 1 : 0;
        const std::size_t a = run.interlacement_cluster.size(), b = run.frog_trace.size(), c = run.brw_trace->size();
        if (!(a <= b && b <= c)) ++acc.order_violations;
        acc.cluster.add(a);
        acc.frog.add(b);
        acc.brw.add(c);
        for (std::size_t i = 0; i < probes.size(); ++i) {
          acc.cluster_hits[i].add(std::binary_search(run.interlacement_cluster.begin(), run.interlacement_cluster.end(), probes[i]));
          acc.frog_hits[i].add(std::binary_search(run.frog_trace.begin(), run.frog_trace.end(), probes[i]));
        }
      },
      prototype);
}

}  // namespace interlace
