#include "biip/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include "biip/errors.hpp"
#include "biip/rng.hpp"

namespace biip {

std::vector<int> GraphWithBoundary::interior_nodes() const {
  std::vector<int> out;
  out.reserve(node_count - static_cast<int>(boundary_nodes.size()));
  for (int v = 0; v < node_count; ++v)
    if (!is_boundary(v)) out.push_back(v);
  return out;
}

std::vector<std::vector<int>> GraphWithBoundary::adjacency() const {
  std::vector<std::vector<int>> adj(node_count);
  for (const auto& [u, v] : edges) {
    adj[u].push_back(v);
    adj[v].push_back(u);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

Decomposition decompose(const GraphWithBoundary& g) {
  Decomposition d;
  for (int v = 0; v < g.node_count; ++v)
    if (!g.is_boundary(v)) d.interior_nodes.push_back(v);

  // Edge partition. Half edges are recorded (interior, boundary).
  std::vector<std::vector<int>> boundary_adj(g.node_count);
  for (const auto& [u, v] : g.edges) {
    const bool bu = g.is_boundary(u), bv = g.is_boundary(v);
    if (!bu && !bv) {
      d.regular_edges.emplace_back(u, v);
    } else if (bu != bv) {
      d.half_edges.emplace_back(bu ? v : u, bu ? u : v);
    } else {
      d.boundary_internal_edges.emplace_back(u, v);
      boundary_adj[u].push_back(v);
      boundary_adj[v].push_back(u);
    }
  }
  std::sort(d.half_edges.begin(), d.half_edges.end());

  // Every boundary node must have exactly two neighbors inside the boundary
  // set; this also rules out edges between two distinct cycles.
  for (int v : g.boundary_nodes) {
    if (boundary_adj[v].size() != 2)
      throw SpecError("boundary node " + std::to_string(v) + " has " +
                      std::to_string(boundary_adj[v].size()) +
                      " boundary neighbors, expected 2 (boundary must be a disjoint "
                      "union of cycles)");
    std::sort(boundary_adj[v].begin(), boundary_adj[v].end());
  }

  // Walk each cycle from its smallest node, stepping toward the smaller
  // neighbor first so the reported orientation is canonical.
  std::set<int> unvisited(g.boundary_nodes.begin(), g.boundary_nodes.end());
  while (!unvisited.empty()) {
    const int start = *unvisited.begin();
    std::vector<int> cycle{start};
    unvisited.erase(start);
    int prev = start;
    int cur = boundary_adj[start][0];
    while (cur != start) {
      if (!unvisited.count(cur))
        throw SpecError("boundary cycles are not disjoint at node " + std::to_string(cur));
      cycle.push_back(cur);
      unvisited.erase(cur);
      const auto& nbrs = boundary_adj[cur];
      const int next = (nbrs[0] == prev) ? nbrs[1] : nbrs[0];
      prev = cur;
      cur = next;
    }
    if (cycle.size() < 3)
      throw SpecError("boundary cycle through node " + std::to_string(start) +
                      " has length " + std::to_string(cycle.size()) + ", need >= 3");
    d.boundary_cycles.push_back(std::move(cycle));
  }
  // Cycles ascending by smallest member (the walk starts there already).
  std::sort(d.boundary_cycles.begin(), d.boundary_cycles.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return d;
}

GraphWithBoundary make_graph(int node_count, std::vector<Edge> edges,
                             std::set<int> boundary_nodes) {
  if (node_count < 0) throw SpecError("node_count must be >= 0");
  for (auto& [u, v] : edges) {
    if (u == v) throw SpecError("self loop at node " + std::to_string(u));
    if (u > v) std::swap(u, v);
    if (u < 0 || v >= node_count)
      throw SpecError("edge endpoint out of range: (" + std::to_string(u) + ", " +
                      std::to_string(v) + ")");
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (int v : boundary_nodes)
    if (v < 0 || v >= node_count)
      throw SpecError("boundary node out of range: " + std::to_string(v));

  GraphWithBoundary g;
  g.node_count = node_count;
  g.edges = std::move(edges);
  g.boundary_nodes = std::move(boundary_nodes);
  Decomposition d = decompose(g);
  g.boundary_cycles = std::move(d.boundary_cycles);
  g.interior_regular_edges = std::move(d.regular_edges);
  g.half_edges = std::move(d.half_edges);
  g.boundary_internal_edges = std::move(d.boundary_internal_edges);
  return g;
}

GraphWithBoundary build_grid(int rows, int cols) {
  if (rows < 1 || cols < 1) throw SpecError("grid dimensions must be >= 1");
  const auto id = [cols](int r, int c) { return r * cols + c; };
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) edges.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) edges.emplace_back(id(r, c), id(r + 1, c));
    }
  std::set<int> boundary;
  // The outer ring is only a valid boundary when it is chord-free: on 2 x n
  // strips (n >= 3) the cross edges join two ring nodes, so those grids are
  // closed (all interior) like the 1 x n paths.
  if ((rows >= 3 && cols >= 3) || (rows == 2 && cols == 2)) {
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (r == 0 || r == rows - 1 || c == 0 || c == cols - 1)
          boundary.insert(id(r, c));
  }
  GraphWithBoundary g = make_graph(rows * cols, std::move(edges), std::move(boundary));
  g.positions.resize(g.node_count);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      g.positions[id(r, c)] = {static_cast<double>(c), static_cast<double>(r)};
  return g;
}

GraphWithBoundary wrap_torus(int rows, int cols) {
  if (rows < 3 || cols < 3)
    throw SpecError("torus dimensions must be >= 3 to avoid duplicate wrap edges");
  const auto id = [cols](int r, int c) { return r * cols + c; };
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      edges.emplace_back(id(r, c), id(r, (c + 1) % cols));
      edges.emplace_back(id(r, c), id((r + 1) % rows, c));
    }
  GraphWithBoundary g = make_graph(rows * cols, std::move(edges));
  g.positions.resize(g.node_count);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      g.positions[id(r, c)] = {static_cast<double>(c), static_cast<double>(r)};
  return g;
}

CylinderExtraction extract_cylinder(const GraphWithBoundary& torus, int rows, int cols,
                                    int keep_first, int keep_width) {
  if (torus.node_count != rows * cols)
    throw SpecError("extract_cylinder: torus size does not match rows * cols");
  if (keep_width < 3 || keep_width >= cols)
    throw SpecError("extract_cylinder: need 3 <= keep_width < cols");
  if (keep_first < 0 || keep_first + keep_width > cols)
    throw SpecError("extract_cylinder: kept columns out of range");

  const int w = keep_width;
  const auto old_id = [cols](int r, int c) { return r * cols + c; };
  const auto new_id = [w, keep_first](int r, int c) { return r * w + (c - keep_first); };

  std::vector<int> source(rows * w);
  for (int r = 0; r < rows; ++r)
    for (int c = keep_first; c < keep_first + w; ++c)
      source[new_id(r, c)] = old_id(r, c);

  std::map<int, int> renumber;
  for (int n = 0; n < rows * w; ++n) renumber[source[n]] = n;

  // Induced subgraph: the window does not wrap, so column-wrap edges of the
  // torus drop out on their own; row-wrap edges survive inside each column.
  std::vector<Edge> edges;
  for (const auto& [u, v] : torus.edges) {
    auto iu = renumber.find(u), iv = renumber.find(v);
    if (iu != renumber.end() && iv != renumber.end())
      edges.emplace_back(iu->second, iv->second);
  }

  std::set<int> boundary;
  for (int r = 0; r < rows; ++r) {
    boundary.insert(new_id(r, keep_first));
    boundary.insert(new_id(r, keep_first + w - 1));
  }

  CylinderExtraction out{make_graph(rows * w, std::move(edges), std::move(boundary)),
                         std::move(source)};
  out.graph.positions.resize(out.graph.node_count);
  for (int r = 0; r < rows; ++r)
    for (int c = keep_first; c < keep_first + w; ++c)
      out.graph.positions[new_id(r, c)] = {static_cast<double>(c - keep_first),
                                           static_cast<double>(r)};
  return out;
}

namespace {

// Stitches a triangulated band between two concentric rings. Inner node j is
// fanned out to the contiguous outer arc [floor(j*a/b), floor((j+1)*a/b)]
// (rotated by `offset`), which triangulates the band for any a >= b >= 3.
void stitch_band(std::vector<Edge>& edges, const std::vector<int>& outer,
                 const std::vector<int>& inner, int offset) {
  const int a = static_cast<int>(outer.size());
  const int b = static_cast<int>(inner.size());
  for (int j = 0; j < b; ++j) {
    const int lo = (j * a) / b;
    const int hi = ((j + 1) * a) / b;
    for (int m = lo; m <= hi; ++m)
      edges.emplace_back(inner[j], outer[(m + offset) % a]);
  }
}

}  // namespace

GraphWithBoundary build_genus2_minus_cylinder(std::uint64_t seed) {
  // Ring sizes of each fan disk, outermost first. Ring 0 (the 12-gon rim) is
  // shared between the two disks; ring 3 is the pentagon a tube end glues to.
  const std::vector<int> ring_sizes{12, 10, 8, 5};
  const int tube_cols = 28;  // pentagon columns; ends are the disk pentagons
  const int boundary_col = 14;

  int next_id = 0;
  const auto make_ring = [&next_id](int n) {
    std::vector<int> ring(n);
    for (int i = 0; i < n; ++i) ring[i] = next_id++;
    return ring;
  };

  const std::vector<int> rim = make_ring(ring_sizes[0]);
  std::vector<std::vector<std::vector<int>>> disk(2);
  for (int d = 0; d < 2; ++d) {
    disk[d].push_back(rim);
    for (std::size_t i = 1; i < ring_sizes.size(); ++i)
      disk[d].push_back(make_ring(ring_sizes[i]));
  }

  std::vector<Edge> edges;
  const auto close_ring = [&edges](const std::vector<int>& ring) {
    const int n = static_cast<int>(ring.size());
    for (int i = 0; i < n; ++i) edges.emplace_back(ring[i], ring[(i + 1) % n]);
  };

  Rng rng(seed);
  close_ring(rim);
  for (int d = 0; d < 2; ++d)
    for (std::size_t i = 1; i < disk[d].size(); ++i) {
      close_ring(disk[d][i]);
      const int offset =
          static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(disk[d][i - 1].size())));
      stitch_band(edges, disk[d][i - 1], disk[d][i], offset);
    }

  // Quad tube between the two pentagons; interior columns get fresh ids.
  std::vector<std::vector<int>> tube(tube_cols);
  tube[0] = disk[0].back();
  tube[tube_cols - 1] = disk[1].back();
  for (int c = 1; c < tube_cols - 1; ++c) tube[c] = make_ring(5);
  for (int c = 0; c < tube_cols; ++c) {
    if (c > 0 && c < tube_cols - 1) close_ring(tube[c]);
    if (c + 1 < tube_cols)
      for (int r = 0; r < 5; ++r) edges.emplace_back(tube[c][r], tube[c + 1][r]);
  }

  std::set<int> boundary(tube[boundary_col].begin(), tube[boundary_col].end());
  GraphWithBoundary g = make_graph(next_id, std::move(edges), std::move(boundary));

  // Plot layout: the two disks as polar fans around (-6, 0) and (+6, 0), the
  // tube as a flattened ellipse path between the pentagon centers.
  g.positions.assign(g.node_count, {0.0, 0.0});
  const double radii[] = {3.0, 2.3, 1.6, 0.9};
  for (int d = 0; d < 2; ++d) {
    const double cx = d == 0 ? -6.0 : 6.0;
    for (std::size_t i = 0; i < disk[d].size(); ++i) {
      const auto& ring = disk[d][i];
      for (std::size_t j = 0; j < ring.size(); ++j) {
        const double th = 2.0 * std::numbers::pi * static_cast<double>(j) /
                          static_cast<double>(ring.size());
        g.positions[ring[j]] = {cx + radii[i] * std::cos(th), radii[i] * std::sin(th)};
      }
    }
  }
  for (int c = 1; c < tube_cols - 1; ++c) {
    const double x = -5.1 + 10.2 * static_cast<double>(c) / (tube_cols - 1);
    for (int r = 0; r < 5; ++r) {
      const double th = 2.0 * std::numbers::pi * r / 5.0;
      g.positions[tube[c][r]] = {x + 0.15 * std::cos(th), 0.45 * std::sin(th)};
    }
  }
  return g;
}

GraphWithBoundary attach_capped_tube(const GraphWithBoundary& g, int cycle, int length) {
  if (cycle < 0 || cycle >= static_cast<int>(g.boundary_cycles.size()))
    throw SpecError("attach_capped_tube: no boundary cycle " + std::to_string(cycle));
  if (length < 1) throw SpecError("attach_capped_tube: tube length must be >= 1");

  const std::vector<int>& ring0 = g.boundary_cycles[cycle];
  const int w = static_cast<int>(ring0.size());
  const int base = g.node_count;
  const auto ring_id = [base, w](int r, int i) { return base + r * w + i; };

  std::vector<Edge> edges = g.edges;
  for (int i = 0; i < w; ++i) edges.emplace_back(ring0[i], ring_id(0, i));
  for (int r = 0; r < length; ++r)
    for (int i = 0; i < w; ++i) {
      edges.emplace_back(ring_id(r, i), ring_id(r, (i + 1) % w));
      if (r + 1 < length) edges.emplace_back(ring_id(r, i), ring_id(r + 1, i));
    }
  const int apex = base + length * w;
  for (int i = 0; i < w; ++i) edges.emplace_back(ring_id(length - 1, i), apex);

  GraphWithBoundary parent = make_graph(apex + 1, std::move(edges));
  if (!g.positions.empty()) {
    // Cosmetic layout: spiral the tube rings outward from the cycle centroid.
    parent.positions = g.positions;
    parent.positions.resize(parent.node_count);
    std::array<double, 2> centroid{0.0, 0.0};
    for (int v : ring0) {
      centroid[0] += g.positions[v][0] / w;
      centroid[1] += g.positions[v][1] / w;
    }
    for (int r = 0; r < length; ++r)
      for (int i = 0; i < w; ++i) {
        const double th = 2.0 * std::numbers::pi * i / w;
        const double rad = 0.3 + 0.1 * r;
        parent.positions[ring_id(r, i)] = {centroid[0] + rad * std::cos(th),
                                           centroid[1] + rad * std::sin(th)};
      }
    parent.positions[apex] = {centroid[0], centroid[1]};
  }
  return parent;
}

GraphWithBoundary build_surface(const SurfaceSpec& spec) {
  switch (spec.kind) {
    case SurfaceKind::grid:
      return build_grid(spec.rows, spec.cols);
    case SurfaceKind::torus:
      return wrap_torus(spec.rows, spec.cols);
    case SurfaceKind::cylinder: {
      const GraphWithBoundary torus = wrap_torus(spec.rows, spec.cols);
      return extract_cylinder(torus, spec.rows, spec.cols, spec.keep_first, spec.keep_width)
          .graph;
    }
    case SurfaceKind::genus2_minus_cylinder:
      return build_genus2_minus_cylinder(spec.seed);
  }
  throw SpecError("unknown surface kind");
}

std::string to_string(SurfaceKind kind) {
  switch (kind) {
    case SurfaceKind::grid: return "grid";
    case SurfaceKind::torus: return "torus";
    case SurfaceKind::cylinder: return "cylinder";
    case SurfaceKind::genus2_minus_cylinder: return "genus2_minus_cylinder";
  }
  throw SpecError("unknown surface kind");
}

SurfaceKind surface_kind_from_string(const std::string& s) {
  if (s == "grid") return SurfaceKind::grid;
  if (s == "torus") return SurfaceKind::torus;
  if (s == "cylinder") return SurfaceKind::cylinder;
  if (s == "genus2_minus_cylinder") return SurfaceKind::genus2_minus_cylinder;
  throw SpecError("unknown surface kind: " + s);
}

}  // namespace biip
