#pragma once

#include <array>
#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace biip {

using Edge = std::pair<int, int>;  // canonical: first < second

enum class SurfaceKind { grid, torus, cylinder, genus2_minus_cylinder };

// Declarative description of a surface, as read from generation configs.
struct SurfaceSpec {
  SurfaceKind kind = SurfaceKind::grid;
  int rows = 0;
  int cols = 0;
  int keep_first = 0;  // cylinder: first kept column
  int keep_width = 0;  // cylinder: number of kept columns
  std::uint64_t seed = 0;
};

// A finite graph together with a distinguished set of boundary nodes whose
// induced subgraph must decompose into disjoint cycles. Interior nodes and
// the edge partition (regular / half / boundary-internal) are derived once at
// construction and kept in sync by the factory functions below.
struct GraphWithBoundary {
  int node_count = 0;
  std::vector<Edge> edges;  // sorted lexicographically, u < v, no duplicates
  std::set<int> boundary_nodes;

  // Derived by decompose():
  std::vector<std::vector<int>> boundary_cycles;  // ascending smallest id; walk starts there
  std::vector<Edge> interior_regular_edges;       // both endpoints interior
  std::vector<Edge> half_edges;                   // (interior, boundary), sorted
  std::vector<Edge> boundary_internal_edges;      // both endpoints on one cycle

  // Optional plot coordinates, one per node when present.
  std::vector<std::array<double, 2>> positions;

  bool is_boundary(int v) const { return boundary_nodes.count(v) > 0; }
  std::vector<int> interior_nodes() const;
  std::vector<std::vector<int>> adjacency() const;
};

// Result of partitioning a graph's edges around its boundary set.
struct Decomposition {
  std::vector<int> interior_nodes;
  std::vector<Edge> regular_edges;
  std::vector<Edge> half_edges;
  std::vector<Edge> boundary_internal_edges;
  std::vector<std::vector<int>> boundary_cycles;
};

// Validates and canonicalizes raw edge data, then derives the decomposition.
// Throws SpecError on out-of-range endpoints, self loops, or a boundary set
// that does not split into disjoint induced cycles.
GraphWithBoundary make_graph(int node_count, std::vector<Edge> edges,
                             std::set<int> boundary_nodes = {});

// Recomputes the interior/half/boundary partition of g. Fails (SpecError) if
// the boundary-node-induced subgraph is not a disjoint union of cycles of
// length >= 3.
Decomposition decompose(const GraphWithBoundary& g);

// rows x cols lattice, row-major node ids (r * cols + c), 4-neighbor edges.
// Perimeter nodes form the boundary whenever both dimensions are >= 2; a
// single row or column is a path, whose endpoints cannot lie on a cycle, so
// degenerate grids are returned with an empty boundary.
GraphWithBoundary build_grid(int rows, int cols);

// rows x cols lattice with both directions wrapped; 4-regular, no boundary.
// Requires rows >= 3 and cols >= 3 so that wrap edges are not duplicates.
GraphWithBoundary wrap_torus(int rows, int cols);

struct CylinderExtraction {
  GraphWithBoundary graph;
  std::vector<int> source_nodes;  // new id -> node id in the parent torus
};

// Induced subgraph of wrap_torus(rows, cols) on keep_width contiguous
// columns starting at keep_first (no wrap-around of the window; 3 <=
// keep_width < cols). Row-wrap edges are retained, so the first and last
// kept columns are the two boundary cycles. Nodes are renumbered row-major
// within the window.
CylinderExtraction extract_cylinder(const GraphWithBoundary& torus, int rows, int cols,
                                    int keep_first, int keep_width);

// Closed-surface mesh used for the hardest benchmark: two triangulated
// 12-gon fan disks (concentric rings 12-10-8-5), glued rim-to-rim along the
// 12-gons, with a 5 x 28 quad tube joining their innermost pentagons. The
// pentagon ring in the middle of the tube is marked as the single boundary
// cycle (the circle where a second, removed tube used to attach). 188 nodes
// total. The seed rotates the stitch offsets of the disk triangulations.
GraphWithBoundary build_genus2_minus_cylinder(std::uint64_t seed = 0);

// Simulation parent for concealed-boundary data: a copy of g with a quad
// tube of `length` fresh rings glued along boundary cycle `cycle` and closed
// by an apex node, so the marked circle borders hidden nodes again the way
// it did before the neighboring component was removed. Heat flows are run on
// this closed graph and then restricted back to g's nodes, whose ids are
// preserved (the tube occupies ids g.node_count onward). The result carries
// no boundary of its own.
GraphWithBoundary attach_capped_tube(const GraphWithBoundary& g, int cycle, int length);

// Dispatch on spec.kind; cylinder specs go through wrap_torus + extraction.
GraphWithBoundary build_surface(const SurfaceSpec& spec);

std::string to_string(SurfaceKind kind);
SurfaceKind surface_kind_from_string(const std::string& s);

}  // namespace biip
