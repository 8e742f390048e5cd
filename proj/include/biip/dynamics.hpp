#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <cstdint>
#include <string>
#include <vector>

#include "biip/complex.hpp"
#include "biip/forms.hpp"
#include "biip/graph.hpp"

namespace biip {

// Explicit-Euler diffusion generator settings. dt_schedule holds the step
// increments; when shorter than the requested step count it is cycled, so a
// single entry gives a uniform grid.
struct DiffusionParams {
  double alpha = 1.0;       // diffusivity
  double lambda_pm = 1.0;   // edge-stopping scale of the nonlinear flow
  std::vector<double> dt_schedule{0.05};
};

// Largest-eigenvalue estimate by power iteration (deterministic start
// vector). Used to gate explicit Euler stability.
double spectral_radius_estimate(const Eigen::SparseMatrix<double>& op, int iters = 100);

// num_sources distinct nodes set to `magnitude`, the rest zero. Level-0
// convenience wrapper of random_sources.
KForm random_heat_sources(const GraphWithBoundary& g, int num_sources, double magnitude,
                          std::uint64_t seed);

// Sparse k-form supported on num distinct level-k cliques.
KForm random_sources(const OrientedCliqueComplex& c, int level, int num, double magnitude,
                     std::uint64_t seed);

// Dissipative heat flow f <- f - alpha dt_i Delta_k f, one snapshot per step
// plus the initial state at t = 0. Refuses (DivergenceError) when
// alpha * max(dt) * lambda_max(Delta_k) >= 2 unless force is set.
Trajectory simulate_linear_diffusion(const OrientedCliqueComplex& c, int k,
                                     const DiffusionParams& p, const KForm& f0, int steps,
                                     bool force = false);

// Perona-Malik flow on node fields: edge gradients are damped by
// g(s) = 1 / (1 + (s / lambda)^2) before the divergence is taken, dissipative
// sign convention matching the linear flow.
Trajectory simulate_perona_malik(const OrientedCliqueComplex& c, const DiffusionParams& p,
                                 const KForm& f0, int steps, bool force = false);

// Adds iid Gaussian noise with standard deviation level * RMS(t), where the
// RMS runs over every entry of every snapshot. level 0 returns t unchanged.
Trajectory add_gaussian_noise(const Trajectory& t, double level, std::uint64_t seed);

// Reindexes a trajectory from a parent complex onto a sub-complex. map lists,
// per target clique, the source clique index; sign flips (possible when a
// node renumbering reverses a tuple) are given in signs.
Trajectory restrict_trajectory(const Trajectory& t, const std::vector<int>& map,
                               const std::vector<double>& signs);

// Builds the (map, signs) pair for level-k cliques under a node renumbering
// new -> old. Throws when a target clique is missing upstream.
void build_restriction(const OrientedCliqueComplex& parent, const OrientedCliqueComplex& sub,
                       int level, const std::vector<int>& node_map, std::vector<int>& map,
                       std::vector<double>& signs);

enum class BoundaryKind { dirichlet, neumann };

std::string to_string(BoundaryKind k);
BoundaryKind boundary_kind_from_string(const std::string& s);

// Observations of a boundary-value problem split along the boundary:
// interior_obs columns follow interior_index (interior cliques in dictionary
// order), boundary_obs columns follow boundary_index. For dirichlet data the
// boundary index lists the boundary-touching cliques and the observations are
// form values; for neumann data (level 0 only) the index lists half edges
// (interior, boundary) and the observations are outward fluxes
// f(boundary) - f(interior).
struct BVPDataset {
  BoundaryKind kind = BoundaryKind::dirichlet;
  int level = 0;
  GraphWithBoundary graph;
  std::vector<double> timestamps;
  std::vector<std::vector<int>> interior_index;
  std::vector<std::vector<int>> boundary_index;
  Eigen::MatrixXd interior_obs;  // T x |interior_index|
  Eigen::MatrixXd boundary_obs;  // T x |boundary_index|
  double noise_level = 0.0;
  struct Meta {
    double alpha = 1.0;
    double lambda = 1.0;
    std::uint64_t seed = 0;
  } meta;

  int knot_count() const { return static_cast<int>(timestamps.size()); }
  void validate() const;  // index sets disjoint, shapes consistent
};

// Splits a trajectory on g into interior and boundary observations. Level 0
// supports both kinds; level 1 carries vector-field values and requires
// dirichlet.
BVPDataset make_dataset(const Trajectory& t, const GraphWithBoundary& g, BoundaryKind kind);

// Time-window slice [first, last] (inclusive knot indices), absolute
// timestamps preserved. Used to split train/test along the time axis.
BVPDataset slice_dataset(const BVPDataset& d, int first, int last);

}  // namespace biip
