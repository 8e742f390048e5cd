#include "biip/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "biip/errors.hpp"
#include "biip/rng.hpp"

namespace biip {

double spectral_radius_estimate(const Eigen::SparseMatrix<double>& op, int iters) {
  if (op.rows() != op.cols()) throw SpecError("spectral_radius_estimate: square matrix required");
  const int n = static_cast<int>(op.rows());
  if (n == 0) return 0.0;
  // Deterministic start with all Laplacian eigenvector symmetries broken.
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = 1.0 + 0.01 * std::sin(1.0 + i);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < iters; ++it) {
    Eigen::VectorXd w = op * v;
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    lambda = v.dot(w);
    v = w / norm;
  }
  return std::abs(lambda);
}

KForm random_heat_sources(const GraphWithBoundary& g, int num_sources, double magnitude,
                          std::uint64_t seed) {
  OrientedCliqueComplex c(g, 0);
  return random_sources(c, 0, num_sources, magnitude, seed);
}

KForm random_sources(const OrientedCliqueComplex& c, int level, int num, double magnitude,
                     std::uint64_t seed) {
  const int n = c.size(level);
  if (num < 0 || num > n)
    throw SpecError("random_sources: source count " + std::to_string(num) +
                    " outside [0, " + std::to_string(n) + "]");
  KForm f{level, Eigen::VectorXd::Zero(n)};
  Rng rng(seed);
  for (int i : rng.sample_without_replacement(n, num)) f.values(i) = magnitude;
  return f;
}

namespace {

double step_at(const std::vector<double>& schedule, int i) {
  return schedule[static_cast<std::size_t>(i) % schedule.size()];
}

void check_schedule(const DiffusionParams& p) {
  if (p.dt_schedule.empty()) throw SpecError("dt_schedule must not be empty");
  for (double dt : p.dt_schedule)
    if (!(dt > 0.0)) throw SpecError("dt_schedule entries must be positive");
  if (!(p.alpha > 0.0)) throw SpecError("alpha must be positive");
}

void check_stability(double alpha, const std::vector<double>& schedule, double lambda_max,
                     bool force) {
  const double dt_max = *std::max_element(schedule.begin(), schedule.end());
  const double cfl = alpha * dt_max * lambda_max;
  if (cfl >= 2.0 && !force)
    throw DivergenceError("explicit Euler unstable: alpha * dt * lambda_max = " +
                          std::to_string(cfl) + " >= 2 (pass force to override)");
}

}  // namespace

Trajectory simulate_linear_diffusion(const OrientedCliqueComplex& c, int k,
                                     const DiffusionParams& p, const KForm& f0, int steps,
                                     bool force) {
  check_schedule(p);
  if (steps < 0) throw SpecError("steps must be >= 0");
  if (f0.level != k || f0.values.size() != c.size(k))
    throw SpecError("simulate_linear_diffusion: initial form does not match level " +
                    std::to_string(k));
  const Eigen::SparseMatrix<double>& lap = c.hodge_laplacian(k);
  check_stability(p.alpha, p.dt_schedule, spectral_radius_estimate(lap), force);

  Trajectory t;
  t.level = k;
  t.timestamps.reserve(steps + 1);
  t.snapshots.reserve(steps + 1);
  double time = 0.0;
  Eigen::VectorXd f = f0.values;
  t.timestamps.push_back(time);
  t.snapshots.push_back(f);
  for (int i = 0; i < steps; ++i) {
    const double dt = step_at(p.dt_schedule, i);
    f -= p.alpha * dt * (lap * f);
    time += dt;
    t.timestamps.push_back(time);
    t.snapshots.push_back(f);
  }
  return t;
}

Trajectory simulate_perona_malik(const OrientedCliqueComplex& c, const DiffusionParams& p,
                                 const KForm& f0, int steps, bool force) {
  check_schedule(p);
  if (steps < 0) throw SpecError("steps must be >= 0");
  if (f0.level != 0 || f0.values.size() != c.size(0))
    throw SpecError("simulate_perona_malik: node field required");
  if (!(p.lambda_pm > 0.0)) throw SpecError("lambda must be positive");

  const Eigen::SparseMatrix<double> grad = c.coboundary(0).matrix();
  const Eigen::SparseMatrix<double> gradT = grad.transpose();
  // The damped flux g(|s|) s has slope in [-1/8, 1], so the linear CFL bound
  // with lambda_max(Delta_0) also gates the nonlinear flow.
  check_stability(p.alpha, p.dt_schedule,
                  spectral_radius_estimate(c.hodge_laplacian(0)), force);

  Trajectory t;
  t.level = 0;
  double time = 0.0;
  Eigen::VectorXd f = f0.values;
  t.timestamps.push_back(time);
  t.snapshots.push_back(f);
  for (int i = 0; i < steps; ++i) {
    const double dt = step_at(p.dt_schedule, i);
    Eigen::VectorXd s = grad * f;  // edge gradients
    for (int e = 0; e < s.size(); ++e) {
      const double r = s(e) / p.lambda_pm;
      s(e) /= 1.0 + r * r;  // conductivity g(|s|) = 1 / (1 + (s/lambda)^2)
    }
    // f <- f - alpha dt grad^T (g . grad f); with unit weights grad^T is the
    // negated divergence, so this matches the linear flow when g == 1.
    f -= p.alpha * dt * (gradT * s);
    time += dt;
    t.timestamps.push_back(time);
    t.snapshots.push_back(f);
  }
  return t;
}

Trajectory add_gaussian_noise(const Trajectory& t, double level, std::uint64_t seed) {
  if (level < 0.0) throw SpecError("noise level must be >= 0");
  if (level == 0.0) return t;
  double sumsq = 0.0;
  std::size_t count = 0;
  for (const auto& snap : t.snapshots) {
    sumsq += snap.squaredNorm();
    count += static_cast<std::size_t>(snap.size());
  }
  if (count == 0) return t;
  const double sigma = level * std::sqrt(sumsq / static_cast<double>(count));

  Trajectory noisy = t;
  Rng rng(seed);
  for (auto& snap : noisy.snapshots)
    for (int i = 0; i < snap.size(); ++i) snap(i) += sigma * rng.normal();
  return noisy;
}

Trajectory restrict_trajectory(const Trajectory& t, const std::vector<int>& map,
                               const std::vector<double>& signs) {
  if (map.size() != signs.size()) throw SpecError("restriction map/sign size mismatch");
  Trajectory out;
  out.level = t.level;
  out.timestamps = t.timestamps;
  out.snapshots.reserve(t.snapshots.size());
  for (const auto& snap : t.snapshots) {
    Eigen::VectorXd r(static_cast<int>(map.size()));
    for (std::size_t i = 0; i < map.size(); ++i) {
      if (map[i] < 0 || map[i] >= snap.size())
        throw SpecError("restriction index out of range");
      r(static_cast<int>(i)) = signs[i] * snap(map[i]);
    }
    out.snapshots.push_back(std::move(r));
  }
  return out;
}

void build_restriction(const OrientedCliqueComplex& parent, const OrientedCliqueComplex& sub,
                       int level, const std::vector<int>& node_map, std::vector<int>& map,
                       std::vector<double>& signs) {
  map.clear();
  signs.clear();
  for (const auto& clique : sub.cliques(level)) {
    std::vector<int> image;
    image.reserve(clique.size());
    for (int v : clique) {
      if (v < 0 || v >= static_cast<int>(node_map.size()))
        throw SpecError("build_restriction: node map too short");
      image.push_back(node_map[v]);
    }
    // Renumbering may reorder the tuple; sorting it with a parity count
    // recovers the dictionary representative and the orientation sign.
    double sign = 1.0;
    for (std::size_t i = 1; i < image.size(); ++i)
      for (std::size_t j = i; j > 0 && image[j - 1] > image[j]; --j) {
        std::swap(image[j - 1], image[j]);
        sign = -sign;
      }
    const int idx = parent.index_of(level, image);
    if (idx < 0) throw SpecError("build_restriction: clique missing in parent complex");
    map.push_back(idx);
    signs.push_back(sign);
  }
}

std::string to_string(BoundaryKind k) {
  return k == BoundaryKind::dirichlet ? "dirichlet" : "neumann";
}

BoundaryKind boundary_kind_from_string(const std::string& s) {
  if (s == "dirichlet") return BoundaryKind::dirichlet;
  if (s == "neumann") return BoundaryKind::neumann;
  throw SpecError("unknown boundary kind: " + s);
}

void BVPDataset::validate() const {
  if (timestamps.size() != static_cast<std::size_t>(interior_obs.rows()) ||
      timestamps.size() != static_cast<std::size_t>(boundary_obs.rows()))
    throw SpecError("dataset: observation rows must match timestamps");
  for (std::size_t i = 1; i < timestamps.size(); ++i)
    if (!(timestamps[i] > timestamps[i - 1]))
      throw SpecError("dataset: timestamps must be strictly increasing");
  if (interior_obs.cols() != static_cast<int>(interior_index.size()) ||
      boundary_obs.cols() != static_cast<int>(boundary_index.size()))
    throw SpecError("dataset: observation columns must match index sets");
  std::set<std::vector<int>> seen;
  for (const auto& c : interior_index)
    if (!seen.insert(c).second) throw SpecError("dataset: duplicate interior index entry");
  for (const auto& c : boundary_index)
    if (!seen.insert(c).second)
      throw SpecError("dataset: boundary index overlaps interior index");
  if (noise_level < 0.0) throw SpecError("dataset: noise level must be >= 0");
}

BVPDataset make_dataset(const Trajectory& t, const GraphWithBoundary& g, BoundaryKind kind) {
  if (t.level != 0 && t.level != 1)
    throw SpecError("datasets carry level-0 or level-1 trajectories");
  if (t.level == 1 && kind == BoundaryKind::neumann)
    throw SpecError("vector-field datasets support dirichlet boundaries only");
  if (t.snapshots.empty()) throw SpecError("make_dataset: empty trajectory");

  BVPDataset d;
  d.kind = kind;
  d.level = t.level;
  d.graph = g;
  d.timestamps = t.timestamps;

  const int T = static_cast<int>(t.timestamps.size());
  // Positions of interior and boundary-touching cliques inside the canonical
  // dictionary-ordered clique list.
  std::vector<int> interior_pos, boundary_pos;
  if (t.level == 0) {
    if (t.snapshots[0].size() != g.node_count)
      throw SpecError("make_dataset: snapshot size does not match node count");
    for (int v = 0; v < g.node_count; ++v) {
      if (g.is_boundary(v)) {
        boundary_pos.push_back(v);
      } else {
        interior_pos.push_back(v);
        d.interior_index.push_back({v});
      }
    }
    if (kind == BoundaryKind::dirichlet) {
      for (int v : boundary_pos) d.boundary_index.push_back({v});
    } else {
      for (const auto& [u, v] : g.half_edges) d.boundary_index.push_back({u, v});
    }
  } else {
    const int ecount = static_cast<int>(g.edges.size());
    if (t.snapshots[0].size() != ecount)
      throw SpecError("make_dataset: snapshot size does not match edge count");
    for (int e = 0; e < ecount; ++e) {
      const auto& [u, v] = g.edges[e];
      if (!g.is_boundary(u) && !g.is_boundary(v)) {
        interior_pos.push_back(e);
        d.interior_index.push_back({u, v});
      } else {
        boundary_pos.push_back(e);
        d.boundary_index.push_back({u, v});
      }
    }
  }

  d.interior_obs.resize(T, static_cast<int>(d.interior_index.size()));
  d.boundary_obs.resize(T, static_cast<int>(d.boundary_index.size()));
  for (int i = 0; i < T; ++i) {
    const Eigen::VectorXd& f = t.snapshots[i];
    for (std::size_t j = 0; j < interior_pos.size(); ++j)
      d.interior_obs(i, static_cast<int>(j)) = f(interior_pos[j]);
    if (t.level == 0 && kind == BoundaryKind::neumann) {
      // Outward flux through each half edge, signed interior -> boundary.
      for (std::size_t j = 0; j < g.half_edges.size(); ++j) {
        const auto& [u, v] = g.half_edges[j];
        d.boundary_obs(i, static_cast<int>(j)) = f(v) - f(u);
      }
    } else {
      for (std::size_t j = 0; j < boundary_pos.size(); ++j)
        d.boundary_obs(i, static_cast<int>(j)) = f(boundary_pos[j]);
    }
  }
  d.validate();
  return d;
}

BVPDataset slice_dataset(const BVPDataset& d, int first, int last) {
  if (first < 0 || last >= d.knot_count() || first > last)
    throw SpecError("slice_dataset: knot range out of bounds");
  BVPDataset out = d;
  out.timestamps.assign(d.timestamps.begin() + first, d.timestamps.begin() + last + 1);
  out.interior_obs = d.interior_obs.middleRows(first, last - first + 1).eval();
  out.boundary_obs = d.boundary_obs.middleRows(first, last - first + 1).eval();
  return out;
}

}  // namespace biip
