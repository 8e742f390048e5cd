#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "biip/complex.hpp"
#include "biip/dynamics.hpp"
#include "biip/errors.hpp"
#include "biip/graph.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace biip;

namespace {

KForm node_form(const Eigen::VectorXd& v) {
  KForm f;
  f.level = 0;
  f.values = v;
  return f;
}

double dirichlet_energy(const OrientedCliqueComplex& cx, const Eigen::VectorXd& f) {
  const Eigen::VectorXd df = cx.coboundary(0).matrix() * f;
  return df.squaredNorm();
}

}  // namespace

TEST_SUITE("dynamics") {
  TEST_CASE("one explicit step on the two-node path") {
    const GraphWithBoundary g = make_graph(2, {{0, 1}});
    const OrientedCliqueComplex cx(g, 1);
    DiffusionParams p;
    p.alpha = 1.0;
    p.dt_schedule = {0.1};
    const Trajectory t =
        simulate_linear_diffusion(cx, 0, p, node_form((Eigen::VectorXd(2) << 1, 0).finished()), 1);
    REQUIRE(t.snapshots.size() == 2);
    CHECK(t.timestamps == std::vector<double>{0.0, 0.1});
    CHECK(t.snapshots[1](0) == doctest::Approx(0.9).epsilon(1e-15));
    CHECK(t.snapshots[1](1) == doctest::Approx(0.1).epsilon(1e-15));
  }

  TEST_CASE("one damped step: gradient at the stopping scale is halved") {
    const GraphWithBoundary g = make_graph(2, {{0, 1}});
    const OrientedCliqueComplex cx(g, 1);
    DiffusionParams p;
    p.alpha = 1.0;
    p.lambda_pm = 2.0;
    p.dt_schedule = {0.1};
    const Trajectory t =
        simulate_perona_malik(cx, p, node_form((Eigen::VectorXd(2) << 2, 0).finished()), 1);
    REQUIRE(t.snapshots.size() == 2);
    CHECK(t.snapshots[1](0) == doctest::Approx(1.9).epsilon(1e-15));
    CHECK(t.snapshots[1](1) == doctest::Approx(0.1).epsilon(1e-15));
  }

  TEST_CASE("huge stopping scale collapses the nonlinear flow onto the linear one") {
    const GraphWithBoundary g = build_grid(4, 4);
    const OrientedCliqueComplex cx(g, 1);
    DiffusionParams p;
    p.alpha = 1.0;
    p.lambda_pm = 1e9;
    p.dt_schedule = {0.05};
    const KForm f0 = random_heat_sources(g, 4, 10.0, 11);
    const Trajectory lin = simulate_linear_diffusion(cx, 0, p, f0, 20);
    const Trajectory pm = simulate_perona_malik(cx, p, f0, 20);
    for (size_t i = 0; i < lin.snapshots.size(); ++i) {
      const double scale = lin.snapshots[i].norm();
      CHECK((lin.snapshots[i] - pm.snapshots[i]).norm() <= 1e-6 * scale);
    }
  }

  TEST_CASE("closed surface conserves total mass and dissipates energy") {
    const GraphWithBoundary g = wrap_torus(3, 4);
    const OrientedCliqueComplex cx(g, 1);
    DiffusionParams p;
    p.alpha = 1.0;
    p.lambda_pm = 3.0;
    p.dt_schedule = {0.1};
    const KForm f0 = random_heat_sources(g, 3, 10.0, 5);
    for (const bool nonlinear : {false, true}) {
      const Trajectory t = nonlinear ? simulate_perona_malik(cx, p, f0, 100)
                                     : simulate_linear_diffusion(cx, 0, p, f0, 100);
      const double mass0 = t.snapshots.front().sum();
      double prev_energy = dirichlet_energy(cx, t.snapshots.front());
      for (const Eigen::VectorXd& f : t.snapshots) {
        CHECK(std::abs(f.sum() - mass0) <= 1e-9 * std::abs(mass0));
        const double e = dirichlet_energy(cx, f);
        CHECK(e <= prev_energy * (1 + 1e-12));
        prev_energy = e;
      }
    }
  }

  TEST_CASE("node diffusion under a small step respects the max principle") {
    const GraphWithBoundary g = wrap_torus(3, 5);
    const OrientedCliqueComplex cx(g, 1);
    DiffusionParams p;
    p.alpha = 1.0;
    p.dt_schedule = {0.2};  // dt * max_degree <= 1 keeps the update a convex mix
    const KForm f0 = random_heat_sources(g, 4, 10.0, 2);
    const Trajectory t = simulate_linear_diffusion(cx, 0, p, f0, 50);
    const double lo = t.snapshots.front().minCoeff();
    const double hi = t.snapshots.front().maxCoeff();
    for (const Eigen::VectorXd& f : t.snapshots) {
      CHECK(f.minCoeff() >= lo - 1e-12);
      CHECK(f.maxCoeff() <= hi + 1e-12);
    }
  }

  TEST_CASE("stability gate refuses alpha dt lambda_max >= 2 unless forced") {
    const GraphWithBoundary g = make_graph(2, {{0, 1}});
    const OrientedCliqueComplex cx(g, 1);
    DiffusionParams p;
    p.alpha = 1.0;
    p.dt_schedule = {1.0};  // lambda_max = 2 exactly
    const KForm f0 = node_form((Eigen::VectorXd(2) << 1, 0).finished());
    CHECK_THROWS_AS(simulate_linear_diffusion(cx, 0, p, f0, 3), DivergenceError);
    CHECK_NOTHROW(simulate_linear_diffusion(cx, 0, p, f0, 3, /*force=*/true));
    p.dt_schedule = {0.9};
    CHECK_NOTHROW(simulate_linear_diffusion(cx, 0, p, f0, 3));
  }

  TEST_CASE("power iteration finds the top Laplacian eigenvalue") {
    const GraphWithBoundary p2 = make_graph(2, {{0, 1}});
    const GraphWithBoundary k3 = make_graph(3, {{0, 1}, {0, 2}, {1, 2}});
    CHECK(spectral_radius_estimate(OrientedCliqueComplex(p2, 1).hodge_laplacian(0)) ==
          doctest::Approx(2.0).epsilon(1e-6));
    CHECK(spectral_radius_estimate(OrientedCliqueComplex(k3, 1).hodge_laplacian(0)) ==
          doctest::Approx(3.0).epsilon(1e-6));
  }

  TEST_CASE("random sources hit the requested support exactly") {
    const GraphWithBoundary g = build_grid(5, 5);
    const KForm f = random_heat_sources(g, 6, 10.0, 123);
    int hits = 0;
    for (int i = 0; i < f.values.size(); ++i) {
      if (f.values(i) != 0.0) {
        ++hits;
        CHECK(f.values(i) == 10.0);
      }
    }
    CHECK(hits == 6);
    const KForm again = random_heat_sources(g, 6, 10.0, 123);
    CHECK(same_bits(again.values, f.values));
  }

  TEST_CASE("noise level scales with the trajectory RMS") {
    const GraphWithBoundary g = wrap_torus(5, 26);
    const OrientedCliqueComplex cx(g, 1);
    DiffusionParams p;
    p.dt_schedule = {0.05};
    const Trajectory clean = simulate_linear_diffusion(cx, 0, p, random_heat_sources(g, 8, 10.0, 3), 40);
    CHECK(same_bits(add_gaussian_noise(clean, 0.0, 9).snapshots[5], clean.snapshots[5]));

    double sq = 0.0;
    long n = 0;
    for (const auto& f : clean.snapshots) {
      sq += f.squaredNorm();
      n += f.size();
    }
    const double rms = std::sqrt(sq / static_cast<double>(n));

    const Trajectory noisy = add_gaussian_noise(clean, 0.1, 9);
    double dev = 0.0;
    for (size_t i = 0; i < clean.snapshots.size(); ++i)
      dev += (noisy.snapshots[i] - clean.snapshots[i]).squaredNorm();
    const double sd = std::sqrt(dev / static_cast<double>(n));
    CHECK(sd == doctest::Approx(0.1 * rms).epsilon(0.1));
  }

  TEST_CASE("value datasets split observations along the boundary") {
    const GraphWithBoundary g = build_grid(3, 3);
    const OrientedCliqueComplex cx(g, 1);
    DiffusionParams p;
    p.dt_schedule = {0.05};
    const Trajectory t = simulate_linear_diffusion(cx, 0, p, random_heat_sources(g, 2, 5.0, 1), 6);
    const BVPDataset d = make_dataset(t, g, BoundaryKind::dirichlet);
    d.validate();
    CHECK(d.level == 0);
    CHECK(d.interior_index == std::vector<std::vector<int>>{{4}});
    CHECK(d.boundary_index.size() == 8);
    CHECK(d.knot_count() == 7);
    // Column values are the raw trajectory entries.
    for (int k = 0; k < d.knot_count(); ++k) {
      CHECK(d.interior_obs(k, 0) == t.snapshots[k](4));
      CHECK(d.boundary_obs(k, 0) == t.snapshots[k](0));
    }
  }

  TEST_CASE("flux datasets list half edges and difference values") {
    const GraphWithBoundary g = build_grid(3, 3);
    const OrientedCliqueComplex cx(g, 1);
    DiffusionParams p;
    p.dt_schedule = {0.05};
    const Trajectory t = simulate_linear_diffusion(cx, 0, p, random_heat_sources(g, 2, 5.0, 1), 4);
    const BVPDataset d = make_dataset(t, g, BoundaryKind::neumann);
    d.validate();
    REQUIRE(d.boundary_index.size() == 4);  // one per half edge
    CHECK(d.boundary_index[0] == std::vector<int>{4, 1});
    for (int k = 0; k < d.knot_count(); ++k)
      CHECK(d.boundary_obs(k, 0) == t.snapshots[k](1) - t.snapshots[k](4));

    // A constant field has zero flux everywhere.
    Trajectory flat;
    flat.level = 0;
    flat.timestamps = {0.0, 1.0};
    flat.snapshots = {Eigen::VectorXd::Constant(9, 3.0), Eigen::VectorXd::Constant(9, 3.0)};
    const BVPDataset df = make_dataset(flat, g, BoundaryKind::neumann);
    CHECK(df.boundary_obs.cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("edge datasets must carry value boundary data") {
    const GraphWithBoundary g = build_grid(3, 3);
    const OrientedCliqueComplex cx(g, 2);
    DiffusionParams p;
    p.dt_schedule = {0.05};
    KForm f0;
    f0.level = 1;
    f0.values = Eigen::VectorXd::Zero(cx.size(1));
    f0.values(0) = 5.0;
    const Trajectory t = simulate_linear_diffusion(cx, 1, p, f0, 4);
    CHECK_THROWS_AS(make_dataset(t, g, BoundaryKind::neumann), SpecError);
    const BVPDataset d = make_dataset(t, g, BoundaryKind::dirichlet);
    CHECK(d.level == 1);
    d.validate();
  }

  TEST_CASE("slices keep absolute time and the overlap knot") {
    const GraphWithBoundary g = build_grid(3, 3);
    const OrientedCliqueComplex cx(g, 1);
    DiffusionParams p;
    p.dt_schedule = {0.1};
    const Trajectory t = simulate_linear_diffusion(cx, 0, p, random_heat_sources(g, 2, 5.0, 4), 9);
    const BVPDataset d = make_dataset(t, g, BoundaryKind::dirichlet);
    const BVPDataset head = slice_dataset(d, 0, 6);
    const BVPDataset tail = slice_dataset(d, 6, 9);
    CHECK(head.knot_count() == 7);
    CHECK(tail.knot_count() == 4);
    CHECK(head.timestamps.back() == tail.timestamps.front());
    CHECK(same_bits(head.interior_obs.row(6), tail.interior_obs.row(0)));
    CHECK(tail.timestamps.front() == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(slice_dataset(d, 5, 5).knot_count() == 1);
    CHECK_THROWS_AS(slice_dataset(d, 7, 20), SpecError);  // out of range
  }

  TEST_CASE("renumbering restrictions carry orientation signs") {
    const GraphWithBoundary parent = make_graph(2, {{0, 1}});
    const GraphWithBoundary sub = make_graph(2, {{0, 1}});
    const OrientedCliqueComplex pcx(parent, 1), scx(sub, 1);
    std::vector<int> map;
    std::vector<double> signs;
    // New node 0 is old node 1: the edge tuple reverses.
    build_restriction(pcx, scx, 1, {1, 0}, map, signs);
    REQUIRE(map.size() == 1);
    CHECK(map[0] == 0);
    CHECK(signs[0] == -1.0);
    build_restriction(pcx, scx, 0, {1, 0}, map, signs);
    CHECK(map == std::vector<int>{1, 0});
    CHECK(signs == std::vector<double>{1.0, 1.0});

    Trajectory t;
    t.level = 1;
    t.timestamps = {0.0};
    t.snapshots = {(Eigen::VectorXd(1) << 2.5).finished()};
    std::vector<int> emap{0};
    std::vector<double> esigns{-1.0};
    const Trajectory r = restrict_trajectory(t, emap, esigns);
    CHECK(r.snapshots[0](0) == -2.5);
  }
}
