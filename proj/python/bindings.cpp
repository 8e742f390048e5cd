// Python bindings for the core operations: surface construction, the
// diffusion generator, dataset plumbing, operator training, evaluation, and
// the JSON codecs. Matrices cross the boundary as NumPy copies; sparse
// operators are densified first (the meshes in play are small).

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "biip/complex.hpp"
#include "biip/dynamics.hpp"
#include "biip/errors.hpp"
#include "biip/graph.hpp"
#include "biip/io.hpp"
#include "biip/mpnn.hpp"
#include "biip/odeint.hpp"
#include "biip/sha256.hpp"
#include "biip/trainer.hpp"

namespace py = pybind11;
using namespace pybind11::literals;

namespace {

biip::SolverConfig make_solver(const std::string& method, double fixed_step, double rtol,
                               double atol, int max_steps) {
  biip::SolverConfig s;
  s.method = biip::solver_method_from_string(method);
  s.fixed_step = fixed_step;
  s.rtol = rtol;
  s.atol = atol;
  s.max_steps = max_steps;
  return s;
}

py::dict series_dict(const biip::SeriesReport& s) {
  py::dict d;
  d["present"] = s.present;
  if (!s.present) return d;
  d["rmse"] = s.rmse;
  d["timestamps"] = s.timestamps;
  d["per_site_rmse"] = s.per_site_rmse;
  d["per_knot_rmse"] = s.per_knot_rmse;
  d["predicted"] = s.predicted;
  return d;
}

}  // namespace

PYBIND11_MODULE(biip, m) {
  using namespace biip;

  m.doc() = "Discrete surfaces with boundary, diffusion generators, and "
            "boundary-forced operator learning";

  py::register_exception<SpecError>(m, "SpecError");
  const auto numeric_exc = py::register_exception<NumericError>(m, "NumericError");
  py::register_exception<DivergenceError>(m, "DivergenceError", numeric_exc.ptr());
  py::register_exception<IoError>(m, "IoError");

  // --- graphs ---------------------------------------------------------------

  py::class_<GraphWithBoundary>(m, "Graph")
      .def_readonly("node_count", &GraphWithBoundary::node_count)
      .def_readonly("edges", &GraphWithBoundary::edges)
      .def_property_readonly("boundary_nodes",
                             [](const GraphWithBoundary& g) {
                               return std::vector<int>(g.boundary_nodes.begin(),
                                                       g.boundary_nodes.end());
                             })
      .def_readonly("boundary_cycles", &GraphWithBoundary::boundary_cycles)
      .def_readonly("interior_regular_edges", &GraphWithBoundary::interior_regular_edges)
      .def_readonly("half_edges", &GraphWithBoundary::half_edges)
      .def_readonly("boundary_internal_edges", &GraphWithBoundary::boundary_internal_edges)
      .def("interior_nodes", &GraphWithBoundary::interior_nodes)
      .def("is_boundary", &GraphWithBoundary::is_boundary, "node"_a)
      .def("__repr__", [](const GraphWithBoundary& g) {
        std::ostringstream os;
        os << "Graph(nodes=" << g.node_count << ", edges=" << g.edges.size()
           << ", boundary_cycles=" << g.boundary_cycles.size() << ")";
        return os.str();
      });

  m.def(
      "make_graph",
      [](int node_count, std::vector<Edge> edges, const std::vector<int>& boundary) {
        return make_graph(node_count, std::move(edges),
                          std::set<int>(boundary.begin(), boundary.end()));
      },
      "node_count"_a, "edges"_a, "boundary_nodes"_a = std::vector<int>{});
  m.def("build_grid", &build_grid, "rows"_a, "cols"_a);
  m.def("wrap_torus", &wrap_torus, "rows"_a, "cols"_a);
  m.def(
      "extract_cylinder",
      [](const GraphWithBoundary& torus, int rows, int cols, int keep_first, int keep_width) {
        CylinderExtraction ex = extract_cylinder(torus, rows, cols, keep_first, keep_width);
        return py::make_tuple(std::move(ex.graph), std::move(ex.source_nodes));
      },
      "torus"_a, "rows"_a, "cols"_a, "keep_first"_a, "keep_width"_a,
      "Returns (graph, source_nodes) with source_nodes mapping new ids to torus ids");
  m.def("build_genus2_minus_cylinder", &build_genus2_minus_cylinder, "seed"_a = 0);
  m.def("attach_capped_tube", &attach_capped_tube, "graph"_a, "cycle"_a, "length"_a,
        "Closed simulation parent: a capped tube of fresh rings glued along a boundary cycle");

  // --- clique complex ---------------------------------------------------------

  m.def("enumerate_cliques", &enumerate_cliques, "graph"_a, "level"_a);

  py::class_<OrientedCliqueComplex>(m, "CliqueComplex")
      .def(py::init<const GraphWithBoundary&, int>(), "graph"_a, "max_level"_a = 2)
      .def_property_readonly("max_level", &OrientedCliqueComplex::max_level)
      .def("size", &OrientedCliqueComplex::size, "level"_a)
      .def("cliques", &OrientedCliqueComplex::cliques, "level"_a)
      .def("index_of", &OrientedCliqueComplex::index_of, "level"_a, "clique"_a)
      .def("weights", &OrientedCliqueComplex::weights, "level"_a)
      .def("set_weights", &OrientedCliqueComplex::set_weights, "level"_a, "weights"_a)
      .def(
          "coboundary",
          [](const OrientedCliqueComplex& c, int k) {
            return Eigen::MatrixXd(c.coboundary(k).matrix());
          },
          "level"_a)
      .def(
          "adjoint",
          [](const OrientedCliqueComplex& c, int k) { return Eigen::MatrixXd(c.adjoint(k)); },
          "level"_a)
      .def(
          "hodge_laplacian",
          [](const OrientedCliqueComplex& c, int k) {
            return Eigen::MatrixXd(c.hodge_laplacian(k));
          },
          "level"_a);

  // --- forms, generator, datasets --------------------------------------------

  py::class_<KForm>(m, "KForm")
      .def(py::init([](int level, Eigen::VectorXd values) {
             KForm f;
             f.level = level;
             f.values = std::move(values);
             return f;
           }),
           "level"_a, "values"_a)
      .def_readonly("level", &KForm::level)
      .def_readonly("values", &KForm::values);

  py::class_<Trajectory>(m, "Trajectory")
      .def_readonly("level", &Trajectory::level)
      .def_readonly("timestamps", &Trajectory::timestamps)
      .def_readonly("snapshots", &Trajectory::snapshots);

  m.def("random_heat_sources", &random_heat_sources, "graph"_a, "num_sources"_a, "magnitude"_a,
        "seed"_a);
  m.def("random_sources", &random_sources, "complex"_a, "level"_a, "num"_a, "magnitude"_a,
        "seed"_a);
  m.def(
      "simulate_linear_diffusion",
      [](const OrientedCliqueComplex& c, int level, const KForm& f0, double alpha, double dt,
         int steps, bool force) {
        DiffusionParams p;
        p.alpha = alpha;
        p.dt_schedule = {dt};
        return simulate_linear_diffusion(c, level, p, f0, steps, force);
      },
      "complex"_a, "level"_a, "f0"_a, "alpha"_a = 1.0, "dt"_a = 0.05, "steps"_a = 40,
      "force"_a = false);
  m.def(
      "simulate_perona_malik",
      [](const OrientedCliqueComplex& c, const KForm& f0, double alpha, double lam, double dt,
         int steps, bool force) {
        DiffusionParams p;
        p.alpha = alpha;
        p.lambda_pm = lam;
        p.dt_schedule = {dt};
        return simulate_perona_malik(c, p, f0, steps, force);
      },
      "complex"_a, "f0"_a, "alpha"_a = 1.0, "lam"_a = 1.0, "dt"_a = 0.05, "steps"_a = 40,
      "force"_a = false);
  m.def("add_gaussian_noise", &add_gaussian_noise, "trajectory"_a, "level"_a, "seed"_a);
  m.def("spectral_radius_estimate", &spectral_radius_estimate, "op"_a, "iters"_a = 100);

  py::class_<BVPDataset>(m, "Dataset")
      .def_property_readonly("kind", [](const BVPDataset& d) { return to_string(d.kind); })
      .def_readonly("level", &BVPDataset::level)
      .def_readonly("graph", &BVPDataset::graph)
      .def_readonly("timestamps", &BVPDataset::timestamps)
      .def_readonly("interior_index", &BVPDataset::interior_index)
      .def_readonly("boundary_index", &BVPDataset::boundary_index)
      .def_readonly("interior_obs", &BVPDataset::interior_obs)
      .def_readonly("boundary_obs", &BVPDataset::boundary_obs)
      .def_readonly("noise_level", &BVPDataset::noise_level)
      .def_property_readonly("alpha", [](const BVPDataset& d) { return d.meta.alpha; })
      .def_property_readonly("lam", [](const BVPDataset& d) { return d.meta.lambda; })
      .def_property_readonly("seed", [](const BVPDataset& d) { return d.meta.seed; })
      .def("knot_count", &BVPDataset::knot_count)
      .def("validate", &BVPDataset::validate)
      .def("__repr__", [](const BVPDataset& d) {
        std::ostringstream os;
        os << "Dataset(kind=" << to_string(d.kind) << ", level=" << d.level
           << ", knots=" << d.knot_count() << ", interior=" << d.interior_index.size()
           << ", boundary=" << d.boundary_index.size() << ")";
        return os.str();
      });

  m.def(
      "make_dataset",
      [](const Trajectory& t, const GraphWithBoundary& g, const std::string& kind) {
        return make_dataset(t, g, boundary_kind_from_string(kind));
      },
      "trajectory"_a, "graph"_a, "kind"_a = "dirichlet");
  m.def("slice_dataset", &slice_dataset, "dataset"_a, "first"_a, "last"_a);

  // --- models and training ----------------------------------------------------

  py::class_<ModelParams>(m, "Model")
      .def_readonly("level", &ModelParams::level)
      .def_property_readonly("message_kind",
                             [](const ModelParams& p) { return to_string(p.message_kind); })
      .def_property_readonly("aggregation",
                             [](const ModelParams& p) { return to_string(p.aggregation); })
      .def_property_readonly("num_layers",
                             [](const ModelParams& p) { return p.layers.size(); })
      .def("param_count", &ModelParams::param_count)
      .def("flatten", &ModelParams::flatten)
      .def("unflatten", &ModelParams::unflatten, "theta"_a);

  m.def(
      "init_model",
      [](int num_layers, int hidden_dim, const std::string& kind, const std::string& agg,
         int level, std::uint64_t seed) {
        return init_model(num_layers, hidden_dim, boundary_kind_from_string(kind),
                          aggregation_from_string(agg), level, seed);
      },
      "num_layers"_a = 5, "hidden_dim"_a = 64, "kind"_a = "dirichlet", "agg"_a = "mean",
      "level"_a = 0, "seed"_a = 0);

  py::class_<LearnedOperator>(m, "Operator")
      .def_property_readonly("variant",
                             [](const LearnedOperator& op) { return to_string(op.variant); })
      .def_readonly("model", &LearnedOperator::model)
      .def_readonly("oracle_alpha", &LearnedOperator::oracle_alpha);

  m.def(
      "teacher_forced_operator",
      [](ModelParams model) {
        LearnedOperator op;
        op.variant = OperatorVariant::teacher_forced;
        op.model = std::move(model);
        return op;
      },
      "model"_a);
  m.def(
      "vanilla_operator",
      [](ModelParams model) {
        LearnedOperator op;
        op.variant = OperatorVariant::vanilla;
        op.model = std::move(model);
        return op;
      },
      "model"_a);
  m.def(
      "oracle_operator",
      [](double alpha) {
        LearnedOperator op;
        op.variant = OperatorVariant::oracle_linear;
        op.oracle_alpha = alpha;
        return op;
      },
      "alpha"_a = 1.0);

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init([](int epochs, int segment_length, double lr, std::uint64_t seed,
                       double fixed_step) {
             TrainConfig c;
             c.epochs = epochs;
             c.segment_length = segment_length;
             c.adam.lr = lr;
             c.seed = seed;
             c.solver.fixed_step = fixed_step;
             return c;
           }),
           "epochs"_a = 500, "segment_length"_a = 4, "lr"_a = 1e-3, "seed"_a = 0,
           "fixed_step"_a = 0.0)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_readwrite("segment_length", &TrainConfig::segment_length)
      .def_readwrite("seed", &TrainConfig::seed);

  py::class_<EpochLog>(m, "EpochLog")
      .def_readonly("epoch", &EpochLog::epoch)
      .def_readonly("train_mse", &EpochLog::train_mse)
      .def_readonly("val_rmse", &EpochLog::val_rmse)
      .def_readonly("wall_ms", &EpochLog::wall_ms)
      .def_readonly("skipped", &EpochLog::skipped);

  py::class_<TrainResult>(m, "TrainResult")
      .def_readonly("op", &TrainResult::op)
      .def_readonly("log", &TrainResult::log)
      .def_readonly("diverged_segments", &TrainResult::diverged_segments)
      .def_readonly("skipped_updates", &TrainResult::skipped_updates);

  m.def(
      "train",
      [](const LearnedOperator& init, const BVPDataset& data,
         const std::optional<BVPDataset>& val, const TrainConfig& cfg) {
        return train(init, data, val ? &*val : nullptr, cfg);
      },
      "init"_a, "data"_a, "val"_a = py::none(), "config"_a = TrainConfig{});

  m.def(
      "segment_loss",
      [](const ModelParams& model, const BVPDataset& d, int first, int last,
         const std::string& method, double fixed_step) {
        return segment_loss(model, d, {first, last},
                            make_solver(method, fixed_step, 1e-6, 1e-8, 100000));
      },
      "model"_a, "data"_a, "first"_a, "last"_a, "method"_a = "rk4_fixed", "fixed_step"_a = 0.0);

  m.def(
      "rollout_interior",
      [](const LearnedOperator& op, const BVPDataset& d, int start, const std::string& method,
         double fixed_step, double rtol, double atol, int max_steps) {
        return rollout_interior(op, d, start,
                                make_solver(method, fixed_step, rtol, atol, max_steps));
      },
      "op"_a, "data"_a, "start"_a = 0, "method"_a = "dopri5", "fixed_step"_a = 0.0,
      "rtol"_a = 1e-6, "atol"_a = 1e-8, "max_steps"_a = 100000);

  m.def(
      "evaluate",
      [](const LearnedOperator& op, const BVPDataset& train_d,
         const std::optional<BVPDataset>& test_d, const std::optional<BVPDataset>& new_d,
         const std::string& method, double fixed_step, double rtol, double atol,
         int max_steps) {
        const EvalReport rep =
            evaluate(op, train_d, test_d ? &*test_d : nullptr, new_d ? &*new_d : nullptr,
                     make_solver(method, fixed_step, rtol, atol, max_steps));
        py::dict out;
        out["noise_level"] = rep.noise_level;
        out["train"] = series_dict(rep.train);
        out["test"] = series_dict(rep.test);
        out["new"] = series_dict(rep.fresh);
        return out;
      },
      "op"_a, "train"_a, "test"_a = py::none(), "new"_a = py::none(), "method"_a = "dopri5",
      "fixed_step"_a = 0.0, "rtol"_a = 1e-6, "atol"_a = 1e-8, "max_steps"_a = 100000);

  // --- serialization ------------------------------------------------------------

  m.def("graph_to_json", &io::graph_to_json, "graph"_a);
  m.def("graph_from_json", &io::graph_from_json, "text"_a);
  m.def("dataset_to_json", &io::dataset_to_json, "dataset"_a);
  m.def("dataset_from_json", &io::dataset_from_json, "text"_a);
  m.def("checkpoint_to_json", &io::checkpoint_to_json, "op"_a);
  m.def("checkpoint_from_json", &io::checkpoint_from_json, "text"_a);
  m.def("load_graph", [](const std::string& p) { return io::load_graph(p); }, "path"_a);
  m.def("load_dataset", [](const std::string& p) { return io::load_dataset(p); }, "path"_a);
  m.def("load_checkpoint", [](const std::string& p) { return io::load_checkpoint(p); },
        "path"_a);
  m.def("save_text", [](const std::string& p, const std::string& s) { io::write_file(p, s); },
        "path"_a, "text"_a);
  m.def("sha256_hex", py::overload_cast<const std::string&>(&sha256_hex), "data"_a);
}
