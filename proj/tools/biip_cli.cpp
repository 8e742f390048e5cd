// biip command-line front end.
//
//   generate      build a surface, run the diffusion generator, write datasets
//   train         fit a message-passing operator to a dataset
//   eval          roll a checkpoint across train/test/new windows, report RMSE
//   export-plot   per-site observed vs predicted curves as CSV
//
// Every command writes a run manifest (JSON) next to its outputs recording
// the effective configuration, the SHA-256 of every input and output
// artifact, and wall-clock timing. Artifacts themselves are byte-identical
// across reruns of the same configuration; wall clock appears only in
// manifests and training logs.
//
// Exit codes: 0 success, 2 configuration / validation error, 3 numerical
// failure, 4 filesystem or serialization failure.

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "biip/complex.hpp"
#include "biip/dynamics.hpp"
#include "biip/errors.hpp"
#include "biip/graph.hpp"
#include "biip/io.hpp"
#include "biip/mpnn.hpp"
#include "biip/odeint.hpp"
#include "biip/sha256.hpp"
#include "biip/trainer.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

double ms_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
      .count();
}

json parse_config(const std::string& text, const std::string& what) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) throw biip::SpecError(what + ": not valid JSON");
  return j;
}

// Typed-access failures inside config blocks are configuration errors, not
// internal ones.
template <typename F>
auto with_config_errors(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw biip::SpecError(what + ": " + e.what());
  }
}

// BIIP_SEED overrides the seed found in any config file.
std::uint64_t effective_seed(std::uint64_t from_config) {
  const char* env = std::getenv("BIIP_SEED");
  if (env == nullptr) return from_config;
  std::uint64_t v = 0;
  const char* end = env + std::strlen(env);
  const auto [ptr, ec] = std::from_chars(env, end, v);
  if (ec != std::errc() || ptr != end)
    throw biip::SpecError(std::string("BIIP_SEED must be an unsigned integer, got: ") + env);
  return v;
}

bool seed_overridden() { return std::getenv("BIIP_SEED") != nullptr; }

// Shortest round-trip formatting, matching the JSON codecs.
std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

struct Manifest {
  explicit Manifest(std::string command) {
    j["command"] = std::move(command);
    j["config"] = json::object();
    j["seeds"] = json::object();
    j["inputs"] = json::object();
    j["outputs"] = json::object();
  }

  void config(json c) { j["config"] = std::move(c); }
  void seed(const std::string& name, std::uint64_t v) { j["seeds"][name] = v; }
  void input(const fs::path& p) { j["inputs"][p.string()] = biip::sha256_file(p); }
  void output(const fs::path& p) { j["outputs"][p.string()] = biip::sha256_file(p); }
  void note(const std::string& key, json v) { j[key] = std::move(v); }
  void write(const fs::path& p) {
    j["wall_ms"] = ms_since(t0);
    biip::io::write_file(p, j.dump(2) + "\n");
  }

  json j = json::object();
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
};

// --- generate ---------------------------------------------------------------

struct FlowSpec {
  std::string type = "linear";  // "linear" | "perona_malik"
  int level = 0;
  double alpha = 1.0;
  double lambda = 1.0;
  double dt = 0.05;
  int steps = 40;
};

struct GenerateSpec {
  biip::SurfaceSpec surface;
  FlowSpec flow;
  int source_count = 5;
  double source_magnitude = 10.0;
  biip::BoundaryKind boundary = biip::BoundaryKind::dirichlet;
  double noise = 0.0;
  int concealed_tube = 0;  // rings of hidden reservoir behind boundary cycle 0
  std::uint64_t seed = 0;
  std::optional<std::uint64_t> new_seed;  // extra trajectory on the same surface
  int train_knots = 0;                    // 0 -> 4/5 of the knots
};

GenerateSpec parse_generate_spec(const json& j) {
  GenerateSpec s;
  const json& sj = j.at("surface");
  s.surface.kind = biip::surface_kind_from_string(sj.at("kind").get<std::string>());
  s.surface.rows = sj.value("rows", 0);
  s.surface.cols = sj.value("cols", 0);
  s.surface.keep_first = sj.value("keep_first", 0);
  s.surface.keep_width = sj.value("keep_width", 0);
  s.surface.seed = sj.value("seed", std::uint64_t{0});
  if (j.contains("flow")) {
    const json& fj = j.at("flow");
    s.flow.type = fj.value("type", s.flow.type);
    s.flow.level = fj.value("level", s.flow.level);
    s.flow.alpha = fj.value("alpha", s.flow.alpha);
    s.flow.lambda = fj.value("lambda", s.flow.lambda);
    s.flow.dt = fj.value("dt", s.flow.dt);
    s.flow.steps = fj.value("steps", s.flow.steps);
  }
  if (j.contains("sources")) {
    s.source_count = j.at("sources").value("count", s.source_count);
    s.source_magnitude = j.at("sources").value("magnitude", s.source_magnitude);
  }
  s.boundary = biip::boundary_kind_from_string(j.value("boundary", std::string("dirichlet")));
  s.noise = j.value("noise", 0.0);
  s.concealed_tube = j.value("concealed_tube", 0);
  s.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("new_seed")) s.new_seed = j.at("new_seed").get<std::uint64_t>();
  s.train_knots = j.value("train_knots", 0);

  if (s.flow.type != "linear" && s.flow.type != "perona_malik")
    throw biip::SpecError("flow.type must be linear or perona_malik");
  if (s.flow.type == "perona_malik" && s.flow.level != 0)
    throw biip::SpecError("the nonlinear flow is defined on node fields (level 0)");
  if (s.flow.level < 0 || s.flow.level > 1)
    throw biip::SpecError("datasets carry level 0 or level 1 forms");
  if (s.flow.steps < 2) throw biip::SpecError("flow.steps must be >= 2");
  if (s.flow.dt <= 0.0) throw biip::SpecError("flow.dt must be positive");
  if (s.noise < 0.0) throw biip::SpecError("noise must be >= 0");
  if (s.concealed_tube < 0) throw biip::SpecError("concealed_tube must be >= 0");
  if (s.concealed_tube > 0 && s.surface.kind == biip::SurfaceKind::cylinder)
    throw biip::SpecError("cylinders are already simulated on their parent torus");
  return s;
}

// One full-window dataset for one trajectory seed. Cylinders are simulated
// on their parent torus and restricted afterwards, so the kept interior
// evolves exactly as it does on the closed surface.
biip::BVPDataset synthesize(const GenerateSpec& s, std::uint64_t traj_seed) {
  using namespace biip;
  const int max_level = s.flow.level + 1;
  DiffusionParams p;
  p.alpha = s.flow.alpha;
  p.lambda_pm = s.flow.lambda;
  p.dt_schedule = {s.flow.dt};

  GraphWithBoundary graph;
  Trajectory traj;
  if (s.surface.kind == SurfaceKind::cylinder) {
    const GraphWithBoundary torus = wrap_torus(s.surface.rows, s.surface.cols);
    const OrientedCliqueComplex parent(torus, max_level);
    const KForm f0 =
        random_sources(parent, s.flow.level, s.source_count, s.source_magnitude, traj_seed);
    const Trajectory on_torus =
        s.flow.type == "linear"
            ? simulate_linear_diffusion(parent, s.flow.level, p, f0, s.flow.steps)
            : simulate_perona_malik(parent, p, f0, s.flow.steps);
    CylinderExtraction ex = extract_cylinder(torus, s.surface.rows, s.surface.cols,
                                             s.surface.keep_first, s.surface.keep_width);
    const OrientedCliqueComplex sub(ex.graph, max_level);
    std::vector<int> map;
    std::vector<double> signs;
    build_restriction(parent, sub, s.flow.level, ex.source_nodes, map, signs);
    traj = restrict_trajectory(on_torus, map, signs);
    graph = std::move(ex.graph);
  } else if (s.concealed_tube > 0) {
    // Simulate on the closed parent (surface plus hidden reservoir behind its
    // boundary), then restrict to the visible nodes; the boundary then moves
    // in ways the visible data alone cannot explain, as it did before the
    // neighboring component was cut away.
    graph = build_surface(s.surface);
    const GraphWithBoundary parent = attach_capped_tube(graph, 0, s.concealed_tube);
    const OrientedCliqueComplex px(parent, max_level);
    const KForm f0 =
        random_sources(px, s.flow.level, s.source_count, s.source_magnitude, traj_seed);
    const Trajectory on_parent =
        s.flow.type == "linear"
            ? simulate_linear_diffusion(px, s.flow.level, p, f0, s.flow.steps)
            : simulate_perona_malik(px, p, f0, s.flow.steps);
    const OrientedCliqueComplex sub(graph, max_level);
    std::vector<int> node_map(graph.node_count);
    for (int v = 0; v < graph.node_count; ++v) node_map[v] = v;
    std::vector<int> map;
    std::vector<double> signs;
    build_restriction(px, sub, s.flow.level, node_map, map, signs);
    traj = restrict_trajectory(on_parent, map, signs);
  } else {
    graph = build_surface(s.surface);
    const OrientedCliqueComplex cx(graph, max_level);
    const KForm f0 =
        random_sources(cx, s.flow.level, s.source_count, s.source_magnitude, traj_seed);
    traj = s.flow.type == "linear"
               ? simulate_linear_diffusion(cx, s.flow.level, p, f0, s.flow.steps)
               : simulate_perona_malik(cx, p, f0, s.flow.steps);
  }
  traj = add_gaussian_noise(traj, s.noise, traj_seed + 1);
  BVPDataset d = make_dataset(traj, graph, s.boundary);
  d.noise_level = s.noise;
  d.meta.alpha = s.flow.alpha;
  d.meta.lambda = s.flow.lambda;
  d.meta.seed = traj_seed;
  return d;
}

int run_generate(const fs::path& spec_path, const fs::path& out_dir) {
  Manifest man("generate");
  const json spec_json = parse_config(biip::io::read_file(spec_path), "generation spec");
  const GenerateSpec s = with_config_errors("generation spec",
                                            [&] { return parse_generate_spec(spec_json); });
  const std::uint64_t seed = effective_seed(s.seed);
  man.config(spec_json);
  man.seed("trajectory", seed);
  man.input(spec_path);

  const biip::BVPDataset full = synthesize(s, seed);
  const int knots = full.knot_count();
  const int train_knots = s.train_knots > 0 ? s.train_knots : std::max(2, knots * 4 / 5);
  if (train_knots < 2 || train_knots > knots - 1)
    throw biip::SpecError("train_knots must lie in [2, knots - 1] so both windows span time");

  const biip::BVPDataset train = slice_dataset(full, 0, train_knots - 1);
  const biip::BVPDataset test = slice_dataset(full, train_knots - 1, knots - 1);

  const fs::path graph_p = out_dir / "graph.json";
  const fs::path train_p = out_dir / "train.json";
  const fs::path test_p = out_dir / "test.json";
  biip::io::write_file(graph_p, biip::io::graph_to_json(full.graph));
  biip::io::write_file(train_p, biip::io::dataset_to_json(train));
  biip::io::write_file(test_p, biip::io::dataset_to_json(test));
  man.output(graph_p);
  man.output(train_p);
  man.output(test_p);

  if (s.new_seed) {
    // Under a BIIP_SEED override the fresh trajectory shifts with it.
    const std::uint64_t fresh_seed = seed_overridden() ? seed + 1 : *s.new_seed;
    man.seed("new", fresh_seed);
    const biip::BVPDataset fresh = synthesize(s, fresh_seed);
    const fs::path new_p = out_dir / "new.json";
    biip::io::write_file(new_p, biip::io::dataset_to_json(fresh));
    man.output(new_p);
  }
  man.write(out_dir / "manifest_generate.json");
  std::cout << "generated " << knots << " knots on " << full.graph.node_count
            << " nodes -> " << out_dir.string() << "\n";
  return 0;
}

// --- train ------------------------------------------------------------------

struct TrainCliConfig {
  biip::TrainConfig cfg;
  int layers = 5;
  int hidden = 64;
  biip::Aggregation agg = biip::Aggregation::mean;
  std::optional<fs::path> val_data;
};

TrainCliConfig parse_train_config(const json& j) {
  TrainCliConfig c;
  c.cfg.epochs = j.value("epochs", c.cfg.epochs);
  c.cfg.segment_length = j.value("segment_length", c.cfg.segment_length);
  c.cfg.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("adam")) {
    const json& a = j.at("adam");
    c.cfg.adam.lr = a.value("lr", c.cfg.adam.lr);
    c.cfg.adam.beta1 = a.value("beta1", c.cfg.adam.beta1);
    c.cfg.adam.beta2 = a.value("beta2", c.cfg.adam.beta2);
    c.cfg.adam.eps = a.value("eps", c.cfg.adam.eps);
  }
  if (j.contains("solver")) {
    const json& sj = j.at("solver");
    c.cfg.solver.method =
        biip::solver_method_from_string(sj.value("method", std::string("rk4_fixed")));
    c.cfg.solver.fixed_step = sj.value("fixed_step", 0.0);
    c.cfg.solver.max_steps = sj.value("max_steps", c.cfg.solver.max_steps);
  }
  if (j.contains("model")) {
    const json& m = j.at("model");
    c.layers = m.value("layers", c.layers);
    c.hidden = m.value("hidden", c.hidden);
    c.agg = biip::aggregation_from_string(m.value("aggregation", std::string("mean")));
  }
  if (j.contains("val_data")) c.val_data = fs::path(j.at("val_data").get<std::string>());
  return c;
}

int run_train(const fs::path& data_path, const fs::path& config_path, const fs::path& out_dir,
              bool vanilla, int epochs_override, const std::string& val_override) {
  Manifest man("train");
  const json cfg_json = parse_config(biip::io::read_file(config_path), "train config");
  TrainCliConfig c =
      with_config_errors("train config", [&] { return parse_train_config(cfg_json); });
  if (epochs_override >= 0) c.cfg.epochs = epochs_override;
  if (!val_override.empty()) c.val_data = fs::path(val_override);
  c.cfg.seed = effective_seed(c.cfg.seed);

  const biip::BVPDataset data = biip::io::load_dataset(data_path);
  std::optional<biip::BVPDataset> val;
  if (c.val_data) val = biip::io::load_dataset(*c.val_data);

  biip::LearnedOperator init;
  init.variant =
      vanilla ? biip::OperatorVariant::vanilla : biip::OperatorVariant::teacher_forced;
  init.model = biip::init_model(c.layers, c.hidden, data.kind, c.agg, data.level, c.cfg.seed);

  const biip::TrainResult res = biip::train(init, data, val ? &*val : nullptr, c.cfg);

  json eff = cfg_json;
  eff["epochs"] = c.cfg.epochs;
  eff["seed"] = c.cfg.seed;
  eff["variant"] = biip::to_string(res.op.variant);
  if (c.val_data) eff["val_data"] = c.val_data->string();
  man.config(std::move(eff));
  man.seed("train", c.cfg.seed);
  man.input(data_path);
  man.input(config_path);
  if (c.val_data) man.input(*c.val_data);

  const fs::path ckpt_p = out_dir / "checkpoint.json";
  biip::io::write_file(ckpt_p, biip::io::checkpoint_to_json(res.op));
  std::string log;
  for (const biip::EpochLog& e : res.log) log += biip::io::epoch_log_line(e);
  const fs::path log_p = out_dir / "train_log.ndjson";
  biip::io::write_file(log_p, log);
  man.output(ckpt_p);
  man.output(log_p);
  man.note("diverged_segments", res.diverged_segments);
  man.note("skipped_updates", res.skipped_updates);
  man.write(out_dir / "manifest_train.json");

  const double final_mse = res.log.empty() ? 0.0 : res.log.back().train_mse;
  std::cout << "trained " << c.cfg.epochs << " epochs (" << res.diverged_segments
            << " diverged, " << res.skipped_updates << " skipped updates), final mse "
            << final_mse << " -> " << ckpt_p.string() << "\n";
  return 0;
}

// --- eval -------------------------------------------------------------------

biip::SolverConfig eval_solver(const std::string& method, double step) {
  biip::SolverConfig solver;  // adaptive by default
  if (!method.empty()) solver.method = biip::solver_method_from_string(method);
  if (step > 0.0) solver.fixed_step = step;
  return solver;
}

json solver_to_json(const biip::SolverConfig& s) {
  return json{{"method", biip::to_string(s.method)},
              {"fixed_step", s.fixed_step},
              {"rtol", s.rtol},
              {"atol", s.atol},
              {"max_steps", s.max_steps}};
}

int run_eval(const fs::path& ckpt_path, const fs::path& train_path, const std::string& test_path,
             const std::string& new_path, const fs::path& out_file, const std::string& method,
             double step) {
  Manifest man("eval");
  const biip::LearnedOperator op = biip::io::load_checkpoint(ckpt_path);
  const biip::BVPDataset train_d = biip::io::load_dataset(train_path);
  std::optional<biip::BVPDataset> test_d, new_d;
  if (!test_path.empty()) test_d = biip::io::load_dataset(test_path);
  if (!new_path.empty()) new_d = biip::io::load_dataset(new_path);
  const biip::SolverConfig solver = eval_solver(method, step);

  const biip::EvalReport rep = biip::evaluate(op, train_d, test_d ? &*test_d : nullptr,
                                              new_d ? &*new_d : nullptr, solver);
  biip::io::write_file(out_file, biip::io::eval_report_to_json(rep));

  man.config(json{{"solver", solver_to_json(solver)}, {"variant", biip::to_string(op.variant)}});
  man.input(ckpt_path);
  man.input(train_path);
  if (test_d) man.input(test_path);
  if (new_d) man.input(new_path);
  man.output(out_file);
  man.write(out_file.string() + ".manifest.json");

  std::cout << "train rmse " << rep.train.rmse;
  if (rep.test.present) std::cout << ", test rmse " << rep.test.rmse;
  if (rep.fresh.present) std::cout << ", new rmse " << rep.fresh.rmse;
  std::cout << " -> " << out_file.string() << "\n";
  return 0;
}

// --- export-plot -------------------------------------------------------------

int run_export_plot(const fs::path& ckpt_path, const fs::path& data_path,
                    const std::vector<int>& nodes, const fs::path& out_csv,
                    const std::string& method, double step) {
  Manifest man("export-plot");
  const biip::LearnedOperator op = biip::io::load_checkpoint(ckpt_path);
  const biip::BVPDataset d = biip::io::load_dataset(data_path);
  const biip::SolverConfig solver = eval_solver(method, step);
  if (nodes.empty()) throw biip::SpecError("--nodes needs at least one site id");

  const biip::MessageGraph mg(d.graph, d.level);
  std::unordered_map<int, int> int_pos, bnd_pos;
  for (int i = 0; i < mg.interior_count(); ++i) int_pos[mg.interior_sites()[i]] = i;
  for (int i = 0; i < mg.boundary_count(); ++i) bnd_pos[mg.boundary_sites()[i]] = i;

  const bool per_site = d.kind == biip::BoundaryKind::dirichlet;
  Eigen::MatrixXd pred;
  if (per_site)
    pred = biip::rollout_sites(op, d, 0, solver);
  else
    pred = biip::rollout_interior(op, d, 0, solver);

  std::string csv = "t,node,observed,predicted\n";
  for (const int node : nodes) {
    if (node < 0 || node >= mg.site_count())
      throw biip::SpecError("unknown site id " + std::to_string(node));
    const auto b = bnd_pos.find(node);
    if (b != bnd_pos.end() && !per_site)
      throw biip::SpecError("site " + std::to_string(node) +
                            " carries no observed values in a flux dataset");
    for (int k = 0; k < d.knot_count(); ++k) {
      const double obs = b != bnd_pos.end() ? d.boundary_obs(k, b->second)
                                            : d.interior_obs(k, int_pos.at(node));
      const double prd = per_site ? pred(k, node) : pred(k, int_pos.at(node));
      csv += fmt(d.timestamps[k]);
      csv += ',';
      csv += std::to_string(node);
      csv += ',';
      csv += fmt(obs);
      csv += ',';
      csv += fmt(prd);
      csv += '\n';
    }
  }
  biip::io::write_file(out_csv, csv);

  json cfg{{"nodes", nodes}, {"solver", solver_to_json(solver)}};
  man.config(std::move(cfg));
  man.input(ckpt_path);
  man.input(data_path);
  man.output(out_csv);
  man.write(out_csv.string() + ".manifest.json");
  std::cout << "wrote " << nodes.size() * static_cast<std::size_t>(d.knot_count())
            << " rows -> " << out_csv.string() << "\n";
  return 0;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"surface diffusion datasets and boundary-forced operator learning"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("generate", "Synthesize a surface and diffusion datasets");
  std::string g_spec, g_out;
  gen->add_option("--spec", g_spec, "generation spec (JSON)")->required();
  gen->add_option("--out", g_out, "output directory")->required();

  auto* tr = app.add_subcommand("train", "Fit a message-passing operator");
  std::string t_data, t_cfg, t_out, t_val;
  bool t_vanilla = false;
  int t_epochs = -1;
  tr->add_option("--data", t_data, "training dataset (JSON)")->required();
  tr->add_option("--config", t_cfg, "training config (JSON)")->required();
  tr->add_option("--out", t_out, "output directory")->required();
  tr->add_flag("--vanilla", t_vanilla,
               "train the whole-graph ablation instead of the boundary-forced operator");
  tr->add_option("--epochs", t_epochs, "override the configured epoch count");
  tr->add_option("--val", t_val, "validation dataset for per-epoch rollout RMSE");

  auto* ev = app.add_subcommand("eval", "Rollout RMSE over train/test/new windows");
  std::string e_ckpt, e_train, e_test, e_new, e_out, e_method;
  double e_step = 0.0;
  ev->add_option("--ckpt", e_ckpt, "checkpoint (JSON)")->required();
  ev->add_option("--train", e_train, "training dataset")->required();
  ev->add_option("--test", e_test, "held-out window (first knot = last train knot)");
  ev->add_option("--new", e_new, "fresh trajectory on the same surface");
  ev->add_option("--out", e_out, "report path (JSON)")->required();
  ev->add_option("--method", e_method, "solver override: dopri5 | rk4_fixed | euler_fixed");
  ev->add_option("--step", e_step, "fixed-step size for the fixed-step methods");

  auto* pl = app.add_subcommand("export-plot", "Observed vs predicted site curves as CSV");
  std::string p_ckpt, p_data, p_out, p_method;
  std::vector<int> p_nodes;
  double p_step = 0.0;
  pl->add_option("--ckpt", p_ckpt, "checkpoint (JSON)")->required();
  pl->add_option("--data", p_data, "dataset to roll out on")->required();
  pl->add_option("--nodes", p_nodes, "comma-separated site ids")->required()->delimiter(',');
  pl->add_option("--out", p_out, "CSV path")->required();
  pl->add_option("--method", p_method, "solver override: dopri5 | rk4_fixed | euler_fixed");
  pl->add_option("--step", p_step, "fixed-step size for the fixed-step methods");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*gen) return run_generate(g_spec, g_out);
  if (*tr) return run_train(t_data, t_cfg, t_out, t_vanilla, t_epochs, t_val);
  if (*ev) return run_eval(e_ckpt, e_train, e_test, e_new, e_out, e_method, e_step);
  if (*pl) return run_export_plot(p_ckpt, p_data, p_nodes, p_out, p_method, p_step);
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const biip::SpecError& e) {
    std::cerr << "error (config): " << e.what() << "\n";
    return 2;
  } catch (const biip::NumericError& e) {
    std::cerr << "error (numeric): " << e.what() << "\n";
    return 3;
  } catch (const biip::IoError& e) {
    std::cerr << "error (io): " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
