#include "biip/io.hpp"

#include <fstream>
#include <set>
#include <utility>

#include "json.hpp"

#include "biip/errors.hpp"

namespace biip::io {

using nlohmann::json;

namespace {

json parse_or_throw(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) throw IoError(std::string("invalid JSON in ") + what);
  return j;
}

// Field access that converts structural surprises into IoError with the
// offending key in the message.
const json& field(const json& j, const char* key, const char* what) {
  const auto it = j.find(key);
  if (it == j.end())
    throw IoError(std::string(what) + ": missing field \"" + key + "\"");
  return *it;
}

template <typename T>
T get_as(const json& j, const char* key, const char* what) {
  try {
    return field(j, key, what).get<T>();
  } catch (const json::exception&) {
    throw IoError(std::string(what) + ": field \"" + key + "\" has the wrong type");
  }
}

json graph_json(const GraphWithBoundary& g) {
  json j;
  j["nodes"] = g.node_count;
  json edges = json::array();
  for (const auto& [u, v] : g.edges) edges.push_back({u, v});
  j["edges"] = std::move(edges);
  j["boundary_cycles"] = g.boundary_cycles;
  if (!g.positions.empty()) {
    json pos = json::array();
    for (const auto& p : g.positions) pos.push_back({p[0], p[1]});
    j["positions"] = std::move(pos);
  }
  return j;
}

GraphWithBoundary graph_from(const json& j) {
  const char* what = "graph";
  const int nodes = get_as<int>(j, "nodes", what);
  std::vector<Edge> edges;
  for (const auto& e : field(j, "edges", what)) {
    if (!e.is_array() || e.size() != 2)
      throw IoError("graph: every edge entry must be a pair");
    edges.emplace_back(e[0].get<int>(), e[1].get<int>());
  }
  const auto cycles = get_as<std::vector<std::vector<int>>>(j, "boundary_cycles", what);
  std::set<int> boundary;
  for (const auto& c : cycles) boundary.insert(c.begin(), c.end());

  GraphWithBoundary g = make_graph(nodes, std::move(edges), std::move(boundary));
  if (g.boundary_cycles != cycles)
    throw SpecError("graph file's boundary cycles do not match its own decomposition");

  if (j.contains("positions")) {
    const auto& pos = j["positions"];
    if (static_cast<int>(pos.size()) != nodes)
      throw IoError("graph: positions must list one [x, y] per node");
    g.positions.reserve(pos.size());
    for (const auto& p : pos) {
      if (!p.is_array() || p.size() != 2) throw IoError("graph: bad position entry");
      g.positions.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  }
  return g;
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(i, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from(const json& rows, Eigen::Index want_rows, Eigen::Index want_cols,
                            const char* what) {
  if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != want_rows)
    throw IoError(std::string(what) + ": expected " + std::to_string(want_rows) + " rows");
  Eigen::MatrixXd m(want_rows, want_cols);
  for (Eigen::Index i = 0; i < want_rows; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != want_cols)
      throw IoError(std::string(what) + ": row " + std::to_string(i) + " has the wrong width");
    for (Eigen::Index c = 0; c < want_cols; ++c)
      m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

}  // namespace

std::string graph_to_json(const GraphWithBoundary& g) { return graph_json(g).dump(2) + "\n"; }

GraphWithBoundary graph_from_json(const std::string& text) {
  return graph_from(parse_or_throw(text, "graph"));
}

std::string dataset_to_json(const BVPDataset& d) {
  json j;
  j["kind"] = to_string(d.kind);
  j["level"] = d.level;
  j["graph"] = graph_json(d.graph);
  j["timestamps"] = d.timestamps;
  j["interior_index"] = d.interior_index;
  j["boundary_index"] = d.boundary_index;
  j["interior_obs"] = matrix_rows(d.interior_obs);
  j["boundary_obs"] = matrix_rows(d.boundary_obs);
  j["noise_level"] = d.noise_level;
  j["meta"] = {{"alpha", d.meta.alpha}, {"lambda", d.meta.lambda}, {"seed", d.meta.seed}};
  return j.dump(2) + "\n";
}

BVPDataset dataset_from_json(const std::string& text) {
  const json j = parse_or_throw(text, "dataset");
  const char* what = "dataset";
  BVPDataset d;
  d.kind = boundary_kind_from_string(get_as<std::string>(j, "kind", what));
  d.level = get_as<int>(j, "level", what);
  d.graph = graph_from(field(j, "graph", what));
  d.timestamps = get_as<std::vector<double>>(j, "timestamps", what);
  d.interior_index = get_as<std::vector<std::vector<int>>>(j, "interior_index", what);
  d.boundary_index = get_as<std::vector<std::vector<int>>>(j, "boundary_index", what);
  const auto t = static_cast<Eigen::Index>(d.timestamps.size());
  d.interior_obs = matrix_from(field(j, "interior_obs", what), t,
                               static_cast<Eigen::Index>(d.interior_index.size()),
                               "dataset interior_obs");
  d.boundary_obs = matrix_from(field(j, "boundary_obs", what), t,
                               static_cast<Eigen::Index>(d.boundary_index.size()),
                               "dataset boundary_obs");
  d.noise_level = get_as<double>(j, "noise_level", what);
  const json& meta = field(j, "meta", what);
  d.meta.alpha = get_as<double>(meta, "alpha", "dataset meta");
  d.meta.lambda = get_as<double>(meta, "lambda", "dataset meta");
  d.meta.seed = get_as<std::uint64_t>(meta, "seed", "dataset meta");
  d.validate();
  return d;
}

std::string checkpoint_to_json(const LearnedOperator& op) {
  json j;
  j["format"] = "biip-checkpoint-v1";
  j["variant"] = to_string(op.variant);
  j["oracle_alpha"] = op.oracle_alpha;
  if (op.variant != OperatorVariant::oracle_linear) {
    op.model.validate();
    j["level"] = op.model.level;
    j["message_kind"] = to_string(op.model.message_kind);
    j["aggregation"] = to_string(op.model.aggregation);
    json layers = json::array();
    for (const auto& l : op.model.layers)
      layers.push_back({{"in", l.in_dim()},
                        {"out", l.out_dim()},
                        {"activation", to_string(l.activation)}});
    j["layers"] = std::move(layers);
    const Eigen::VectorXd theta = op.model.flatten();
    j["params"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  }
  return j.dump(2) + "\n";
}

LearnedOperator checkpoint_from_json(const std::string& text) {
  const json j = parse_or_throw(text, "checkpoint");
  const char* what = "checkpoint";
  if (get_as<std::string>(j, "format", what) != "biip-checkpoint-v1")
    throw IoError("checkpoint: unsupported format tag");
  LearnedOperator op;
  op.variant = operator_variant_from_string(get_as<std::string>(j, "variant", what));
  op.oracle_alpha = get_as<double>(j, "oracle_alpha", what);
  if (op.variant == OperatorVariant::oracle_linear) return op;

  op.model.level = get_as<int>(j, "level", what);
  op.model.message_kind = boundary_kind_from_string(get_as<std::string>(j, "message_kind", what));
  op.model.aggregation = aggregation_from_string(get_as<std::string>(j, "aggregation", what));
  for (const auto& lj : field(j, "layers", what)) {
    MPLayerParams l;
    const int in = get_as<int>(lj, "in", "checkpoint layer");
    const int out = get_as<int>(lj, "out", "checkpoint layer");
    if (in < 1 || out < 1) throw IoError("checkpoint: bad layer dims");
    l.self_weight = Eigen::MatrixXd::Zero(out, in);
    l.neighbor_weight = Eigen::MatrixXd::Zero(out, in);
    l.bias = Eigen::VectorXd::Zero(out);
    l.activation = activation_from_string(get_as<std::string>(lj, "activation", "checkpoint layer"));
    op.model.layers.push_back(std::move(l));
  }
  const auto params = get_as<std::vector<double>>(j, "params", what);
  if (static_cast<int>(params.size()) != op.model.param_count())
    throw IoError("checkpoint: parameter count does not match the layer shapes");
  op.model.unflatten(Eigen::Map<const Eigen::VectorXd>(params.data(), params.size()));
  op.model.validate();
  return op;
}

std::string eval_report_to_json(const EvalReport& rep) {
  const auto series = [](const SeriesReport& s) -> json {
    if (!s.present) return nullptr;
    json j;
    j["rmse"] = s.rmse;
    j["timestamps"] = s.timestamps;
    j["per_site_rmse"] =
        std::vector<double>(s.per_site_rmse.data(), s.per_site_rmse.data() + s.per_site_rmse.size());
    j["per_knot_rmse"] =
        std::vector<double>(s.per_knot_rmse.data(), s.per_knot_rmse.data() + s.per_knot_rmse.size());
    return j;
  };
  json j;
  j["format"] = "biip-eval-v1";
  j["noise_level"] = rep.noise_level;
  j["train"] = series(rep.train);
  j["test"] = series(rep.test);
  j["new"] = series(rep.fresh);
  return j.dump(2) + "\n";
}

std::string epoch_log_line(const EpochLog& e) {
  json j;
  j["epoch"] = e.epoch;
  j["train_mse"] = e.train_mse;  // NaN (skipped epoch) serializes as null
  j["val_rmse"] = e.val_rmse;
  j["wall_ms"] = e.wall_ms;
  return j.dump() + "\n";
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open: " + p.string());
  std::string out((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failed: " + p.string());
  return out;
}

void write_file(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
    if (ec) throw IoError("cannot create directory: " + p.parent_path().string());
  }
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + p.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  out.flush();
  if (!out) throw IoError("write failed: " + p.string());
}

GraphWithBoundary load_graph(const std::filesystem::path& p) {
  return graph_from_json(read_file(p));
}

BVPDataset load_dataset(const std::filesystem::path& p) {
  return dataset_from_json(read_file(p));
}

LearnedOperator load_checkpoint(const std::filesystem::path& p) {
  return checkpoint_from_json(read_file(p));
}

}  // namespace biip::io
