#pragma once

#include <filesystem>
#include <string>

#include "biip/dynamics.hpp"
#include "biip/graph.hpp"
#include "biip/trainer.hpp"

namespace biip::io {

// JSON codecs. All floating-point values are written with shortest
// round-trip precision, so save -> load -> save is byte-stable and loaded
// numbers are bit-equal to the originals.

// {"nodes": N, "edges": [[u,v],...], "boundary_cycles": [[...],...],
//  "positions": [[x,y],...]} (positions omitted when absent). Loading
// re-derives the boundary partition and re-validates the topology.
std::string graph_to_json(const GraphWithBoundary& g);
GraphWithBoundary graph_from_json(const std::string& text);

// {"kind", "level", "graph", "timestamps", "interior_index",
//  "boundary_index", "interior_obs", "boundary_obs", "noise_level",
//  "meta": {"alpha", "lambda", "seed"}}
std::string dataset_to_json(const BVPDataset& d);
BVPDataset dataset_from_json(const std::string& text);

// Versioned checkpoint with layer shapes and the flat parameter vector;
// load is bit-exact.
std::string checkpoint_to_json(const LearnedOperator& op);
LearnedOperator checkpoint_from_json(const std::string& text);

// Deterministic report: rmse + error series per regime under keys
// "train" / "test" / "new" (null when a regime was not evaluated), plus the
// training dataset's noise level. Wall-clock stays out; it belongs to the
// run manifest.
std::string eval_report_to_json(const EvalReport& rep);

// One newline-terminated record {"epoch", "train_mse", "val_rmse",
// "wall_ms"} (NaN becomes null); diagnostic stream, not an artifact.
std::string epoch_log_line(const EpochLog& e);

// Whole-file helpers; throw IoError on failure. write_file creates parent
// directories as needed.
std::string read_file(const std::filesystem::path& p);
void write_file(const std::filesystem::path& p, const std::string& content);

GraphWithBoundary load_graph(const std::filesystem::path& p);
BVPDataset load_dataset(const std::filesystem::path& p);
LearnedOperator load_checkpoint(const std::filesystem::path& p);

}  // namespace biip::io
