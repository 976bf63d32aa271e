#pragma once

#include <string>
#include <vector>

#include "ogf/common.hpp"
#include "ogf/datagen.hpp"
#include "ogf/graph.hpp"
#include "ogf/learners.hpp"

namespace ogf {

/// Doubles are written with 17 significant digits so that write/read
/// round-trips are exact.
std::string format_double(double v);

void save_graph_csv(const ExpandingGraph& graph, const std::string& path);

/// `n_nodes < 0` infers the count from the largest index seen, which loses
/// trailing isolated nodes; pass the count when it is known.
ExpandingGraph load_graph_csv(const std::string& path, Index n_nodes = -1);

void save_signal_csv(const Vector& signal, const std::string& path);
Vector load_signal_csv(const std::string& path);

/// Writes graph.csv, signal.csv, stream.csv, and manifest.json into `dir`.
void save_stream(const NodeStream& stream, const std::string& dir);

/// Reads the bundle back; manifest.json is optional (train split defaults
/// to the first 80 percent when absent).
NodeStream load_stream(const std::string& dir);

void save_records_csv(const std::vector<StepRecord>& records, const std::string& path);
std::vector<StepRecord> load_records_csv(const std::string& path);

}  // namespace ogf
