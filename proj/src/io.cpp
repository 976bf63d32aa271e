#include "ogf/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ogf {

namespace {

using nlohmann::json;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

double parse_double(const std::string& text, long line_no) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0') {
    throw ParseError("cannot parse number '" + text + "'", line_no);
  }
  return v;
}

long parse_long(const std::string& text, long line_no) {
  const char* begin = text.c_str();
  char* end = nullptr;
  const long v = std::strtol(begin, &end, 10);
  if (end == begin || *end != '\0') {
    throw ParseError("cannot parse integer '" + text + "'", line_no);
  }
  return v;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  return in;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void save_graph_csv(const ExpandingGraph& graph, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "src,dst,weight\n";
  for (const auto& [src, dst, w] : graph.edges()) {
    out << src << ',' << dst << ',' << format_double(w) << '\n';
  }
}

ExpandingGraph load_graph_csv(const std::string& path, Index n_nodes) {
  std::ifstream in = open_in(path);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("graph file is empty", 1);
  ++line_no;
  if (line != "src,dst,weight") throw ParseError("expected header src,dst,weight", line_no);
  std::vector<ExpandingGraph::Edge> edges;
  Index max_index = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 3) throw ParseError("expected 3 fields", line_no);
    const Index src = parse_long(fields[0], line_no);
    const Index dst = parse_long(fields[1], line_no);
    const double w = parse_double(fields[2], line_no);
    edges.emplace_back(src, dst, w);
    max_index = std::max({max_index, src, dst});
  }
  const Index n = n_nodes >= 0 ? n_nodes : max_index + 1;
  return ExpandingGraph::from_edges(n, edges);
}

void save_signal_csv(const Vector& signal, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "node,value\n";
  for (Index i = 0; i < signal.size(); ++i) {
    out << i << ',' << format_double(signal[i]) << '\n';
  }
}

Vector load_signal_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("signal file is empty", 1);
  ++line_no;
  if (line != "node,value") throw ParseError("expected header node,value", line_no);
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 2) throw ParseError("expected 2 fields", line_no);
    const long node = parse_long(fields[0], line_no);
    if (node != static_cast<long>(values.size())) {
      throw SchemaError("signal nodes must be consecutive from 0");
    }
    values.push_back(parse_double(fields[1], line_no));
  }
  Vector v(static_cast<Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Index>(i)] = values[i];
  return v;
}

void save_stream(const NodeStream& stream, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::filesystem::path base(dir);
  save_graph_csv(stream.base_graph, (base / "graph.csv").string());
  save_signal_csv(stream.base_signal, (base / "signal.csv").string());

  std::ofstream out = open_out((base / "stream.csv").string());
  out << "t,value,attach_indices,attach_weights\n";
  for (const auto& rec : stream.records) {
    out << rec.t << ',' << format_double(rec.value) << ',';
    for (std::size_t i = 0; i < rec.attachment.entries.size(); ++i) {
      if (i) out << ';';
      out << rec.attachment.entries[i].first;
    }
    out << ',';
    for (std::size_t i = 0; i < rec.attachment.entries.size(); ++i) {
      if (i) out << ';';
      out << format_double(rec.attachment.entries[i].second);
    }
    out << '\n';
  }

  json manifest;
  manifest["schema"] = "ogf-stream";
  manifest["n0"] = stream.base_graph.node_count();
  manifest["t_total"] = stream.length();
  manifest["train_count"] = stream.train_count;
  if (stream.generator_filter.size() > 0) {
    manifest["generator_filter"] =
        std::vector<double>(stream.generator_filter.data(),
                            stream.generator_filter.data() + stream.generator_filter.size());
  }
  std::ofstream mout = open_out((base / "manifest.json").string());
  mout << manifest.dump(2) << '\n';
}

NodeStream load_stream(const std::string& dir) {
  const std::filesystem::path base(dir);
  NodeStream stream;
  stream.base_signal = load_signal_csv((base / "signal.csv").string());
  stream.base_graph =
      load_graph_csv((base / "graph.csv").string(), stream.base_signal.size());

  std::ifstream in = open_in((base / "stream.csv").string());
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw SchemaError("stream file is empty");
  ++line_no;
  if (line != "t,value,attach_indices,attach_weights") {
    throw ParseError("expected header t,value,attach_indices,attach_weights", line_no);
  }
  const Index n0 = stream.base_graph.node_count();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 4) throw ParseError("expected 4 fields", line_no);
    StreamRecord rec;
    rec.t = parse_long(fields[0], line_no);
    rec.value = parse_double(fields[1], line_no);
    rec.attachment.length = n0 + rec.t - 1;
    if (!fields[2].empty()) {
      const auto idx = split(fields[2], ';');
      const auto wts = split(fields[3], ';');
      if (idx.size() != wts.size()) {
        throw SchemaError("attachment index/weight lists differ in length at t=" +
                          std::to_string(rec.t));
      }
      for (std::size_t i = 0; i < idx.size(); ++i) {
        rec.attachment.entries.emplace_back(parse_long(idx[i], line_no),
                                            parse_double(wts[i], line_no));
      }
    } else if (!fields[3].empty()) {
      throw SchemaError("attachment weights without indices at t=" + std::to_string(rec.t));
    }
    stream.records.push_back(std::move(rec));
  }
  if (stream.records.empty()) throw SchemaError("stream file has no records");

  stream.train_count = static_cast<Index>(
      std::floor(0.8 * static_cast<double>(stream.records.size())));
  const auto manifest_path = base / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    std::ifstream min = open_in(manifest_path.string());
    json manifest;
    try {
      min >> manifest;
    } catch (const json::exception& e) {
      throw ParseError(std::string("manifest: ") + e.what());
    }
    if (manifest.contains("train_count")) {
      stream.train_count = manifest["train_count"].get<Index>();
    }
    if (manifest.contains("generator_filter")) {
      const auto coeffs = manifest["generator_filter"].get<std::vector<double>>();
      stream.generator_filter.resize(static_cast<Index>(coeffs.size()));
      for (std::size_t i = 0; i < coeffs.size(); ++i) {
        stream.generator_filter[static_cast<Index>(i)] = coeffs[i];
      }
    }
    if (manifest.contains("n0") && manifest["n0"].get<Index>() != n0) {
      throw SchemaError("manifest n0 disagrees with the signal file");
    }
  }
  stream.validate();
  return stream;
}

void save_records_csv(const std::vector<StepRecord>& records, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "t,prediction,truth,loss,grad_norm,filter_norm\n";
  for (const auto& r : records) {
    out << r.t << ',' << format_double(r.prediction) << ',' << format_double(r.truth)
        << ',' << format_double(r.loss) << ',' << format_double(r.grad_norm) << ','
        << format_double(r.filter_norm) << '\n';
  }
}

std::vector<StepRecord> load_records_csv(const std::string& path) {
  std::ifstream in = open_in(path);
  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("records file is empty", 1);
  ++line_no;
  if (line != "t,prediction,truth,loss,grad_norm,filter_norm") {
    throw ParseError("unexpected records header", line_no);
  }
  std::vector<StepRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != 6) throw ParseError("expected 6 fields", line_no);
    StepRecord r;
    r.t = parse_long(fields[0], line_no);
    r.prediction = parse_double(fields[1], line_no);
    r.truth = parse_double(fields[2], line_no);
    r.loss = parse_double(fields[3], line_no);
    r.grad_norm = parse_double(fields[4], line_no);
    r.filter_norm = parse_double(fields[5], line_no);
    records.push_back(r);
  }
  return records;
}

}  // namespace ogf
