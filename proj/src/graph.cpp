#include "hgpl/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "hgpl/error.hpp"
#include "hgpl/rng.hpp"

namespace hgpl {

bool HeteroGraph::has_edge(int a, int b) const {
  const auto& nbrs = adjacency[a];
  return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

void HeteroGraph::finalize() {
  std::vector<EdgeRec> sym;
  sym.reserve(edges.size() * 2);
  for (const EdgeRec& e : edges) {
    if (e.src == e.dst) continue;
    sym.push_back(e);
    sym.push_back({e.dst, e.src, e.type});
  }
  std::sort(sym.begin(), sym.end());
  sym.erase(std::unique(sym.begin(), sym.end()), sym.end());
  edges = std::move(sym);

  adjacency.assign(num_nodes, {});
  for (const EdgeRec& e : edges) adjacency[e.src].push_back(e.dst);
  for (auto& nbrs : adjacency) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
}

ValidationReport validate(const HeteroGraph& g) {
  ValidationReport report;
  auto fail = [&report](const std::string& msg) {
    report.ok = false;
    report.violations.push_back(msg);
  };

  if (static_cast<int>(g.node_type.size()) != g.num_nodes) {
    fail("node_type size " + std::to_string(g.node_type.size()) + " != num_nodes " +
         std::to_string(g.num_nodes));
  } else {
    for (int v = 0; v < g.num_nodes; ++v) {
      if (g.node_type[v] < 0 || g.node_type[v] >= g.num_node_types) {
        fail("node " + std::to_string(v) + " has type " + std::to_string(g.node_type[v]) +
             " outside [0," + std::to_string(g.num_node_types) + ")");
      }
    }
  }

  std::vector<EdgeRec> seen;
  seen.reserve(g.edges.size());
  for (size_t i = 0; i < g.edges.size(); ++i) {
    const EdgeRec& e = g.edges[i];
    if (e.src < 0 || e.src >= g.num_nodes || e.dst < 0 || e.dst >= g.num_nodes) {
      fail("edge " + std::to_string(i) + " endpoint out of range: (" + std::to_string(e.src) +
           "," + std::to_string(e.dst) + ") with num_nodes " + std::to_string(g.num_nodes));
      continue;
    }
    if (e.type < 0 || e.type >= g.num_edge_types) {
      fail("edge " + std::to_string(i) + " has type " + std::to_string(e.type) + " outside [0," +
           std::to_string(g.num_edge_types) + ")");
    }
    if (e.src == e.dst) fail("edge " + std::to_string(i) + " is a self-loop on " + std::to_string(e.src));
    seen.push_back(e);
  }
  std::sort(seen.begin(), seen.end());
  for (size_t i = 1; i < seen.size(); ++i) {
    if (seen[i] == seen[i - 1]) {
      fail("duplicate edge (" + std::to_string(seen[i].src) + "," + std::to_string(seen[i].dst) +
           "," + std::to_string(seen[i].type) + ")");
    }
  }
  for (const EdgeRec& e : seen) {
    if (!std::binary_search(seen.begin(), seen.end(), EdgeRec{e.dst, e.src, e.type})) {
      fail("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
           ") missing its reverse orientation");
    }
  }

  if (g.features.rows() != g.num_nodes) {
    fail("feature matrix has " + std::to_string(g.features.rows()) + " rows, expected " +
         std::to_string(g.num_nodes));
  }
  if (g.feature_dim() < 1) fail("feature dimension must be >= 1");

  report.homogeneous = g.homogeneous();
  return report;
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  for (;;) {
    const size_t pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_real(const std::string& text, const std::string& where) {
  double value = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw DataError(where + ": cannot parse real '" + text + "'");
  }
  return value;
}

struct LineReader {
  std::ifstream stream;
  std::string path;
  int line_no = 0;

  explicit LineReader(const std::string& p) : stream(p), path(p) {
    if (!stream) throw DataError("cannot open file: " + p);
  }

  bool next(std::string& line) {
    while (std::getline(stream, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line[0] == '#') continue;
      return true;
    }
    return false;
  }

  std::string where() const { return path + ":" + std::to_string(line_no); }
};

int intern(std::vector<std::string>& names, std::unordered_map<std::string, int>& index,
           const std::string& name) {
  auto it = index.find(name);
  if (it != index.end()) return it->second;
  const int id = static_cast<int>(names.size());
  names.push_back(name);
  index.emplace(name, id);
  return id;
}

}  // namespace

LoadedGraph load_graph(const std::string& node_path, const std::string& edge_path,
                       const std::string& label_path) {
  HeteroGraph g;
  std::unordered_map<std::string, int> node_index;
  std::unordered_map<std::string, int> type_index;
  std::vector<std::vector<double>> feature_rows;

  {
    LineReader reader(node_path);
    std::string line;
    while (reader.next(line)) {
      const auto fields = split(line, '\t');
      if (fields.size() != 3) {
        throw DataError(reader.where() + ": expected <id>\\t<type>\\t<features>, got " +
                        std::to_string(fields.size()) + " fields");
      }
      if (node_index.count(fields[0])) {
        throw DataError(reader.where() + ": duplicate node id '" + fields[0] + "'");
      }
      node_index.emplace(fields[0], static_cast<int>(g.node_ids.size()));
      g.node_ids.push_back(fields[0]);
      g.node_type.push_back(intern(g.node_type_names, type_index, fields[1]));

      std::vector<double> row;
      for (const std::string& item : split(fields[2], ',')) {
        row.push_back(parse_real(item, reader.where()));
      }
      if (row.empty()) throw DataError(reader.where() + ": empty feature vector");
      if (!feature_rows.empty() && row.size() != feature_rows.front().size()) {
        throw DataError(reader.where() + ": ragged feature row, expected " +
                        std::to_string(feature_rows.front().size()) + " values, got " +
                        std::to_string(row.size()));
      }
      feature_rows.push_back(std::move(row));
    }
  }
  g.num_nodes = static_cast<int>(g.node_ids.size());
  g.num_node_types = static_cast<int>(g.node_type_names.size());
  if (g.num_nodes == 0) throw DataError(node_path + ": no nodes");

  g.features = Matrix(g.num_nodes, static_cast<int>(feature_rows.front().size()));
  for (int v = 0; v < g.num_nodes; ++v) {
    std::copy(feature_rows[v].begin(), feature_rows[v].end(), g.features.row(v));
  }

  {
    LineReader reader(edge_path);
    std::unordered_map<std::string, int> edge_type_index;
    std::string line;
    while (reader.next(line)) {
      const auto fields = split(line, '\t');
      if (fields.size() != 3) {
        throw DataError(reader.where() + ": expected <src>\\t<dst>\\t<edge-type>, got " +
                        std::to_string(fields.size()) + " fields");
      }
      const auto src = node_index.find(fields[0]);
      if (src == node_index.end()) {
        throw DataError(reader.where() + ": unknown node id '" + fields[0] + "'");
      }
      const auto dst = node_index.find(fields[1]);
      if (dst == node_index.end()) {
        throw DataError(reader.where() + ": unknown node id '" + fields[1] + "'");
      }
      const int type = intern(g.edge_type_names, edge_type_index, fields[2]);
      g.edges.push_back({src->second, dst->second, type});
    }
  }
  g.num_edge_types = std::max<int>(1, static_cast<int>(g.edge_type_names.size()));
  if (g.edge_type_names.empty()) g.edge_type_names.push_back("edge");
  g.finalize();

  LoadedGraph out;
  out.graph = std::move(g);

  if (!label_path.empty()) {
    LabelSet labels;
    std::unordered_map<std::string, int> class_index;
    LineReader reader(label_path);
    std::string line;
    while (reader.next(line)) {
      const auto fields = split(line, '\t');
      if (fields.size() != 2) {
        throw DataError(reader.where() + ": expected <id>\\t<class>, got " +
                        std::to_string(fields.size()) + " fields");
      }
      const auto it = node_index.find(fields[0]);
      if (it == node_index.end()) {
        throw DataError(reader.where() + ": unknown node id '" + fields[0] + "'");
      }
      labels.labels[it->second] = intern(labels.class_names, class_index, fields[1]);
    }
    labels.num_classes = static_cast<int>(labels.class_names.size());
    out.labels = std::move(labels);
  }
  return out;
}

void save_graph(const HeteroGraph& g, const LabelSet* labels, const std::string& node_path,
                const std::string& edge_path, const std::string& label_path) {
  {
    std::ofstream out(node_path);
    if (!out) throw DataError("cannot write file: " + node_path);
    char buf[64];
    for (int v = 0; v < g.num_nodes; ++v) {
      out << g.node_ids[v] << '\t' << g.node_type_names[g.node_type[v]] << '\t';
      for (int j = 0; j < g.feature_dim(); ++j) {
        std::snprintf(buf, sizeof(buf), "%.17g", g.features.at(v, j));
        if (j) out << ',';
        out << buf;
      }
      out << '\n';
    }
  }
  {
    std::ofstream out(edge_path);
    if (!out) throw DataError("cannot write file: " + edge_path);
    for (const EdgeRec& e : g.edges) {
      if (e.src > e.dst) continue;  // one line per undirected edge
      out << g.node_ids[e.src] << '\t' << g.node_ids[e.dst] << '\t' << g.edge_type_names[e.type]
          << '\n';
    }
  }
  if (labels != nullptr && !label_path.empty()) {
    std::ofstream out(label_path);
    if (!out) throw DataError("cannot write file: " + label_path);
    for (const auto& [node, cls] : labels->labels) {
      out << g.node_ids[node] << '\t' << labels->class_names[cls] << '\n';
    }
  }
}

SynthResult gen_synthetic(const SynthConfig& cfg) {
  if (cfg.num_types < 1 || cfg.nodes_per_type < 1 || cfg.num_classes < 1 || cfg.feature_dim < 1) {
    throw ConfigError("gen_synthetic: counts must be >= 1");
  }
  if (cfg.intra_edge_prob < 0.0 || cfg.intra_edge_prob > 1.0 || cfg.inter_edge_prob < 0.0 ||
      cfg.inter_edge_prob > 1.0) {
    throw ConfigError("gen_synthetic: edge probabilities must lie in [0,1]");
  }

  Rng rng(cfg.seed);
  SynthResult out;
  HeteroGraph& g = out.graph;
  g.num_nodes = cfg.num_types * cfg.nodes_per_type;
  g.num_node_types = cfg.num_types;
  g.node_type.resize(g.num_nodes);
  g.node_ids.resize(g.num_nodes);
  for (int v = 0; v < g.num_nodes; ++v) {
    g.node_type[v] = v / cfg.nodes_per_type;
    g.node_ids[v] = "n" + std::to_string(v);
  }
  for (int t = 0; t < cfg.num_types; ++t) g.node_type_names.push_back("type" + std::to_string(t));

  // Edge type = index of the unordered node-type pair.
  std::vector<std::vector<int>> pair_type(cfg.num_types, std::vector<int>(cfg.num_types, 0));
  for (int a = 0; a < cfg.num_types; ++a) {
    for (int b = a; b < cfg.num_types; ++b) {
      pair_type[a][b] = pair_type[b][a] = static_cast<int>(g.edge_type_names.size());
      g.edge_type_names.push_back("rel_t" + std::to_string(a) + "_t" + std::to_string(b));
    }
  }
  g.num_edge_types = static_cast<int>(g.edge_type_names.size());

  out.labels.graph_level = false;
  out.labels.num_classes = cfg.num_classes;
  for (int c = 0; c < cfg.num_classes; ++c) out.labels.class_names.push_back("class" + std::to_string(c));
  for (int v = 0; v < cfg.nodes_per_type; ++v) out.labels.labels[v] = v % cfg.num_classes;

  g.features = Matrix(g.num_nodes, cfg.feature_dim);
  for (int v = 0; v < g.num_nodes; ++v) {
    double* row = g.features.row(v);
    for (int j = 0; j < cfg.feature_dim; ++j) row[j] = rng.normal();
    if (g.node_type[v] == 0 && out.labels.labels.count(v)) {
      row[out.labels.labels.at(v) % cfg.feature_dim] += cfg.class_signal;
    }
  }

  for (int a = 0; a < g.num_nodes; ++a) {
    for (int b = a + 1; b < g.num_nodes; ++b) {
      const bool same = g.node_type[a] == g.node_type[b];
      if (rng.bernoulli(same ? cfg.intra_edge_prob : cfg.inter_edge_prob)) {
        g.edges.push_back({a, b, pair_type[g.node_type[a]][g.node_type[b]]});
      }
    }
  }
  g.finalize();
  return out;
}

}  // namespace hgpl
