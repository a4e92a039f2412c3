#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hgpl/matrix.hpp"

namespace hgpl {

struct EdgeRec {
  int src = 0;
  int dst = 0;
  int type = 0;

  friend auto operator<=>(const EdgeRec&, const EdgeRec&) = default;
};

// Typed undirected graph with dense node features. After finalize() the edge
// list is symmetric ((a,b) present iff (b,a)), deduplicated, self-loop free
// and sorted; adjacency holds sorted unique neighbor lists.
struct HeteroGraph {
  int num_nodes = 0;
  int num_node_types = 0;
  int num_edge_types = 0;
  std::vector<int> node_type;   // size num_nodes
  std::vector<EdgeRec> edges;   // both orientations of every undirected edge
  Matrix features;              // num_nodes x d

  std::vector<std::string> node_ids;         // external ids, file/generation order
  std::vector<std::string> node_type_names;  // size num_node_types
  std::vector<std::string> edge_type_names;  // size num_edge_types

  std::vector<std::vector<int>> adjacency;  // built by finalize()

  int feature_dim() const { return features.cols(); }
  int degree(int v) const { return static_cast<int>(adjacency[v].size()); }
  bool has_edge(int a, int b) const;
  bool homogeneous() const { return num_node_types == 1 && num_edge_types == 1; }

  // Symmetrize + dedupe + drop self-loops, then rebuild adjacency.
  void finalize();
};

struct LabelSet {
  bool graph_level = false;
  std::map<int, int> labels;  // instance id -> class id
  int num_classes = 0;
  std::vector<std::string> class_names;
};

struct ValidationReport {
  bool ok = true;
  bool homogeneous = false;
  std::vector<std::string> violations;
};

ValidationReport validate(const HeteroGraph& graph);

struct LoadedGraph {
  HeteroGraph graph;
  std::optional<LabelSet> labels;
};

// File grammar (tab-separated, '#' comments):
//   nodes:  <id>\t<type-name>\t<f1,f2,...,fd>
//   edges:  <src>\t<dst>\t<edge-type-name>
//   labels: <id>\t<class-name>
// External ids are arbitrary strings; internal ids are dense and follow file
// order. Throws DataError with the offending file and line.
LoadedGraph load_graph(const std::string& node_path, const std::string& edge_path,
                       const std::string& label_path = "");

void save_graph(const HeteroGraph& graph, const LabelSet* labels,
                const std::string& node_path, const std::string& edge_path,
                const std::string& label_path = "");

struct SynthConfig {
  int num_types = 2;
  int nodes_per_type = 50;
  int num_classes = 3;
  double intra_edge_prob = 0.1;
  double inter_edge_prob = 0.05;
  int feature_dim = 16;
  double class_signal = 2.0;
  uint64_t seed = 1;
};

struct SynthResult {
  HeteroGraph graph;
  LabelSet labels;
};

// Stochastic-block-model style generator. Nodes of type 0 are the labeled
// targets: their feature vector is a class-dependent mean of magnitude
// class_signal plus unit Gaussian noise; other nodes get pure noise. Edge
// type ids enumerate unordered node-type pairs. Bit-exact per seed.
SynthResult gen_synthetic(const SynthConfig& cfg);

}  // namespace hgpl
