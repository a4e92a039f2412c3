#pragma once

#include <utility>
#include <vector>

#include "hgpl/graph.hpp"

namespace hgpl {

// One homogeneous view of a typed graph. View 0 keeps the full topology with
// types erased; view i >= 1 keeps exactly the nodes of type i-1 and the edges
// internal to that type. Edges are local index pairs, stored symmetrically.
struct HomoView {
  int view_index = 0;
  std::vector<int> member_nodes;              // original node ids, ascending
  std::vector<std::pair<int, int>> edges;     // local indices
};

struct Subgraph {
  int center = -1;                // -1 for whole-graph instances
  std::vector<int> member_nodes;  // ascending
  std::vector<EdgeRec> edges;     // induced, original ids and edge types
};

// Decompose into |A|+1 views: [full topology, one per node type]. Types with
// no nodes yield empty views; types with no internal edges yield views with
// nodes and no edges.
std::vector<HomoView> build_views(const HeteroGraph& graph);

// delta-hop BFS neighborhood of v with induced edges. Type-agnostic: the
// search runs on the full topology.
Subgraph context_subgraph(const HeteroGraph& graph, int v, int delta);

// One ego network per labeled node, inheriting the node's label.
std::vector<std::pair<Subgraph, int>> ego_networks(const HeteroGraph& graph,
                                                   const LabelSet& labels, int delta);

// build_views restricted to a subgraph. View membership uses the global type
// map, so the view list always has |A|+1 entries (possibly empty).
std::vector<HomoView> build_subgraph_views(const HeteroGraph& graph, const Subgraph& sub);

}  // namespace hgpl
