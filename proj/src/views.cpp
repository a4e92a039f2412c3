#include "hgpl/views.hpp"

#include <algorithm>
#include <deque>

#include "hgpl/error.hpp"

namespace hgpl {

namespace {

// Map global node ids to positions within `members` (members is sorted).
int local_index(const std::vector<int>& members, int node) {
  const auto it = std::lower_bound(members.begin(), members.end(), node);
  if (it == members.end() || *it != node) return -1;
  return static_cast<int>(it - members.begin());
}

}  // namespace

std::vector<HomoView> build_views(const HeteroGraph& g) {
  std::vector<HomoView> views(g.num_node_types + 1);

  HomoView& full = views[0];
  full.view_index = 0;
  full.member_nodes.resize(g.num_nodes);
  for (int v = 0; v < g.num_nodes; ++v) full.member_nodes[v] = v;
  full.edges.reserve(g.edges.size());
  for (const EdgeRec& e : g.edges) full.edges.emplace_back(e.src, e.dst);

  for (int t = 0; t < g.num_node_types; ++t) {
    HomoView& view = views[t + 1];
    view.view_index = t + 1;
    for (int v = 0; v < g.num_nodes; ++v) {
      if (g.node_type[v] == t) view.member_nodes.push_back(v);
    }
    for (const EdgeRec& e : g.edges) {
      if (g.node_type[e.src] != t || g.node_type[e.dst] != t) continue;
      view.edges.emplace_back(local_index(view.member_nodes, e.src),
                              local_index(view.member_nodes, e.dst));
    }
  }
  return views;
}

Subgraph context_subgraph(const HeteroGraph& g, int v, int delta) {
  if (v < 0 || v >= g.num_nodes) {
    throw DataError("context_subgraph: node id " + std::to_string(v) + " out of range");
  }
  Subgraph sub;
  sub.center = v;

  std::vector<int> dist(g.num_nodes, -1);
  std::deque<int> frontier{v};
  dist[v] = 0;
  while (!frontier.empty()) {
    const int u = frontier.front();
    frontier.pop_front();
    if (dist[u] == delta) continue;
    for (int w : g.adjacency[u]) {
      if (dist[w] < 0) {
        dist[w] = dist[u] + 1;
        frontier.push_back(w);
      }
    }
  }
  for (int u = 0; u < g.num_nodes; ++u) {
    if (dist[u] >= 0) sub.member_nodes.push_back(u);
  }
  for (const EdgeRec& e : g.edges) {
    if (dist[e.src] >= 0 && dist[e.dst] >= 0) sub.edges.push_back(e);
  }
  return sub;
}

std::vector<std::pair<Subgraph, int>> ego_networks(const HeteroGraph& g, const LabelSet& labels,
                                                   int delta) {
  if (labels.graph_level) throw DataError("ego_networks: need node-level labels");
  if (labels.labels.empty()) throw DataError("ego_networks: empty label set");
  std::vector<std::pair<Subgraph, int>> out;
  out.reserve(labels.labels.size());
  for (const auto& [node, cls] : labels.labels) {
    out.emplace_back(context_subgraph(g, node, delta), cls);
  }
  return out;
}

std::vector<HomoView> build_subgraph_views(const HeteroGraph& g, const Subgraph& sub) {
  std::vector<HomoView> views(g.num_node_types + 1);

  HomoView& full = views[0];
  full.view_index = 0;
  full.member_nodes = sub.member_nodes;
  for (const EdgeRec& e : sub.edges) {
    full.edges.emplace_back(local_index(full.member_nodes, e.src),
                            local_index(full.member_nodes, e.dst));
  }

  for (int t = 0; t < g.num_node_types; ++t) {
    HomoView& view = views[t + 1];
    view.view_index = t + 1;
    for (int v : sub.member_nodes) {
      if (g.node_type[v] == t) view.member_nodes.push_back(v);
    }
    for (const EdgeRec& e : sub.edges) {
      if (g.node_type[e.src] != t || g.node_type[e.dst] != t) continue;
      view.edges.emplace_back(local_index(view.member_nodes, e.src),
                              local_index(view.member_nodes, e.dst));
    }
  }
  return views;
}

}  // namespace hgpl
