#pragma once

#include <span>
#include <vector>

#include "hgpl/encoder.hpp"
#include "hgpl/graph.hpp"
#include "hgpl/views.hpp"

namespace hgpl {

// Tunable downstream parameters: one multiplicative weight per embedding
// channel (feat) plus one additive mixing weight per view (het). The identity
// prompt (feat = 1, het = 0) reproduces the unprompted pipeline.
struct PromptPair {
  std::vector<double> feat;  // hidden_dim entries
  std::vector<double> het;   // num_views entries

  int parameter_count() const { return static_cast<int>(feat.size() + het.size()); }
  static PromptPair identity(int hidden_dim, int num_views);
};

double cosine_sim(std::span<const double> a, std::span<const double> b);
// Accumulates grad_sim * d sim/d a into grad_a (same for b). At the zero-norm
// guard the similarity is constant 0, so nothing is accumulated.
void cosine_sim_backward(std::span<const double> a, std::span<const double> b, double grad_sim,
                         std::span<double> grad_a, std::span<double> grad_b);

// Mean over the selected rows of (p_feat ⊙ h). Null prompt = plain mean.
// Empty row set -> zero vector.
std::vector<double> readout(const Matrix& embeddings, const std::vector<int>& rows,
                            const std::vector<double>* p_feat);

// s = sum_i (1 + p_het[i]) * r_i. Null prompt = plain sum.
std::vector<double> aggregate_views(const std::vector<std::vector<double>>& readouts,
                                    const std::vector<double>* p_het);

// Per-class arithmetic mean of support embeddings. Throws on a class with no
// support instances.
std::vector<std::vector<double>> class_prototypes(
    const std::vector<std::vector<double>>& embeddings, const std::vector<int>& labels,
    int num_classes);

// Cosine argmax; ties break toward the lowest class id.
int classify(std::span<const double> query, const std::vector<std::vector<double>>& prototypes);

// A graph encoded per view with a frozen parameter set. The structural parts
// (views, adjacency, per-view features, row maps) are fixed; re_encode
// refreshes the embeddings for new weights.
struct EncodedGraph {
  bool templated = true;
  std::vector<HomoView> views;
  std::vector<CsrMatrix> adj;
  std::vector<Matrix> features;            // per view, rows follow member_nodes
  std::vector<EncodeCache> cache;
  std::vector<Matrix> emb;                 // per view, final embeddings
  std::vector<std::vector<int>> node_row;  // per view: global node -> row or -1

  int num_views() const { return static_cast<int>(views.size()); }
  int hidden_dim() const { return emb.empty() ? 0 : emb.front().cols(); }
};

// templated=false encodes only the type-erased full view (types ignored);
// templated=true encodes all |A|+1 views with shared weights.
EncodedGraph encode_graph(const HeteroGraph& graph, const EncoderParams& params, bool templated,
                          int threads = 1);
void re_encode(EncodedGraph& enc, const EncoderParams& params, int threads = 1);

// Row indices of an instance's member nodes in every view. Computing these
// once makes repeated prompted readouts cheap while prompts are tuned.
struct InstanceRows {
  std::vector<std::vector<int>> rows;  // per view
};

InstanceRows instance_rows(const EncodedGraph& enc, const std::vector<int>& member_nodes);

struct InstanceEmbedding {
  std::vector<std::vector<double>> view_readouts;  // per view (templated only)
  std::vector<double> s;
};

// Templated graphs: per-view prompted readout, then prompted aggregation.
// Plain graphs: a single prompted readout of the full view, no aggregation.
// prompts == nullptr runs the unprompted pipeline.
InstanceEmbedding embed_instance(const EncodedGraph& enc, const InstanceRows& inst,
                                 const PromptPair* prompts);

struct PromptGradients {
  std::vector<double> feat;
  std::vector<double> het;
};

// Reverse mode through embed_instance. grad_s is the adjoint at s; prompt
// gradients and/or per-view embedding adjoints are accumulated when the
// corresponding output pointer is non-null.
void embed_instance_backward(const EncodedGraph& enc, const InstanceRows& inst,
                             const InstanceEmbedding& fwd, const PromptPair* prompts,
                             std::span<const double> grad_s, PromptGradients* grad_prompts,
                             std::vector<Matrix>* grad_emb);

}  // namespace hgpl
