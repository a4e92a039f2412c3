#include "hgpl/embedding.hpp"

#include <cassert>
#include <cmath>

#include "hgpl/error.hpp"
#include "hgpl/parallel.hpp"

namespace hgpl {

namespace {
constexpr double kNormFloor = 1e-12;
}

PromptPair PromptPair::identity(int hidden_dim, int num_views) {
  PromptPair p;
  p.feat.assign(hidden_dim, 1.0);
  p.het.assign(num_views, 0.0);
  return p;
}

double cosine_sim(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  na = std::sqrt(na);
  nb = std::sqrt(nb);
  if (na < kNormFloor || nb < kNormFloor) return 0.0;
  return dot / (na * nb);
}

void cosine_sim_backward(std::span<const double> a, std::span<const double> b, double grad_sim,
                         std::span<double> grad_a, std::span<double> grad_b) {
  assert(a.size() == b.size());
  double dot = 0.0, na2 = 0.0, nb2 = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na2 += a[i] * a[i];
    nb2 += b[i] * b[i];
  }
  const double na = std::sqrt(na2);
  const double nb = std::sqrt(nb2);
  if (na < kNormFloor || nb < kNormFloor) return;
  const double inv = 1.0 / (na * nb);
  const double sim = dot * inv;
  for (size_t i = 0; i < a.size(); ++i) {
    grad_a[i] += grad_sim * (b[i] * inv - sim * a[i] / na2);
    grad_b[i] += grad_sim * (a[i] * inv - sim * b[i] / nb2);
  }
}

std::vector<double> readout(const Matrix& embeddings, const std::vector<int>& rows,
                            const std::vector<double>* p_feat) {
  const int dim = embeddings.cols();
  if (p_feat != nullptr && static_cast<int>(p_feat->size()) != dim) {
    throw DataError("readout: feature prompt has " + std::to_string(p_feat->size()) +
                    " entries, embeddings have " + std::to_string(dim) + " columns");
  }
  std::vector<double> out(dim, 0.0);
  if (rows.empty()) return out;
  for (int r : rows) {
    const double* h = embeddings.row(r);
    for (int j = 0; j < dim; ++j) out[j] += h[j];
  }
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  for (int j = 0; j < dim; ++j) {
    out[j] *= inv_n;
    if (p_feat != nullptr) out[j] *= (*p_feat)[j];
  }
  return out;
}

std::vector<double> aggregate_views(const std::vector<std::vector<double>>& readouts,
                                    const std::vector<double>* p_het) {
  if (readouts.empty()) throw DataError("aggregate_views: no readouts");
  if (p_het != nullptr && p_het->size() != readouts.size()) {
    throw DataError("aggregate_views: heterogeneity prompt has " + std::to_string(p_het->size()) +
                    " entries for " + std::to_string(readouts.size()) + " views");
  }
  const size_t dim = readouts.front().size();
  std::vector<double> out(dim, 0.0);
  for (size_t i = 0; i < readouts.size(); ++i) {
    if (readouts[i].size() != dim) throw DataError("aggregate_views: inconsistent readout dims");
    const double w = p_het != nullptr ? 1.0 + (*p_het)[i] : 1.0;
    for (size_t j = 0; j < dim; ++j) out[j] += w * readouts[i][j];
  }
  return out;
}

std::vector<std::vector<double>> class_prototypes(
    const std::vector<std::vector<double>>& embeddings, const std::vector<int>& labels,
    int num_classes) {
  assert(embeddings.size() == labels.size());
  if (embeddings.empty()) throw DataError("class_prototypes: empty support set");
  const size_t dim = embeddings.front().size();
  std::vector<std::vector<double>> protos(num_classes, std::vector<double>(dim, 0.0));
  std::vector<int> counts(num_classes, 0);
  for (size_t i = 0; i < embeddings.size(); ++i) {
    const int c = labels[i];
    if (c < 0 || c >= num_classes) throw DataError("class_prototypes: label out of range");
    ++counts[c];
    for (size_t j = 0; j < dim; ++j) protos[c][j] += embeddings[i][j];
  }
  for (int c = 0; c < num_classes; ++c) {
    if (counts[c] == 0) {
      throw DataError("class_prototypes: class " + std::to_string(c) + " has no support instances");
    }
    for (double& x : protos[c]) x /= counts[c];
  }
  return protos;
}

int classify(std::span<const double> query, const std::vector<std::vector<double>>& prototypes) {
  if (prototypes.empty()) throw DataError("classify: no prototypes");
  int best = 0;
  double best_sim = cosine_sim(query, prototypes[0]);
  for (size_t c = 1; c < prototypes.size(); ++c) {
    const double sim = cosine_sim(query, prototypes[c]);
    if (sim > best_sim) {
      best_sim = sim;
      best = static_cast<int>(c);
    }
  }
  return best;
}

EncodedGraph encode_graph(const HeteroGraph& graph, const EncoderParams& params, bool templated,
                          int threads) {
  EncodedGraph enc;
  enc.templated = templated;
  if (templated) {
    enc.views = build_views(graph);
  } else {
    // Type-erased full topology only.
    enc.views = {build_views(graph).front()};
  }
  const int nv = enc.num_views();
  enc.adj.resize(nv);
  enc.features.resize(nv);
  enc.node_row.assign(nv, std::vector<int>(graph.num_nodes, -1));
  for (int i = 0; i < nv; ++i) {
    const HomoView& view = enc.views[i];
    enc.adj[i] = normalize_adjacency(view);
    Matrix feats(static_cast<int>(view.member_nodes.size()), graph.feature_dim());
    for (size_t r = 0; r < view.member_nodes.size(); ++r) {
      const int node = view.member_nodes[r];
      enc.node_row[i][node] = static_cast<int>(r);
      const double* src = graph.features.row(node);
      std::copy(src, src + graph.feature_dim(), feats.row(static_cast<int>(r)));
    }
    enc.features[i] = std::move(feats);
  }
  re_encode(enc, params, threads);
  return enc;
}

void re_encode(EncodedGraph& enc, const EncoderParams& params, int threads) {
  const int nv = enc.num_views();
  enc.cache.resize(nv);
  enc.emb.resize(nv);
  parallel_for(nv, threads, [&](int i) {
    enc.emb[i] = encode_view(enc.adj[i], enc.features[i], params, &enc.cache[i]);
  });
}

InstanceRows instance_rows(const EncodedGraph& enc, const std::vector<int>& member_nodes) {
  InstanceRows inst;
  inst.rows.resize(enc.num_views());
  for (int i = 0; i < enc.num_views(); ++i) {
    for (int node : member_nodes) {
      const int r = enc.node_row[i][node];
      if (r >= 0) inst.rows[i].push_back(r);
    }
  }
  return inst;
}

InstanceEmbedding embed_instance(const EncodedGraph& enc, const InstanceRows& inst,
                                 const PromptPair* prompts) {
  const std::vector<double>* p_feat = prompts != nullptr ? &prompts->feat : nullptr;
  InstanceEmbedding out;
  if (!enc.templated) {
    out.s = readout(enc.emb[0], inst.rows[0], p_feat);
    return out;
  }
  out.view_readouts.resize(enc.num_views());
  for (int i = 0; i < enc.num_views(); ++i) {
    out.view_readouts[i] = readout(enc.emb[i], inst.rows[i], p_feat);
  }
  out.s = aggregate_views(out.view_readouts, prompts != nullptr ? &prompts->het : nullptr);
  return out;
}

namespace {

void readout_backward(const Matrix& embeddings, const std::vector<int>& rows,
                      const std::vector<double>* p_feat, std::span<const double> grad_r,
                      std::vector<double>* grad_feat, Matrix* grad_emb) {
  if (rows.empty()) return;
  const int dim = embeddings.cols();
  const double inv_n = 1.0 / static_cast<double>(rows.size());
  if (grad_feat != nullptr && p_feat != nullptr) {
    // r_j = p_j * mean_rows(h_j)  =>  d r_j / d p_j = mean_rows(h_j)
    for (int r : rows) {
      const double* h = embeddings.row(r);
      for (int j = 0; j < dim; ++j) (*grad_feat)[j] += grad_r[j] * inv_n * h[j];
    }
  }
  if (grad_emb != nullptr) {
    for (int r : rows) {
      double* gh = grad_emb->row(r);
      for (int j = 0; j < dim; ++j) {
        const double p = p_feat != nullptr ? (*p_feat)[j] : 1.0;
        gh[j] += grad_r[j] * inv_n * p;
      }
    }
  }
}

}  // namespace

void embed_instance_backward(const EncodedGraph& enc, const InstanceRows& inst,
                             const InstanceEmbedding& fwd, const PromptPair* prompts,
                             std::span<const double> grad_s, PromptGradients* grad_prompts,
                             std::vector<Matrix>* grad_emb) {
  const std::vector<double>* p_feat = prompts != nullptr ? &prompts->feat : nullptr;
  std::vector<double>* grad_feat = grad_prompts != nullptr ? &grad_prompts->feat : nullptr;

  if (!enc.templated) {
    readout_backward(enc.emb[0], inst.rows[0], p_feat, grad_s, grad_feat,
                     grad_emb != nullptr ? &(*grad_emb)[0] : nullptr);
    return;
  }

  const int dim = enc.hidden_dim();
  std::vector<double> grad_r(dim);
  for (int i = 0; i < enc.num_views(); ++i) {
    const double w = prompts != nullptr ? 1.0 + prompts->het[i] : 1.0;
    if (grad_prompts != nullptr && prompts != nullptr) {
      double dot = 0.0;
      for (int j = 0; j < dim; ++j) dot += grad_s[j] * fwd.view_readouts[i][j];
      grad_prompts->het[i] += dot;
    }
    for (int j = 0; j < dim; ++j) grad_r[j] = w * grad_s[j];
    readout_backward(enc.emb[i], inst.rows[i], p_feat, grad_r, grad_feat,
                     grad_emb != nullptr ? &(*grad_emb)[i] : nullptr);
  }
}

}  // namespace hgpl
