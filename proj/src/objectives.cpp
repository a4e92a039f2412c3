#include "hgpl/objectives.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "hgpl/error.hpp"
#include "hgpl/rng.hpp"

namespace hgpl {

namespace {

void require_positive_tau(double tau) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ConfigError("temperature must be a positive finite real");
  }
}

std::vector<int> non_neighbors(const HeteroGraph& g, int v) {
  std::vector<int> out;
  const auto& nbrs = g.adjacency[v];
  size_t p = 0;
  for (int u = 0; u < g.num_nodes; ++u) {
    while (p < nbrs.size() && nbrs[p] < u) ++p;
    if (u == v || (p < nbrs.size() && nbrs[p] == u)) continue;
    out.push_back(u);
  }
  return out;
}

}  // namespace

std::vector<Triplet> sample_triplets(const HeteroGraph& g, int count, int negatives_per_positive,
                                     uint64_t seed, const EdgePairSet* holdout) {
  if (count < 1 || negatives_per_positive < 1) {
    throw ConfigError("sample_triplets: count and negatives_per_positive must be >= 1");
  }
  std::vector<const EdgeRec*> eligible;
  eligible.reserve(g.edges.size());
  for (const EdgeRec& e : g.edges) {
    if (holdout != nullptr && holdout->contains(e.src, e.dst)) continue;
    eligible.push_back(&e);
  }
  if (eligible.empty()) throw DataError("sample_triplets: no eligible edges");

  bool complete = true;
  for (int v = 0; v < g.num_nodes && complete; ++v) {
    if (g.degree(v) < g.num_nodes - 1) complete = false;
  }
  if (complete) throw DataError("sample_triplets: no negative available (graph is complete)");

  Rng rng(seed);
  std::vector<Triplet> out;
  out.reserve(static_cast<size_t>(count) * negatives_per_positive);
  long attempts = 0;
  const long max_attempts = 1000L * count + 10000L;
  for (int i = 0; i < count;) {
    if (++attempts > max_attempts) {
      throw DataError("sample_triplets: could not find anchors with non-neighbors");
    }
    const EdgeRec& e = *eligible[rng.below(eligible.size())];
    const std::vector<int> candidates = non_neighbors(g, e.src);
    if (candidates.empty()) continue;  // v adjacent to everything: redraw
    for (int j = 0; j < negatives_per_positive; ++j) {
      out.push_back({e.src, e.dst, candidates[rng.below(candidates.size())]});
    }
    ++i;
  }
  return out;
}

double nce_loss(double pos_sim, std::span<const double> neg_sims, double tau) {
  require_positive_tau(tau);
  const double z_pos = pos_sim / tau;
  double m = z_pos;
  for (double s : neg_sims) m = std::max(m, s / tau);
  double sum = std::exp(z_pos - m);
  for (double s : neg_sims) sum += std::exp(s / tau - m);
  return m + std::log(sum) - z_pos;
}

double nce_loss_backward(double pos_sim, std::span<const double> neg_sims, double tau,
                         double& grad_pos, std::span<double> grad_negs) {
  require_positive_tau(tau);
  const double z_pos = pos_sim / tau;
  double m = z_pos;
  for (double s : neg_sims) m = std::max(m, s / tau);
  double sum = std::exp(z_pos - m);
  for (double s : neg_sims) sum += std::exp(s / tau - m);
  const double p_pos = std::exp(z_pos - m) / sum;
  grad_pos = (p_pos - 1.0) / tau;
  for (size_t i = 0; i < neg_sims.size(); ++i) {
    grad_negs[i] = std::exp(neg_sims[i] / tau - m) / sum / tau;
  }
  return m + std::log(sum) - z_pos;
}

double pretrain_loss(const std::vector<TripletSims>& sims, double tau) {
  require_positive_tau(tau);
  double total = 0.0;
  for (const TripletSims& t : sims) {
    total += nce_loss(t.pos, std::span<const double>(&t.neg, 1), tau);
  }
  return total;
}

double tune_loss(const std::vector<std::vector<double>>& sims_per_query,
                 const std::vector<int>& labels, double tau) {
  require_positive_tau(tau);
  assert(sims_per_query.size() == labels.size());
  double total = 0.0;
  for (size_t i = 0; i < sims_per_query.size(); ++i) {
    const auto& sims = sims_per_query[i];
    if (labels[i] < 0 || labels[i] >= static_cast<int>(sims.size())) {
      throw DataError("tune_loss: label outside prototype set");
    }
    double m = sims[0] / tau;
    for (double s : sims) m = std::max(m, s / tau);
    double sum = 0.0;
    for (double s : sims) sum += std::exp(s / tau - m);
    total += m + std::log(sum) - sims[labels[i]] / tau;
  }
  return total;
}

AdamOptimizer::AdamOptimizer(const AdamConfig& cfg, const std::vector<size_t>& group_sizes)
    : cfg_(cfg) {
  for (size_t n : group_sizes) {
    m_.emplace_back(n, 0.0);
    v_.emplace_back(n, 0.0);
  }
}

void AdamOptimizer::step(const std::vector<std::span<double>>& params,
                         const std::vector<std::span<const double>>& grads) {
  if (params.size() != m_.size() || grads.size() != m_.size()) {
    throw ConfigError("adam: parameter group count mismatch");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (size_t gi = 0; gi < params.size(); ++gi) {
    auto p = params[gi];
    auto g = grads[gi];
    auto& m = m_[gi];
    auto& v = v_[gi];
    if (p.size() != m.size() || g.size() != m.size()) {
      throw ConfigError("adam: parameter group shape mismatch");
    }
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * g[i];
      v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= cfg_.lr * m_hat / (std::sqrt(v_hat) + cfg_.eps);
    }
  }
}

double classification_loss_and_gradients(const EncodedGraph& enc,
                                         const std::vector<const InstanceRows*>& support,
                                         const std::vector<int>& support_labels,
                                         const std::vector<const InstanceRows*>& scored,
                                         const std::vector<int>& scored_labels, int num_classes,
                                         const PromptPair* prompts, double tau,
                                         PromptGradients* grads) {
  require_positive_tau(tau);
  assert(support.size() == support_labels.size());
  assert(scored.size() == scored_labels.size());

  std::vector<InstanceEmbedding> sup_fwd(support.size());
  std::vector<std::vector<double>> sup_emb(support.size());
  for (size_t j = 0; j < support.size(); ++j) {
    sup_fwd[j] = embed_instance(enc, *support[j], prompts);
    sup_emb[j] = sup_fwd[j].s;
  }
  const auto protos = class_prototypes(sup_emb, support_labels, num_classes);
  std::vector<int> class_counts(num_classes, 0);
  for (int c : support_labels) ++class_counts[c];

  std::vector<InstanceEmbedding> q_fwd(scored.size());
  std::vector<std::vector<double>> sims(scored.size(), std::vector<double>(num_classes));
  for (size_t i = 0; i < scored.size(); ++i) {
    q_fwd[i] = embed_instance(enc, *scored[i], prompts);
    for (int c = 0; c < num_classes; ++c) sims[i][c] = cosine_sim(q_fwd[i].s, protos[c]);
  }
  const double loss = tune_loss(sims, scored_labels, tau);
  if (grads == nullptr) return loss;

  const size_t dim = enc.hidden_dim();
  std::vector<std::vector<double>> grad_q(scored.size(), std::vector<double>(dim, 0.0));
  std::vector<std::vector<double>> grad_proto(num_classes, std::vector<double>(dim, 0.0));
  for (size_t i = 0; i < scored.size(); ++i) {
    double m = sims[i][0] / tau;
    for (int c = 0; c < num_classes; ++c) m = std::max(m, sims[i][c] / tau);
    double sum = 0.0;
    for (int c = 0; c < num_classes; ++c) sum += std::exp(sims[i][c] / tau - m);
    for (int c = 0; c < num_classes; ++c) {
      const double p = std::exp(sims[i][c] / tau - m) / sum;
      const double grad_sim = (p - (c == scored_labels[i] ? 1.0 : 0.0)) / tau;
      cosine_sim_backward(q_fwd[i].s, protos[c], grad_sim, grad_q[i], grad_proto[c]);
    }
  }

  for (size_t i = 0; i < scored.size(); ++i) {
    embed_instance_backward(enc, *scored[i], q_fwd[i], prompts, grad_q[i], grads, nullptr);
  }
  // Prototype path: each support embedding carries 1/k of its class adjoint.
  for (size_t j = 0; j < support.size(); ++j) {
    const int c = support_labels[j];
    std::vector<double> grad_s(dim);
    for (size_t d = 0; d < dim; ++d) grad_s[d] = grad_proto[c][d] / class_counts[c];
    embed_instance_backward(enc, *support[j], sup_fwd[j], prompts, grad_s, grads, nullptr);
  }
  return loss;
}

double lp_loss_and_gradients(const EncodedGraph& enc, const std::vector<LpGroup>& groups,
                             const PromptPair* prompts, double tau, PromptGradients* grads) {
  require_positive_tau(tau);
  const size_t dim = enc.hidden_dim();
  double loss = 0.0;
  for (const LpGroup& group : groups) {
    const InstanceEmbedding tgt = embed_instance(enc, *group.target, prompts);
    const InstanceEmbedding pos = embed_instance(enc, *group.positive, prompts);
    std::vector<InstanceEmbedding> negs(group.negatives.size());
    std::vector<double> neg_sims(group.negatives.size());
    for (size_t i = 0; i < group.negatives.size(); ++i) {
      negs[i] = embed_instance(enc, *group.negatives[i], prompts);
      neg_sims[i] = cosine_sim(tgt.s, negs[i].s);
    }
    const double pos_sim = cosine_sim(tgt.s, pos.s);

    if (grads == nullptr) {
      loss += nce_loss(pos_sim, neg_sims, tau);
      continue;
    }
    double grad_pos = 0.0;
    std::vector<double> grad_negs(neg_sims.size(), 0.0);
    loss += nce_loss_backward(pos_sim, neg_sims, tau, grad_pos, grad_negs);

    std::vector<double> d_tgt(dim, 0.0), d_pos(dim, 0.0);
    cosine_sim_backward(tgt.s, pos.s, grad_pos, d_tgt, d_pos);
    embed_instance_backward(enc, *group.positive, pos, prompts, d_pos, grads, nullptr);
    for (size_t i = 0; i < group.negatives.size(); ++i) {
      std::vector<double> d_neg(dim, 0.0);
      cosine_sim_backward(tgt.s, negs[i].s, grad_negs[i], d_tgt, d_neg);
      embed_instance_backward(enc, *group.negatives[i], negs[i], prompts, d_neg, grads, nullptr);
    }
    embed_instance_backward(enc, *group.target, tgt, prompts, d_tgt, grads, nullptr);
  }
  return loss;
}

namespace {

// Shared Adam loop over the two prompt vectors.
template <typename LossFn>
TuneResult tune_prompts_common(const EncodedGraph& enc, const TuneConfig& cfg, LossFn&& eval) {
  PromptPair prompts = PromptPair::identity(enc.hidden_dim(), enc.num_views());
  TuneResult result;
  result.initial_loss = eval(prompts, nullptr);
  if (!std::isfinite(result.initial_loss)) {
    throw NumericError("prompt tuning: non-finite loss");
  }
  AdamOptimizer adam({cfg.lr}, {prompts.feat.size(), prompts.het.size()});
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    PromptGradients grads;
    grads.feat.assign(prompts.feat.size(), 0.0);
    grads.het.assign(prompts.het.size(), 0.0);
    const double loss = eval(prompts, &grads);
    if (!std::isfinite(loss)) throw NumericError("prompt tuning: non-finite loss");
    adam.step({std::span<double>(prompts.feat), std::span<double>(prompts.het)},
              {std::span<const double>(grads.feat), std::span<const double>(grads.het)});
  }
  result.final_loss = cfg.epochs == 0 ? result.initial_loss : eval(prompts, nullptr);
  result.prompts = std::move(prompts);
  return result;
}

}  // namespace

TuneResult prompt_tune_classification(const EncodedGraph& enc,
                                      const std::vector<const InstanceRows*>& support,
                                      const std::vector<int>& support_labels, int num_classes,
                                      const TuneConfig& cfg) {
  if (support.empty()) throw DataError("prompt tuning: empty support set");
  return tune_prompts_common(enc, cfg, [&](const PromptPair& p, PromptGradients* g) {
    return classification_loss_and_gradients(enc, support, support_labels, support, support_labels,
                                             num_classes, &p, cfg.tau, g);
  });
}

TuneResult prompt_tune_lp(const EncodedGraph& enc, const std::vector<LpGroup>& groups,
                          const TuneConfig& cfg) {
  if (groups.empty()) throw DataError("prompt tuning: empty support set");
  return tune_prompts_common(enc, cfg, [&](const PromptPair& p, PromptGradients* g) {
    return lp_loss_and_gradients(enc, groups, &p, cfg.tau, g);
  });
}

namespace {

struct TripletWorkspace {
  std::vector<int> instance_of_node;          // node -> dense instance index, -1 otherwise
  std::vector<std::vector<int>> members;      // instance -> context member nodes
  std::vector<InstanceRows> rows;             // instance -> per-view rows
};

TripletWorkspace build_triplet_workspace(const HeteroGraph& g, const EncodedGraph& enc,
                                         const std::vector<Triplet>& triplets, int delta) {
  TripletWorkspace ws;
  ws.instance_of_node.assign(g.num_nodes, -1);
  std::vector<int> nodes;
  for (const Triplet& t : triplets) {
    nodes.push_back(t.v);
    nodes.push_back(t.a);
    nodes.push_back(t.b);
  }
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  for (int node : nodes) {
    ws.instance_of_node[node] = static_cast<int>(ws.members.size());
    ws.members.push_back(context_subgraph(g, node, delta).member_nodes);
    ws.rows.push_back(instance_rows(enc, ws.members.back()));
  }
  return ws;
}

struct TripletEval {
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_ranking = 0.0;
};

// Evaluates both splits and, if grad_weights != nullptr, accumulates encoder
// gradients of the training loss.
TripletEval eval_triplets(const EncodedGraph& enc,
                          const EncoderParams& params, const TripletWorkspace& ws,
                          const std::vector<Triplet>& train, const std::vector<Triplet>& val,
                          double tau, std::vector<Matrix>* grad_weights) {
  std::vector<InstanceEmbedding> fwd(ws.rows.size());
  for (size_t i = 0; i < ws.rows.size(); ++i) {
    fwd[i] = embed_instance(enc, ws.rows[i], nullptr);
  }
  auto sim_of = [&](int x, int y) {
    return cosine_sim(fwd[ws.instance_of_node[x]].s, fwd[ws.instance_of_node[y]].s);
  };

  TripletEval out;
  int ranked = 0;
  for (const Triplet& t : val) {
    const double pos = sim_of(t.v, t.a);
    const double neg = sim_of(t.v, t.b);
    out.val_loss += nce_loss(pos, std::span<const double>(&neg, 1), tau);
    if (pos > neg) ++ranked;
  }
  out.val_ranking = val.empty() ? 0.0 : static_cast<double>(ranked) / val.size();

  const size_t dim = enc.hidden_dim();
  std::vector<std::vector<double>> grad_s;
  if (grad_weights != nullptr) grad_s.assign(ws.rows.size(), std::vector<double>(dim, 0.0));

  for (const Triplet& t : train) {
    const int iv = ws.instance_of_node[t.v];
    const int ia = ws.instance_of_node[t.a];
    const int ib = ws.instance_of_node[t.b];
    const double pos = cosine_sim(fwd[iv].s, fwd[ia].s);
    const double neg = cosine_sim(fwd[iv].s, fwd[ib].s);
    if (grad_weights == nullptr) {
      out.train_loss += nce_loss(pos, std::span<const double>(&neg, 1), tau);
      continue;
    }
    double grad_pos = 0.0;
    double grad_neg = 0.0;
    out.train_loss += nce_loss_backward(pos, std::span<const double>(&neg, 1), tau, grad_pos,
                                        std::span<double>(&grad_neg, 1));
    cosine_sim_backward(fwd[iv].s, fwd[ia].s, grad_pos, grad_s[iv], grad_s[ia]);
    cosine_sim_backward(fwd[iv].s, fwd[ib].s, grad_neg, grad_s[iv], grad_s[ib]);
  }

  if (grad_weights != nullptr) {
    std::vector<Matrix> grad_emb;
    grad_emb.reserve(enc.num_views());
    for (const Matrix& e : enc.emb) grad_emb.emplace_back(e.rows(), e.cols());
    for (size_t i = 0; i < ws.rows.size(); ++i) {
      embed_instance_backward(enc, ws.rows[i], fwd[i], nullptr, grad_s[i], nullptr, &grad_emb);
    }
    for (int view = 0; view < enc.num_views(); ++view) {
      encoder_backward(enc.adj[view], enc.cache[view], params, grad_emb[view], *grad_weights);
    }
  }
  return out;
}

}  // namespace

double pretrain_loss_and_gradients(const HeteroGraph& graph, const EncoderParams& params,
                                   const std::vector<Triplet>& triplets, int delta, double tau,
                                   bool templated, std::vector<Matrix>* grad_weights) {
  const EncodedGraph enc = encode_graph(graph, params, templated);
  const TripletWorkspace ws = build_triplet_workspace(graph, enc, triplets, delta);
  const TripletEval eval = eval_triplets(enc, params, ws, triplets, {}, tau, grad_weights);
  return eval.train_loss;
}

PretrainResult pretrain(const HeteroGraph& g, const PretrainConfig& cfg,
                        const EdgePairSet* holdout) {
  if (cfg.epochs < 0) throw ConfigError("pretrain: epochs must be >= 0");
  if (g.edges.empty()) throw DataError("pretrain: graph has no edges");
  require_positive_tau(cfg.tau);

  std::vector<Triplet> triplets = sample_triplets(g, cfg.num_triplets, cfg.negatives_per_positive,
                                                  Rng::derive(cfg.seed, 1), holdout);
  Rng split_rng(Rng::derive(cfg.seed, 2));
  split_rng.shuffle(triplets);
  const int val_count = std::min(
      static_cast<int>(triplets.size()) - 1,
      static_cast<int>(std::llround(cfg.validation_fraction * triplets.size())));
  std::vector<Triplet> val(triplets.begin(), triplets.begin() + std::max(0, val_count));
  std::vector<Triplet> train(triplets.begin() + std::max(0, val_count), triplets.end());

  EncoderParams params =
      init_params(g.feature_dim(), cfg.hidden_dim, cfg.num_layers, Rng::derive(cfg.seed, 3));
  EncodedGraph enc = encode_graph(g, params, cfg.templated, cfg.threads);
  const TripletWorkspace ws = build_triplet_workspace(g, enc, triplets, cfg.delta);

  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  std::vector<size_t> group_sizes;
  for (const Matrix& w : params.weights) group_sizes.push_back(w.data().size());
  AdamOptimizer adam(adam_cfg, group_sizes);

  PretrainResult result;
  result.best_epoch = -1;
  for (int epoch = 0; epoch <= cfg.epochs; ++epoch) {
    if (epoch > 0) re_encode(enc, params, cfg.threads);
    const bool last = epoch == cfg.epochs;
    std::vector<Matrix> grads = params.zero_grads();
    const TripletEval eval =
        eval_triplets(enc, params, ws, train, val, cfg.tau, last ? nullptr : &grads);
    if (!std::isfinite(eval.train_loss) || !std::isfinite(eval.val_loss)) {
      throw NumericError("pretrain: non-finite loss at epoch " + std::to_string(epoch));
    }
    const double selection_loss = val.empty() ? eval.train_loss : eval.val_loss;
    result.curve.push_back({epoch, eval.train_loss, eval.val_loss});
    if (epoch == 0) {
      result.initial_train_loss = eval.train_loss;
      result.initial_val_ranking = eval.val_ranking;
    }
    if (result.best_epoch < 0 || selection_loss < result.best_val_loss) {
      result.best_epoch = epoch;
      result.best_val_loss = selection_loss;
      result.params = params;
      result.final_val_ranking = eval.val_ranking;
    }
    if (last) {
      result.final_train_loss = eval.train_loss;
      break;
    }
    std::vector<std::span<double>> param_spans;
    std::vector<std::span<const double>> grad_spans;
    for (size_t l = 0; l < params.weights.size(); ++l) {
      param_spans.emplace_back(params.weights[l].data());
      grad_spans.emplace_back(grads[l].data());
    }
    adam.step(param_spans, grad_spans);
  }
  return result;
}

}  // namespace hgpl
