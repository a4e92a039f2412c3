#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "hgpl/embedding.hpp"
#include "hgpl/graph.hpp"

namespace hgpl {

// Contrastive training example: (v,a) is an edge, (v,b) is not.
struct Triplet {
  int v = 0;
  int a = 0;
  int b = 0;
};

// Unordered node-pair set, used to conceal link-prediction edges from
// pre-training.
class EdgePairSet {
 public:
  void insert(int a, int b) { pairs_.emplace(std::min(a, b), std::max(a, b)); }
  bool contains(int a, int b) const {
    return pairs_.count({std::min(a, b), std::max(a, b)}) > 0;
  }
  size_t size() const { return pairs_.size(); }

 private:
  std::set<std::pair<int, int>> pairs_;
};

// Draws `count` positives uniformly from edges outside the holdout set and
// pairs each with `negatives_per_positive` uniform non-neighbors of v.
// Positives whose anchor has no non-neighbor are redrawn; a complete graph is
// an error. Deterministic per seed.
std::vector<Triplet> sample_triplets(const HeteroGraph& graph, int count,
                                     int negatives_per_positive, uint64_t seed,
                                     const EdgePairSet* holdout = nullptr);

// -ln( exp(pos/tau) / (exp(pos/tau) + sum_i exp(neg_i/tau)) )
double nce_loss(double pos_sim, std::span<const double> neg_sims, double tau);
double nce_loss_backward(double pos_sim, std::span<const double> neg_sims, double tau,
                         double& grad_pos, std::span<double> grad_negs);

struct TripletSims {
  double pos = 0.0;
  double neg = 0.0;
};

// Sum of per-triplet contrastive losses.
double pretrain_loss(const std::vector<TripletSims>& sims, double tau);

// Prototype softmax loss: sims_per_query[i][c] is the similarity of query i
// to the class-c prototype. Sum over queries.
double tune_loss(const std::vector<std::vector<double>>& sims_per_query,
                 const std::vector<int>& labels, double tau);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam with bias correction over fixed parameter groups.
class AdamOptimizer {
 public:
  AdamOptimizer(const AdamConfig& cfg, const std::vector<size_t>& group_sizes);
  void step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<const double>>& grads);
  long step_count() const { return t_; }

 private:
  AdamConfig cfg_;
  long t_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

// Prototype softmax loss over prompted instance embeddings, with exact prompt
// gradients. Prototypes are built from `support`; the loss sums over
// `scored`. Gradients include the prototype dependence on the prompts, so
// passing the support set as `scored` (the tuning setup) differentiates both
// paths. grads may be null for a loss-only evaluation.
double classification_loss_and_gradients(const EncodedGraph& enc,
                                         const std::vector<const InstanceRows*>& support,
                                         const std::vector<int>& support_labels,
                                         const std::vector<const InstanceRows*>& scored,
                                         const std::vector<int>& scored_labels, int num_classes,
                                         const PromptPair* prompts, double tau,
                                         PromptGradients* grads);

// One link-prediction group: rank `positive` above every entry of
// `negatives` relative to `target`.
struct LpGroup {
  const InstanceRows* target = nullptr;
  const InstanceRows* positive = nullptr;
  std::vector<const InstanceRows*> negatives;
};

double lp_loss_and_gradients(const EncodedGraph& enc, const std::vector<LpGroup>& groups,
                             const PromptPair* prompts, double tau, PromptGradients* grads);

// Full-pipeline pre-training loss over triplets: delta-hop context subgraphs
// around v, a, b, identity prompts, cosine similarities, contrastive loss.
// When grad_weights is non-null the exact encoder gradients are accumulated.
double pretrain_loss_and_gradients(const HeteroGraph& graph, const EncoderParams& params,
                                   const std::vector<Triplet>& triplets, int delta, double tau,
                                   bool templated, std::vector<Matrix>* grad_weights);

struct PretrainConfig {
  bool templated = false;  // false: type-erased topology; true: all views
  int epochs = 100;
  double lr = 1e-3;
  double tau = 1.0;
  int delta = 1;
  int num_triplets = 500;
  int negatives_per_positive = 1;
  int hidden_dim = 64;
  int num_layers = 3;
  uint64_t seed = 7;
  double validation_fraction = 0.1;
  int threads = 1;
};

struct EpochStats {
  int epoch = 0;  // 0 is the untrained state; epoch e follows e optimizer steps
  double train_loss = 0.0;
  double val_loss = 0.0;
};

struct PretrainResult {
  EncoderParams params;  // best-validation checkpoint
  int best_epoch = 0;
  double best_val_loss = 0.0;
  double initial_train_loss = 0.0;
  double final_train_loss = 0.0;
  // Held-out ranking accuracy: fraction of validation triplets with
  // sim(v,a) > sim(v,b), at initialization and for the returned checkpoint.
  double initial_val_ranking = 0.0;
  double final_val_ranking = 0.0;
  std::vector<EpochStats> curve;
};

// Contrastive pre-training over sampled triplets, embedded through delta-hop
// context subgraphs. Full-batch Adam; 10% of triplets (by default) are held
// out for checkpoint selection.
PretrainResult pretrain(const HeteroGraph& graph, const PretrainConfig& cfg,
                        const EdgePairSet* holdout = nullptr);

struct TuneConfig {
  int epochs = 200;
  double lr = 1e-2;
  double tau = 1.0;
};

struct TuneResult {
  PromptPair prompts;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

// Starts from the identity prompt and runs full-batch Adam on the support
// loss. The encoder is untouched: only the prompt vectors move.
TuneResult prompt_tune_classification(const EncodedGraph& enc,
                                      const std::vector<const InstanceRows*>& support,
                                      const std::vector<int>& support_labels, int num_classes,
                                      const TuneConfig& cfg);

TuneResult prompt_tune_lp(const EncodedGraph& enc, const std::vector<LpGroup>& groups,
                          const TuneConfig& cfg);

}  // namespace hgpl
