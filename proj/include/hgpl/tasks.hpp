#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hgpl/encoder.hpp"
#include "hgpl/graph.hpp"
#include "hgpl/objectives.hpp"
#include "hgpl/views.hpp"

namespace hgpl {

enum class TaskKind { Nc, Gc, Lp };

const char* task_kind_name(TaskKind kind);

// One ranking instance: the positive should score above every negative
// relative to the target.
struct LpTuple {
  int target = 0;
  int positive = 0;
  std::vector<int> negatives;
};

// One few-shot episode. Classification episodes carry exactly k support
// instances per class plus the remaining labeled instances as queries; LP
// episodes carry k support tuples and the remaining holdout edges as query
// tuples. Support and query are disjoint by construction.
struct FewShotTask {
  TaskKind kind = TaskKind::Nc;
  int k = 1;
  int num_classes = 0;
  std::vector<std::pair<int, int>> support;  // (instance id, class id)
  std::vector<int> query;                    // instance ids
  std::vector<LpTuple> lp_support;
  std::vector<LpTuple> lp_query;
};

// Instance ids are node ids. Every class needs at least k+1 labeled nodes.
std::vector<FewShotTask> sample_nc_tasks(const LabelSet& labels, int k, int num_tasks = 100,
                                         uint64_t seed = 7);

// Instance ids index the ego-network collection.
std::vector<FewShotTask> sample_gc_tasks(const std::vector<std::pair<Subgraph, int>>& egos,
                                         int k, int num_tasks = 100, uint64_t seed = 7);

// Deterministic selection of undirected edges to conceal from pre-training;
// the same (graph, fraction, seed) always yields the same set.
std::vector<std::pair<int, int>> lp_holdout_edges(const HeteroGraph& graph, double fraction,
                                                  uint64_t seed);

EdgePairSet to_edge_pair_set(const std::vector<std::pair<int, int>>& edges);

std::vector<FewShotTask> sample_lp_tasks(const HeteroGraph& graph,
                                         const std::vector<std::pair<int, int>>& holdout, int k = 1,
                                         int num_tasks = 100, int negatives = 10,
                                         uint64_t seed = 7);

// Micro F1 equals accuracy for single-label predictions; macro is the
// unweighted mean of per-class F1 with absent classes contributing 0.
std::pair<double, double> micro_macro_f1(const std::vector<int>& predictions,
                                         const std::vector<int>& truths, int num_classes);

// Fraction of negatives scored strictly below the positive, ties counting 1/2.
double auc_one_vs_negatives(double pos_score, std::span<const double> neg_scores);

// 1 / log2(rank + 1); the single relevant item makes the ideal DCG 1.
double ndcg_single_relevant(int rank);

// Rank the positive among {positive} + negatives by descending score; a tie
// averages the gains of the tied rank positions.
double ndcg_from_scores(double pos_score, std::span<const double> neg_scores);

struct MetricReport {
  TaskKind kind = TaskKind::Nc;
  int num_tasks = 0;
  uint64_t config_hash = 0;
  double micro_f1_mean = 0.0, micro_f1_std = 0.0;
  double macro_f1_mean = 0.0, macro_f1_std = 0.0;
  double auc_mean = 0.0, auc_std = 0.0;
  double ndcg_mean = 0.0, ndcg_std = 0.0;

  std::string to_tsv() const;      // metric, mean, std, num_tasks, config_hash
  std::string to_summary() const;  // human-readable block
};

struct BenchmarkConfig {
  TaskKind kind = TaskKind::Nc;
  int k = 1;
  int num_tasks = 100;
  int first_episode = 0;  // episode seeds derive from the absolute index
  int delta = 1;
  double tau = 1.0;
  double lr_tune = 1e-2;
  int epochs_tune = 200;
  bool tune_prompts = true;  // false evaluates frozen identity prompts
  int lp_negatives = 10;
  double lp_holdout_fraction = 0.2;
  uint64_t seed = 7;
  int threads = 1;
  uint64_t config_hash = 0;
};

// Per episode: tune the dual prompt on the support set (the encoder stays
// frozen), predict the queries, score. Reports mean and std over episodes.
MetricReport run_benchmark(const HeteroGraph& graph, const LabelSet& labels,
                           const EncoderParams& params, const BenchmarkConfig& cfg);

}  // namespace hgpl
