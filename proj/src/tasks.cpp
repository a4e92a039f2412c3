#include "hgpl/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hgpl/embedding.hpp"
#include "hgpl/error.hpp"
#include "hgpl/parallel.hpp"
#include "hgpl/rng.hpp"

namespace hgpl {

const char* task_kind_name(TaskKind kind) {
  switch (kind) {
    case TaskKind::Nc: return "nc";
    case TaskKind::Gc: return "gc";
    case TaskKind::Lp: return "lp";
  }
  return "?";
}

namespace {

std::vector<FewShotTask> sample_cls_tasks(const std::vector<std::pair<int, int>>& labeled,
                                          int num_classes, int k, int num_tasks, uint64_t seed,
                                          TaskKind kind) {
  if (k < 1 || num_tasks < 1) throw ConfigError("task sampling: k and num_tasks must be >= 1");
  std::vector<std::vector<int>> by_class(num_classes);
  for (const auto& [id, cls] : labeled) {
    if (cls < 0 || cls >= num_classes) throw DataError("task sampling: class id out of range");
    by_class[cls].push_back(id);
  }
  for (int c = 0; c < num_classes; ++c) {
    if (static_cast<int>(by_class[c].size()) < k + 1) {
      throw DataError("task sampling: class " + std::to_string(c) + " has only " +
                      std::to_string(by_class[c].size()) + " instances, need k+1 = " +
                      std::to_string(k + 1));
    }
  }

  std::vector<FewShotTask> tasks(num_tasks);
  for (int t = 0; t < num_tasks; ++t) {
    Rng rng(Rng::derive(seed, static_cast<uint64_t>(t)));
    FewShotTask& task = tasks[t];
    task.kind = kind;
    task.k = k;
    task.num_classes = num_classes;
    for (int c = 0; c < num_classes; ++c) {
      std::vector<int> pool = by_class[c];
      rng.shuffle(pool);
      for (int i = 0; i < k; ++i) task.support.emplace_back(pool[i], c);
      for (size_t i = k; i < pool.size(); ++i) task.query.push_back(pool[i]);
    }
    std::sort(task.query.begin(), task.query.end());
  }
  return tasks;
}

}  // namespace

std::vector<FewShotTask> sample_nc_tasks(const LabelSet& labels, int k, int num_tasks,
                                         uint64_t seed) {
  std::vector<std::pair<int, int>> labeled(labels.labels.begin(), labels.labels.end());
  if (labeled.empty()) throw DataError("sample_nc_tasks: empty label set");
  return sample_cls_tasks(labeled, labels.num_classes, k, num_tasks, seed, TaskKind::Nc);
}

std::vector<FewShotTask> sample_gc_tasks(const std::vector<std::pair<Subgraph, int>>& egos, int k,
                                         int num_tasks, uint64_t seed) {
  if (egos.empty()) throw DataError("sample_gc_tasks: empty instance collection");
  std::vector<std::pair<int, int>> labeled;
  labeled.reserve(egos.size());
  int num_classes = 0;
  for (size_t i = 0; i < egos.size(); ++i) {
    labeled.emplace_back(static_cast<int>(i), egos[i].second);
    num_classes = std::max(num_classes, egos[i].second + 1);
  }
  return sample_cls_tasks(labeled, num_classes, k, num_tasks, seed, TaskKind::Gc);
}

std::vector<std::pair<int, int>> lp_holdout_edges(const HeteroGraph& g, double fraction,
                                                  uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) throw ConfigError("lp holdout fraction must be in [0,1]");
  std::vector<std::pair<int, int>> undirected;
  for (const EdgeRec& e : g.edges) {
    if (e.src < e.dst) undirected.emplace_back(e.src, e.dst);
  }
  std::sort(undirected.begin(), undirected.end());
  undirected.erase(std::unique(undirected.begin(), undirected.end()), undirected.end());
  Rng rng(Rng::derive(seed, 0x4C50));
  rng.shuffle(undirected);
  undirected.resize(static_cast<size_t>(std::llround(fraction * undirected.size())));
  std::sort(undirected.begin(), undirected.end());
  return undirected;
}

EdgePairSet to_edge_pair_set(const std::vector<std::pair<int, int>>& edges) {
  EdgePairSet set;
  for (const auto& [a, b] : edges) set.insert(a, b);
  return set;
}

namespace {

std::vector<int> sample_non_neighbors(const HeteroGraph& g, int target, int count, Rng& rng) {
  std::vector<int> pool;
  const auto& nbrs = g.adjacency[target];
  size_t p = 0;
  for (int u = 0; u < g.num_nodes; ++u) {
    while (p < nbrs.size() && nbrs[p] < u) ++p;
    if (u == target || (p < nbrs.size() && nbrs[p] == u)) continue;
    pool.push_back(u);
  }
  if (static_cast<int>(pool.size()) < count) {
    throw DataError("sample_lp_tasks: node " + std::to_string(target) + " has only " +
                    std::to_string(pool.size()) + " non-neighbors, need " + std::to_string(count));
  }
  rng.shuffle(pool);
  pool.resize(count);
  return pool;
}

LpTuple make_lp_tuple(const HeteroGraph& g, std::pair<int, int> edge, int negatives, Rng& rng) {
  LpTuple tuple;
  const bool flip = rng.bernoulli(0.5);
  tuple.target = flip ? edge.second : edge.first;
  tuple.positive = flip ? edge.first : edge.second;
  tuple.negatives = sample_non_neighbors(g, tuple.target, negatives, rng);
  return tuple;
}

}  // namespace

std::vector<FewShotTask> sample_lp_tasks(const HeteroGraph& g,
                                         const std::vector<std::pair<int, int>>& holdout, int k,
                                         int num_tasks, int negatives, uint64_t seed) {
  if (k < 1 || num_tasks < 1 || negatives < 1) {
    throw ConfigError("sample_lp_tasks: k, num_tasks and negatives must be >= 1");
  }
  if (static_cast<int>(holdout.size()) < k + 1) {
    throw DataError("sample_lp_tasks: need at least k+1 = " + std::to_string(k + 1) +
                    " holdout edges, have " + std::to_string(holdout.size()));
  }
  std::vector<FewShotTask> tasks(num_tasks);
  for (int t = 0; t < num_tasks; ++t) {
    Rng rng(Rng::derive(seed, static_cast<uint64_t>(t)));
    FewShotTask& task = tasks[t];
    task.kind = TaskKind::Lp;
    task.k = k;
    std::vector<std::pair<int, int>> pool = holdout;
    rng.shuffle(pool);
    for (int i = 0; i < k; ++i) task.lp_support.push_back(make_lp_tuple(g, pool[i], negatives, rng));
    for (size_t i = k; i < pool.size(); ++i) {
      task.lp_query.push_back(make_lp_tuple(g, pool[i], negatives, rng));
    }
  }
  return tasks;
}

std::pair<double, double> micro_macro_f1(const std::vector<int>& predictions,
                                         const std::vector<int>& truths, int num_classes) {
  if (predictions.empty() || predictions.size() != truths.size()) {
    throw DataError("micro_macro_f1: empty or mismatched inputs");
  }
  std::vector<long> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  for (size_t i = 0; i < predictions.size(); ++i) {
    const int p = predictions[i];
    const int y = truths[i];
    if (p < 0 || p >= num_classes || y < 0 || y >= num_classes) {
      throw DataError("micro_macro_f1: class id out of range");
    }
    if (p == y) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[y];
    }
  }
  long tp_all = 0, fp_all = 0, fn_all = 0;
  double macro = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    tp_all += tp[c];
    fp_all += fp[c];
    fn_all += fn[c];
    const long denom = 2 * tp[c] + fp[c] + fn[c];
    macro += denom == 0 ? 0.0 : 2.0 * tp[c] / static_cast<double>(denom);
  }
  macro /= num_classes;
  const double micro = 2.0 * tp_all / static_cast<double>(2 * tp_all + fp_all + fn_all);
  return {micro, macro};
}

double auc_one_vs_negatives(double pos_score, std::span<const double> neg_scores) {
  if (neg_scores.empty()) throw DataError("auc: need at least one negative");
  double wins = 0.0;
  for (double s : neg_scores) {
    if (s < pos_score) {
      wins += 1.0;
    } else if (s == pos_score) {
      wins += 0.5;
    }
  }
  return wins / static_cast<double>(neg_scores.size());
}

double ndcg_single_relevant(int rank) {
  if (rank < 1) throw DataError("ndcg: rank must be >= 1");
  return 1.0 / std::log2(static_cast<double>(rank) + 1.0);
}

double ndcg_from_scores(double pos_score, std::span<const double> neg_scores) {
  int above = 0;
  int tied = 0;
  for (double s : neg_scores) {
    if (s > pos_score) {
      ++above;
    } else if (s == pos_score) {
      ++tied;
    }
  }
  // The positive occupies one of the ranks above+1 .. above+1+tied with equal
  // probability; average their gains.
  double gain = 0.0;
  for (int r = above + 1; r <= above + 1 + tied; ++r) gain += ndcg_single_relevant(r);
  return gain / (tied + 1);
}

std::string MetricReport::to_tsv() const {
  char buf[160];
  std::string out = "metric\tmean\tstd\tnum_tasks\tconfig_hash\n";
  auto row = [&](const char* name, double mean, double std_dev) {
    std::snprintf(buf, sizeof(buf), "%s\t%.10g\t%.10g\t%d\t%016llx\n", name, mean, std_dev,
                  num_tasks, static_cast<unsigned long long>(config_hash));
    out += buf;
  };
  if (kind == TaskKind::Lp) {
    row("auc", auc_mean, auc_std);
    row("ndcg", ndcg_mean, ndcg_std);
  } else {
    row("micro_f1", micro_f1_mean, micro_f1_std);
    row("macro_f1", macro_f1_mean, macro_f1_std);
  }
  return out;
}

std::string MetricReport::to_summary() const {
  char buf[200];
  std::snprintf(buf, sizeof(buf), "task=%s tasks=%d config=%016llx\n", task_kind_name(kind),
                num_tasks, static_cast<unsigned long long>(config_hash));
  std::string out = buf;
  auto line = [&](const char* name, double mean, double std_dev) {
    std::snprintf(buf, sizeof(buf), "  %-8s %6.2f%% +/- %5.2f%%\n", name, 100.0 * mean,
                  100.0 * std_dev);
    out += buf;
  };
  if (kind == TaskKind::Lp) {
    line("auc", auc_mean, auc_std);
    line("ndcg", ndcg_mean, ndcg_std);
  } else {
    line("micro_f1", micro_f1_mean, micro_f1_std);
    line("macro_f1", macro_f1_mean, macro_f1_std);
  }
  return out;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  return {mean, std::sqrt(var / xs.size())};
}

struct EpisodeScore {
  double micro = 0.0, macro = 0.0, auc = 0.0, ndcg = 0.0;
};

}  // namespace

MetricReport run_benchmark(const HeteroGraph& g, const LabelSet& labels,
                           const EncoderParams& params, const BenchmarkConfig& cfg) {
  if (params.input_dim() != g.feature_dim()) {
    throw DataError("run_benchmark: checkpoint input dim " + std::to_string(params.input_dim()) +
                    " does not match graph feature dim " + std::to_string(g.feature_dim()));
  }
  const uint64_t checksum_before = params_checksum(params);
  const EncodedGraph enc = encode_graph(g, params, /*templated=*/true, cfg.threads);

  // Instance universe: member node sets plus per-view row lists.
  std::vector<std::vector<int>> members;
  std::vector<int> universe_labels;           // classification only
  std::vector<int> universe_of_node;          // NC/LP: node id -> universe index
  std::vector<FewShotTask> tasks;

  if (cfg.kind == TaskKind::Nc) {
    universe_of_node.assign(g.num_nodes, -1);
    for (const auto& [node, cls] : labels.labels) {
      universe_of_node[node] = static_cast<int>(members.size());
      members.push_back(context_subgraph(g, node, cfg.delta).member_nodes);
      universe_labels.push_back(cls);
    }
    tasks = sample_nc_tasks(labels, cfg.k, cfg.first_episode + cfg.num_tasks, cfg.seed);
  } else if (cfg.kind == TaskKind::Gc) {
    const auto egos = ego_networks(g, labels, cfg.delta);
    for (const auto& [sub, cls] : egos) {
      members.push_back(sub.member_nodes);
      universe_labels.push_back(cls);
    }
    tasks = sample_gc_tasks(egos, cfg.k, cfg.first_episode + cfg.num_tasks, cfg.seed);
  } else {
    universe_of_node.assign(g.num_nodes, -1);
    for (int v = 0; v < g.num_nodes; ++v) {
      universe_of_node[v] = static_cast<int>(members.size());
      members.push_back(context_subgraph(g, v, cfg.delta).member_nodes);
    }
    const auto holdout = lp_holdout_edges(g, cfg.lp_holdout_fraction, cfg.seed);
    tasks = sample_lp_tasks(g, holdout, cfg.k, cfg.first_episode + cfg.num_tasks,
                            cfg.lp_negatives, cfg.seed);
  }

  std::vector<InstanceRows> rows(members.size());
  parallel_for(static_cast<int>(members.size()), cfg.threads,
               [&](int i) { rows[i] = instance_rows(enc, members[i]); });

  auto universe_index = [&](int instance_id) {
    return cfg.kind == TaskKind::Gc ? instance_id : universe_of_node[instance_id];
  };

  TuneConfig tune_cfg;
  tune_cfg.epochs = cfg.epochs_tune;
  tune_cfg.lr = cfg.lr_tune;
  tune_cfg.tau = cfg.tau;

  std::vector<EpisodeScore> scores(cfg.num_tasks);
  parallel_for(cfg.num_tasks, cfg.threads, [&](int e) {
    const FewShotTask& task = tasks[cfg.first_episode + e];
    EpisodeScore& score = scores[e];

    if (cfg.kind == TaskKind::Lp) {
      std::vector<LpGroup> groups;
      for (const LpTuple& tuple : task.lp_support) {
        LpGroup group;
        group.target = &rows[universe_index(tuple.target)];
        group.positive = &rows[universe_index(tuple.positive)];
        for (int n : tuple.negatives) group.negatives.push_back(&rows[universe_index(n)]);
        groups.push_back(std::move(group));
      }
      const PromptPair prompts =
          cfg.tune_prompts ? prompt_tune_lp(enc, groups, tune_cfg).prompts
                           : PromptPair::identity(enc.hidden_dim(), enc.num_views());
      double auc_sum = 0.0, ndcg_sum = 0.0;
      for (const LpTuple& tuple : task.lp_query) {
        const auto target = embed_instance(enc, rows[universe_index(tuple.target)], &prompts);
        const auto pos = embed_instance(enc, rows[universe_index(tuple.positive)], &prompts);
        const double pos_score = cosine_sim(target.s, pos.s);
        std::vector<double> neg_scores;
        neg_scores.reserve(tuple.negatives.size());
        for (int n : tuple.negatives) {
          const auto neg = embed_instance(enc, rows[universe_index(n)], &prompts);
          neg_scores.push_back(cosine_sim(target.s, neg.s));
        }
        auc_sum += auc_one_vs_negatives(pos_score, neg_scores);
        ndcg_sum += ndcg_from_scores(pos_score, neg_scores);
      }
      score.auc = auc_sum / task.lp_query.size();
      score.ndcg = ndcg_sum / task.lp_query.size();
      return;
    }

    std::vector<const InstanceRows*> support;
    std::vector<int> support_labels;
    for (const auto& [id, cls] : task.support) {
      support.push_back(&rows[universe_index(id)]);
      support_labels.push_back(cls);
    }
    const PromptPair prompts =
        cfg.tune_prompts
            ? prompt_tune_classification(enc, support, support_labels, task.num_classes, tune_cfg)
                  .prompts
            : PromptPair::identity(enc.hidden_dim(), enc.num_views());

    std::vector<std::vector<double>> sup_emb;
    for (const InstanceRows* inst : support) {
      sup_emb.push_back(embed_instance(enc, *inst, &prompts).s);
    }
    const auto protos = class_prototypes(sup_emb, support_labels, task.num_classes);

    std::vector<int> predictions, truths;
    for (int id : task.query) {
      const auto q = embed_instance(enc, rows[universe_index(id)], &prompts);
      predictions.push_back(classify(q.s, protos));
      truths.push_back(cfg.kind == TaskKind::Gc ? universe_labels[id] : labels.labels.at(id));
    }
    const auto [micro, macro] = micro_macro_f1(predictions, truths, task.num_classes);
    score.micro = micro;
    score.macro = macro;
  });

  if (params_checksum(params) != checksum_before) {
    throw NumericError("run_benchmark: encoder weights changed during evaluation");
  }

  MetricReport report;
  report.kind = cfg.kind;
  report.num_tasks = cfg.num_tasks;
  report.config_hash = cfg.config_hash;
  std::vector<double> micro, macro, auc, ndcg;
  for (const EpisodeScore& s : scores) {
    micro.push_back(s.micro);
    macro.push_back(s.macro);
    auc.push_back(s.auc);
    ndcg.push_back(s.ndcg);
  }
  std::tie(report.micro_f1_mean, report.micro_f1_std) = mean_std(micro);
  std::tie(report.macro_f1_mean, report.macro_f1_std) = mean_std(macro);
  std::tie(report.auc_mean, report.auc_std) = mean_std(auc);
  std::tie(report.ndcg_mean, report.ndcg_std) = mean_std(ndcg);
  return report;
}

}  // namespace hgpl
