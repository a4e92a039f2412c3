#include "hgpl/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "hgpl/embedding.hpp"
#include "hgpl/error.hpp"
#include "hgpl/objectives.hpp"
#include "hgpl/tasks.hpp"

namespace hgpl {

namespace {

namespace fs = std::filesystem;

std::string out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

LoadedGraph load_input_graph(const RunConfig& cfg, bool need_labels) {
  if (cfg.nodes_path.empty() || cfg.edges_path.empty()) {
    throw ConfigError("graph input requires node and edge file paths");
  }
  if (need_labels && cfg.labels_path.empty()) {
    throw ConfigError("this command requires a label file");
  }
  LoadedGraph loaded = load_graph(cfg.nodes_path, cfg.edges_path, cfg.labels_path);
  const ValidationReport report = validate(loaded.graph);
  if (!report.ok) {
    std::string msg = "invalid graph:";
    for (const auto& v : report.violations) msg += "\n  " + v;
    throw DataError(msg);
  }
  return loaded;
}

std::string checkpoint_path(const RunConfig& cfg) {
  return cfg.checkpoint_path.empty() ? out_path(cfg, "checkpoint.bin") : cfg.checkpoint_path;
}

TaskKind task_kind(const RunConfig& cfg) {
  if (cfg.task == "nc") return TaskKind::Nc;
  if (cfg.task == "gc") return TaskKind::Gc;
  return TaskKind::Lp;
}

BenchmarkConfig benchmark_config(const RunConfig& cfg) {
  BenchmarkConfig bench;
  bench.kind = task_kind(cfg);
  bench.k = cfg.shots;
  bench.num_tasks = cfg.num_tasks;
  bench.delta = cfg.delta;
  bench.tau = cfg.tau;
  bench.lr_tune = cfg.lr_tune;
  bench.epochs_tune = cfg.epochs_tune;
  bench.tune_prompts = cfg.tune_prompts;
  bench.lp_negatives = cfg.lp_negatives;
  bench.lp_holdout_fraction = cfg.lp_holdout_fraction;
  bench.seed = cfg.seed;
  bench.threads = cfg.threads;
  bench.config_hash = config_hash(cfg);
  return bench;
}

}  // namespace

void cmd_decompose(const RunConfig& cfg) {
  const LoadedGraph loaded = load_input_graph(cfg, /*need_labels=*/false);
  const HeteroGraph& g = loaded.graph;
  const auto views = build_views(g);

  std::ofstream manifest(out_path(cfg, "manifest.tsv"));
  if (!manifest) throw DataError("cannot write manifest");
  manifest << "view\tnum_nodes\tnum_edges\tmembers_file\tedges_file\n";
  for (const HomoView& view : views) {
    const std::string members_file = "view_" + std::to_string(view.view_index) + "_members.tsv";
    const std::string edges_file = "view_" + std::to_string(view.view_index) + "_edges.tsv";

    std::ofstream members(out_path(cfg, members_file));
    if (!members) throw DataError("cannot write " + members_file);
    for (int node : view.member_nodes) {
      members << g.node_ids[node] << '\t' << g.node_type_names[g.node_type[node]] << '\n';
    }

    std::ofstream edges(out_path(cfg, edges_file));
    if (!edges) throw DataError("cannot write " + edges_file);
    int undirected = 0;
    for (const auto& [a, b] : view.edges) {
      if (a > b) continue;
      const int src = view.member_nodes[a];
      const int dst = view.member_nodes[b];
      // Recover the original edge type(s) for this pair.
      for (const EdgeRec& e : g.edges) {
        if (e.src == src && e.dst == dst) {
          edges << g.node_ids[src] << '\t' << g.node_ids[dst] << '\t' << g.edge_type_names[e.type]
                << '\n';
          ++undirected;
        }
      }
    }
    manifest << view.view_index << '\t' << view.member_nodes.size() << '\t' << undirected << '\t'
             << members_file << '\t' << edges_file << '\n';
  }
  std::cout << "wrote " << views.size() << " views to " << cfg.out_dir << "\n";
}

void cmd_gen_synth(const RunConfig& cfg) {
  SynthConfig synth;
  synth.num_types = cfg.num_types;
  synth.nodes_per_type = cfg.nodes_per_type;
  synth.num_classes = cfg.num_classes;
  synth.intra_edge_prob = cfg.intra_edge_prob;
  synth.inter_edge_prob = cfg.inter_edge_prob;
  synth.feature_dim = cfg.feature_dim;
  synth.class_signal = cfg.class_signal;
  synth.seed = cfg.seed;
  const SynthResult result = gen_synthetic(synth);
  save_graph(result.graph, &result.labels, out_path(cfg, "nodes.tsv"), out_path(cfg, "edges.tsv"),
             out_path(cfg, "labels.tsv"));
  std::cout << "generated " << result.graph.num_nodes << " nodes, "
            << result.graph.edges.size() / 2 << " edges, " << result.labels.labels.size()
            << " labeled targets in " << cfg.out_dir << "\n";
}

void cmd_pretrain(const RunConfig& cfg) {
  const LoadedGraph loaded = load_input_graph(cfg, /*need_labels=*/false);
  const HeteroGraph& g = loaded.graph;
  const bool templated = cfg.mode == "templated";
  if (templated && g.homogeneous()) {
    std::cerr << "warning: templated mode on a homogeneous graph degenerates to duplicated views\n";
  }

  PretrainConfig pre;
  pre.templated = templated;
  pre.epochs = cfg.epochs_pretrain;
  pre.lr = cfg.lr_pretrain;
  pre.tau = cfg.tau;
  pre.delta = cfg.delta;
  pre.num_triplets = cfg.num_triplets;
  pre.negatives_per_positive = cfg.negatives_per_positive;
  pre.hidden_dim = cfg.hidden_dim;
  pre.num_layers = cfg.num_layers;
  pre.seed = cfg.seed;
  pre.threads = cfg.threads;

  EdgePairSet holdout;
  const EdgePairSet* holdout_ptr = nullptr;
  if (cfg.lp_holdout_fraction > 0.0) {
    holdout = to_edge_pair_set(lp_holdout_edges(g, cfg.lp_holdout_fraction, cfg.seed));
    holdout_ptr = &holdout;
  }

  const PretrainResult result = pretrain(g, pre, holdout_ptr);
  save_checkpoint(checkpoint_path(cfg), result.params, cfg.seed);

  std::ofstream curve(out_path(cfg, "pretrain_curve.tsv"));
  if (!curve) throw DataError("cannot write pretrain_curve.tsv");
  char buf[96];
  curve << "epoch\tloss\tval_loss\n";
  for (const EpochStats& row : result.curve) {
    std::snprintf(buf, sizeof(buf), "%d\t%.10g\t%.10g\n", row.epoch, row.train_loss, row.val_loss);
    curve << buf;
  }

  std::cout << "checkpoint: " << checkpoint_path(cfg) << "\n"
            << "train loss " << result.initial_train_loss << " -> " << result.final_train_loss
            << ", best val " << result.best_val_loss << " at epoch " << result.best_epoch << "\n"
            << "held-out ranking " << result.initial_val_ranking << " -> "
            << result.final_val_ranking << "\n";
}

namespace {

void write_report(const RunConfig& cfg, const MetricReport& report) {
  const std::string task = task_kind_name(report.kind);
  std::ofstream tsv(out_path(cfg, "report_" + task + ".tsv"));
  if (!tsv) throw DataError("cannot write report");
  tsv << report.to_tsv();
  std::ofstream summary(out_path(cfg, "summary_" + task + ".txt"));
  if (!summary) throw DataError("cannot write summary");
  summary << report.to_summary();
  std::cout << report.to_summary();
}

// Picks the tuning epoch count on a leading block of validation episodes,
// then scores the remaining episodes with the winner.
MetricReport run_with_epoch_selection(const HeteroGraph& g, const LabelSet& labels,
                                      const EncoderParams& params, BenchmarkConfig bench,
                                      double val_fraction) {
  const int total = bench.num_tasks;
  const int val_count = std::max(1, static_cast<int>(std::llround(val_fraction * total)));
  if (val_count >= total) throw ConfigError("select_epochs: no episodes left for evaluation");

  const std::vector<int> grid = {0, 10, 25, 50, 100, 200};
  int best_epochs = bench.epochs_tune;
  double best_score = -1.0;
  for (int candidate : grid) {
    if (candidate > bench.epochs_tune) continue;
    BenchmarkConfig probe = bench;
    probe.first_episode = 0;
    probe.num_tasks = val_count;
    probe.epochs_tune = candidate;
    const MetricReport r = run_benchmark(g, labels, params, probe);
    const double score = bench.kind == TaskKind::Lp ? r.auc_mean : r.micro_f1_mean;
    if (score > best_score) {
      best_score = score;
      best_epochs = candidate;
    }
  }
  std::cout << "selected epochs_tune=" << best_epochs << " on " << val_count
            << " validation episodes\n";
  bench.first_episode = val_count;
  bench.num_tasks = total - val_count;
  bench.epochs_tune = best_epochs;
  return run_benchmark(g, labels, params, bench);
}

}  // namespace

void cmd_tune_eval(const RunConfig& cfg) {
  const TaskKind kind = task_kind(cfg);
  const bool need_labels = kind != TaskKind::Lp;
  const LoadedGraph loaded = load_input_graph(cfg, need_labels);
  const HeteroGraph& g = loaded.graph;
  LabelSet labels;
  if (loaded.labels) labels = *loaded.labels;
  if (need_labels && labels.labels.empty()) throw DataError("label file has no labels");
  if (kind == TaskKind::Lp && cfg.lp_holdout_fraction <= 0.0) {
    throw ConfigError("task lp requires lp_holdout_fraction > 0");
  }

  const EncoderParams params = load_checkpoint(checkpoint_path(cfg));
  if (params.input_dim() != g.feature_dim()) {
    throw DataError("checkpoint expects feature dim " + std::to_string(params.input_dim()) +
                    ", graph has " + std::to_string(g.feature_dim()));
  }

  const BenchmarkConfig bench = benchmark_config(cfg);
  const MetricReport report =
      cfg.select_epochs ? run_with_epoch_selection(g, labels, params, bench, cfg.val_fraction)
                        : run_benchmark(g, labels, params, bench);
  write_report(cfg, report);
}

int cmd_validate(const RunConfig& cfg) {
  if (cfg.nodes_path.empty() || cfg.edges_path.empty()) {
    throw ConfigError("validate requires node and edge file paths");
  }
  const LoadedGraph loaded = load_graph(cfg.nodes_path, cfg.edges_path, cfg.labels_path);
  const ValidationReport report = validate(loaded.graph);
  if (report.ok) {
    std::cout << "ok: " << loaded.graph.num_nodes << " nodes, " << loaded.graph.edges.size() / 2
              << " edges, " << loaded.graph.num_node_types << " node types"
              << (report.homogeneous ? " (homogeneous)" : "") << "\n";
    return 0;
  }
  std::cout << "invalid graph:\n";
  for (const auto& v : report.violations) std::cout << "  " << v << "\n";
  return 2;
}

}  // namespace hgpl
