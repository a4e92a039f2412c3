#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "hgpl/error.hpp"
#include "hgpl/rng.hpp"
#include "hgpl/tasks.hpp"
#include "test_support.hpp"

using namespace hgpl;

namespace {

// Independent F1 reference: materialize the full confusion matrix, then
// 2*TP / (2*TP + FP + FN) per class and globally.
std::pair<double, double> f1_oracle(const std::vector<int>& preds, const std::vector<int>& truths,
                                    int num_classes) {
  std::vector<std::vector<long>> confusion(num_classes, std::vector<long>(num_classes, 0));
  for (size_t i = 0; i < preds.size(); ++i) confusion[truths[i]][preds[i]] += 1;
  long tp_all = 0, fp_all = 0, fn_all = 0;
  double macro = 0.0;
  for (int c = 0; c < num_classes; ++c) {
    long tp = confusion[c][c];
    long fp = 0, fn = 0;
    for (int o = 0; o < num_classes; ++o) {
      if (o == c) continue;
      fp += confusion[o][c];
      fn += confusion[c][o];
    }
    tp_all += tp;
    fp_all += fp;
    fn_all += fn;
    macro += (2 * tp + fp + fn) == 0 ? 0.0 : 2.0 * tp / static_cast<double>(2 * tp + fp + fn);
  }
  return {2.0 * tp_all / static_cast<double>(2 * tp_all + fp_all + fn_all), macro / num_classes};
}

// Exhaustive pair counting.
double auc_oracle(double pos, const std::vector<double>& negs) {
  double sum = 0.0;
  for (double n : negs) sum += pos > n ? 1.0 : (pos == n ? 0.5 : 0.0);
  return sum / negs.size();
}

// Direct formula with explicit tie enumeration.
double ndcg_oracle(double pos, const std::vector<double>& negs) {
  int above = 0, tied = 0;
  for (double n : negs) {
    if (n > pos) ++above;
    if (n == pos) ++tied;
  }
  double gain = 0.0;
  for (int r = above + 1; r <= above + 1 + tied; ++r) gain += 1.0 / std::log2(r + 1.0);
  return gain / (tied + 1);
}

LabelSet balanced_labels(int per_class, int num_classes) {
  LabelSet labels;
  labels.num_classes = num_classes;
  for (int c = 0; c < num_classes; ++c) labels.class_names.push_back("c" + std::to_string(c));
  int node = 0;
  for (int c = 0; c < num_classes; ++c) {
    for (int i = 0; i < per_class; ++i) labels.labels[node++] = c;
  }
  return labels;
}

}  // namespace

TEST_CASE("sample_nc_tasks: class too small names the class") {
  LabelSet labels = balanced_labels(3, 2);
  labels.labels[100] = 1;  // class 1 has 4, class 0 has 3
  try {
    sample_nc_tasks(labels, 3, 10, 1);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("class 0") != std::string::npos);
  }
}

TEST_CASE("sample_nc_tasks: structure, determinism and disjointness") {
  const LabelSet labels = balanced_labels(10, 3);
  const auto tasks = sample_nc_tasks(labels, 2, 25, 99);
  REQUIRE(tasks.size() == 25);
  for (const FewShotTask& task : tasks) {
    CHECK(task.support.size() == 6);  // k per class
    CHECK(task.query.size() == 24);   // all remaining labeled instances
    std::set<int> support_ids;
    std::vector<int> per_class(3, 0);
    for (const auto& [id, cls] : task.support) {
      support_ids.insert(id);
      per_class[cls]++;
      CHECK(labels.labels.at(id) == cls);
    }
    CHECK(per_class == std::vector<int>{2, 2, 2});
    for (int q : task.query) CHECK(support_ids.count(q) == 0);
  }

  const auto again = sample_nc_tasks(labels, 2, 25, 99);
  CHECK(again[7].support == tasks[7].support);
  CHECK(again[7].query == tasks[7].query);

  const auto other = sample_nc_tasks(labels, 2, 25, 100);
  bool any_diff = false;
  for (int t = 0; t < 25 && !any_diff; ++t) any_diff = other[t].support != tasks[t].support;
  CHECK(any_diff);
}

TEST_CASE("sample_gc_tasks: same sampler over graph instances") {
  const HeteroGraph g = test_support::random_graph(5, 20, 2, 2, 0.2, 12);
  LabelSet labels;
  labels.num_classes = 2;
  labels.class_names = {"a", "b"};
  for (int v = 0; v < 8; ++v) labels.labels[v] = v % 2;
  const auto egos = ego_networks(g, labels, 1);
  const auto tasks = sample_gc_tasks(egos, 1, 10, 5);
  for (const FewShotTask& task : tasks) {
    CHECK(task.kind == TaskKind::Gc);
    CHECK(task.support.size() == 2);
    CHECK(task.query.size() == 6);
    for (const auto& [idx, cls] : task.support) CHECK(egos[idx].second == cls);
  }
}

TEST_CASE("lp_holdout_edges: deterministic subset of undirected edges") {
  const HeteroGraph g = test_support::random_graph(31, 30, 2, 2, 0.3, 15);
  const auto a = lp_holdout_edges(g, 0.25, 7);
  const auto b = lp_holdout_edges(g, 0.25, 7);
  CHECK(a == b);
  size_t undirected = g.edges.size() / 2;
  CHECK(a.size() == static_cast<size_t>(std::llround(0.25 * undirected)));
  for (const auto& [s, d] : a) {
    CHECK(s < d);
    CHECK(g.has_edge(s, d));
  }
}

TEST_CASE("sample_lp_tasks: tuple structure and defaults") {
  const HeteroGraph g = test_support::random_graph(22, 40, 2, 2, 0.25, 30);
  const auto holdout = lp_holdout_edges(g, 0.3, 3);
  REQUIRE(holdout.size() >= 4);
  const auto tasks = sample_lp_tasks(g, holdout, 1, 8, 10, 3);
  REQUIRE(tasks.size() == 8);
  for (const FewShotTask& task : tasks) {
    CHECK(task.lp_support.size() == 1);
    CHECK(task.lp_query.size() == holdout.size() - 1);
    auto check_tuple = [&](const LpTuple& t) {
      CHECK(t.negatives.size() == 10);
      CHECK(g.has_edge(t.target, t.positive));
      std::set<int> uniq(t.negatives.begin(), t.negatives.end());
      CHECK(uniq.size() == t.negatives.size());
      for (int n : t.negatives) {
        CHECK(!g.has_edge(t.target, n));
        CHECK(n != t.target);
      }
    };
    for (const LpTuple& t : task.lp_support) check_tuple(t);
    for (const LpTuple& t : task.lp_query) check_tuple(t);

    // support edge never reappears as a query edge
    auto key = [](const LpTuple& t) {
      return std::make_pair(std::min(t.target, t.positive), std::max(t.target, t.positive));
    };
    const auto support_key = key(task.lp_support[0]);
    for (const LpTuple& t : task.lp_query) CHECK(key(t) != support_key);
  }
}

TEST_CASE("sample_lp_tasks: too few holdout edges") {
  const HeteroGraph g = test_support::random_graph(22, 40, 2, 2, 0.25, 30);
  const std::vector<std::pair<int, int>> tiny = {{g.edges[0].src, g.edges[0].dst}};
  CHECK_THROWS_AS(sample_lp_tasks(g, tiny, 1, 5, 10, 3), DataError);
}

TEST_CASE("micro_macro_f1: hand-computed example") {
  // truths (0,0,1,1), preds (0,1,1,1): micro 0.75, macro (2/3 + 4/5)/2
  const auto [micro, macro] = micro_macro_f1({0, 1, 1, 1}, {0, 0, 1, 1}, 2);
  CHECK(micro == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(macro == doctest::Approx(11.0 / 15.0).epsilon(1e-12));
}

TEST_CASE("micro_macro_f1: degenerate cases") {
  const auto perfect = micro_macro_f1({0, 1, 2}, {0, 1, 2}, 3);
  CHECK(perfect.first == 1.0);
  CHECK(perfect.second == 1.0);

  // all predictions one class on a balanced 2-class truth -> micro 0.5
  const auto collapsed = micro_macro_f1({0, 0, 0, 0}, {0, 0, 1, 1}, 2);
  CHECK(collapsed.first == doctest::Approx(0.5).epsilon(1e-15));

  CHECK_THROWS_AS(micro_macro_f1({}, {}, 2), DataError);
}

TEST_CASE("auc and ndcg: hand-computed examples") {
  std::vector<double> negs(10);
  for (int i = 0; i < 10; ++i) negs[i] = 0.1 * i;  // 0.0 .. 0.9
  CHECK(auc_one_vs_negatives(1.0, negs) == 1.0);
  CHECK(auc_one_vs_negatives(-0.5, negs) == 0.0);
  CHECK(auc_one_vs_negatives(0.45, negs) == doctest::Approx(0.5).epsilon(1e-15));

  CHECK(ndcg_single_relevant(1) == 1.0);
  CHECK(ndcg_single_relevant(2) == doctest::Approx(0.6309297535714574).epsilon(1e-12));
  CHECK(ndcg_single_relevant(11) == doctest::Approx(0.2789429456511298).epsilon(1e-12));

  CHECK(ndcg_from_scores(1.0, negs) == 1.0);
  CHECK(ndcg_from_scores(-1.0, negs) == doctest::Approx(ndcg_single_relevant(11)).epsilon(1e-12));
}

TEST_CASE("metrics match independent oracles on random cases") {
  Rng rng(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int num_classes = 2 + rng.below_int(4);
    const int n = 1 + rng.below_int(30);
    std::vector<int> preds(n), truths(n);
    for (int i = 0; i < n; ++i) {
      preds[i] = rng.below_int(num_classes);
      truths[i] = rng.below_int(num_classes);
    }
    const auto got = micro_macro_f1(preds, truths, num_classes);
    const auto want = f1_oracle(preds, truths, num_classes);
    CHECK(got.first == want.first);
    CHECK(got.second == want.second);

    const int num_negs = 1 + rng.below_int(12);
    std::vector<double> negs(num_negs);
    // quantized scores so that ties actually occur
    for (double& x : negs) x = 0.25 * rng.below_int(8);
    const double pos = 0.25 * rng.below_int(8);
    CHECK(auc_one_vs_negatives(pos, negs) == auc_oracle(pos, negs));
    CHECK(ndcg_from_scores(pos, negs) == ndcg_oracle(pos, negs));
  }
}

TEST_CASE("auc: random scorer converges to one half") {
  Rng rng(55);
  double total = 0.0;
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> negs(10);
    for (double& x : negs) x = rng.real01();
    total += auc_one_vs_negatives(rng.real01(), negs);
  }
  CHECK(std::fabs(total / trials - 0.5) < 0.02);
}

TEST_CASE("run_benchmark: chance-level micro on a signal-free graph") {
  SynthConfig sc;
  sc.nodes_per_type = 30;
  sc.num_classes = 3;
  sc.class_signal = 0.0;
  sc.feature_dim = 6;
  sc.seed = 5;
  const SynthResult synth = gen_synthetic(sc);
  const EncoderParams params = init_params(6, 16, 2, 9);

  BenchmarkConfig cfg;
  cfg.kind = TaskKind::Nc;
  cfg.num_tasks = 100;
  cfg.tune_prompts = false;
  cfg.seed = 5;
  cfg.threads = 2;
  const MetricReport report = run_benchmark(synth.graph, synth.labels, params, cfg);
  const double sigma = report.micro_f1_std / std::sqrt(100.0);
  CHECK(std::fabs(report.micro_f1_mean - 1.0 / 3.0) <= 3.0 * sigma + 0.01);
}

TEST_CASE("run_benchmark: deterministic and frozen") {
  SynthConfig sc;
  sc.nodes_per_type = 16;
  sc.num_classes = 2;
  sc.seed = 3;
  sc.feature_dim = 4;
  const SynthResult synth = gen_synthetic(sc);
  const EncoderParams params = init_params(4, 8, 2, 4);
  const uint64_t checksum = params_checksum(params);

  BenchmarkConfig cfg;
  cfg.kind = TaskKind::Nc;
  cfg.num_tasks = 10;
  cfg.epochs_tune = 20;
  cfg.seed = 12;
  const MetricReport a = run_benchmark(synth.graph, synth.labels, params, cfg);
  cfg.threads = 4;
  const MetricReport b = run_benchmark(synth.graph, synth.labels, params, cfg);
  CHECK(a.micro_f1_mean == b.micro_f1_mean);
  CHECK(a.macro_f1_mean == b.macro_f1_mean);
  CHECK(a.micro_f1_std == b.micro_f1_std);
  CHECK(params_checksum(params) == checksum);
}

TEST_CASE("run_benchmark: identity ablation differs from tuned prompts") {
  SynthConfig sc;
  sc.nodes_per_type = 16;
  sc.num_classes = 2;
  sc.seed = 21;
  sc.feature_dim = 4;
  const SynthResult synth = gen_synthetic(sc);
  const EncoderParams params = init_params(4, 8, 2, 4);

  BenchmarkConfig cfg;
  cfg.kind = TaskKind::Nc;
  cfg.num_tasks = 10;
  cfg.epochs_tune = 50;
  cfg.seed = 2;
  const MetricReport tuned = run_benchmark(synth.graph, synth.labels, params, cfg);
  cfg.tune_prompts = false;
  const MetricReport ident = run_benchmark(synth.graph, synth.labels, params, cfg);
  CHECK(tuned.micro_f1_mean != ident.micro_f1_mean);
}

TEST_CASE("run_benchmark: lp metrics populated and in range") {
  SynthConfig sc;
  sc.nodes_per_type = 25;
  sc.num_classes = 2;
  sc.seed = 8;
  sc.feature_dim = 4;
  sc.intra_edge_prob = 0.15;
  sc.inter_edge_prob = 0.1;
  const SynthResult synth = gen_synthetic(sc);
  const EncoderParams params = init_params(4, 8, 2, 6);

  BenchmarkConfig cfg;
  cfg.kind = TaskKind::Lp;
  cfg.num_tasks = 5;
  cfg.epochs_tune = 10;
  cfg.lp_holdout_fraction = 0.2;
  cfg.seed = 8;
  const MetricReport report = run_benchmark(synth.graph, synth.labels, params, cfg);
  CHECK(report.auc_mean >= 0.0);
  CHECK(report.auc_mean <= 1.0);
  CHECK(report.ndcg_mean > 0.0);
  CHECK(report.ndcg_mean <= 1.0);
  CHECK(report.auc_std >= 0.0);
}

TEST_CASE("MetricReport: tsv and summary formats") {
  MetricReport report;
  report.kind = TaskKind::Nc;
  report.num_tasks = 100;
  report.config_hash = 0xABCD;
  report.micro_f1_mean = 0.5;
  report.micro_f1_std = 0.1;
  const std::string tsv = report.to_tsv();
  CHECK(tsv.find("micro_f1\t0.5\t0.1\t100\t000000000000abcd") != std::string::npos);
  CHECK(tsv.find("auc") == std::string::npos);
  const std::string summary = report.to_summary();
  CHECK(summary.find("task=nc") != std::string::npos);
  CHECK(summary.find("50.00%") != std::string::npos);
}
