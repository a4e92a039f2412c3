#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace hgpl {

// All run settings as plain data. File values come first, then flag
// overrides; unknown keys and out-of-range values are rejected at parse time.
struct RunConfig {
  // training
  double tau = 1.0;
  double lr_pretrain = 1e-3;
  double lr_tune = 1e-2;
  int epochs_pretrain = 100;
  int epochs_tune = 200;
  int delta = 1;
  int hidden_dim = 64;
  int num_layers = 3;
  int negatives_per_positive = 1;
  std::string mode = "plain";  // plain | templated
  uint64_t seed = 7;
  int num_triplets = 500;

  // evaluation
  std::string task = "nc";  // nc | gc | lp
  int shots = 1;
  int num_tasks = 100;
  int lp_negatives = 10;
  double lp_holdout_fraction = 0.0;
  bool tune_prompts = true;
  bool select_epochs = false;
  double val_fraction = 0.5;

  // synthetic data
  int num_types = 2;
  int nodes_per_type = 50;
  int num_classes = 3;
  double intra_edge_prob = 0.1;
  double inter_edge_prob = 0.05;
  int feature_dim = 16;
  double class_signal = 2.0;

  // execution and paths
  int threads = 1;
  std::string out_dir = ".";
  std::string nodes_path;
  std::string edges_path;
  std::string labels_path;
  std::string checkpoint_path;
};

// Applies a single `key = value` assignment; throws ConfigError on unknown
// keys or invalid values.
void apply_config_entry(RunConfig& cfg, const std::string& key, const std::string& value);

// `key = value` lines, '#' comments.
void load_config_file(RunConfig& cfg, const std::string& path);

// Range checks that span multiple keys.
void validate_config(const RunConfig& cfg);

// FNV-1a over the canonical serialization; stable across runs.
uint64_t config_hash(const RunConfig& cfg);
std::string serialize_config(const RunConfig& cfg);

}  // namespace hgpl
