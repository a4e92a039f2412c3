#include "hgpl/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "hgpl/error.hpp"

namespace hgpl {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t");
  size_t e = s.find_last_not_of(" \t");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    throw ConfigError("config: " + key + " expects a finite real, got '" + value + "'");
  }
  return out;
}

long long to_int(const std::string& key, const std::string& value) {
  long long out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config: " + key + " expects an integer, got '" + value + "'");
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on") return true;
  if (value == "false" || value == "0" || value == "off") return false;
  throw ConfigError("config: " + key + " expects true/false, got '" + value + "'");
}

int positive_int(const std::string& key, const std::string& value) {
  const long long v = to_int(key, value);
  if (v < 1 || v > 1'000'000'000) throw ConfigError("config: " + key + " must be >= 1");
  return static_cast<int>(v);
}

int non_negative_int(const std::string& key, const std::string& value) {
  const long long v = to_int(key, value);
  if (v < 0 || v > 1'000'000'000) throw ConfigError("config: " + key + " must be >= 0");
  return static_cast<int>(v);
}

double positive_real(const std::string& key, const std::string& value) {
  const double v = to_real(key, value);
  if (!(v > 0.0)) throw ConfigError("config: " + key + " must be > 0");
  return v;
}

double probability(const std::string& key, const std::string& value) {
  const double v = to_real(key, value);
  if (v < 0.0 || v > 1.0) throw ConfigError("config: " + key + " must lie in [0,1]");
  return v;
}

}  // namespace

void apply_config_entry(RunConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = trim(raw_value);
  if (key == "tau") {
    cfg.tau = positive_real(key, value);
  } else if (key == "lr_pretrain") {
    cfg.lr_pretrain = positive_real(key, value);
  } else if (key == "lr_tune") {
    cfg.lr_tune = positive_real(key, value);
  } else if (key == "epochs_pretrain") {
    cfg.epochs_pretrain = non_negative_int(key, value);
  } else if (key == "epochs_tune") {
    cfg.epochs_tune = non_negative_int(key, value);
  } else if (key == "delta") {
    cfg.delta = non_negative_int(key, value);
  } else if (key == "hidden_dim") {
    cfg.hidden_dim = positive_int(key, value);
  } else if (key == "num_layers") {
    cfg.num_layers = positive_int(key, value);
  } else if (key == "negatives_per_positive") {
    cfg.negatives_per_positive = positive_int(key, value);
  } else if (key == "mode") {
    if (value != "plain" && value != "templated") {
      throw ConfigError("config: mode must be 'plain' or 'templated', got '" + value + "'");
    }
    cfg.mode = value;
  } else if (key == "seed") {
    cfg.seed = static_cast<uint64_t>(to_int(key, value));
  } else if (key == "num_triplets") {
    cfg.num_triplets = positive_int(key, value);
  } else if (key == "task") {
    if (value != "nc" && value != "gc" && value != "lp") {
      throw ConfigError("config: task must be nc, gc or lp, got '" + value + "'");
    }
    cfg.task = value;
  } else if (key == "shots") {
    cfg.shots = positive_int(key, value);
  } else if (key == "num_tasks") {
    cfg.num_tasks = positive_int(key, value);
  } else if (key == "lp_negatives") {
    cfg.lp_negatives = positive_int(key, value);
  } else if (key == "lp_holdout_fraction") {
    cfg.lp_holdout_fraction = probability(key, value);
  } else if (key == "tune_prompts") {
    cfg.tune_prompts = to_bool(key, value);
  } else if (key == "select_epochs") {
    cfg.select_epochs = to_bool(key, value);
  } else if (key == "val_fraction") {
    cfg.val_fraction = probability(key, value);
  } else if (key == "num_types") {
    cfg.num_types = positive_int(key, value);
  } else if (key == "nodes_per_type") {
    cfg.nodes_per_type = positive_int(key, value);
  } else if (key == "num_classes") {
    cfg.num_classes = positive_int(key, value);
  } else if (key == "intra_edge_prob") {
    cfg.intra_edge_prob = probability(key, value);
  } else if (key == "inter_edge_prob") {
    cfg.inter_edge_prob = probability(key, value);
  } else if (key == "feature_dim") {
    cfg.feature_dim = positive_int(key, value);
  } else if (key == "class_signal") {
    cfg.class_signal = to_real(key, value);
  } else if (key == "threads") {
    cfg.threads = positive_int(key, value);
  } else if (key == "out") {
    cfg.out_dir = value;
  } else if (key == "nodes") {
    cfg.nodes_path = value;
  } else if (key == "edges") {
    cfg.edges_path = value;
  } else if (key == "labels") {
    cfg.labels_path = value;
  } else if (key == "checkpoint") {
    cfg.checkpoint_path = value;
  } else {
    throw ConfigError("config: unknown key '" + key + "'");
  }
}

void load_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string text = trim(line);
    if (text.empty() || text[0] == '#') continue;
    const size_t eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    }
    apply_config_entry(cfg, text.substr(0, eq), text.substr(eq + 1));
  }
}

void validate_config(const RunConfig& cfg) {
  if (cfg.select_epochs && cfg.val_fraction <= 0.0) {
    throw ConfigError("config: select_epochs requires val_fraction > 0");
  }
}

std::string serialize_config(const RunConfig& cfg) {
  char buf[128];
  std::string out;
  auto put = [&](const char* key, const std::string& value) {
    out += key;
    out += "=";
    out += value;
    out += "\n";
  };
  auto put_real = [&](const char* key, double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    put(key, buf);
  };
  put_real("tau", cfg.tau);
  put_real("lr_pretrain", cfg.lr_pretrain);
  put_real("lr_tune", cfg.lr_tune);
  put("epochs_pretrain", std::to_string(cfg.epochs_pretrain));
  put("epochs_tune", std::to_string(cfg.epochs_tune));
  put("delta", std::to_string(cfg.delta));
  put("hidden_dim", std::to_string(cfg.hidden_dim));
  put("num_layers", std::to_string(cfg.num_layers));
  put("negatives_per_positive", std::to_string(cfg.negatives_per_positive));
  put("mode", cfg.mode);
  put("seed", std::to_string(cfg.seed));
  put("num_triplets", std::to_string(cfg.num_triplets));
  put("task", cfg.task);
  put("shots", std::to_string(cfg.shots));
  put("num_tasks", std::to_string(cfg.num_tasks));
  put("lp_negatives", std::to_string(cfg.lp_negatives));
  put_real("lp_holdout_fraction", cfg.lp_holdout_fraction);
  put("tune_prompts", cfg.tune_prompts ? "true" : "false");
  put("select_epochs", cfg.select_epochs ? "true" : "false");
  put_real("val_fraction", cfg.val_fraction);
  put("num_types", std::to_string(cfg.num_types));
  put("nodes_per_type", std::to_string(cfg.nodes_per_type));
  put("num_classes", std::to_string(cfg.num_classes));
  put_real("intra_edge_prob", cfg.intra_edge_prob);
  put_real("inter_edge_prob", cfg.inter_edge_prob);
  put("feature_dim", std::to_string(cfg.feature_dim));
  put_real("class_signal", cfg.class_signal);
  return out;
}

uint64_t config_hash(const RunConfig& cfg) {
  const std::string text = serialize_config(cfg);
  uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace hgpl
