#pragma once

#include "hgpl/config.hpp"

namespace hgpl {

// CLI entry points. All of them throw ConfigError / DataError / NumericError;
// the binary maps those to exit codes 1 / 2 / 3. Outputs land in cfg.out_dir
// and are bit-identical across runs with the same inputs and seed.

// Writes one membership + edge file per view, plus manifest.tsv.
void cmd_decompose(const RunConfig& cfg);

// Writes nodes.tsv / edges.tsv / labels.tsv for a synthetic graph.
void cmd_gen_synth(const RunConfig& cfg);

// Pre-trains the encoder and writes checkpoint.bin + pretrain_curve.tsv.
void cmd_pretrain(const RunConfig& cfg);

// Loads a checkpoint and runs the few-shot benchmark for cfg.task; writes
// report_<task>.tsv and summary_<task>.txt.
void cmd_tune_eval(const RunConfig& cfg);

// Prints the validation report; returns 0 when the graph is valid, 2 when
// violations were found.
int cmd_validate(const RunConfig& cfg);

}  // namespace hgpl
