#pragma once

// End-to-end drivers behind the command line subcommands.

#include "svi/config.hpp"
#include "svi/data/dataset.hpp"
#include "svi/eval/metrics.hpp"
#include "svi/infer/io.hpp"

#include <functional>
#include <string>
#include <vector>

namespace svi {

using LogFn = std::function<void(const std::string&)>;

/// Builds the corrupted corpus: train_clips clips in split "train" followed by
/// val_clips clips in split "val". Returns the written index.
data::DatasetIndex run_synth(const SynthConfig& config, std::uint64_t seed, const LogFn& log = {});

/// Annotation indices may be negative to count from the clip end (-1 = last frame).
std::vector<std::int64_t> resolve_annotation_indices(const std::vector<std::int64_t>& requested,
                                                     std::int64_t length);

/// Dataset input: every clip of the split, annotated with its ground-truth masks
/// at `annotate`. Clip input: frames/ of one directory plus an annotation folder.
std::vector<infer::ResultRecord> run_infer(const InferConfig& config, const LogFn& log = {});

/// Writes eval.jsonl and eval_table.txt into config.output.
eval::EvalReport run_eval(const EvalConfig& config);

}  // namespace svi
