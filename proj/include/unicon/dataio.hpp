#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "unicon/aggregate.hpp"
#include "unicon/eval.hpp"
#include "unicon/kernels.hpp"
#include "unicon/solver.hpp"
#include "unicon/synth.hpp"
#include "unicon/types.hpp"

namespace unicon {

// Embedding container: magic "UEMB", u16 version, u32 rows (samples),
// u32 cols (dimension), float32 little-endian row-major payload. The loader
// returns data column-per-sample (dim x n) widened to double.
Matrix read_embeddings(const std::string& path);
void write_embeddings(const std::string& path, const Matrix& data);

// Pair mask CSV: header line, then "i,j" rows (0-based indices). A missing
// file yields the identity when n_x == n_y, otherwise throws.
Mask read_pair_mask(const std::string& path, Eigen::Index n_x, Eigen::Index n_y);
void write_pair_mask(const std::string& path, const Mask& mask);

std::vector<int> read_labels(const std::string& path);
void write_labels(const std::string& path, const std::vector<int>& labels);

// Model container: magic "UMDL", u16 version, u8 kind, matrix blocks,
// JSON trailer with the scalar fields. Ensembles nest sub-containers.
using StoredModel = std::variant<LinearModel, KernelModel, BatchEnsemble>;

void save_model(const std::string& path, const StoredModel& model);
StoredModel load_model(const std::string& path);

struct AggregationConfig {
  bool enabled = false;
  int batch_size = 0;
  FusionStrategy strategy;
  PartitionScheme scheme = PartitionScheme::kRandom;
};

struct RunConfig {
  LossFamily loss;
  std::string loss_preset_name = "clip";
  KernelSpec kernel_x;
  KernelSpec kernel_y;
  int rank = 10;
  FixedPointConfig fixed_point;
  AggregationConfig aggregation;
  std::uint64_t seed = 0;
  std::string resolved_json;  // canonical echo of the parsed configuration
};

// Strict parse: unknown keys anywhere are an error naming the offender.
RunConfig parse_run_config(const std::string& json_text);
RunConfig read_run_config(const std::string& path);

SynthConfig parse_synth_config(const std::string& json_text);
SynthConfig read_synth_config(const std::string& path);

struct EvalReport {
  MatchingAccuracy accuracy;
  RecallReport recall;
  double wall_time_seconds = 0.0;
  int iterations = 0;
  bool converged = true;
};

std::string report_to_json(const EvalReport& report,
                           const std::string& resolved_config_json = "");
std::string report_to_csv(const EvalReport& report);

}  // namespace unicon
