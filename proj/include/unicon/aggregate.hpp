#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "unicon/kernels.hpp"
#include "unicon/solver.hpp"
#include "unicon/types.hpp"

namespace unicon {

enum class PartitionScheme { kRandom, kBalanced };

enum class FusionKind { kAccuracyWeighted, kSoftmaxAccuracy, kMajorityVote };

struct FusionStrategy {
  FusionKind kind = FusionKind::kAccuracyWeighted;
  double softmax_temp = 1.0;
};

PartitionScheme partition_scheme_from_string(const std::string& name);
FusionKind fusion_kind_from_string(const std::string& name);
std::string to_string(PartitionScheme scheme);
std::string to_string(FusionKind kind);

using AlignmentModel = std::variant<LinearModel, KernelModel>;

struct BatchEnsemble {
  std::vector<AlignmentModel> models;
  std::vector<double> weights;
  FusionStrategy strategy;
  bool degenerate_weights = false;      // all validation accuracies were zero
  std::vector<double> val_accuracies;
};

// Split a batch into chunks of at most `batch_size` samples. kRandom
// shuffles; kBalanced round-robins by label (labels required). Chunks of
// one sample are dropped (noted in *warnings); induced sub-masks must stay
// valid or the partition throws.
std::vector<PairedBatch> partition(const PairedBatch& batch, int batch_size,
                                   PartitionScheme scheme, std::uint64_t seed,
                                   const std::vector<int>& labels = {},
                                   std::vector<std::string>* warnings = nullptr);

// One kernel fit per sub-batch (same seed each), weighted by validation
// matching accuracy according to the strategy.
BatchEnsemble fit_ensemble(const std::vector<PairedBatch>& sub_batches,
                           const PairedBatch& val, const LossFamily& family,
                           const KernelSpec& spec_x, const KernelSpec& spec_y,
                           int r, const FixedPointConfig& cfg,
                           const FusionStrategy& strategy, std::uint64_t seed);

// Linear-model variant of the same procedure.
BatchEnsemble fit_ensemble_linear(const std::vector<PairedBatch>& sub_batches,
                                  const PairedBatch& val, const LossFamily& family,
                                  int r, const FixedPointConfig& cfg,
                                  const FusionStrategy& strategy,
                                  std::uint64_t seed);

// Fused similarity matrix for new data.
Matrix ensemble_similarity(const BatchEnsemble& ens, const Matrix& x_new,
                           const Matrix& y_new);

// Strategy weights from validation accuracies (uniform for majority vote).
std::vector<double> fusion_weights(const std::vector<double>& val_accuracies,
                                   const FusionStrategy& strategy,
                                   bool* degenerate = nullptr);

// Prediction-level fusion seam: combine per-model similarity matrices.
// Majority vote returns row-modal argmax as a one-hot matrix.
Matrix fuse_similarities(const std::vector<Matrix>& sims,
                         const std::vector<double>& weights,
                         const FusionStrategy& strategy);

// Operator-level fusion for linear models: spectral step applied to the
// weighted sum of the per-model alignment operators.
LinearModel fuse_linear_operator_sum(const std::vector<LinearModel>& models,
                                     const std::vector<double>& weights, int r,
                                     double rho);

}  // namespace unicon
