#include "unicon/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

#include "unicon/eval.hpp"
#include "unicon/linalg.hpp"

namespace unicon {

namespace {

PairedBatch take_samples(const PairedBatch& batch,
                         const std::vector<Eigen::Index>& idx) {
  PairedBatch sub;
  sub.x.resize(batch.x.rows(), Eigen::Index(idx.size()));
  sub.y.resize(batch.y.rows(), Eigen::Index(idx.size()));
  sub.pos_mask.resize(Eigen::Index(idx.size()), Eigen::Index(idx.size()));
  for (size_t a = 0; a < idx.size(); ++a) {
    sub.x.col(Eigen::Index(a)) = batch.x.col(idx[a]);
    sub.y.col(Eigen::Index(a)) = batch.y.col(idx[a]);
    for (size_t b = 0; b < idx.size(); ++b) {
      sub.pos_mask(Eigen::Index(a), Eigen::Index(b)) =
          batch.pos_mask(idx[a], idx[b]);
    }
  }
  return sub;
}

double validation_accuracy(const AlignmentModel& model, const PairedBatch& val) {
  const Matrix sim = std::visit(
      [&](const auto& m) -> Matrix {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, LinearModel>) {
          return linear_similarity(m, val.x, val.y);
        } else {
          return infer_kernel(m, val.x, val.y).sim;
        }
      },
      model);
  return matching_accuracy(sim, val.pos_mask).avg;
}

BatchEnsemble assemble(std::vector<AlignmentModel> models,
                       std::vector<double> accuracies,
                       const FusionStrategy& strategy) {
  BatchEnsemble ens;
  ens.models = std::move(models);
  ens.val_accuracies = std::move(accuracies);
  ens.strategy = strategy;
  ens.weights =
      fusion_weights(ens.val_accuracies, strategy, &ens.degenerate_weights);
  return ens;
}

void check_val(const PairedBatch& val) {
  if (val.size() == 0) {
    throw std::invalid_argument("validation batch is empty");
  }
  validate_batch(val);
}

}  // namespace

PartitionScheme partition_scheme_from_string(const std::string& name) {
  if (name == "random") return PartitionScheme::kRandom;
  if (name == "balanced") return PartitionScheme::kBalanced;
  throw std::invalid_argument("unknown partition scheme: " + name);
}

FusionKind fusion_kind_from_string(const std::string& name) {
  if (name == "accuracy") return FusionKind::kAccuracyWeighted;
  if (name == "softmax") return FusionKind::kSoftmaxAccuracy;
  if (name == "vote") return FusionKind::kMajorityVote;
  throw std::invalid_argument("unknown fusion strategy: " + name);
}

std::string to_string(PartitionScheme scheme) {
  return scheme == PartitionScheme::kRandom ? "random" : "balanced";
}

std::string to_string(FusionKind kind) {
  switch (kind) {
    case FusionKind::kAccuracyWeighted:
      return "accuracy";
    case FusionKind::kSoftmaxAccuracy:
      return "softmax";
    case FusionKind::kMajorityVote:
      return "vote";
  }
  throw std::invalid_argument("unknown fusion kind");
}

std::vector<PairedBatch> partition(const PairedBatch& batch, int batch_size,
                                   PartitionScheme scheme, std::uint64_t seed,
                                   const std::vector<int>& labels,
                                   std::vector<std::string>* warnings) {
  validate_batch(batch);
  if (batch_size < 2) {
    throw std::invalid_argument("partition needs batch_size >= 2, got " +
                                std::to_string(batch_size));
  }
  const Eigen::Index n = batch.size();
  std::mt19937_64 rng(seed);
  std::vector<Eigen::Index> order;

  if (scheme == PartitionScheme::kRandom) {
    order.resize(size_t(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::shuffle(order.begin(), order.end(), rng);
  } else {
    if (Eigen::Index(labels.size()) != n) {
      throw std::invalid_argument(
          "balanced partitioning needs one label per sample");
    }
    std::map<int, std::vector<Eigen::Index>> by_class;
    for (Eigen::Index i = 0; i < n; ++i) by_class[labels[size_t(i)]].push_back(i);
    for (auto& [label, members] : by_class) {
      std::shuffle(members.begin(), members.end(), rng);
    }
    // Round-robin one sample per class until all queues drain.
    std::vector<size_t> cursor(by_class.size(), 0);
    bool drained = false;
    while (!drained) {
      drained = true;
      size_t q = 0;
      for (auto& [label, members] : by_class) {
        if (cursor[q] < members.size()) {
          order.push_back(members[cursor[q]++]);
          drained = false;
        }
        ++q;
      }
    }
  }

  std::vector<PairedBatch> parts;
  for (Eigen::Index start = 0; start < n; start += batch_size) {
    const Eigen::Index len = std::min<Eigen::Index>(batch_size, n - start);
    if (len < 2) {
      if (warnings != nullptr) {
        warnings->push_back("dropping sub-batch of size 1 (sample index " +
                            std::to_string(order[size_t(start)]) +
                            "): contrastive losses need at least one negative");
      }
      continue;
    }
    const std::vector<Eigen::Index> idx(order.begin() + start,
                                        order.begin() + start + len);
    PairedBatch sub = take_samples(batch, idx);
    validate_batch(sub);  // sub-masks must keep every sample matched
    parts.push_back(std::move(sub));
  }
  return parts;
}

BatchEnsemble fit_ensemble(const std::vector<PairedBatch>& sub_batches,
                           const PairedBatch& val, const LossFamily& family,
                           const KernelSpec& spec_x, const KernelSpec& spec_y,
                           int r, const FixedPointConfig& cfg,
                           const FusionStrategy& strategy, std::uint64_t seed) {
  if (sub_batches.empty()) {
    throw std::invalid_argument("fit_ensemble needs at least one sub-batch");
  }
  check_val(val);
  std::vector<AlignmentModel> models;
  std::vector<double> accuracies;
  for (const PairedBatch& sub : sub_batches) {
    auto fit = fit_kernel(sub, family, spec_x, spec_y, r, cfg, seed);
    accuracies.push_back(validation_accuracy(fit.model, val));
    models.emplace_back(std::move(fit.model));
  }
  return assemble(std::move(models), std::move(accuracies), strategy);
}

BatchEnsemble fit_ensemble_linear(const std::vector<PairedBatch>& sub_batches,
                                  const PairedBatch& val,
                                  const LossFamily& family, int r,
                                  const FixedPointConfig& cfg,
                                  const FusionStrategy& strategy,
                                  std::uint64_t seed) {
  if (sub_batches.empty()) {
    throw std::invalid_argument("fit_ensemble needs at least one sub-batch");
  }
  check_val(val);
  std::vector<AlignmentModel> models;
  std::vector<double> accuracies;
  for (const PairedBatch& sub : sub_batches) {
    auto fit = fit_linear(sub, family, r, cfg, seed);
    accuracies.push_back(validation_accuracy(fit.model, val));
    models.emplace_back(std::move(fit.model));
  }
  return assemble(std::move(models), std::move(accuracies), strategy);
}

Matrix ensemble_similarity(const BatchEnsemble& ens, const Matrix& x_new,
                           const Matrix& y_new) {
  if (ens.models.empty()) {
    throw std::invalid_argument("ensemble holds no models");
  }
  std::vector<Matrix> sims;
  sims.reserve(ens.models.size());
  for (const AlignmentModel& model : ens.models) {
    sims.push_back(std::visit(
        [&](const auto& m) -> Matrix {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, LinearModel>) {
            if (x_new.rows() != m.f1.cols() || y_new.rows() != m.f2.cols()) {
              throw std::invalid_argument(
                  "query dimensions do not match the linear model");
            }
            return linear_similarity(m, x_new, y_new);
          } else {
            return infer_kernel(m, x_new, y_new).sim;
          }
        },
        model));
  }
  return fuse_similarities(sims, ens.weights, ens.strategy);
}

std::vector<double> fusion_weights(const std::vector<double>& val_accuracies,
                                   const FusionStrategy& strategy,
                                   bool* degenerate) {
  if (val_accuracies.empty()) {
    throw std::invalid_argument("fusion needs at least one accuracy");
  }
  if (degenerate != nullptr) *degenerate = false;
  const size_t k = val_accuracies.size();
  std::vector<double> weights(k, 1.0 / double(k));
  if (strategy.kind == FusionKind::kMajorityVote) return weights;

  const double top =
      *std::max_element(val_accuracies.begin(), val_accuracies.end());
  if (strategy.kind == FusionKind::kAccuracyWeighted) {
    const double total =
        std::accumulate(val_accuracies.begin(), val_accuracies.end(), 0.0);
    if (total <= 0.0) {
      if (degenerate != nullptr) *degenerate = true;
      return weights;  // uniform fallback when every model scored zero
    }
    for (size_t i = 0; i < k; ++i) weights[i] = val_accuracies[i] / total;
    return weights;
  }

  if (strategy.softmax_temp <= 0.0) {
    throw std::invalid_argument("softmax fusion needs a positive temperature");
  }
  if (top <= 0.0 && degenerate != nullptr) *degenerate = true;
  double total = 0.0;
  for (size_t i = 0; i < k; ++i) {
    weights[i] = std::exp((val_accuracies[i] - top) / strategy.softmax_temp);
    total += weights[i];
  }
  for (double& w : weights) w /= total;
  return weights;
}

Matrix fuse_similarities(const std::vector<Matrix>& sims,
                         const std::vector<double>& weights,
                         const FusionStrategy& strategy) {
  if (sims.empty()) {
    throw std::invalid_argument("fusion needs at least one similarity matrix");
  }
  if (sims.size() != weights.size()) {
    throw std::invalid_argument("got " + std::to_string(sims.size()) +
                                " similarity matrices but " +
                                std::to_string(weights.size()) + " weights");
  }
  const Eigen::Index rows = sims[0].rows(), cols = sims[0].cols();
  for (const Matrix& s : sims) {
    if (s.rows() != rows || s.cols() != cols) {
      throw std::invalid_argument("model similarity shapes differ");
    }
  }

  if (strategy.kind == FusionKind::kMajorityVote) {
    Matrix fused = Matrix::Zero(rows, cols);
    std::vector<int> votes(static_cast<size_t>(cols), 0);
    for (Eigen::Index i = 0; i < rows; ++i) {
      std::fill(votes.begin(), votes.end(), 0);
      for (const Matrix& s : sims) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < cols; ++j) {
          if (s(i, j) > s(i, best)) best = j;
        }
        ++votes[size_t(best)];
      }
      Eigen::Index modal = 0;
      for (Eigen::Index j = 1; j < cols; ++j) {
        if (votes[size_t(j)] > votes[size_t(modal)]) modal = j;
      }
      fused(i, modal) = 1.0;
    }
    return fused;
  }

  Matrix fused = Matrix::Zero(rows, cols);
  for (size_t i = 0; i < sims.size(); ++i) fused += weights[i] * sims[i];
  return fused;
}

LinearModel fuse_linear_operator_sum(const std::vector<LinearModel>& models,
                                     const std::vector<double>& weights, int r,
                                     double rho) {
  if (models.empty()) {
    throw std::invalid_argument("operator fusion needs at least one model");
  }
  if (models.size() != weights.size()) {
    throw std::invalid_argument("got " + std::to_string(models.size()) +
                                " models but " + std::to_string(weights.size()) +
                                " weights");
  }
  const Eigen::Index d1 = models[0].f1.cols(), d2 = models[0].f2.cols();
  Matrix sum = Matrix::Zero(d1, d2);
  for (size_t i = 0; i < models.size(); ++i) {
    if (models[i].f1.cols() != d1 || models[i].f2.cols() != d2) {
      throw std::invalid_argument("models act on different feature spaces");
    }
    sum += weights[i] * models[i].f1.transpose() * models[i].f2;
  }
  // Feeding rho * sum through the spectral step makes the fused product
  // operator equal the rank-r truncation of the weighted sum.
  return linear_spectral_step(rho * sum, r, rho);
}

}  // namespace unicon
