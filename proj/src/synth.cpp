#include "unicon/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

#include "unicon/linalg.hpp"

namespace unicon {

namespace {

void validate_config(const SynthConfig& cfg) {
  if (cfg.n < 1 || cfg.d1 < 1 || cfg.d2 < 1 || cfg.r_latent < 1 ||
      cfg.k_clusters < 1) {
    throw std::invalid_argument("synth config requires positive counts");
  }
  if (cfg.r_latent > std::min(cfg.d1, cfg.d2)) {
    throw std::invalid_argument("latent rank " + std::to_string(cfg.r_latent) +
                                " exceeds view dimensions " +
                                std::to_string(cfg.d1) + "x" +
                                std::to_string(cfg.d2));
  }
  if (cfg.snr < 0.0 || cfg.center_scale < 0.0 || cfg.within_cluster_std < 0.0) {
    throw std::invalid_argument("synth noise scales must be nonnegative");
  }
  const double total = cfg.split[0] + cfg.split[1] + cfg.split[2];
  if (cfg.split[0] < 0.0 || cfg.split[1] < 0.0 || cfg.split[2] < 0.0 ||
      std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("split fractions must be nonnegative and sum to 1");
  }
}

Matrix gaussian_from(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols,
                     double stddev) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = stddev * dist(rng);
  }
  return m;
}

void apply_nonlinearity(Matrix& m, Nonlinearity kind) {
  if (kind == Nonlinearity::kTanh) m = m.array().tanh().matrix();
}

SynthDataset take_columns(const SynthDataset& ds, const std::vector<int>& idx) {
  SynthDataset part;
  const Eigen::Index m = static_cast<Eigen::Index>(idx.size());
  part.batch.x = Matrix(ds.batch.x.rows(), m);
  part.batch.y = Matrix(ds.batch.y.rows(), m);
  part.latent = Matrix(ds.latent.rows(), m);
  part.labels.reserve(idx.size());
  for (Eigen::Index j = 0; j < m; ++j) {
    const int src = idx[static_cast<std::size_t>(j)];
    part.batch.x.col(j) = ds.batch.x.col(src);
    part.batch.y.col(j) = ds.batch.y.col(src);
    part.latent.col(j) = ds.latent.col(src);
    part.labels.push_back(ds.labels[static_cast<std::size_t>(src)]);
  }
  part.batch.pos_mask = identity_mask(m);
  part.config = ds.config;
  part.config.n = static_cast<int>(m);
  return part;
}

}  // namespace

SynthDataset generate(const SynthConfig& cfg) {
  validate_config(cfg);
  std::mt19937_64 rng(cfg.seed);

  // Draw order is part of the determinism contract:
  // centers -> latent -> x noise -> y noise.
  const Matrix centers =
      gaussian_from(rng, cfg.r_latent, cfg.k_clusters, cfg.center_scale);

  SynthDataset ds;
  ds.labels.reserve(static_cast<std::size_t>(cfg.n));
  for (int i = 0; i < cfg.n; ++i) ds.labels.push_back(i % cfg.k_clusters);

  ds.latent = gaussian_from(rng, cfg.r_latent, cfg.n, cfg.within_cluster_std);
  for (int i = 0; i < cfg.n; ++i) {
    ds.latent.col(i) += centers.col(ds.labels[static_cast<std::size_t>(i)]);
  }

  const Matrix u1 = haar_orthogonal(cfg.d1, cfg.r_latent, cfg.seed + 101);
  const Matrix u2 = haar_orthogonal(cfg.d2, cfg.r_latent, cfg.seed + 202);

  ds.batch.x = u1 * ds.latent + gaussian_from(rng, cfg.d1, cfg.n, cfg.snr);
  ds.batch.y = u2 * ds.latent + gaussian_from(rng, cfg.d2, cfg.n, cfg.snr);
  apply_nonlinearity(ds.batch.x, cfg.nonlinearity);
  apply_nonlinearity(ds.batch.y, cfg.nonlinearity);

  ds.batch.pos_mask = identity_mask(cfg.n);
  ds.config = cfg;
  return ds;
}

SynthDataset many_to_many_augment(const SynthDataset& ds, int copies,
                                  std::uint64_t seed) {
  if (copies < 1) {
    throw std::invalid_argument("many_to_many_augment requires copies >= 1");
  }
  if (copies == 1) return ds;

  const SynthConfig& cfg = ds.config;
  const Eigen::Index n = ds.batch.size();
  const Eigen::Index n_aug = n * copies;
  std::mt19937_64 rng(seed);

  // Same projection the generator used, so replicas are genuine re-draws of
  // the observation noise around the same latent point.
  const Matrix u2 = haar_orthogonal(cfg.d2, cfg.r_latent, cfg.seed + 202);

  SynthDataset aug;
  aug.batch.x = Matrix(ds.batch.x.rows(), n_aug);
  aug.batch.y = Matrix(ds.batch.y.rows(), n_aug);
  aug.latent = Matrix(ds.latent.rows(), n_aug);
  aug.labels.reserve(static_cast<std::size_t>(n_aug));
  aug.batch.pos_mask = Mask::Constant(n_aug, n_aug, false);

  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c = 0; c < copies; ++c) {
      const Eigen::Index col = i * copies + c;
      aug.batch.x.col(col) = ds.batch.x.col(i);
      aug.latent.col(col) = ds.latent.col(i);
      aug.labels.push_back(ds.labels[static_cast<std::size_t>(i)]);
      if (c == 0) {
        aug.batch.y.col(col) = ds.batch.y.col(i);
      } else {
        Matrix replica =
            u2 * ds.latent.col(i) + gaussian_from(rng, cfg.d2, 1, cfg.snr);
        apply_nonlinearity(replica, cfg.nonlinearity);
        aug.batch.y.col(col) = replica.col(0);
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (int c1 = 0; c1 < copies; ++c1) {
      for (int c2 = 0; c2 < copies; ++c2) {
        aug.batch.pos_mask(i * copies + c1, i * copies + c2) = true;
      }
    }
  }

  aug.config = cfg;
  aug.config.n = static_cast<int>(n_aug);
  return aug;
}

SynthSplits split_dataset(const SynthDataset& ds, std::uint64_t seed) {
  if (!is_identity_mask(ds.batch.pos_mask)) {
    throw std::invalid_argument(
        "split_dataset expects a one-to-one dataset; split before augmenting");
  }
  const int n = static_cast<int>(ds.batch.size());
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);

  const int n_train = static_cast<int>(std::lround(ds.config.split[0] * n));
  const int n_val = static_cast<int>(std::lround(ds.config.split[1] * n));
  if (n_train + n_val > n) {
    throw std::invalid_argument("split fractions leave no room for the test part");
  }

  const std::vector<int> train_idx(idx.begin(), idx.begin() + n_train);
  const std::vector<int> val_idx(idx.begin() + n_train,
                                 idx.begin() + n_train + n_val);
  const std::vector<int> test_idx(idx.begin() + n_train + n_val, idx.end());

  SynthSplits out;
  out.train = take_columns(ds, train_idx);
  out.val = take_columns(ds, val_idx);
  out.test = take_columns(ds, test_idx);
  return out;
}

}  // namespace unicon
