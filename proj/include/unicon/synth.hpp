#pragma once

#include <cstdint>
#include <vector>

#include "unicon/types.hpp"

namespace unicon {

enum class Nonlinearity { kNone, kTanh };

struct SynthConfig {
  int n = 600;
  int d1 = 40;
  int d2 = 30;
  int r_latent = 10;
  int k_clusters = 3;
  double snr = 0.3;          // noise standard deviation added to each view
  Nonlinearity nonlinearity = Nonlinearity::kNone;
  std::uint64_t seed = 0;
  double split[3] = {0.8, 0.1, 0.1};
  // Latent geometry knobs. The defaults put most of the per-sample identity
  // signal in the within-cluster deviation (std 2.5) while keeping cluster
  // centers distinguishable (scale 2.0); with snr = 0.3 this reproduces the
  // reference accuracy targets. Raise center_scale / shrink
  // within_cluster_std for strongly separated clusters instead.
  double center_scale = 2.0;
  double within_cluster_std = 2.5;
};

// Two views of a shared clustered latent: Z has k_clusters Gaussian centers,
// X = U1 Z + noise, Y = U2 Z + noise with Haar-orthonormal U1, U2. Optional
// elementwise tanh on both views. Positive mask is the identity.
struct SynthDataset {
  PairedBatch batch;
  Matrix latent;            // r_latent x n
  std::vector<int> labels;  // cluster index per sample
  SynthConfig config;
};

SynthDataset generate(const SynthConfig& cfg);

// Expand each y_i into `copies` positives of the same latent column (copy 0
// is the original y_i); the mask becomes block-diagonal. copies = 1 returns
// the dataset unchanged.
SynthDataset many_to_many_augment(const SynthDataset& ds, int copies,
                                  std::uint64_t seed);

struct SynthSplits {
  SynthDataset train;
  SynthDataset val;
  SynthDataset test;
};

// Seeded shuffle, then contiguous split by the config fractions.
SynthSplits split_dataset(const SynthDataset& ds, std::uint64_t seed);

}  // namespace unicon
