#include "unicon/simweights.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "unicon/loss.hpp"

using unicon::LossFamily;
using unicon::Mask;
using unicon::Matrix;
using unicon::Vector;

namespace {

Matrix random_similarity(Eigen::Index n_x, Eigen::Index n_y, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Matrix s(n_x, n_y);
  for (Eigen::Index j = 0; j < n_y; ++j) {
    for (Eigen::Index i = 0; i < n_x; ++i) s(i, j) = dist(rng);
  }
  return s;
}

TEST(WeightsOneToOne, IdentityFamilyFrozenStructure) {
  const LossFamily identity = unicon::loss_preset("identity");
  std::mt19937_64 rng(17);
  const Eigen::Index n = 3;
  const Matrix s = random_similarity(n, n, rng);
  const Matrix w = unicon::weights_one_to_one(identity, s);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double expected =
          (i == j) ? (double(n) - 1.0) / double(n) : -1.0 / double(n);
      EXPECT_NEAR(w(i, j), expected, 1e-14);
    }
  }
}

TEST(WeightsOneToOne, ClipSignStructure) {
  const LossFamily clip = unicon::loss_preset("clip");
  const Eigen::Index n = 4;
  Matrix s = Matrix::Constant(n, n, -1.0);
  s.diagonal().setConstant(1.0);
  const Matrix w = unicon::weights_one_to_one(clip, s);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) {
        EXPECT_GE(w(i, j), 0.0);
      } else {
        EXPECT_LE(w(i, j), 0.0);
      }
    }
  }
}

TEST(WeightsOneToOne, SingleSampleMatchesFiniteDifference) {
  std::mt19937_64 rng(5);
  for (const char* name : {"clip", "infonce", "identity", "clip-log1p"}) {
    const LossFamily fam = unicon::loss_preset(name);
    const Matrix s = random_similarity(1, 1, rng);
    const Matrix w = unicon::weights_one_to_one(fam, s);
    const Matrix fd =
        unicon::loss_grad_wrt_similarity(fam, s, unicon::identity_mask(1));
    EXPECT_NEAR(w(0, 0), -fd(0, 0),
                1e-4 * std::max(std::abs(fd(0, 0)), 1e-8))
        << name;
  }
}

TEST(WeightsOneToOne, RejectsNonSquare) {
  const LossFamily clip = unicon::loss_preset("clip");
  EXPECT_THROW(unicon::weights_one_to_one(clip, Matrix::Zero(2, 3)),
               std::invalid_argument);
}

TEST(WeightsGeneralized, DiagonalMaskMatchesOneToOnePath) {
  std::mt19937_64 rng(23);
  for (const char* name : {"clip", "clip-log1p", "infonce", "triplet", "identity"}) {
    const LossFamily fam = unicon::loss_preset(name);
    for (Eigen::Index n : {2, 5, 8}) {
      const Matrix s = random_similarity(n, n, rng);
      const Matrix fast = unicon::weights_one_to_one(fam, s);
      const Matrix general =
          unicon::weights_generalized(fam, s, unicon::identity_mask(n));
      EXPECT_LT((fast - general).cwiseAbs().maxCoeff(), 1e-12) << name << " n=" << n;
    }
  }
}

// The defining property from the closed-form derivation: the weight matrix is
// exactly the negative gradient of the loss in similarity space.
TEST(WeightsGeneralized, MatchesNegativeFiniteDifferenceGradient) {
  std::mt19937_64 rng(41);
  for (const char* name : {"clip", "infonce", "identity"}) {
    const LossFamily fam = unicon::loss_preset(name);
    for (Eigen::Index n = 2; n <= 8; ++n) {
      const Matrix s = random_similarity(n, n, rng);
      const Mask mask = oracle::random_valid_mask(n, n, rng);
      const Matrix w = unicon::weights_generalized(fam, s, mask);
      const Matrix fd = unicon::loss_grad_wrt_similarity(fam, s, mask);
      EXPECT_LT(oracle::max_rel_dev(w, Matrix(-fd)), 1e-4) << name << " n=" << n;
    }
  }
}

TEST(WeightsGeneralized, BlockMaskMatchesFiniteDifference) {
  std::mt19937_64 rng(59);
  const LossFamily clip = unicon::loss_preset("clip");
  const Eigen::Index n = 5;
  Mask mask = unicon::identity_mask(n);
  mask(1, 2) = true;  // |P_x(1)| = 2
  mask(2, 1) = true;
  const Matrix s = random_similarity(n, n, rng);
  const Matrix w = unicon::weights_generalized(clip, s, mask);
  const Matrix fd = unicon::loss_grad_wrt_similarity(clip, s, mask);
  EXPECT_LT(oracle::max_rel_dev(w, Matrix(-fd)), 1e-4);
}

TEST(WeightsGeneralized, AllTrueMaskUniformUnderConstantSimilarity) {
  const LossFamily identity = unicon::loss_preset("identity");
  const Eigen::Index n = 4;
  const Mask all_true = Mask::Constant(n, n, true);
  const Matrix s = Matrix::Constant(n, n, 0.4);
  const Matrix w = unicon::weights_generalized(identity, s, all_true);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      EXPECT_NEAR(w(i, j), w(0, 0), 1e-14);
    }
  }
}

TEST(WeightsDispatcher, PicksFastPathOnIdentityMask) {
  std::mt19937_64 rng(61);
  const LossFamily clip = unicon::loss_preset("clip");
  const Eigen::Index n = 4;
  const Matrix s = random_similarity(n, n, rng);
  const Matrix via_dispatch =
      unicon::contrastive_weights(clip, s, unicon::identity_mask(n));
  const Matrix direct = unicon::weights_one_to_one(clip, s);
  EXPECT_EQ((via_dispatch - direct).norm(), 0.0);

  Mask block = unicon::identity_mask(n);
  block(0, 1) = true;
  block(1, 0) = true;
  const Matrix general = unicon::contrastive_weights(clip, s, block);
  EXPECT_EQ((general - unicon::weights_generalized(clip, s, block)).norm(), 0.0);
}

TEST(WeightsScaleStructure, ReplicationHalvesOffDiagonal) {
  const LossFamily identity = unicon::loss_preset("identity");
  std::mt19937_64 rng(71);
  const Matrix s3 = random_similarity(3, 3, rng);
  Matrix s6(6, 6);
  s6 << s3, s3, s3, s3;
  const Matrix w3 = unicon::weights_one_to_one(identity, s3);
  const Matrix w6 = unicon::weights_one_to_one(identity, s6);
  EXPECT_NEAR(w6(0, 1), 0.5 * w3(0, 1), 1e-14);
  EXPECT_NEAR(w6(0, 5), 0.5 * w3(0, 2), 1e-14);
}

TEST(WeightsTriplet, InactiveHingesGiveZeroMatrix) {
  const LossFamily triplet = unicon::loss_preset("triplet");
  const Eigen::Index n = 3;
  Matrix s = Matrix::Constant(n, n, 0.1);
  s.diagonal().setConstant(0.9);
  const Matrix w = unicon::weights_one_to_one(triplet, s);
  EXPECT_EQ(w.norm(), 0.0);
}

TEST(BetaCoefficients, ConstantAlphaFrozenValues) {
  LossFamily identity = unicon::loss_preset("identity");
  std::mt19937_64 rng(83);
  const Eigen::Index n = 3;
  const Matrix s = random_similarity(n, n, rng);
  const auto beta = unicon::beta_coefficients(identity, s);
  for (Eigen::Index i = 0; i < n; ++i) {
    EXPECT_NEAR(beta.beta_pos(i), 1.0 * n - 1.0, 1e-14);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) EXPECT_NEAR(beta.beta_pair(i, j), 1.0, 1e-14);
    }
  }

  identity.nu = 2.0;
  const auto beta2 = unicon::beta_coefficients(identity, s);
  for (Eigen::Index i = 0; i < n; ++i) {
    EXPECT_NEAR(beta2.beta_pos(i), 2.0 * n - 1.0, 1e-14);
  }
}

TEST(BetaCoefficients, ReconstructsWeightedCovariance) {
  const LossFamily identity = unicon::loss_preset("identity");
  std::mt19937_64 rng(97);
  const Eigen::Index n = 2;
  const Matrix s = random_similarity(n, n, rng);
  const Matrix x = oracle::random_matrix(3, n, rng);
  const Matrix y = oracle::random_matrix(2, n, rng);

  const auto beta = unicon::beta_coefficients(identity, s);
  Matrix via_beta = Matrix::Zero(3, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    via_beta += beta.beta_pos(i) / double(n) * x.col(i) * y.col(i).transpose();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      via_beta -= beta.beta_pair(i, j) / double(n) * x.col(i) * y.col(j).transpose();
    }
  }

  const Matrix w = unicon::weights_one_to_one(identity, s);
  const Matrix via_weights = x * w * y.transpose();
  EXPECT_LT((via_beta - via_weights).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(BetaCoefficients, RejectsNonIdentityTransforms) {
  const LossFamily clip = unicon::loss_preset("clip");
  EXPECT_THROW(unicon::beta_coefficients(clip, Matrix::Zero(2, 2)),
               std::invalid_argument);
}

}  // namespace
