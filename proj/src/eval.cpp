#include "unicon/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>

#include "unicon/linalg.hpp"
#include "unicon/simweights.hpp"
#include "unicon/solver.hpp"

namespace unicon {

namespace {

void check_shapes(const Matrix& sim, const Mask& mask) {
  if (sim.rows() != mask.rows() || sim.cols() != mask.cols()) {
    throw std::invalid_argument("similarity and mask shapes differ");
  }
  if (sim.rows() == 0 || sim.cols() == 0) {
    throw std::invalid_argument("similarity matrix is empty");
  }
}

Eigen::Index argmax_row(const Matrix& sim, Eigen::Index i) {
  Eigen::Index best = 0;
  for (Eigen::Index j = 1; j < sim.cols(); ++j) {
    if (sim(i, j) > sim(i, best)) best = j;
  }
  return best;
}

Eigen::Index argmax_col(const Matrix& sim, Eigen::Index j) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < sim.rows(); ++i) {
    if (sim(i, j) > sim(best, j)) best = i;
  }
  return best;
}

double recall_rows(const Matrix& sim, const Mask& mask, int k) {
  const Eigen::Index rows = sim.rows(), cols = sim.cols();
  int hits = 0;
  std::vector<Eigen::Index> order(cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
      return sim(i, a) > sim(i, b);
    });
    bool hit = false;
    for (int t = 0; t < k && !hit; ++t) hit = mask(i, order[t]);
    hits += hit;
  }
  return double(hits) / double(rows);
}

double max_rel_dev(const Matrix& a, const Matrix& b, double floor_abs) {
  double worst = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double denom = std::max({std::abs(a(i, j)), std::abs(b(i, j)), floor_abs});
      worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / denom);
    }
  }
  return worst;
}

Mask sample_valid_mask(Eigen::Index n, std::mt19937_64& rng) {
  std::bernoulli_distribution coin(0.3);
  std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
  Mask mask = Mask::Constant(n, n, false);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) mask(i, j) = coin(rng);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!mask.row(i).any()) mask(i, pick(rng)) = true;
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    if (!mask.col(j).any()) mask(pick(rng), j) = true;
  }
  return mask;
}

Matrix sample_similarity(Eigen::Index n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  Matrix s(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) s(i, j) = unit(rng);
  }
  return s;
}

// A central difference with step h shifts every similarity entry by at most
// ~1e-4 here, so any hinge argument at least `margin_gap` away from zero keeps
// its sign throughout the probe.
constexpr double kKinkGap = 1e-3;

bool hinge_args_clear_of_kinks(const LossFamily& family, const Matrix& s) {
  if (family.psi != PsiKind::kHingeMargin) return true;
  auto scan = [&](const Matrix& m) {
    const Eigen::Index n_rows = m.rows(), n_cols = m.cols();
    for (Eigen::Index a = 0; a < n_rows; ++a) {
      for (Eigen::Index b = 0; b < n_cols; ++b) {
        if (std::abs((1.0 - family.nu) * m(a, b) + family.margin) <= kKinkGap) {
          return false;
        }
        for (Eigen::Index c = 0; c < n_cols; ++c) {
          if (c == b) continue;
          if (std::abs(m(a, b) - family.nu * m(a, c) + family.margin) <= kKinkGap) {
            return false;
          }
        }
      }
    }
    return true;
  };
  return scan(s) && scan(Matrix(s.transpose()));
}

}  // namespace

MatchingAccuracy matching_accuracy(const Matrix& sim, const Mask& mask) {
  check_shapes(sim, mask);
  int row_hits = 0, col_hits = 0;
  for (Eigen::Index i = 0; i < sim.rows(); ++i) {
    row_hits += mask(i, argmax_row(sim, i));
  }
  for (Eigen::Index j = 0; j < sim.cols(); ++j) {
    col_hits += mask(argmax_col(sim, j), j);
  }
  MatchingAccuracy acc;
  acc.x_to_y = double(row_hits) / double(sim.rows());
  acc.y_to_x = double(col_hits) / double(sim.cols());
  acc.avg = 0.5 * (acc.x_to_y + acc.y_to_x);
  return acc;
}

RecallReport recall_at_k(const Matrix& sim, const Mask& mask,
                         const std::vector<int>& ks) {
  check_shapes(sim, mask);
  const Matrix sim_t = sim.transpose();
  const Mask mask_t = mask.transpose();
  RecallReport report;
  for (int k : ks) {
    if (k < 1) {
      throw std::invalid_argument("recall@k requires k >= 1, got " +
                                  std::to_string(k));
    }
    if (k > sim.cols()) {
      throw std::invalid_argument("recall@" + std::to_string(k) + " exceeds " +
                                  std::to_string(sim.cols()) +
                                  " candidates in the x-to-y direction");
    }
    if (k > sim.rows()) {
      throw std::invalid_argument("recall@" + std::to_string(k) + " exceeds " +
                                  std::to_string(sim.rows()) +
                                  " candidates in the y-to-x direction");
    }
    report.x_to_y[k] = recall_rows(sim, mask, k);
    report.y_to_x[k] = recall_rows(sim_t, mask_t, k);
  }
  return report;
}

GradCheckReport gradcheck(const LossFamily& family, int n, std::uint64_t seed) {
  if (n < 1 || n > 8) {
    throw std::invalid_argument("gradcheck expects 1 <= n <= 8, got " +
                                std::to_string(n));
  }
  constexpr int kMaxAttempts = 50;
  GradCheckReport report;

  // Stage 1: closed-form weights against -d loss / d similarity.
  Matrix s, mask_free_weights;
  Mask mask;
  bool found = false;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::mt19937_64 rng(seed + std::uint64_t(attempt));
    Matrix candidate = sample_similarity(n, rng);
    Mask candidate_mask = sample_valid_mask(n, rng);
    if (!hinge_args_clear_of_kinks(family, candidate)) {
      ++report.resamples;
      continue;
    }
    s = std::move(candidate);
    mask = std::move(candidate_mask);
    report.seed_used = seed + std::uint64_t(attempt);
    found = true;
    break;
  }
  if (!found) {
    throw std::runtime_error(
        "gradcheck could not sample a kink-free similarity in 50 attempts");
  }
  const Matrix weights = weights_generalized(family, s, mask);
  const Matrix fd = loss_grad_wrt_similarity(family, s, mask);
  report.max_rel_dev_weights = max_rel_dev(weights, -fd, 1e-8);

  // Stage 2: closed-form parameter gradient -F2*C^T + rho*F2*F2^T*F1 against
  // finite differences of the regularized objective in F1.
  const Eigen::Index m = std::min<Eigen::Index>(n, 5);
  const Eigen::Index d1 = 5, d2 = 4;
  const int r = 2;
  PairedBatch batch;
  batch.pos_mask = identity_mask(m);
  Matrix f1, f2, s0;
  found = false;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const std::uint64_t base = seed + 1000 + std::uint64_t(attempt);
    batch.x = seeded_gaussian(d1, m, base);
    batch.y = seeded_gaussian(d2, m, base + 1);
    f1 = 0.3 * seeded_gaussian(r, d1, base + 2);
    f2 = 0.3 * seeded_gaussian(r, d2, base + 3);
    s0 = (f1 * batch.x).transpose() * (f2 * batch.y);
    if (!hinge_args_clear_of_kinks(family, s0)) {
      ++report.resamples;
      continue;
    }
    found = true;
    break;
  }
  if (!found) {
    throw std::runtime_error(
        "gradcheck could not sample a kink-free parameter instance in 50 attempts");
  }
  const Matrix w0 = contrastive_weights(family, s0, batch.pos_mask);
  const Matrix c = contrastive_covariance(batch, w0);
  const Matrix analytic =
      -f2 * c.transpose() + family.rho * f2 * f2.transpose() * f1;

  auto objective = [&](const Matrix& f1_probe) {
    const Matrix probe_s = (f1_probe * batch.x).transpose() * (f2 * batch.y);
    return loss_value(family, probe_s, batch.pos_mask) +
           0.5 * family.rho * (f1_probe.transpose() * f2).squaredNorm();
  };
  Matrix fd_param(r, d1);
  const double h = 1e-5;
  Matrix probe = f1;
  for (int i = 0; i < r; ++i) {
    for (Eigen::Index j = 0; j < d1; ++j) {
      probe(i, j) = f1(i, j) + h;
      const double up = objective(probe);
      probe(i, j) = f1(i, j) - h;
      const double down = objective(probe);
      probe(i, j) = f1(i, j);
      fd_param(i, j) = (up - down) / (2.0 * h);
    }
  }
  report.max_rel_dev_linear = max_rel_dev(fd_param, analytic, 1e-8);

  report.pass =
      report.max_rel_dev_weights < 1e-4 && report.max_rel_dev_linear < 1e-3;
  return report;
}

}  // namespace unicon
