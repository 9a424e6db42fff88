#include "unicon/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "unicon/simweights.hpp"

namespace unicon {

namespace {

// Seed for the internal randomized-SVD sketch; spectral steps expose no seed
// of their own, so determinism comes from fixing it here.
constexpr std::uint64_t kSketchSeed = 0x5eedULL;
constexpr double kNormFloor = 1e-12;

TruncatedSvd spectral_svd(const Matrix& m, int r, const SpectralConfig& cfg) {
  if (cfg.use_randomized &&
      r + cfg.rsvd_oversampling <= std::min(m.rows(), m.cols())) {
    return svd_randomized(m, r, cfg.rsvd_oversampling, cfg.rsvd_power_iters,
                          kSketchSeed);
  }
  return svd_truncated(m, r);
}

// Square root and pseudo-inverse square root of a Gram matrix from a single
// eigendecomposition, so the pair is exactly consistent: with lambda > 0 the
// pinv root is (K + lambda I)^{-1/2}; with lambda = 0 it inverts only on the
// numerical range.
struct GramRoots {
  Matrix root;
  Matrix pinv_root;
};

GramRoots factor_gram(const Matrix& k, double lambda, double pinv_threshold) {
  const SymEig eig = sym_eig(k);
  Vector shifted(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < shifted.size(); ++i) {
    shifted(i) = std::max(eig.eigenvalues(i), 0.0) + lambda;
  }
  const double top = shifted.size() > 0 ? shifted.maxCoeff() : 0.0;
  const double threshold = pinv_threshold * top;
  Vector root_d(shifted.size());
  Vector pinv_d(shifted.size());
  for (Eigen::Index i = 0; i < shifted.size(); ++i) {
    root_d(i) = std::sqrt(shifted(i));
    pinv_d(i) = shifted(i) > threshold ? 1.0 / root_d(i) : 0.0;
  }
  GramRoots out;
  out.root = eig.eigenvectors * root_d.asDiagonal() * eig.eigenvectors.transpose();
  out.pinv_root =
      eig.eigenvectors * pinv_d.asDiagonal() * eig.eigenvectors.transpose();
  return out;
}

std::pair<Matrix, Matrix> dual_step_from_roots(const GramRoots& rx,
                                               const GramRoots& ry, const Matrix& w,
                                               int r, double rho,
                                               const SpectralConfig& cfg) {
  const Matrix m = rx.root * w * ry.root;
  const TruncatedSvd svd = spectral_svd(m, r, cfg);
  const Matrix a = rx.pinv_root * svd.u;
  const Matrix b =
      ry.pinv_root * svd.v * (svd.singular_values / rho).asDiagonal();
  return {a, b};
}

// Cosine similarity that tolerates zero-norm embeddings: such pairs get a
// -inf sentinel instead of an exception, and the counts report how many
// columns were degenerate.
Matrix sentinel_cosine(const Matrix& ex, const Matrix& ey, int* zero_x,
                       int* zero_y) {
  Vector nx(ex.cols()), ny(ey.cols());
  int cx = 0, cy = 0;
  for (Eigen::Index j = 0; j < ex.cols(); ++j) {
    nx(j) = ex.col(j).norm();
    cx += (nx(j) < kNormFloor);
  }
  for (Eigen::Index j = 0; j < ey.cols(); ++j) {
    ny(j) = ey.col(j).norm();
    cy += (ny(j) < kNormFloor);
  }
  Matrix sim(ex.cols(), ey.cols());
  for (Eigen::Index i = 0; i < ex.cols(); ++i) {
    for (Eigen::Index j = 0; j < ey.cols(); ++j) {
      if (nx(i) < kNormFloor || ny(j) < kNormFloor) {
        sim(i, j) = -std::numeric_limits<double>::infinity();
      } else {
        sim(i, j) = ex.col(i).dot(ey.col(j)) / (nx(i) * ny(j));
      }
    }
  }
  if (zero_x) *zero_x = cx;
  if (zero_y) *zero_y = cy;
  return sim;
}

void check_rank_rho(int r, double rho, Eigen::Index max_rank,
                    const char* what) {
  if (r < 1 || r > max_rank) {
    throw std::invalid_argument(std::string(what) + ": rank " +
                                std::to_string(r) + " out of range [1, " +
                                std::to_string(max_rank) + "]");
  }
  if (rho <= 0.0) {
    throw std::invalid_argument(std::string(what) +
                                ": rho must be positive, got " +
                                std::to_string(rho));
  }
}

}  // namespace

double resolve_tikhonov(const SpectralConfig& cfg, const Matrix& k) {
  if (cfg.tikhonov_lambda.has_value()) return *cfg.tikhonov_lambda;
  if (k.rows() == 0) return 0.0;
  return 1e-6 * k.trace() / static_cast<double>(k.rows());
}

Matrix contrastive_covariance(const PairedBatch& batch, const Matrix& w) {
  if (batch.x.cols() != w.rows() || batch.y.cols() != w.cols()) {
    throw std::invalid_argument("weight matrix shape does not match batch");
  }
  return batch.x * w * batch.y.transpose();
}

LinearModel linear_spectral_step(const Matrix& c_gamma, int r, double rho,
                                 const SpectralConfig& cfg) {
  check_rank_rho(r, rho, std::min(c_gamma.rows(), c_gamma.cols()),
                 "linear_spectral_step");
  const TruncatedSvd svd = spectral_svd(c_gamma, r, cfg);
  Vector scaled = svd.singular_values / rho;
  for (Eigen::Index i = 0; i < scaled.size(); ++i) scaled(i) = std::sqrt(scaled(i));
  LinearModel model;
  model.f1 = scaled.asDiagonal() * svd.u.transpose();
  model.f2 = scaled.asDiagonal() * svd.v.transpose();
  model.rho = rho;
  return model;
}

std::pair<Matrix, Matrix> kernel_spectral_step(const Matrix& kx, const Matrix& ky,
                                               const Matrix& w, int r, double rho,
                                               const SpectralConfig& cfg) {
  if (kx.rows() != kx.cols() || ky.rows() != ky.cols() ||
      kx.rows() != w.rows() || ky.rows() != w.cols()) {
    throw std::invalid_argument("kernel_spectral_step: Gram/weight shapes disagree");
  }
  check_rank_rho(r, rho, std::min(w.rows(), w.cols()), "kernel_spectral_step");
  const GramRoots rx = factor_gram(kx, resolve_tikhonov(cfg, kx), cfg.pinv_threshold);
  const GramRoots ry = factor_gram(ky, resolve_tikhonov(cfg, ky), cfg.pinv_threshold);
  return dual_step_from_roots(rx, ry, w, r, rho, cfg);
}

LinearFitResult fit_linear(const PairedBatch& batch, const LossFamily& family,
                           int r, const FixedPointConfig& cfg, std::uint64_t seed) {
  validate_batch(batch);
  if (cfg.max_iters < 1) {
    throw std::invalid_argument("fit_linear: max_iters must be at least 1");
  }
  const auto start = std::chrono::steady_clock::now();

  LinearFitResult out;
  out.model.f1 = seeded_gaussian(r, batch.x.rows(), seed, 0.1);
  out.model.f2 = seeded_gaussian(r, batch.y.rows(), seed + 1, 0.1);
  out.model.rho = family.rho;
  Matrix prev_op = out.model.f1.transpose() * out.model.f2;

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Matrix s = cosine_similarity(Matrix(out.model.f1 * batch.x),
                                       Matrix(out.model.f2 * batch.y));
    const Matrix w = contrastive_weights(family, s, batch.pos_mask);
    const Matrix c = contrastive_covariance(batch, w);
    out.model = linear_spectral_step(c, r, family.rho, cfg.spectral);

    const Matrix op = out.model.f1.transpose() * out.model.f2;
    const double rel = (op - prev_op).norm() / std::max(prev_op.norm(), 1e-15);
    out.diagnostics.rel_changes.push_back(rel);
    out.diagnostics.iterations = it;
    prev_op = op;
    if (rel < cfg.rel_tol) {
      out.diagnostics.converged = true;
      break;
    }
  }

  out.diagnostics.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

KernelFitResult fit_kernel(const PairedBatch& batch, const LossFamily& family,
                           const KernelSpec& spec_x, const KernelSpec& spec_y,
                           int r, const FixedPointConfig& cfg, std::uint64_t seed,
                           bool normalize_inputs) {
  validate_batch(batch);
  if (cfg.max_iters < 1) {
    throw std::invalid_argument("fit_kernel: max_iters must be at least 1");
  }
  const auto start = std::chrono::steady_clock::now();
  const Eigen::Index n = batch.size();

  KernelFitResult out;
  out.model.ref_x = normalize_inputs ? unit_normalize_columns(batch.x) : batch.x;
  out.model.ref_y = normalize_inputs ? unit_normalize_columns(batch.y) : batch.y;
  out.model.spec_x = spec_x;
  out.model.spec_y = spec_y;
  out.model.rho = family.rho;
  out.model.normalized_inputs = normalize_inputs;

  const Matrix kx = gram(spec_x, out.model.ref_x);
  const Matrix ky = gram(spec_y, out.model.ref_y);
  // The Gram factorizations do not change across iterations; factor once.
  const GramRoots rx =
      factor_gram(kx, resolve_tikhonov(cfg.spectral, kx), cfg.spectral.pinv_threshold);
  const GramRoots ry =
      factor_gram(ky, resolve_tikhonov(cfg.spectral, ky), cfg.spectral.pinv_threshold);

  out.model.a = seeded_gaussian(n, r, seed, 0.1);
  out.model.b = seeded_gaussian(n, r, seed + 1, 0.1);
  Matrix prev_op = out.model.a * out.model.b.transpose();

  for (int it = 1; it <= cfg.max_iters; ++it) {
    const Matrix s = cosine_similarity(Matrix(out.model.a.transpose() * kx),
                                       Matrix(out.model.b.transpose() * ky));
    const Matrix w = contrastive_weights(family, s, batch.pos_mask);
    auto [a, b] = dual_step_from_roots(rx, ry, w, r, family.rho, cfg.spectral);
    out.model.a = std::move(a);
    out.model.b = std::move(b);

    const Matrix op = out.model.a * out.model.b.transpose();
    const double rel = (op - prev_op).norm() / std::max(prev_op.norm(), 1e-15);
    out.diagnostics.rel_changes.push_back(rel);
    out.diagnostics.iterations = it;
    prev_op = op;
    if (rel < cfg.rel_tol) {
      out.diagnostics.converged = true;
      break;
    }
  }

  out.diagnostics.wall_time_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  return out;
}

InferResult infer_kernel(const KernelModel& model, const Matrix& x_new,
                         const Matrix& y_new) {
  if (x_new.rows() != model.ref_x.rows()) {
    throw std::invalid_argument("infer_kernel: x dimension " +
                                std::to_string(x_new.rows()) +
                                " does not match reference dimension " +
                                std::to_string(model.ref_x.rows()));
  }
  if (y_new.rows() != model.ref_y.rows()) {
    throw std::invalid_argument("infer_kernel: y dimension " +
                                std::to_string(y_new.rows()) +
                                " does not match reference dimension " +
                                std::to_string(model.ref_y.rows()));
  }
  const Matrix xn =
      model.normalized_inputs ? unit_normalize_columns(x_new) : x_new;
  const Matrix yn =
      model.normalized_inputs ? unit_normalize_columns(y_new) : y_new;

  InferResult out;
  out.ex = model.a.transpose() * cross_gram(model.spec_x, model.ref_x, xn);
  out.ey = model.b.transpose() * cross_gram(model.spec_y, model.ref_y, yn);
  out.sim = sentinel_cosine(out.ex, out.ey, &out.zero_norm_x, &out.zero_norm_y);
  return out;
}

Matrix linear_similarity(const LinearModel& model, const Matrix& x,
                         const Matrix& y) {
  if (x.rows() != model.f1.cols()) {
    throw std::invalid_argument("linear_similarity: x dimension mismatch");
  }
  if (y.rows() != model.f2.cols()) {
    throw std::invalid_argument("linear_similarity: y dimension mismatch");
  }
  return sentinel_cosine(Matrix(model.f1 * x), Matrix(model.f2 * y), nullptr,
                         nullptr);
}

SpectrumPair linear_kernel_spectrum_check(const PairedBatch& batch,
                                          const Matrix& w, int r) {
  const Matrix c = contrastive_covariance(batch, w);
  const KernelSpec linear{KernelKind::kLinear, 1.0, 1.0};
  const Matrix kx = gram(linear, batch.x);
  const Matrix ky = gram(linear, batch.y);
  const Matrix m = psd_sqrt(kx, 0.0) * w * psd_sqrt(ky, 0.0);
  SpectrumPair out;
  out.sv_c = svd_truncated(c, r).singular_values;
  out.sv_m = svd_truncated(m, r).singular_values;
  return out;
}

}  // namespace unicon
