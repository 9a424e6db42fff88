#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "unicon/kernels.hpp"
#include "unicon/linalg.hpp"
#include "unicon/loss.hpp"
#include "unicon/types.hpp"

namespace unicon {

// Linear maps F1 (r x d1) and F2 (r x d2); embeddings are F1 x, F2 y.
struct LinearModel {
  Matrix f1;
  Matrix f2;
  double rho = 1.0;
};

// Dual coefficients over the reference batch: embeddings of new data are
// A^T k_x(new) and B^T k_y(new) against the stored reference columns.
struct KernelModel {
  Matrix a;       // n x r
  Matrix b;       // n x r
  Matrix ref_x;   // d1 x n
  Matrix ref_y;   // d2 x n
  KernelSpec spec_x;
  KernelSpec spec_y;
  double rho = 1.0;
  bool normalized_inputs = true;
};

struct FixedPointConfig {
  int max_iters = 20;
  double rel_tol = 1e-4;
  SpectralConfig spectral;
};

struct FitDiagnostics {
  int iterations = 0;
  bool converged = false;
  std::vector<double> rel_changes;
  double wall_time_seconds = 0.0;
};

struct LinearFitResult {
  LinearModel model;
  FitDiagnostics diagnostics;
};

struct KernelFitResult {
  KernelModel model;
  FitDiagnostics diagnostics;
};

// C = X W Y^T for a weight matrix W over the batch similarities.
Matrix contrastive_covariance(const PairedBatch& batch, const Matrix& w);

// Closed-form minimizer of the linearized objective: given the weighted
// covariance C, returns F1, F2 built from its rank-r SVD with the shared
// 1/rho scaling split evenly, so F1^T F2 = [C]_r / rho.
LinearModel linear_spectral_step(const Matrix& c_gamma, int r, double rho,
                                 const SpectralConfig& cfg = {});

// Kernelized analogue: given Gram matrices and weights, returns dual
// coefficient matrices (A, B) so that Kx A B^T Ky = [Kx^{1/2} W Ky^{1/2}]_r / rho
// in the whitened sense.
std::pair<Matrix, Matrix> kernel_spectral_step(const Matrix& kx, const Matrix& ky,
                                               const Matrix& w, int r, double rho,
                                               const SpectralConfig& cfg = {});

// Fixed-point alternation in the linear regime: embed, reweight, re-solve.
LinearFitResult fit_linear(const PairedBatch& batch, const LossFamily& family,
                           int r, const FixedPointConfig& cfg, std::uint64_t seed);

// Kernelized fixed point. Columns are unit-normalized first unless disabled;
// Gram roots are factored once and reused across iterations.
KernelFitResult fit_kernel(const PairedBatch& batch, const LossFamily& family,
                           const KernelSpec& spec_x, const KernelSpec& spec_y,
                           int r, const FixedPointConfig& cfg, std::uint64_t seed,
                           bool normalize_inputs = true);

struct InferResult {
  Matrix ex;   // r x m_x embeddings
  Matrix ey;   // r x m_y embeddings
  Matrix sim;  // m_x x m_y cosine similarities
  int zero_norm_x = 0;
  int zero_norm_y = 0;
};

InferResult infer_kernel(const KernelModel& model, const Matrix& x_new,
                         const Matrix& y_new);

// Cosine similarity matrix induced by a linear model on raw inputs.
Matrix linear_similarity(const LinearModel& model, const Matrix& x,
                         const Matrix& y);

// Nonzero singular values of the weighted covariance and of the whitened
// kernel operator on the same batch; the two spectra agree in exact
// arithmetic with linear kernels.
struct SpectrumPair {
  Vector sv_c;
  Vector sv_m;
};

SpectrumPair linear_kernel_spectrum_check(const PairedBatch& batch,
                                          const Matrix& w, int r);

// Effective Tikhonov shift: explicit value if set, else 1e-6 * trace(k) / n.
double resolve_tikhonov(const SpectralConfig& cfg, const Matrix& k);

}  // namespace unicon
