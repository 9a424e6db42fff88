#pragma once

#include <cstdint>
#include <optional>

#include "unicon/types.hpp"

namespace unicon {

struct TruncatedSvd {
  Matrix u;                 // rows(m) x r
  Vector singular_values;   // r, descending
  Matrix v;                 // cols(m) x r
};

struct SymEig {
  Vector eigenvalues;   // descending
  Matrix eigenvectors;  // columns match eigenvalue order
};

// Knobs for the spectral solvers. `tikhonov_lambda` left unset means
// "auto": 1e-6 * trace(K) / n, resolved per Gram matrix.
struct SpectralConfig {
  int rank = 1;
  std::optional<double> tikhonov_lambda;
  double pinv_threshold = 1e-10;
  int rsvd_oversampling = 10;
  int rsvd_power_iters = 2;
  bool use_randomized = false;
};

// Deterministic Gaussian fill (mt19937_64, column-major order).
Matrix seeded_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                       double stddev = 1.0);

// Rank-r truncated SVD, singular values descending. r is clamped to
// min(rows, cols).
TruncatedSvd svd_truncated(const Matrix& m, int r);

// Randomized range-finder SVD (Gaussian sketch, optional power iterations
// with QR re-orthonormalization). Requires r + oversampling <= min(rows, cols).
TruncatedSvd svd_randomized(const Matrix& m, int r, int oversampling,
                            int power_iters, std::uint64_t seed);

// Eigendecomposition of a symmetric matrix, eigenvalues descending.
// Throws if m is not square or not symmetric to a scaled tolerance.
SymEig sym_eig(const Matrix& m);

// (m + lambda I)^{1/2} with negative eigenvalues clamped to zero first.
Matrix psd_sqrt(const Matrix& m, double lambda = 0.0);

// Pseudo-inverse square root: eigenvalues below rel_threshold * max_eig are
// treated as zero. Returns the zero matrix when nothing survives.
Matrix psd_pinv_sqrt(const Matrix& m, double rel_threshold = 1e-10);

// QR-based Haar-distributed matrix with orthonormal columns (d x r).
Matrix haar_orthogonal(Eigen::Index d, Eigen::Index r, std::uint64_t seed);

}  // namespace unicon
