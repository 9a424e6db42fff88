#include "unicon/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace unicon {

Matrix seeded_gaussian(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                       double stddev) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = stddev * dist(rng);
  }
  return m;
}

TruncatedSvd svd_truncated(const Matrix& m, int r) {
  if (r < 0) throw std::invalid_argument("svd rank must be nonnegative");
  const Eigen::Index k =
      std::min<Eigen::Index>(r, std::min(m.rows(), m.cols()));
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.u = svd.matrixU().leftCols(k);
  out.singular_values = svd.singularValues().head(k);
  out.v = svd.matrixV().leftCols(k);
  return out;
}

namespace {

Matrix thin_q(const Matrix& m) {
  Eigen::HouseholderQR<Matrix> qr(m);
  return qr.householderQ() * Matrix::Identity(m.rows(), std::min(m.rows(), m.cols()));
}

}  // namespace

TruncatedSvd svd_randomized(const Matrix& m, int r, int oversampling,
                            int power_iters, std::uint64_t seed) {
  if (r < 1) throw std::invalid_argument("randomized svd rank must be positive");
  if (oversampling < 0 || power_iters < 0) {
    throw std::invalid_argument("randomized svd parameters must be nonnegative");
  }
  const Eigen::Index l = static_cast<Eigen::Index>(r) + oversampling;
  if (l > std::min(m.rows(), m.cols())) {
    throw std::invalid_argument(
        "randomized svd sketch size " + std::to_string(l) +
        " exceeds matrix dimensions " + std::to_string(m.rows()) + "x" +
        std::to_string(m.cols()));
  }
  const Matrix sketch = seeded_gaussian(m.cols(), l, seed);
  Matrix q = thin_q(m * sketch);
  for (int it = 0; it < power_iters; ++it) {
    // Re-orthonormalize between multiplications to keep the basis stable.
    const Matrix z = thin_q(m.transpose() * q);
    q = thin_q(m * z);
  }
  const Matrix b = q.transpose() * m;  // l x cols
  Eigen::BDCSVD<Matrix> svd(b, Eigen::ComputeThinU | Eigen::ComputeThinV);
  TruncatedSvd out;
  out.u = q * svd.matrixU().leftCols(r);
  out.singular_values = svd.singularValues().head(r);
  out.v = svd.matrixV().leftCols(r);
  return out;
}

SymEig sym_eig(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw std::invalid_argument("sym_eig requires a square matrix");
  }
  SymEig out;
  if (m.size() == 0) {
    out.eigenvalues = Vector(0);
    out.eigenvectors = Matrix(0, 0);
    return out;
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-8 * scale) {
    throw std::invalid_argument("sym_eig requires a symmetric matrix (max asymmetry " +
                                std::to_string(asym) + ")");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (m + m.transpose()));
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("symmetric eigendecomposition failed to converge");
  }
  // Eigen returns ascending order; flip to descending.
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

Matrix psd_sqrt(const Matrix& m, double lambda) {
  const SymEig eig = sym_eig(m);
  Vector d = eig.eigenvalues;
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    d(i) = std::sqrt(std::max(d(i), 0.0) + lambda);
  }
  return eig.eigenvectors * d.asDiagonal() * eig.eigenvectors.transpose();
}

Matrix psd_pinv_sqrt(const Matrix& m, double rel_threshold) {
  const SymEig eig = sym_eig(m);
  if (eig.eigenvalues.size() == 0) return m;
  const double top = eig.eigenvalues(0);
  if (top <= 0.0) return Matrix::Zero(m.rows(), m.cols());
  const double threshold = rel_threshold * top;
  Vector d = Vector::Zero(eig.eigenvalues.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    if (eig.eigenvalues(i) > threshold) d(i) = 1.0 / std::sqrt(eig.eigenvalues(i));
  }
  return eig.eigenvectors * d.asDiagonal() * eig.eigenvectors.transpose();
}

Matrix haar_orthogonal(Eigen::Index d, Eigen::Index r, std::uint64_t seed) {
  if (r > d) {
    throw std::invalid_argument("haar_orthogonal requires r <= d");
  }
  const Matrix g = seeded_gaussian(d, r, seed);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, r);
  // Fix the sign ambiguity of QR so the distribution is exactly Haar.
  for (Eigen::Index j = 0; j < r; ++j) {
    if (qr.matrixQR()(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

}  // namespace unicon
