#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace unicon {

// 64-bit scalars throughout internal computation; file I/O narrows to float32.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

// n paired samples, one per column of x and y. pos_mask(i, j) is true iff
// y_j is a positive partner of x_i.
struct PairedBatch {
  Matrix x;         // d1 x n
  Matrix y;         // d2 x n
  Mask pos_mask;    // n x n

  [[nodiscard]] Eigen::Index size() const { return x.cols(); }
};

inline Mask identity_mask(Eigen::Index n) {
  Mask m = Mask::Constant(n, n, false);
  for (Eigen::Index i = 0; i < n; ++i) m(i, i) = true;
  return m;
}

inline bool is_identity_mask(const Mask& mask) {
  if (mask.rows() != mask.cols()) return false;
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    for (Eigen::Index j = 0; j < mask.cols(); ++j) {
      if (mask(i, j) != (i == j)) return false;
    }
  }
  return true;
}

// Every x-row and y-column must have at least one positive partner.
inline void validate_mask(const Mask& mask) {
  for (Eigen::Index i = 0; i < mask.rows(); ++i) {
    if (!mask.row(i).any()) {
      throw std::invalid_argument("empty positive set for x index " + std::to_string(i));
    }
  }
  for (Eigen::Index j = 0; j < mask.cols(); ++j) {
    if (!mask.col(j).any()) {
      throw std::invalid_argument("empty positive set for y index " + std::to_string(j));
    }
  }
}

inline void validate_batch(const PairedBatch& batch) {
  if (batch.x.cols() != batch.y.cols()) {
    throw std::invalid_argument("paired batch sample counts differ: x has " +
                                std::to_string(batch.x.cols()) + ", y has " +
                                std::to_string(batch.y.cols()));
  }
  if (batch.pos_mask.rows() != batch.x.cols() || batch.pos_mask.cols() != batch.y.cols()) {
    throw std::invalid_argument("pos_mask shape does not match batch size");
  }
  if (!batch.x.allFinite() || !batch.y.allFinite()) {
    throw std::invalid_argument("paired batch contains non-finite entries");
  }
  validate_mask(batch.pos_mask);
}

}  // namespace unicon
