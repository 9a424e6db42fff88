#include "unicon/simweights.hpp"

#include <stdexcept>
#include <vector>

namespace unicon {

namespace {

// Gamma coefficients for the row direction: entry (i, j) is the derivative of
// the anchor-i sum with respect to s_ij, before the 1/(2n)/1/|P| scaling.
// The column direction is the same computation on the transposed problem.
Matrix gamma_matrix(const LossFamily& family, const Matrix& s, const Mask& mask) {
  const Eigen::Index n_r = s.rows();
  const Eigen::Index n_c = s.cols();
  Matrix gamma = Matrix::Zero(n_r, n_c);
  std::vector<Eigen::Index> pos, neg;
  std::vector<double> phi_prime;
  for (Eigen::Index i = 0; i < n_r; ++i) {
    pos.clear();
    neg.clear();
    for (Eigen::Index j = 0; j < n_c; ++j) (mask(i, j) ? pos : neg).push_back(j);

    phi_prime.assign(pos.size(), 0.0);
    for (std::size_t a = 0; a < pos.size(); ++a) {
      const Eigen::Index k = pos[a];
      double arg = epsilon_at(family, mask, i, k) *
                   psi_value(family, (1.0 - family.nu) * s(i, k));
      for (const Eigen::Index m : neg) {
        arg += epsilon_at(family, mask, i, m) *
               psi_value(family, s(i, m) - family.nu * s(i, k));
      }
      phi_prime[a] = phi_grad(family, arg);
    }

    for (const Eigen::Index j : neg) {
      double total = 0.0;
      for (std::size_t a = 0; a < pos.size(); ++a) {
        total += phi_prime[a] * psi_grad(family, s(i, j) - family.nu * s(i, pos[a]));
      }
      gamma(i, j) = epsilon_at(family, mask, i, j) * total;
    }

    for (std::size_t a = 0; a < pos.size(); ++a) {
      const Eigen::Index j = pos[a];
      double inner = epsilon_at(family, mask, i, j) * (1.0 - family.nu) *
                     psi_grad(family, (1.0 - family.nu) * s(i, j));
      for (const Eigen::Index m : neg) {
        inner -= family.nu * epsilon_at(family, mask, i, m) *
                 psi_grad(family, s(i, m) - family.nu * s(i, j));
      }
      gamma(i, j) = phi_prime[a] * inner;
    }
  }
  return gamma;
}

void check_square(const Matrix& s) {
  if (s.rows() != s.cols()) {
    throw std::invalid_argument("one-to-one weights require a square similarity matrix");
  }
}

// One-to-one alpha coefficients for the row direction; the column direction
// reuses this on the transposed similarity matrix.
Matrix alpha_matrix(const LossFamily& family, const Matrix& s) {
  const Eigen::Index n = s.rows();
  const Mask mask = identity_mask(n);
  Matrix alpha(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double row_arg = 0.0;
    for (Eigen::Index m = 0; m < n; ++m) {
      row_arg += epsilon_at(family, mask, i, m) *
                 psi_value(family, s(i, m) - family.nu * s(i, i));
    }
    const double phi_prime = phi_grad(family, row_arg);
    for (Eigen::Index j = 0; j < n; ++j) {
      alpha(i, j) = epsilon_at(family, mask, i, j) * phi_prime *
                    psi_grad(family, s(i, j) - family.nu * s(i, i));
    }
  }
  return alpha;
}

}  // namespace

Matrix weights_one_to_one(const LossFamily& family, const Matrix& s) {
  check_square(s);
  const Eigen::Index n = s.rows();
  if (n == 0) return Matrix(0, 0);
  const double dn = static_cast<double>(n);

  const Matrix alpha = alpha_matrix(family, s);
  if (!family.bidirectional) {
    Matrix w = -alpha / dn;
    for (Eigen::Index i = 0; i < n; ++i) {
      w(i, i) = (family.nu * alpha.row(i).sum() - alpha(i, i)) / dn;
    }
    return w;
  }

  // alpha_bar(i, j) is the column-direction coefficient of anchor y_i against
  // x_j, which is the row-direction alpha of the transposed problem.
  const Matrix alpha_bar = alpha_matrix(family, Matrix(s.transpose()));
  Matrix w = -(alpha + alpha_bar.transpose()) / (2.0 * dn);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pair_sum = 0.5 * (alpha.row(i).sum() + alpha_bar.row(i).sum());
    const double self = 0.5 * (alpha(i, i) + alpha_bar(i, i));
    w(i, i) = (family.nu * pair_sum - self) / dn;
  }
  return w;
}

Matrix weights_generalized(const LossFamily& family, const Matrix& s,
                           const Mask& mask) {
  if (s.rows() != mask.rows() || s.cols() != mask.cols()) {
    throw std::invalid_argument("similarity and mask shapes disagree");
  }
  validate_mask(mask);
  const Eigen::Index n_x = s.rows();
  const Eigen::Index n_y = s.cols();

  Vector pos_per_row = Vector::Zero(n_x);
  Vector pos_per_col = Vector::Zero(n_y);
  for (Eigen::Index i = 0; i < n_x; ++i) {
    for (Eigen::Index j = 0; j < n_y; ++j) {
      if (mask(i, j)) {
        pos_per_row(i) += 1.0;
        pos_per_col(j) += 1.0;
      }
    }
  }

  const Matrix gamma = gamma_matrix(family, s, mask);
  Matrix w(n_x, n_y);
  if (!family.bidirectional) {
    for (Eigen::Index i = 0; i < n_x; ++i) {
      for (Eigen::Index j = 0; j < n_y; ++j) {
        w(i, j) = -gamma(i, j) / (static_cast<double>(n_x) * pos_per_row(i));
      }
    }
    return w;
  }

  const Matrix gamma_bar =
      gamma_matrix(family, Matrix(s.transpose()), mask.transpose());
  for (Eigen::Index i = 0; i < n_x; ++i) {
    for (Eigen::Index j = 0; j < n_y; ++j) {
      w(i, j) = -(gamma(i, j) / (2.0 * static_cast<double>(n_x) * pos_per_row(i)) +
                  gamma_bar(j, i) / (2.0 * static_cast<double>(n_y) * pos_per_col(j)));
    }
  }
  return w;
}

Matrix contrastive_weights(const LossFamily& family, const Matrix& s,
                           const Mask& mask) {
  if (s.rows() == s.cols() && is_identity_mask(mask)) {
    return weights_one_to_one(family, s);
  }
  return weights_generalized(family, s, mask);
}

BetaCoefficients beta_coefficients(const LossFamily& family, const Matrix& s) {
  if (family.phi != PhiKind::kIdentity || family.psi != PsiKind::kIdentity) {
    throw std::invalid_argument(
        "beta coefficients are defined for the identity transform family only");
  }
  check_square(s);
  const Eigen::Index n = s.rows();
  const Matrix alpha = alpha_matrix(family, s);
  const Matrix alpha_bar = alpha_matrix(family, Matrix(s.transpose()));

  BetaCoefficients out;
  out.beta_pair = 0.5 * (alpha + alpha_bar.transpose());
  out.beta_pos = Vector(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double pair_sum = 0.5 * (alpha.row(i).sum() + alpha_bar.row(i).sum());
    const double self = 0.5 * (alpha(i, i) + alpha_bar(i, i));
    out.beta_pos(i) = family.nu * pair_sum - self;
  }
  return out;
}

}  // namespace unicon
