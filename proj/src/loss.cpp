#include "unicon/loss.hpp"

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace unicon {

namespace {

// Keeps phi differentiable at the log singularity without perturbing values.
constexpr double kLogGuard = 1e-8;
constexpr double kNormFloor = 1e-12;

}  // namespace

LossFamily loss_preset(const std::string& name) {
  LossFamily fam;
  if (name == "clip") {
    fam.phi = PhiKind::kTauLog;
    fam.psi = PsiKind::kExpOverTau;
  } else if (name == "clip-log1p") {
    fam.phi = PhiKind::kLog1p;
    fam.psi = PsiKind::kExpOverTau;
  } else if (name == "infonce") {
    fam.phi = PhiKind::kTauLog;
    fam.psi = PsiKind::kExpOverTau;
    fam.bidirectional = false;
  } else if (name == "triplet") {
    fam.phi = PhiKind::kIdentity;
    fam.psi = PsiKind::kHingeMargin;
    fam.epsilon_diag = 0.0;
  } else if (name == "identity") {
    fam.phi = PhiKind::kIdentity;
    fam.psi = PsiKind::kIdentity;
  } else {
    throw std::invalid_argument("unknown loss preset: " + name);
  }
  return fam;
}

double phi_value(const LossFamily& family, double x) {
  switch (family.phi) {
    case PhiKind::kIdentity:
      return x;
    case PhiKind::kTauLog:
      return family.tau * std::log(x);
    case PhiKind::kLog1p:
      return std::log1p(x);
  }
  throw std::logic_error("unreachable phi kind");
}

double phi_grad(const LossFamily& family, double x) {
  switch (family.phi) {
    case PhiKind::kIdentity:
      return 1.0;
    case PhiKind::kTauLog:
      return family.tau / (x + kLogGuard);
    case PhiKind::kLog1p:
      return 1.0 / (1.0 + x + kLogGuard);
  }
  throw std::logic_error("unreachable phi kind");
}

double psi_value(const LossFamily& family, double x) {
  switch (family.psi) {
    case PsiKind::kIdentity:
      return x;
    case PsiKind::kExpOverTau:
      return std::exp(x / family.tau);
    case PsiKind::kHingeMargin:
      return std::max(0.0, x + family.margin);
  }
  throw std::logic_error("unreachable psi kind");
}

double psi_grad(const LossFamily& family, double x) {
  switch (family.psi) {
    case PsiKind::kIdentity:
      return 1.0;
    case PsiKind::kExpOverTau:
      return std::exp(x / family.tau) / family.tau;
    case PsiKind::kHingeMargin:
      return x + family.margin > 0.0 ? 1.0 : 0.0;
  }
  throw std::logic_error("unreachable psi kind");
}

double epsilon_at(const LossFamily& family, const Mask& mask, Eigen::Index i,
                  Eigen::Index j) {
  return mask(i, j) ? family.epsilon_diag : family.epsilon_offdiag;
}

Matrix cosine_similarity(const Matrix& ex, const Matrix& ey) {
  if (ex.rows() != ey.rows()) {
    throw std::invalid_argument("embedding dimensions differ: " +
                                std::to_string(ex.rows()) + " vs " +
                                std::to_string(ey.rows()));
  }
  Matrix xn(ex.rows(), ex.cols());
  for (Eigen::Index j = 0; j < ex.cols(); ++j) {
    const double norm = ex.col(j).norm();
    if (norm < kNormFloor) {
      throw std::invalid_argument("zero-norm embedding column " +
                                  std::to_string(j) + " on the x side");
    }
    xn.col(j) = ex.col(j) / norm;
  }
  Matrix yn(ey.rows(), ey.cols());
  for (Eigen::Index j = 0; j < ey.cols(); ++j) {
    const double norm = ey.col(j).norm();
    if (norm < kNormFloor) {
      throw std::invalid_argument("zero-norm embedding column " +
                                  std::to_string(j) + " on the y side");
    }
    yn.col(j) = ey.col(j) / norm;
  }
  return xn.transpose() * yn;
}

namespace {

void check_loss_inputs(const Matrix& s, const Mask& mask) {
  if (s.rows() != mask.rows() || s.cols() != mask.cols()) {
    throw std::invalid_argument("similarity and mask shapes disagree");
  }
  validate_mask(mask);
}

}  // namespace

double loss_value(const LossFamily& family, const Matrix& s, const Mask& mask) {
  check_loss_inputs(s, mask);
  const Eigen::Index n_x = s.rows();
  const Eigen::Index n_y = s.cols();

  double row_total = 0.0;
  std::vector<Eigen::Index> pos, neg;
  for (Eigen::Index i = 0; i < n_x; ++i) {
    pos.clear();
    neg.clear();
    for (Eigen::Index j = 0; j < n_y; ++j) (mask(i, j) ? pos : neg).push_back(j);
    double anchor_sum = 0.0;
    for (const Eigen::Index k : pos) {
      double arg = epsilon_at(family, mask, i, k) *
                   psi_value(family, (1.0 - family.nu) * s(i, k));
      for (const Eigen::Index m : neg) {
        arg += epsilon_at(family, mask, i, m) *
               psi_value(family, s(i, m) - family.nu * s(i, k));
      }
      anchor_sum += phi_value(family, arg);
    }
    row_total += anchor_sum / static_cast<double>(pos.size());
  }
  if (!family.bidirectional) {
    return row_total / static_cast<double>(n_x);
  }

  double col_total = 0.0;
  for (Eigen::Index j = 0; j < n_y; ++j) {
    pos.clear();
    neg.clear();
    for (Eigen::Index i = 0; i < n_x; ++i) (mask(i, j) ? pos : neg).push_back(i);
    double anchor_sum = 0.0;
    for (const Eigen::Index k : pos) {
      double arg = epsilon_at(family, mask, k, j) *
                   psi_value(family, (1.0 - family.nu) * s(k, j));
      for (const Eigen::Index m : neg) {
        arg += epsilon_at(family, mask, m, j) *
               psi_value(family, s(m, j) - family.nu * s(k, j));
      }
      anchor_sum += phi_value(family, arg);
    }
    col_total += anchor_sum / static_cast<double>(pos.size());
  }
  return row_total / (2.0 * static_cast<double>(n_x)) +
         col_total / (2.0 * static_cast<double>(n_y));
}

Matrix loss_grad_wrt_similarity(const LossFamily& family, const Matrix& s,
                                const Mask& mask, double h) {
  check_loss_inputs(s, mask);
  Matrix grad(s.rows(), s.cols());
  Matrix probe = s;
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    for (Eigen::Index j = 0; j < s.cols(); ++j) {
      probe(i, j) = s(i, j) + h;
      const double up = loss_value(family, probe, mask);
      probe(i, j) = s(i, j) - h;
      const double down = loss_value(family, probe, mask);
      probe(i, j) = s(i, j);
      grad(i, j) = (up - down) / (2.0 * h);
    }
  }
  return grad;
}

}  // namespace unicon
