#pragma once

#include <string>

#include "unicon/types.hpp"

namespace unicon {

// Outer transform phi applied to the aggregated per-anchor score.
enum class PhiKind { kIdentity, kTauLog, kLog1p };

// Inner transform psi applied to (shifted) similarity scores.
enum class PsiKind { kIdentity, kExpOverTau, kHingeMargin };

// A generalized contrastive loss instance. The similarity-space loss is
//
//   L = 1/(2n) sum_i 1/|P(i)| sum_{k in P(i)} phi( eps_ik psi((1-nu) s_ik)
//         + sum_{m not in P(i)} eps_im psi(s_im - nu s_ik) )
//
// plus the mirrored column-direction term; `bidirectional = false` keeps only
// the row direction with a 1/n prefactor. eps_ij is `epsilon_diag` on
// positive pairs and `epsilon_offdiag` elsewhere.
struct LossFamily {
  PhiKind phi = PhiKind::kIdentity;
  PsiKind psi = PsiKind::kIdentity;
  double nu = 1.0;
  double tau = 1.0;
  double margin = 0.5;
  double epsilon_diag = 1.0;
  double epsilon_offdiag = 1.0;
  bool bidirectional = true;
  double rho = 1.0;
};

// Named presets: "clip", "clip-log1p", "infonce", "triplet", "identity".
LossFamily loss_preset(const std::string& name);

double phi_value(const LossFamily& family, double x);
double phi_grad(const LossFamily& family, double x);
double psi_value(const LossFamily& family, double x);
double psi_grad(const LossFamily& family, double x);

double epsilon_at(const LossFamily& family, const Mask& mask, Eigen::Index i,
                  Eigen::Index j);

// Column-wise cosine similarity matrix: s_ij = <ex_i, ey_j> / (|ex_i| |ey_j|).
// Throws when a column has norm below 1e-12, naming the offending index.
Matrix cosine_similarity(const Matrix& ex, const Matrix& ey);

// Loss evaluated on a precomputed similarity matrix.
double loss_value(const LossFamily& family, const Matrix& s, const Mask& mask);

// Central finite differences of loss_value with respect to each s_ij.
Matrix loss_grad_wrt_similarity(const LossFamily& family, const Matrix& s,
                                const Mask& mask, double h = 1e-5);

}  // namespace unicon
