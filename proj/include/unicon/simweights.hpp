#pragma once

#include "unicon/loss.hpp"
#include "unicon/types.hpp"

namespace unicon {

// Closed-form weight matrix S for the one-to-one (identity positive set)
// case. Defining property: S = -dL/ds at the given similarity matrix.
Matrix weights_one_to_one(const LossFamily& family, const Matrix& s);

// General positive sets: same defining property, arbitrary mask.
Matrix weights_generalized(const LossFamily& family, const Matrix& s,
                           const Mask& mask);

// Dispatcher: uses the one-to-one fast path when the mask is the identity.
Matrix contrastive_weights(const LossFamily& family, const Matrix& s,
                           const Mask& mask);

// Pairwise/positive decomposition of the one-to-one weights for the
// identity-transform family: S_ij = -beta_pair_ij / n off the diagonal and
// S_ii = beta_pos_i / n. Throws unless phi and psi are identities.
struct BetaCoefficients {
  Matrix beta_pair;  // n x n
  Vector beta_pos;   // n
};

BetaCoefficients beta_coefficients(const LossFamily& family, const Matrix& s);

}  // namespace unicon
