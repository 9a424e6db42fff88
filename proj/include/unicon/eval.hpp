#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "unicon/loss.hpp"
#include "unicon/types.hpp"

namespace unicon {

struct MatchingAccuracy {
  double x_to_y = 0.0;
  double y_to_x = 0.0;
  double avg = 0.0;
};

// Fraction of rows (columns) whose argmax similarity lands on a positive
// partner. Ties resolve to the lowest index.
MatchingAccuracy matching_accuracy(const Matrix& sim, const Mask& mask);

// recall@k per direction: a hit when any positive appears in the top-k.
// Throws if any k exceeds the candidate count.
struct RecallReport {
  std::map<int, double> x_to_y;
  std::map<int, double> y_to_x;
};

RecallReport recall_at_k(const Matrix& sim, const Mask& mask,
                         const std::vector<int>& ks);

// Finite-difference audit of the closed-form weights and of the linear
// parameter gradient on a small random instance. Hinge kinks are avoided by
// resampling; `resamples` records how many draws were rejected.
struct GradCheckReport {
  double max_rel_dev_weights = 0.0;
  double max_rel_dev_linear = 0.0;
  bool pass = false;
  int resamples = 0;
  std::uint64_t seed_used = 0;
};

GradCheckReport gradcheck(const LossFamily& family, int n, std::uint64_t seed);

}  // namespace unicon
