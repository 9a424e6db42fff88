#pragma once

#include <string>

#include "unicon/types.hpp"

namespace unicon {

// "angular" is an alias for the order-1 arc-cosine kernel.
enum class KernelKind {
  kLinear,
  kAngular,
  kCosine,
  kExpCosine,
  kRbf,
  kMatern32,
};

struct KernelSpec {
  KernelKind kind = KernelKind::kLinear;
  double bandwidth = 1.0;
  double scale = 1.0;
};

KernelKind kernel_kind_from_string(const std::string& name);
std::string to_string(KernelKind kind);

double kernel_eval(const KernelSpec& spec, const Vector& u, const Vector& v);

// Gram matrix of the columns of `data`. Upper triangle computed once and
// mirrored; result is symmetric by construction.
Matrix gram(const KernelSpec& spec, const Matrix& data);

// k(a_i, b_j) for columns of two data sets.
Matrix cross_gram(const KernelSpec& spec, const Matrix& a, const Matrix& b);

// Scale every column to unit Euclidean norm (zero columns left untouched).
Matrix unit_normalize_columns(const Matrix& m);

}  // namespace unicon
