#include "unicon/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace unicon {

namespace {

constexpr double kNormFloor = 1e-12;

bool needs_bandwidth(KernelKind kind) {
  return kind == KernelKind::kRbf || kind == KernelKind::kMatern32 ||
         kind == KernelKind::kExpCosine;
}

void check_spec(const KernelSpec& spec) {
  if (needs_bandwidth(spec.kind) && spec.bandwidth <= 0.0) {
    throw std::invalid_argument("kernel bandwidth must be positive, got " +
                                std::to_string(spec.bandwidth));
  }
}

// Cosine of the angle with the argument clamped into arccos's domain; zero
// vectors contribute cosine 0.
double safe_cosine(const Vector& u, const Vector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu < kNormFloor || nv < kNormFloor) return 0.0;
  return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

}  // namespace

KernelKind kernel_kind_from_string(const std::string& name) {
  if (name == "linear") return KernelKind::kLinear;
  if (name == "angular" || name == "arc_cosine_order1") return KernelKind::kAngular;
  if (name == "cosine") return KernelKind::kCosine;
  if (name == "exp_cosine") return KernelKind::kExpCosine;
  if (name == "rbf") return KernelKind::kRbf;
  if (name == "matern32") return KernelKind::kMatern32;
  throw std::invalid_argument("unknown kernel kind: " + name);
}

std::string to_string(KernelKind kind) {
  switch (kind) {
    case KernelKind::kLinear:
      return "linear";
    case KernelKind::kAngular:
      return "angular";
    case KernelKind::kCosine:
      return "cosine";
    case KernelKind::kExpCosine:
      return "exp_cosine";
    case KernelKind::kRbf:
      return "rbf";
    case KernelKind::kMatern32:
      return "matern32";
  }
  throw std::logic_error("unreachable kernel kind");
}

double kernel_eval(const KernelSpec& spec, const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw std::invalid_argument("kernel arguments have different dimensions: " +
                                std::to_string(u.size()) + " vs " +
                                std::to_string(v.size()));
  }
  check_spec(spec);
  switch (spec.kind) {
    case KernelKind::kLinear:
      return spec.scale * u.dot(v);
    case KernelKind::kAngular: {
      const double nu = u.norm();
      const double nv = v.norm();
      if (nu < kNormFloor || nv < kNormFloor) return 0.0;
      const double cos_theta = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
      const double theta = std::acos(cos_theta);
      return spec.scale / std::numbers::pi * nu * nv *
             (std::sin(theta) + (std::numbers::pi - theta) * cos_theta);
    }
    case KernelKind::kCosine:
      return spec.scale * safe_cosine(u, v);
    case KernelKind::kExpCosine:
      return spec.scale * std::exp((safe_cosine(u, v) - 1.0) / spec.bandwidth);
    case KernelKind::kRbf: {
      const double d2 = (u - v).squaredNorm();
      return spec.scale * std::exp(-d2 / (2.0 * spec.bandwidth * spec.bandwidth));
    }
    case KernelKind::kMatern32: {
      const double t = std::sqrt(3.0) * (u - v).norm() / spec.bandwidth;
      return spec.scale * (1.0 + t) * std::exp(-t);
    }
  }
  throw std::logic_error("unreachable kernel kind");
}

Matrix gram(const KernelSpec& spec, const Matrix& data) {
  if (data.cols() < 1) {
    throw std::invalid_argument("gram matrix requires at least one sample");
  }
  check_spec(spec);
  const Eigen::Index n = data.cols();
  Matrix k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) {
      k(i, j) = kernel_eval(spec, data.col(i), data.col(j));
      k(j, i) = k(i, j);
    }
  }
  return k;
}

Matrix cross_gram(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
  check_spec(spec);
  Matrix k(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      k(i, j) = kernel_eval(spec, a.col(i), b.col(j));
    }
  }
  return k;
}

Matrix unit_normalize_columns(const Matrix& m) {
  Matrix out = m;
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double norm = out.col(j).norm();
    if (norm >= kNormFloor) out.col(j) /= norm;
  }
  return out;
}

}  // namespace unicon
