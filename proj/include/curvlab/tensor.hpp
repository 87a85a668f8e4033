#pragma once

// Algebraic curvature tensors on Euclidean R^n.
//
// Convention: components are R[i][j][k][l] = R(e_i, e_j, e_k, e_l) =
// <R(e_i, e_j) e_k, e_l> in an orthonormal basis, stored densely in
// row-major order (index ((i*n + j)*n + k)*n + l). The unit-sphere tensor is
// R1(X,Y)Z = <Y,Z>X - <X,Z>Y, so its Jacobi operator has eigenvalue +1 on X^perp.
//
// Dictionary for the slot order R(X,e,X,e) used in eigenvalue-branch
// arguments: R(X,e,X,e) = R(e,X,X,e) = <R_X e, e>, and the polarized form
// R(Y,e,X,e) is jacobi_form(X, Y, e, e) below.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "curvlab/error.hpp"

namespace curvlab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Relative tolerance used when validating the curvature identities.
inline constexpr double kSymmetryTolerance = 1e-12;
/// Accepted deviation of a Jacobi base vector from unit length.
inline constexpr double kUnitTolerance = 1e-12;

namespace detail {

inline std::size_t flat(int n, int i, int j, int k, int l) {
  return ((static_cast<std::size_t>(i) * n + j) * n + k) * n + l;
}

inline std::size_t checked_size(int n) {
  if (n < 1) throw DimensionError("tensor dimension must be positive, got " + std::to_string(n));
  const auto m = static_cast<std::size_t>(n);
  return m * m * m * m;
}

inline void require_finite(const std::vector<double>& data) {
  for (std::size_t idx = 0; idx < data.size(); ++idx) {
    if (!std::isfinite(data[idx])) {
      throw NonFiniteError("non-finite tensor component at flat index " + std::to_string(idx));
    }
  }
}

}  // namespace detail

/// Arbitrary rank-4 array of shape n^4; no symmetry assumed.
class RawTensor {
 public:
  explicit RawTensor(int n) : n_(n), data_(detail::checked_size(n), 0.0) {}

  RawTensor(int n, std::vector<double> data) : n_(n), data_(std::move(data)) {
    if (data_.size() != detail::checked_size(n)) {
      throw DimensionError("expected " + std::to_string(detail::checked_size(n)) +
                           " components for n=" + std::to_string(n) + ", got " +
                           std::to_string(data_.size()));
    }
  }

  int dim() const noexcept { return n_; }
  double& operator()(int i, int j, int k, int l) { return data_[detail::flat(n_, i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return data_[detail::flat(n_, i, j, k, l)]; }
  const std::vector<double>& data() const noexcept { return data_; }
  std::vector<double>& data() noexcept { return data_; }

 private:
  int n_;
  std::vector<double> data_;
};

struct SymmetryViolation {
  std::string identity;
  double max_violation = 0.0;
  std::array<int, 4> worst_index{0, 0, 0, 0};
};

inline const std::array<std::string, 4>& symmetry_identity_names() {
  static const std::array<std::string, 4> names{"antisymmetry-first-pair", "antisymmetry-last-pair",
                                                "pair-exchange", "first-bianchi"};
  return names;
}

/// Maximal absolute violation of each curvature identity, in the order of
/// symmetry_identity_names().
inline std::vector<SymmetryViolation> symmetry_violations(int n, const std::vector<double>& c) {
  std::vector<SymmetryViolation> out;
  for (const auto& name : symmetry_identity_names()) out.push_back({name, 0.0, {0, 0, 0, 0}});
  auto at = [&](int i, int j, int k, int l) { return c[detail::flat(n, i, j, k, l)]; };
  auto record = [&](std::size_t which, double v, int i, int j, int k, int l) {
    v = std::abs(v);
    if (v > out[which].max_violation) {
      out[which].max_violation = v;
      out[which].worst_index = {i, j, k, l};
    }
  };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double r = at(i, j, k, l);
          record(0, r + at(j, i, k, l), i, j, k, l);
          record(1, r + at(i, j, l, k), i, j, k, l);
          record(2, r - at(k, l, i, j), i, j, k, l);
          record(3, r + at(j, k, i, l) + at(k, i, j, l), i, j, k, l);
        }
  return out;
}

class CurvatureTensor;
CurvatureTensor project_to_curvature(const RawTensor& raw);

/// Immutable rank-4 tensor satisfying the algebraic curvature identities.
class CurvatureTensor {
 public:
  /// Validates shape, finiteness and all four identities. The identities are
  /// checked to kSymmetryTolerance * max(1, max |component|).
  static CurvatureTensor from_dense(int n, std::vector<double> data) {
    RawTensor raw(n, std::move(data));
    detail::require_finite(raw.data());
    double scale = 1.0;
    for (double v : raw.data()) scale = std::max(scale, std::abs(v));
    for (const auto& v : symmetry_violations(n, raw.data())) {
      if (v.max_violation > kSymmetryTolerance * scale) {
        throw SymmetryError(v.identity, v.max_violation, v.worst_index);
      }
    }
    return CurvatureTensor(n, std::move(raw.data()));
  }

  static CurvatureTensor zero(int n) {
    return CurvatureTensor(n, std::vector<double>(detail::checked_size(n), 0.0));
  }

  int dim() const noexcept { return n_; }
  double operator()(int i, int j, int k, int l) const { return data_[detail::flat(n_, i, j, k, l)]; }
  const std::vector<double>& data() const noexcept { return data_; }

  double frobenius_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  friend CurvatureTensor operator+(const CurvatureTensor& a, const CurvatureTensor& b) {
    require_same_dim(a, b);
    std::vector<double> out(a.data_);
    for (std::size_t idx = 0; idx < out.size(); ++idx) out[idx] += b.data_[idx];
    return CurvatureTensor(a.n_, std::move(out));
  }

  friend CurvatureTensor operator-(const CurvatureTensor& a, const CurvatureTensor& b) {
    return a + (-1.0) * b;
  }

  friend CurvatureTensor operator*(double s, const CurvatureTensor& t) {
    std::vector<double> out(t.data_);
    for (double& v : out) v *= s;
    return CurvatureTensor(t.n_, std::move(out));
  }

  friend bool operator==(const CurvatureTensor&, const CurvatureTensor&) = default;

 private:
  friend CurvatureTensor project_to_curvature(const RawTensor& raw);
  friend CurvatureTensor rotate(const CurvatureTensor& t, const Matrix& q);

  CurvatureTensor(int n, std::vector<double> data) : n_(n), data_(std::move(data)) {}

  static void require_same_dim(const CurvatureTensor& a, const CurvatureTensor& b) {
    if (a.n_ != b.n_) {
      throw DimensionError("tensor dimensions differ: " + std::to_string(a.n_) + " vs " +
                           std::to_string(b.n_));
    }
  }

  int n_;
  std::vector<double> data_;
};

inline CurvatureTensor from_dense(int n, std::vector<double> data) {
  return CurvatureTensor::from_dense(n, std::move(data));
}

inline std::vector<SymmetryViolation> validate_symmetries(const CurvatureTensor& t) {
  return symmetry_violations(t.dim(), t.data());
}

/// Frobenius inner product of two component arrays of equal shape.
inline double frobenius_inner(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("frobenius_inner: size mismatch");
  double s = 0.0;
  for (std::size_t idx = 0; idx < a.size(); ++idx) s += a[idx] * b[idx];
  return s;
}

/// Orthogonal (Frobenius) projection onto the space of algebraic curvature
/// tensors: antisymmetrize both pairs, symmetrize under pair exchange, then
/// apply id - sigma/3 where sigma is the cyclic sum over the first three slots.
inline CurvatureTensor project_to_curvature(const RawTensor& raw) {
  detail::require_finite(raw.data());
  const int n = raw.dim();
  const std::size_t size = raw.data().size();
  auto at = [n](const std::vector<double>& c, int i, int j, int k, int l) {
    return c[detail::flat(n, i, j, k, l)];
  };

  std::vector<double> a(size), b(size);
  const auto& r = raw.data();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          a[detail::flat(n, i, j, k, l)] = 0.5 * (at(r, i, j, k, l) - at(r, j, i, k, l));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          b[detail::flat(n, i, j, k, l)] = 0.5 * (at(a, i, j, k, l) - at(a, i, j, l, k));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l)
          a[detail::flat(n, i, j, k, l)] = 0.5 * (at(b, i, j, k, l) + at(b, k, l, i, j));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          const double cyclic = at(a, i, j, k, l) + at(a, j, k, i, l) + at(a, k, i, j, l);
          b[detail::flat(n, i, j, k, l)] = at(a, i, j, k, l) - cyclic / 3.0;
        }
  return CurvatureTensor(n, std::move(b));
}

/// Pulls the tensor back along the orthogonal map q:
/// result(qX, qY, qZ, qW) = t(X, Y, Z, W).
inline CurvatureTensor rotate(const CurvatureTensor& t, const Matrix& q) {
  const int n = t.dim();
  if (q.rows() != n || q.cols() != n) throw DimensionError("rotate: matrix shape mismatch");
  std::vector<double> cur(t.data_);
  std::vector<double> next(cur.size());
  const std::size_t stride[4] = {static_cast<std::size_t>(n) * n * n,
                                 static_cast<std::size_t>(n) * n, static_cast<std::size_t>(n), 1};
  // One mode product per slot: next[.. a ..] = sum_b q(a, b) cur[.. b ..].
  for (int mode = 0; mode < 4; ++mode) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t idx = 0; idx < cur.size(); ++idx) {
      const int b = static_cast<int>((idx / stride[mode]) % n);
      const std::size_t base = idx - b * stride[mode];
      const double v = cur[idx];
      if (v == 0.0) continue;
      for (int a = 0; a < n; ++a) next[base + a * stride[mode]] += q(a, b) * v;
    }
    std::swap(cur, next);
  }
  return CurvatureTensor(n, std::move(cur));
}

namespace detail {

inline void require_dim(const CurvatureTensor& t, const Vector& v, const char* what) {
  if (v.size() != t.dim()) {
    throw DimensionError(std::string(what) + ": vector of size " + std::to_string(v.size()) +
                         " for tensor of dimension " + std::to_string(t.dim()));
  }
}

}  // namespace detail

/// Quadrilinear contraction sum R[i][j][k][l] X_i Y_j Z_k W_l.
inline double evaluate(const CurvatureTensor& t, const Vector& x, const Vector& y, const Vector& z,
                       const Vector& w) {
  detail::require_dim(t, x, "evaluate");
  detail::require_dim(t, y, "evaluate");
  detail::require_dim(t, z, "evaluate");
  detail::require_dim(t, w, "evaluate");
  const int n = t.dim();
  const double* c = t.data().data();
  double total = 0.0;
  std::size_t idx = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double xy = x[i] * y[j];
      for (int k = 0; k < n; ++k) {
        const double xyz = xy * z[k];
        double row = 0.0;
        for (int l = 0; l < n; ++l) row += c[idx++] * w[l];
        total += xyz * row;
      }
    }
  return total;
}

/// The Jacobi operator R_X : Y -> R(Y, X)X at a unit vector X.
struct JacobiOperator {
  Vector base;
  Matrix matrix;  ///< matrix(a, b) = R(e_a, X, X, e_b)
};

/// Jacobi matrix without the unit-norm check; the result is bilinear in x.
inline Matrix jacobi_matrix(const CurvatureTensor& t, const Vector& x) {
  detail::require_dim(t, x, "jacobi_operator");
  const int n = t.dim();
  const double* c = t.data().data();
  Matrix m = Matrix::Zero(n, n);
  std::size_t idx = 0;
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double w = x[j] * x[k];
        for (int b = 0; b < n; ++b) m(a, b) += w * c[idx++];
      }
  return 0.5 * (m + m.transpose());
}

inline JacobiOperator jacobi_operator(const CurvatureTensor& t, const Vector& x) {
  detail::require_dim(t, x, "jacobi_operator");
  if (std::abs(x.norm() - 1.0) > kUnitTolerance) {
    throw DimensionError("jacobi_operator: base vector is not unit (norm " +
                         std::to_string(x.norm()) + ")");
  }
  return {x, jacobi_matrix(t, x)};
}

/// Polarized Jacobi form (R(u,X,Y,v) + R(u,Y,X,v)) / 2. Its diagonal
/// jacobi_form(X, X, u, u) is <R_X u, u>, and 2 * jacobi_form(X, Y, e, e)
/// is the derivative of <R_{X(phi)} e, e> along X(phi) = cos(phi) X + sin(phi) Y.
inline double jacobi_form(const CurvatureTensor& t, const Vector& x, const Vector& y,
                          const Vector& u, const Vector& v) {
  return 0.5 * (evaluate(t, u, x, y, v) + evaluate(t, u, y, x, v));
}

}  // namespace curvlab
