#pragma once

// Known Osserman tensors, random curvature tensors and perturbations.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "curvlab/error.hpp"
#include "curvlab/tensor.hpp"

namespace curvlab {

using Rng = std::mt19937_64;

/// Deterministic engine for a (seed, stream) pair.
inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x63757276u};
  return Rng(seq);
}

inline Vector gaussian_vector(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = normal(rng);
  return v;
}

/// Haar-distributed orthogonal matrix (QR of a Gaussian matrix, sign-fixed).
inline Matrix random_orthogonal(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(n, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) g(i, j) = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  const Matrix r = qr.matrixQR();
  for (int j = 0; j < n; ++j)
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

namespace detail {

inline void require_dim_at_least_two(int n) {
  if (n < 2) throw DimensionError("generator dimension must be >= 2, got " + std::to_string(n));
}

}  // namespace detail

/// Space form of curvature lambda: R(X,Y,Z,W) = lambda (<Y,Z><X,W> - <X,Z><Y,W>).
inline CurvatureTensor constant_curvature(int n, double lambda) {
  detail::require_dim_at_least_two(n);
  RawTensor r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      r(i, j, j, i) = lambda;
      r(i, j, i, j) = -lambda;
    }
  return from_dense(n, std::move(r.data()));
}

/// Unit-sphere curvature restricted to the plane span(e_0, e_1); zero elsewhere.
/// Not Osserman for n >= 3.
inline CurvatureTensor single_plane(int n) {
  detail::require_dim_at_least_two(n);
  RawTensor r(n);
  r(0, 1, 1, 0) = 1.0;
  r(1, 0, 0, 1) = 1.0;
  r(0, 1, 0, 1) = -1.0;
  r(1, 0, 1, 0) = -1.0;
  return from_dense(n, std::move(r.data()));
}

/// Anticommuting orthogonal complex structures with their curvature weights.
struct CliffordSystem {
  int n = 0;
  std::vector<Matrix> structures;
  double lambda0 = 1.0;
  std::vector<double> lambdas;
};

inline constexpr double kCliffordTolerance = 1e-12;

/// Largest deviation from J^T = -J, J^2 = -I and J_i J_j + J_j J_i = 0.
inline double clifford_defect(const std::vector<Matrix>& js) {
  double worst = 0.0;
  for (std::size_t a = 0; a < js.size(); ++a) {
    const Matrix& j = js[a];
    const auto n = j.rows();
    worst = std::max(worst, (j.transpose() + j).cwiseAbs().maxCoeff());
    worst = std::max(worst, (j * j + Matrix::Identity(n, n)).cwiseAbs().maxCoeff());
    for (std::size_t b = a + 1; b < js.size(); ++b) {
      worst = std::max(worst, (j * js[b] + js[b] * j).cwiseAbs().maxCoeff());
    }
  }
  return worst;
}

/// m anticommuting complex structures on R^n built from 2x2 (m = 1) or
/// quaternionic 4x4 (m = 2, 3) blocks, conjugated by a seeded random rotation.
inline std::vector<Matrix> make_clifford_structures(int n, int m, std::uint64_t seed) {
  if (m < 1 || m > 3) throw DimensionError("clifford structures: m must be 1, 2 or 3");
  if (n < 2 || n % 2 != 0) throw DimensionError("clifford structures: m >= 1 needs even n");
  if (m >= 2 && n % 4 != 0) throw DimensionError("clifford structures: m >= 2 needs n divisible by 4");

  std::vector<Matrix> blocks;
  if (m == 1) {
    Matrix j(2, 2);
    j << 0, -1, 1, 0;
    blocks.push_back(j);
  } else {
    // Left multiplication by i, j, k on the quaternions, basis (1, i, j, k).
    Matrix li(4, 4), lj(4, 4), lk(4, 4);
    li << 0, -1, 0, 0,  //
        1, 0, 0, 0,     //
        0, 0, 0, -1,    //
        0, 0, 1, 0;
    lj << 0, 0, -1, 0,  //
        0, 0, 0, 1,     //
        1, 0, 0, 0,     //
        0, -1, 0, 0;
    lk << 0, 0, 0, -1,  //
        0, 0, -1, 0,    //
        0, 1, 0, 0,     //
        1, 0, 0, 0;
    blocks = {li, lj, lk};
    blocks.resize(static_cast<std::size_t>(m));
  }

  Rng rng = make_rng(seed, 0xC11F);
  const Matrix q = random_orthogonal(n, rng);
  std::vector<Matrix> out;
  for (const Matrix& block : blocks) {
    const auto b = block.rows();
    Matrix j = Matrix::Zero(n, n);
    for (int off = 0; off < n; off += static_cast<int>(b)) j.block(off, off, b, b) = block;
    out.push_back(q * j * q.transpose());
  }
  return out;
}

/// R = lambda0 R1 + sum_i lambda_i R_{J_i} with
/// R_J(X,Y)Z = <JY,Z>JX - <JX,Z>JY - 2<JX,Y>JZ.
/// At unit X the Jacobi operator is lambda0 (I - XX^T) + 3 sum_i lambda_i (J_i X)(J_i X)^T.
inline CurvatureTensor clifford_osserman(const CliffordSystem& sys) {
  detail::require_dim_at_least_two(sys.n);
  if (sys.lambdas.size() != sys.structures.size()) {
    throw DimensionError("clifford system: one coefficient per structure required");
  }
  for (const Matrix& j : sys.structures) {
    if (j.rows() != sys.n || j.cols() != sys.n) throw DimensionError("clifford system: structure shape");
  }
  if (const double d = clifford_defect(sys.structures); d > kCliffordTolerance) {
    throw Error("clifford system: structures violate the Clifford relations by " + std::to_string(d));
  }

  const int n = sys.n;
  RawTensor r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      r(i, j, j, i) += sys.lambda0;
      r(i, j, i, j) -= sys.lambda0;
    }
  for (std::size_t s = 0; s < sys.structures.size(); ++s) {
    const Matrix& J = sys.structures[s];
    const double c = sys.lambdas[s];
    if (c == 0.0) continue;
    // <J e_a, e_b> = J(b, a).
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
          for (int l = 0; l < n; ++l)
            r(i, j, k, l) += c * (J(k, j) * J(l, i) - J(k, i) * J(l, j) - 2.0 * J(j, i) * J(l, k));
  }
  return from_dense(n, std::move(r.data()));
}

/// Complex space form: one complex structure, Jacobi spectrum {0, lambda0 + 3 lambda1, lambda0 ...}.
inline CurvatureTensor complex_space_form(int n, double lambda0, double lambda1, std::uint64_t seed = 0) {
  return clifford_osserman({n, make_clifford_structures(n, 1, seed), lambda0, {lambda1}});
}

/// Quaternionic space form: three structures with equal weights.
inline CurvatureTensor quaternionic_space_form(int n, double lambda0, double lambda1,
                                               std::uint64_t seed = 0) {
  return clifford_osserman({n, make_clifford_structures(n, 3, seed), lambda0, {lambda1, lambda1, lambda1}});
}

inline RawTensor gaussian_raw_tensor(int n, Rng& rng) {
  RawTensor raw(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : raw.data()) v = normal(rng);
  return raw;
}

/// Projected i.i.d. Gaussian tensor, Frobenius-normalized to `scale`.
inline CurvatureTensor random_curvature(int n, std::uint64_t seed, double scale = 1.0) {
  detail::require_dim_at_least_two(n);
  if (!(scale > 0.0)) throw Error("random_curvature: scale must be positive");
  Rng rng = make_rng(seed, 0x7A4D);
  const CurvatureTensor t = project_to_curvature(gaussian_raw_tensor(n, rng));
  return (scale / t.frobenius_norm()) * t;
}

/// t + eps * noise.
inline CurvatureTensor perturb(const CurvatureTensor& t, const CurvatureTensor& noise, double eps) {
  if (t.dim() != noise.dim()) throw DimensionError("perturb: dimension mismatch");
  if (eps == 0.0) return t;
  return t + eps * noise;
}

/// Kulkarni-Nomizu product of the metric with a symmetric form h:
/// (g.h)(X,Y,Z,W) = <Y,Z>h(X,W) + <X,W>h(Y,Z) - <X,Z>h(Y,W) - <Y,W>h(X,Z).
/// If hX = 0 for unit X, its Jacobi operator at X is exactly h.
inline CurvatureTensor metric_product(const Matrix& h) {
  const int n = static_cast<int>(h.rows());
  if (h.cols() != n) throw DimensionError("metric_product: h must be square");
  const Matrix s = 0.5 * (h + h.transpose());
  RawTensor r(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (int l = 0; l < n; ++l) {
          double v = 0.0;
          if (j == k) v += s(i, l);
          if (i == l) v += s(j, k);
          if (i == k) v -= s(j, l);
          if (j == l) v -= s(i, k);
          r(i, j, k, l) = v;
        }
  return from_dense(n, std::move(r.data()));
}

}  // namespace curvlab
