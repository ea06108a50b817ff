#pragma once

// Dense symmetric-matrix primitives. Every function here takes Eigen
// expressions and returns plain dense matrices whose upper and lower
// triangles are bit-identical.

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>

#include "egg/errors.hpp"

namespace egg {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Index = Eigen::Index;

/// Copy of `a` with the lower triangle overwritten by the average of both
/// triangles, mirrored. The result is exactly symmetric.
template <typename Derived>
Matrix<typename Derived::Scalar> symmetrize(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw DimensionError("symmetrize: matrix is not square");
  Matrix<Scalar> out(a.rows(), a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    out(j, j) = a(j, j);
    for (Index i = j + 1; i < a.rows(); ++i) {
      const Scalar v = (a(i, j) + a(j, i)) / Scalar(2);
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return out;
}

template <typename Derived>
bool is_symmetric(const Eigen::MatrixBase<Derived>& a) {
  if (a.rows() != a.cols()) return false;
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = j + 1; i < a.rows(); ++i)
      if (a(i, j) != a(j, i)) return false;
  return true;
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& a) {
  return a.allFinite();
}

template <typename Scalar>
struct EigenDecomposition {
  Vector<Scalar> eigenvalues;   // descending
  Matrix<Scalar> eigenvectors;  // orthonormal columns, matching eigenvalues
};

template <typename Derived>
EigenDecomposition<typename Derived::Scalar> eigen_decompose(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols() || a.rows() < 1)
    throw DimensionError("eigen_decompose: expected a non-empty square matrix");
  if (!a.allFinite()) throw DomainError("eigen_decompose: non-finite entry");
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a.derived());
  if (solver.info() != Eigen::Success) throw DomainError("eigen_decompose: eigensolver failed");
  EigenDecomposition<Scalar> out;
  out.eigenvalues = solver.eigenvalues().reverse();
  out.eigenvectors = solver.eigenvectors().rowwise().reverse();
  return out;
}

template <typename Derived>
typename Derived::Scalar min_eigenvalue(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> solver(a.derived(), Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw DomainError("min_eigenvalue: eigensolver failed");
  return solver.eigenvalues()(0);
}

/// Rebuilds U diag(values) Uᵀ, exactly symmetric.
template <typename Scalar>
Matrix<Scalar> recompose(const Matrix<Scalar>& vectors, const Vector<Scalar>& values) {
  return symmetrize(vectors * values.asDiagonal() * vectors.transpose());
}

/// f(A) = Σ f(σ_j) U_j U_jᵀ.
template <typename Derived, typename F>
Matrix<typename Derived::Scalar> spectral_map(const Eigen::MatrixBase<Derived>& a, F&& f) {
  using Scalar = typename Derived::Scalar;
  auto eig = eigen_decompose(a);
  Vector<Scalar> mapped(eig.eigenvalues.size());
  for (Index j = 0; j < mapped.size(); ++j) {
    const Scalar v = f(eig.eigenvalues(j));
    if (!std::isfinite(static_cast<double>(v))) {
      std::ostringstream msg;
      msg << "spectral_map: f is not finite at eigenvalue " << eig.eigenvalues(j) << " (index " << j
          << ")";
      throw DomainError(msg.str());
    }
    mapped(j) = v;
  }
  return recompose<Scalar>(eig.eigenvectors, mapped);
}

/// [A, δ]₊: raises every eigenvalue below δ to δ. Returns A unchanged when
/// its spectrum already sits at or above the floor.
template <typename Derived>
Matrix<typename Derived::Scalar> clip_eigenvalues(const Eigen::MatrixBase<Derived>& a,
                                                  typename Derived::Scalar delta) {
  using Scalar = typename Derived::Scalar;
  if (!(delta > Scalar(0))) throw DomainError("clip_eigenvalues: delta must be positive");
  auto eig = eigen_decompose(a);
  if (eig.eigenvalues.minCoeff() >= delta) return symmetrize(a);
  Vector<Scalar> floored = eig.eigenvalues.cwiseMax(delta);
  return recompose<Scalar>(eig.eigenvectors, floored);
}

template <typename Derived>
Matrix<typename Derived::Scalar> cov2cor(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  if (a.rows() != a.cols()) throw DimensionError("cov2cor: matrix is not square");
  const Index p = a.rows();
  Vector<Scalar> inv_sd(p);
  for (Index k = 0; k < p; ++k) {
    if (!(a(k, k) > Scalar(0))) {
      std::ostringstream msg;
      msg << "cov2cor: diagonal entry " << k << " is not positive (" << a(k, k) << ")";
      throw DomainError(msg.str());
    }
    inv_sd(k) = Scalar(1) / std::sqrt(a(k, k));
  }
  Matrix<Scalar> out(p, p);
  for (Index s = 0; s < p; ++s) {
    out(s, s) = Scalar(1);
    for (Index k = s + 1; k < p; ++k) {
      const Scalar r = a(k, s) * inv_sd(k) * inv_sd(s);
      out(k, s) = r;
      out(s, k) = r;
    }
  }
  return out;
}

/// Inverse of a symmetric positive-definite matrix; throws if not PD.
template <typename Derived>
Matrix<typename Derived::Scalar> inverse_spd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::LLT<Matrix<Scalar>> llt(a.derived());
  if (llt.info() != Eigen::Success) throw DomainError("inverse_spd: matrix is not positive definite");
  return symmetrize(llt.solve(Matrix<Scalar>::Identity(a.rows(), a.cols())));
}

template <typename Derived>
typename Derived::Scalar log_det_spd(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  Eigen::LLT<Matrix<Scalar>> llt(a.derived());
  if (llt.info() != Eigen::Success) throw DomainError("log_det_spd: matrix is not positive definite");
  return Scalar(2) * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
}

template <typename Derived>
typename Derived::Scalar max_abs(const Eigen::MatrixBase<Derived>& a) {
  return a.cwiseAbs().maxCoeff();
}

}  // namespace egg
