// Vectorization and superoperator assembly for the master equation.
//
// Convention (fixed once, round-trip tested): column stacking,
//   vec(X)[j*d + i] = X(i, j),
// which is a zero-copy view of Eigen's column-major storage. Under it
//   vec(A X B) = (Bᵀ ⊗ A) vec(X).
#pragma once

#include <Eigen/Sparse>

#include "omitq/model.hpp"

namespace omitq {

using SparseMatrixCd = Eigen::SparseMatrix<Complex>;

ComplexVector vectorize(const ComplexMatrix& x);
ComplexMatrix unvectorize(const ComplexVector& v, int dim);

// ρ -> A ρ,   I ⊗ A.
SparseMatrixCd left_multiplication_superop(const ComplexMatrix& a);
// ρ -> ρ B,   Bᵀ ⊗ I.
SparseMatrixCd right_multiplication_superop(const ComplexMatrix& b);
// ρ -> −i [H, ρ].
SparseMatrixCd commutator_superop(const ComplexMatrix& h);
// ρ -> rate (c ρ c† − ½ c†c ρ − ½ ρ c†c).
SparseMatrixCd dissipator_superop(double rate, const ComplexMatrix& c);

// The generator split into its stationary and drive-modulated pieces:
//   L(t) = frame_dissipation
//        + env_c(t) · control
//        + env_p(t) · (e^{−i ω_b t} probe_raise + e^{+i ω_b t} probe_lower)
struct Liouvillian {
  int dim = 0;  // joint Hilbert dimension; superoperators are dim² × dim²
  double omega_beat = 0.0;
  SparseMatrixCd frame_dissipation;
  SparseMatrixCd control;
  SparseMatrixCd probe_raise;
  SparseMatrixCd probe_lower;

  // Stationary part at a fixed control level (probe off).
  SparseMatrixCd stationary(double control_level = 1.0) const;

  // out = L(t) · v with explicit envelope levels.
  void apply(double control_level, double probe_level, double t,
             const ComplexVector& v, ComplexVector& out) const;
};

Liouvillian build_liouvillian(const LindbladGenerator& gen);

}  // namespace omitq
