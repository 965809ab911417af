#include "omitq/fock.hpp"

#include <cmath>
#include <string>

namespace omitq {

ModeSpace::ModeSpace(int photon_levels, int phonon_levels)
    : n_photon_levels(photon_levels), n_phonon_levels(phonon_levels) {
  if (photon_levels < 2 || phonon_levels < 2) {
    throw InvalidDimensionError("ModeSpace dimensions must be >= 2, got (" +
                                std::to_string(photon_levels) + ", " +
                                std::to_string(phonon_levels) + ")");
  }
}

ComplexMatrix ladder_operator(int dim) {
  if (dim < 2) {
    throw InvalidDimensionError("ladder_operator needs dim >= 2, got " +
                                std::to_string(dim));
  }
  ComplexMatrix a = ComplexMatrix::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) {
    a(n - 1, n) = std::sqrt(static_cast<double>(n));
  }
  return a;
}

ComplexMatrix number_operator(int dim) {
  if (dim < 2) {
    throw InvalidDimensionError("number_operator needs dim >= 2, got " +
                                std::to_string(dim));
  }
  ComplexMatrix n = ComplexMatrix::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = static_cast<double>(k);
  return n;
}

ComplexMatrix tensor_embed(const ComplexMatrix& op, const ModeSpace& space,
                           Mode which) {
  const int mode_dim = space.dimension_of(which);
  if (op.rows() != mode_dim || op.cols() != mode_dim) {
    throw InvalidDimensionError(
        "tensor_embed: operator is " + std::to_string(op.rows()) + "x" +
        std::to_string(op.cols()) + " but the selected mode has dimension " +
        std::to_string(mode_dim));
  }
  const int na = space.n_photon_levels;
  const int nb = space.n_phonon_levels;
  ComplexMatrix out = ComplexMatrix::Zero(space.joint_dimension(),
                                          space.joint_dimension());
  if (which == Mode::Photon) {
    // op ⊗ I
    for (int i = 0; i < na; ++i)
      for (int j = 0; j < na; ++j) {
        if (op(i, j) == Complex{0.0, 0.0}) continue;
        for (int k = 0; k < nb; ++k) out(i * nb + k, j * nb + k) = op(i, j);
      }
  } else {
    // I ⊗ op
    for (int k = 0; k < na; ++k)
      out.block(k * nb, k * nb, nb, nb) = op;
  }
  return out;
}

ComplexMatrix displacement_operator(int dim, Complex beta) {
  if (dim < 2) {
    throw InvalidDimensionError("displacement_operator needs dim >= 2, got " +
                                std::to_string(dim));
  }
  if (beta == Complex{0.0, 0.0}) return ComplexMatrix::Identity(dim, dim);
  const ComplexMatrix b = ladder_operator(dim);
  // β b† − β* b is anti-Hermitian; −i times it is Hermitian, so the
  // exponential comes from a self-adjoint eigendecomposition and stays
  // exactly unitary.
  const ComplexMatrix generator =
      beta * b.adjoint() - std::conj(beta) * b;
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(-kImag * generator);
  ComplexVector phases(dim);
  for (int k = 0; k < dim; ++k) {
    phases(k) = std::exp(kImag * es.eigenvalues()(k));
  }
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

Complex expectation(const ComplexMatrix& op, const ComplexMatrix& rho) {
  if (op.rows() != rho.rows() || op.cols() != rho.cols() ||
      op.rows() != op.cols()) {
    throw InvalidDimensionError("expectation: operator is " +
                                std::to_string(op.rows()) + "x" +
                                std::to_string(op.cols()) + ", state is " +
                                std::to_string(rho.rows()) + "x" +
                                std::to_string(rho.cols()));
  }
  // Tr(op · rho) = Σ_ij op(i,j) rho(j,i)
  return op.cwiseProduct(rho.transpose()).sum();
}

StateDefects state_defects(const ComplexMatrix& rho) {
  StateDefects d;
  d.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  d.trace_deviation = std::abs(rho.trace() - Complex{1.0, 0.0});
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(
      ComplexMatrix(0.5 * (rho + rho.adjoint())),
      Eigen::EigenvaluesOnly);
  d.min_eigenvalue = es.eigenvalues().minCoeff();
  return d;
}

DensityMatrix::DensityMatrix(ComplexMatrix rho, const ModeSpace& space)
    : rho_(std::move(rho)), space_(space) {
  if (rho_.rows() != space.joint_dimension() ||
      rho_.cols() != space.joint_dimension()) {
    throw InvalidDimensionError(
        "DensityMatrix: matrix dimension " + std::to_string(rho_.rows()) +
        " does not match joint dimension " +
        std::to_string(space.joint_dimension()));
  }
  const StateDefects d = state_defects(rho_);
  if (!d.within_tolerance()) {
    throw InvalidArgumentError(
        "DensityMatrix: state violates tolerances (hermiticity defect " +
        std::to_string(d.hermiticity) + ", trace deviation " +
        std::to_string(d.trace_deviation) + ", min eigenvalue " +
        std::to_string(d.min_eigenvalue) + ")");
  }
}

DensityMatrix DensityMatrix::unchecked(ComplexMatrix rho,
                                       const ModeSpace& space) {
  return DensityMatrix(UncheckedTag{}, std::move(rho), space);
}

Complex expectation(const ComplexMatrix& op, const DensityMatrix& rho) {
  return expectation(op, rho.matrix());
}

DensityMatrix vacuum_state(const ModeSpace& space) {
  return fock_state(space, 0, 0);
}

DensityMatrix fock_state(const ModeSpace& space, int n_a, int n_b) {
  if (n_a < 0 || n_b < 0 || n_a >= space.n_photon_levels ||
      n_b >= space.n_phonon_levels) {
    throw InvalidArgumentError("fock_state: (" + std::to_string(n_a) + ", " +
                               std::to_string(n_b) +
                               ") outside the truncated space");
  }
  ComplexMatrix rho =
      ComplexMatrix::Zero(space.joint_dimension(), space.joint_dimension());
  rho(space.index(n_a, n_b), space.index(n_a, n_b)) = 1.0;
  return DensityMatrix::unchecked(std::move(rho), space);
}

DensityMatrix thermal_state(const ModeSpace& space, double n_th) {
  if (n_th < 0.0) {
    throw InvalidArgumentError("thermal_state: n_th must be >= 0");
  }
  ComplexMatrix rho =
      ComplexMatrix::Zero(space.joint_dimension(), space.joint_dimension());
  const double ratio = n_th / (1.0 + n_th);
  double weight = 1.0;
  double total = 0.0;
  for (int n = 0; n < space.n_phonon_levels; ++n) {
    rho(space.index(0, n), space.index(0, n)) = weight;
    total += weight;
    weight *= ratio;
  }
  rho /= total;
  return DensityMatrix::unchecked(std::move(rho), space);
}

}  // namespace omitq
