// Truncated two-mode Fock space: ladder operators, tensor embedding,
// expectation values, displacement operators, density-matrix validation.
#pragma once

#include <Eigen/Dense>
#include <complex>

#include "omitq/errors.hpp"

namespace omitq {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;

inline constexpr Complex kImag{0.0, 1.0};

enum class Mode { Photon, Phonon };

// Joint basis ordering is photon-first: |n_a, n_b> lives at joint index
// n_a * n_phonon_levels + n_b, so the photon index varies slowest
// (photon ⊗ phonon in Kronecker order). Fixed globally, asserted in tests.
struct ModeSpace {
  int n_photon_levels;
  int n_phonon_levels;

  ModeSpace(int photon_levels, int phonon_levels);

  int joint_dimension() const { return n_photon_levels * n_phonon_levels; }
  int index(int n_a, int n_b) const { return n_a * n_phonon_levels + n_b; }
  int dimension_of(Mode m) const {
    return m == Mode::Photon ? n_photon_levels : n_phonon_levels;
  }
  bool operator==(const ModeSpace&) const = default;
};

// <m|a|n> = sqrt(n) δ_{m,n-1} on a dim-level ladder.
ComplexMatrix ladder_operator(int dim);

// a†a = diag(0, 1, ..., dim-1).
ComplexMatrix number_operator(int dim);

// Embed a single-mode operator into the joint space: photon ops act as
// op ⊗ I, phonon ops as I ⊗ op.
ComplexMatrix tensor_embed(const ComplexMatrix& op, const ModeSpace& space,
                           Mode which);

// exp(β b† − β* b) on the truncated ladder, computed by eigendecomposition
// of the (Hermitian) generator. Exactly unitary up to roundoff; faithful to
// the untruncated displacement only on the well-resolved block.
ComplexMatrix displacement_operator(int dim, Complex beta);

// Tr(op · rho).
Complex expectation(const ComplexMatrix& op, const ComplexMatrix& rho);

// Validation tolerances for physical states.
inline constexpr double kHermiticityTol = 1e-10;
inline constexpr double kTraceTol = 1e-9;
inline constexpr double kEigenvalueFloor = -1e-8;

struct StateDefects {
  double hermiticity = 0.0;      // max |rho - rho†| element
  double trace_deviation = 0.0;  // |Tr rho - 1|
  double min_eigenvalue = 0.0;

  bool within_tolerance() const {
    return hermiticity <= kHermiticityTol && trace_deviation <= kTraceTol &&
           min_eigenvalue >= kEigenvalueFloor;
  }
};

StateDefects state_defects(const ComplexMatrix& rho);

// Density matrix over the joint space. Checked construction enforces
// Hermiticity / trace / positivity at the tolerances above; unchecked() is
// for hot paths that guarantee validity by construction.
class DensityMatrix {
 public:
  DensityMatrix(ComplexMatrix rho, const ModeSpace& space);

  static DensityMatrix unchecked(ComplexMatrix rho, const ModeSpace& space);

  const ComplexMatrix& matrix() const { return rho_; }
  const ModeSpace& space() const { return space_; }

 private:
  struct UncheckedTag {};
  DensityMatrix(UncheckedTag, ComplexMatrix rho, const ModeSpace& space)
      : rho_(std::move(rho)), space_(space) {}

  ComplexMatrix rho_;
  ModeSpace space_;
};

Complex expectation(const ComplexMatrix& op, const DensityMatrix& rho);

// Common initial states.
DensityMatrix vacuum_state(const ModeSpace& space);
DensityMatrix fock_state(const ModeSpace& space, int n_a, int n_b);
// Photon vacuum ⊗ phonon thermal state with mean occupancy n_th,
// renormalized on the truncated ladder.
DensityMatrix thermal_state(const ModeSpace& space, double n_th);

}  // namespace omitq
