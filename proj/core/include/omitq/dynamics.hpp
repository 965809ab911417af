// Time-domain integration of the master equation and polaron-basis
// population extraction.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "omitq/model.hpp"
#include "omitq/superop.hpp"

namespace omitq {

// dρ/dt at time t, reference (dense matrix) form:
//   −i[H(t), ρ] + Σ rate (c ρ c† − ½ c†c ρ − ½ ρ c†c).
// The integrator uses the equivalent sparse superoperator; the two routes
// are held together by tests.
ComplexMatrix apply_generator(const LindbladGenerator& gen,
                              const ComplexMatrix& rho, double t);

struct IntegratorSettings {
  // Fixed RK4 step; 0 selects 2π/(50 ω_max) with ω_max the largest physical
  // frequency of the run, capped by a spectral-radius stability bound.
  double dt = 0.0;
  // Spacing of recorded samples; 0 selects ~1024 samples over the span.
  // The actual step divides the stride exactly.
  double sample_stride = 0.0;
  // Trace drift beyond this raises IntegrationFailureError.
  double trace_tolerance = 1e-7;
};

struct StateTrajectory {
  std::vector<double> times;
  std::vector<Complex> a_expectation;
  std::vector<double> photon_number;
  std::vector<double> phonon_number;
  std::vector<double> trace;
  std::vector<double> hermiticity_defect;

  struct Snapshot {
    double time;
    DensityMatrix state;
  };
  std::vector<Snapshot> snapshots;

  double dt_used = 0.0;
  double sample_stride_used = 0.0;
};

// Called at every recorded sample with the current state.
using SampleObserver = std::function<void(double t, const ComplexMatrix& rho)>;

// Default step heuristic, exposed for tests and tooling.
double default_time_step(const LindbladGenerator& gen);

// Fixed-step RK4 propagation of vec(ρ). Snapshot times are snapped to the
// nearest sample instant.
StateTrajectory evolve(const LindbladGenerator& gen, const DensityMatrix& rho0,
                       double t_begin, double t_end,
                       const IntegratorSettings& settings = {},
                       std::span<const double> snapshot_times = {},
                       const SampleObserver& observer = {});

// Photon-number-conditioned displaced phonon basis |n_a, ñ_b>,
// ñ_b = D(n_a g0/Ω)|n_b>. Precomputes the per-sector displacements; reuse
// it when extracting populations along a trajectory.
class PolaronBasis {
 public:
  PolaronBasis(const SystemParams& params, const ModeSpace& space);

  // p[n_a][n_b] = <n_a, ñ_b| ρ |n_a, ñ_b>.
  RealMatrix populations(const ComplexMatrix& rho) const;

 private:
  ModeSpace space_;
  std::vector<ComplexMatrix> sector_displacements_;
};

RealMatrix populations_polaron(const ComplexMatrix& rho,
                               const SystemParams& params,
                               const ModeSpace& space);

}  // namespace omitq
