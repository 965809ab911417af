// Steady states, sideband extraction (time-domain demodulation and
// first-order Floquet linear response) and the normalized transmission.
#pragma once

#include <span>
#include <utility>

#include "omitq/dynamics.hpp"

namespace omitq {

// (κ²/4)(|δa₊₁|² + |δa₋₁|²). The output-mirror rate cancels against the
// incoming probe normalization and never enters.
double normalized_transmission(Complex delta_a_plus, Complex delta_a_minus,
                               double kappa);

struct SidebandDecomposition {
  Complex alpha{};          // DC component of <a>(t)
  Complex delta_a_plus{};   // coefficient of e^{-i ω_b t}, per unit ε_p
  Complex delta_a_minus{};  // coefficient of e^{+i ω_b t}, per unit ε_p
  double harmonic_2_magnitude = 0.0;
  double transmission = 0.0;
  bool harmonic_flagged = false;  // 2nd harmonic above 5% of the 1st

  static SidebandDecomposition make(Complex alpha, Complex plus, Complex minus,
                                    double harmonic2, double kappa);
};

// Stationary state of the probe-off generator, via a null-space solve of the
// vectorized generator with trace normalization (two independent pinned rows,
// cross-checked; disagreement flags a degenerate null space). Long-time
// evolution is the fallback route.
DensityMatrix steady_state(const LindbladGenerator& gen);

// Residual ||L ρ||_max of a candidate steady state; diagnostic.
double steady_state_residual(const LindbladGenerator& gen,
                             const DensityMatrix& rho);

// Harmonic extraction from a stationary segment of <a>(t) covering
// `window_periods` whole beat periods (trapezoidal quadrature on the sample
// grid, taken from the end of the trace). The second harmonic is extracted
// identically and reported as a diagnostic.
SidebandDecomposition demodulate(std::span<const double> times,
                                 std::span<const Complex> a_trace,
                                 double omega_b, int window_periods,
                                 double eps_p, double kappa);

// First-order-in-ε_p sideband amplitudes from the two shifted solves
//   (L0 ± i ω_b) ρ± = −P± ρ_ss,
// with P± the unit-amplitude probe coupling superoperators. Independent of
// ε_p by construction; serves as the fast path and as the oracle partner of
// demodulate().
std::pair<Complex, Complex> sidebands_linear_response(
    const LindbladGenerator& gen, const DensityMatrix& rho_ss, double omega_b);

struct StationarySidebandOptions {
  int window_periods = 5;
  int samples_per_period = 64;
  // Two consecutive demodulation windows must agree to this relative level.
  double stationarity_tol = 1e-4;
  int max_doublings = 3;
  IntegratorSettings integrator{};
};

// Time-domain sideband extraction with the stationarity acceptance loop:
// relax for max(10/Γ_M, 10/κ) from the control-only steady state, demodulate
// two consecutive windows, and extend (up to max_doublings) until they agree.
SidebandDecomposition stationary_sidebands_time_domain(
    const SystemParams& params, const ModeSpace& space,
    const StationarySidebandOptions& options = {});

}  // namespace omitq
