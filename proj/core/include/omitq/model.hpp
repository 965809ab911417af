// Physical model assembly: system parameters, the rotating-frame generator,
// polaron level structure and the classical transmission formulas.
#pragma once

#include <string>
#include <vector>

#include "omitq/fock.hpp"
#include "omitq/schedule.hpp"

namespace omitq {

// All rates and detunings in units of the mechanical frequency Ω ≡ 1.
// Detunings are measured from the effective cavity resonance
// ω_cav^eff = ω_cav − g0²/Ω; the conversion to the rotating-frame
// coefficient happens inside build_generator and nowhere else.
struct SystemParams {
  double omega = 1.0;      // mechanical frequency, fixes the unit
  double kappa = 0.0;      // photon loss rate (input + output mirror)
  double kappa_out = 0.0;  // output-mirror rate, 0 < kappa_out <= kappa
  double gamma_m = 0.0;    // phonon decay rate
  double g0 = 0.0;         // single-photon optomechanical coupling
  double n_th = 0.0;       // thermal phonon occupancy of the bath
  double eps_c = 0.0;      // control drive amplitude
  double eps_p = 0.0;      // probe drive amplitude
  double delta_c = 0.0;    // control detuning from ω_cav^eff
  double delta_p = 0.0;    // probe detuning from ω_cav^eff

  double omega_beat() const { return delta_p - delta_c; }

  // Throws InvalidArgumentError on hard violations.
  void validate() const;
  // Soft advisories (e.g. g0 beyond the weak-coupling comfort zone).
  std::vector<std::string> warnings() const;
};

// Limits on g0/Ω: hard error above 0.5, advisory above 0.2.
inline constexpr double kCouplingHardLimit = 0.5;
inline constexpr double kCouplingWarnLimit = 0.2;

struct DissipationChannel {
  double rate;
  ComplexMatrix op;
  std::string label;
};

// Rotating frame at the control laser frequency. The full Hamiltonian is
//
//   H(t) = h_frame
//        + envelope_c(t) * h_control_drive
//        + envelope_p(t) * (probe_raise e^{-i ω_b t} + probe_lower e^{+i ω_b t})
//
// with h_frame = -(Δ_c - g0²/Ω) a†a + Ω b†b - g0 (b†+b) a†a,
// h_control_drive = ε_c (a†+a), probe_raise = ε_p a†, probe_lower = ε_p a,
// and beat frequency ω_b = Δ_p - Δ_c.
struct LindbladGenerator {
  ModeSpace space;
  SystemParams params;

  ComplexMatrix h_frame;
  ComplexMatrix h_control_drive;
  ComplexMatrix probe_raise;
  ComplexMatrix probe_lower;
  double omega_beat = 0.0;

  std::vector<DissipationChannel> channels;

  DriveSchedule control_envelope;
  DriveSchedule probe_envelope;

  bool probe_active() const;

  // Static Hamiltonian (probe off) at control envelope level `level`.
  ComplexMatrix static_hamiltonian(double level = 1.0) const;
  // Full Hamiltonian at time t including the probe beat phases.
  ComplexMatrix hamiltonian(double t) const;
};

struct DriveSchedules {
  DriveSchedule control = DriveSchedule(1.0);
  DriveSchedule probe = DriveSchedule(1.0);
};

// Assembles the rotating-frame generator. Rejects ε_p > 0 with an active
// probe envelope at zero beat frequency (Δ_p = Δ_c): the sideband ansatz is
// ill-defined there.
LindbladGenerator build_generator(const SystemParams& params,
                                  const ModeSpace& space,
                                  const DriveSchedules& envelopes = {});

// Level |n_a, n_b> of the undriven system in the shifted (polaron) phonon
// basis. The absolute cavity frequency never enters the artifact, so the
// energy is stored as n_a quanta of ω_cav^eff plus an offset in units of Ω:
//   E(n_a, n_b) = cavity_quanta * ω_cav^eff + offset,
//   offset = Ω n_b − g0² n_a (n_a − 1)/Ω.
struct PolaronLevel {
  int cavity_quanta = 0;
  double offset = 0.0;

  PolaronLevel operator-(const PolaronLevel& other) const {
    return {cavity_quanta - other.cavity_quanta, offset - other.offset};
  }
};

PolaronLevel eigenenergy(int n_a, int n_b, const SystemParams& params);

// |<m|D(λ)|n>|² for a real displacement λ, associated-Laguerre closed form.
double franck_condon(int m, int n, double lambda);

// Same overlap through the dense displacement matrix at truncation `dim`;
// kept as an independent route for cross-checks.
double franck_condon_numeric(int m, int n, double lambda, int dim);

// Control-only intracavity amplitude of the linearized theory,
// α = i ε_c / (i Δ_c − κ/2).
Complex classical_alpha(const SystemParams& params);

// Rescaled mechanical susceptibility, χ⁻¹[ω] = 1 − (ω/Ω)² − i ω Γ_M / Ω².
Complex mechanical_susceptibility(double omega, const SystemParams& params);

// Normalized probe transmission of the linearized theory,
//   |δã|² = (κ²/4) |1 / (−iΔ_p + κ/2 − 2i (g0²/Ω)|α|² χ[Δ_p − Δ_c])|².
double classical_transmission(const SystemParams& params, double delta_p);

// Linearized formula with the nonlinear corrections of the quantum model:
// the numerator picks up the 0→0 Franck-Condon factor e^{−(g0/Ω)²} and |α|²
// is replaced by the supplied quantum photon number. The 0→0 overlap is
// applied uniformly at every detuning.
double modified_classical_transmission(const SystemParams& params,
                                       double delta_p, double photon_number);

}  // namespace omitq
