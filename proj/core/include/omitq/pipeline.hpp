// Experiment orchestration: probe spectra, OMIT-signal differencing,
// quantum-to-classical crossover sweeps, temperature sweeps, the pulsed
// transistor protocol and truncation-convergence control.
#pragma once

#include <functional>
#include <optional>
#include <string>

#include "omitq/response.hpp"

namespace omitq {

enum class SidebandMethod { LinearResponse, TimeDomain };

std::string to_string(SidebandMethod m);

struct PipelineOptions {
  SidebandMethod method = SidebandMethod::LinearResponse;
  double convergence_tol = 1e-4;
  long truncation_ceiling = 4096;  // joint-dimension ceiling for the guard
  int threads = 1;
  int window_periods = 5;
  IntegratorSettings integrator{};
  bool grow_photon_first = true;
  // Skip the guard and force a space (tests, reruns at a known truncation).
  std::optional<ModeSpace> space_override{};
};

struct SpectrumResult {
  std::vector<double> delta_p;
  std::vector<double> transmission_quantum;
  std::vector<double> transmission_classical;
  std::vector<double> transmission_modified_classical;
  std::vector<double> omit_signal;            // empty until differenced
  std::vector<double> transmission_quantum_off;  // control-off companion
  std::vector<double> harmonic2;
  std::vector<bool> harmonic_flagged;
  std::vector<ModeSpace> spaces;  // space that passed convergence, per point

  SystemParams params;
  SidebandMethod method = SidebandMethod::LinearResponse;
  double photon_number_ss = 0.0;  // control-only <a†a>, feeds the modified column

  std::size_t size() const { return delta_p.size(); }
};

// Grid helpers. Sideband windows span nΩ ± 20Γ_M with step Γ_M/5; the main
// dip window spans ±20Γ_M, widened to ±5(Γ_M + Γ_opt) when Γ_opt > Γ_M
// (201 points either way).
std::vector<double> sideband_window_grid(const SystemParams& params,
                                         int sideband);
std::vector<double> main_dip_grid(const SystemParams& params);

// Truncation control: starting from (4, 12), grow N_a by 2 and N_b by 4
// alternately until the observable changes by less than tol twice in a row;
// returns the first space of the settled pair.
ModeSpace convergence_guard(
    const SystemParams& params,
    const std::function<double(const ModeSpace&)>& evaluator,
    double tol = 1e-4, long joint_ceiling = 4096, bool grow_photon_first = true);

// Per-point transmission columns (quantum, classical, modified-classical)
// over the grid. The convergence guard runs at the grid extremes and center;
// the largest space wins and is attached to every point.
SpectrumResult probe_spectrum(const SystemParams& params,
                              std::span<const double> grid,
                              const PipelineOptions& options = {});

// probe_spectrum plus the control-off reference run; fills omit_signal =
// transmission(ε_c) − transmission(ε_c = 0) pointwise.
SpectrumResult omit_signal(const SystemParams& params,
                           std::span<const double> grid,
                           const PipelineOptions& options = {});

// max − min of the OMIT signal over [window_lo, window_hi]; needs >= 20
// grid points inside the window.
double fano_amplitude(const SpectrumResult& spectrum, double window_lo,
                      double window_hi);

struct CrossoverEntry {
  double ratio;  // g0/κ
  SpectrumResult spectrum;
};

struct CrossoverResult {
  std::vector<double> grid;
  std::vector<CrossoverEntry> entries;
  // Classical Eq.-(5) signal, computed once and shared verbatim by every
  // entry (it depends only on g0|α|, κ, Γ_M and the detunings).
  std::vector<double> classical_signal;
  double g0_eps_c = 0.0;
  int sideband = 1;
};

// Sweep of the quantum parameter g0/κ at fixed g0·ε_c and fixed κ, around
// the first or second mechanical sideband. ε_p tracks ε_c/10.
CrossoverResult crossover_sweep(const SystemParams& base,
                                std::span<const double> ratios, int sideband,
                                const PipelineOptions& options = {});

struct TemperatureSweepResult {
  std::vector<double> n_th_values;
  std::vector<SpectrumResult> spectra;
  std::vector<double> fano_amplitudes;
};

// Second-sideband Fano amplitude versus thermal occupancy at fixed params.
TemperatureSweepResult temperature_sweep(const SystemParams& base,
                                         std::span<const double> n_th_values,
                                         const PipelineOptions& options = {});

struct ExponentialFit {
  double tau = 0.0;
  bool ok = false;
  std::string note;
};

struct TransistorResult {
  // Sample grid; the transmission series starts after the first complete
  // demodulation window, leading entries are trimmed from the CSV.
  std::vector<double> times;
  std::vector<double> transmission;  // sliding one-beat-period |δã|²
  std::vector<double> control_power;
  std::vector<double> p00, p01, p10, p11;
  std::vector<double> photon_number, phonon_number;
  std::size_t first_valid = 0;  // first index with a full window behind it

  double t_ramp_end = 0.0, t_hold_end = 0.0, t_off_end = 0.0;
  ExponentialFit switch_on, switch_off;
  double p10_frequency = 0.0;
  bool p10_frequency_ok = false;
  ModeSpace space{2, 2};
};

// Pulsed transistor run: probe on throughout, control follows the schedule.
// Time-resolved transmission uses a sliding window of one beat period.
TransistorResult transistor_run(const SystemParams& params,
                                const DriveSchedule& control_schedule,
                                const PipelineOptions& options = {});

}  // namespace omitq
