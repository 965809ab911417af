#include "omitq/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace omitq {

std::string to_string(SidebandMethod m) {
  return m == SidebandMethod::LinearResponse ? "linear-response"
                                             : "time-domain";
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(n);
  for (int i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) / (n - 1);
  }
  return out;
}

// Run body(i) for i in [0, n), optionally across worker threads. Results are
// stored by index by the caller, so scheduling does not affect output order;
// on error the lowest failing index wins.
void parallel_for(std::size_t n, int threads,
                  const std::function<void(std::size_t)>& body) {
  if (threads <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const int workers = std::min<std::size_t>(threads, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

template <typename Error>
[[noreturn]] void rethrow_with_context(const std::exception& e,
                                       const std::string& context) {
  throw Error(std::string(e.what()) + " [" + context + "]");
}

[[noreturn]] void annotate_and_rethrow(std::exception_ptr ep,
                                       const std::string& context) {
  try {
    std::rethrow_exception(ep);
  } catch (const ResonanceDegeneracyError& e) {
    rethrow_with_context<ResonanceDegeneracyError>(e, context);
  } catch (const AmbiguousSteadyStateError& e) {
    rethrow_with_context<AmbiguousSteadyStateError>(e, context);
  } catch (const ResourceLimitError& e) {
    rethrow_with_context<ResourceLimitError>(e, context);
  } catch (const WindowAlignmentError& e) {
    rethrow_with_context<WindowAlignmentError>(e, context);
  } catch (const IntegrationFailureError& e) {
    rethrow_with_context<IntegrationFailureError>(e, context);
  } catch (const std::exception& e) {
    throw IntegrationFailureError(std::string(e.what()) + " [" + context + "]");
  }
}

// Quantum transmission at one probe detuning through the fast path: control
// steady state plus two shifted linear-response solves.
double transmission_linear_response(const SystemParams& params,
                                    const ModeSpace& space, double delta_p) {
  SystemParams probe_off = params;
  probe_off.eps_p = 0.0;
  const LindbladGenerator gen = build_generator(probe_off, space);
  const DensityMatrix rho_ss = steady_state(gen);
  const auto [plus, minus] =
      sidebands_linear_response(gen, rho_ss, delta_p - params.delta_c);
  return normalized_transmission(plus, minus, params.kappa);
}

ModeSpace converged_space_for_grid(const SystemParams& params,
                                   std::span<const double> grid,
                                   const PipelineOptions& options) {
  if (options.space_override) return *options.space_override;
  ModeSpace best(2, 2);
  bool first = true;
  std::vector<std::size_t> probes{0, grid.size() / 2, grid.size() - 1};
  std::sort(probes.begin(), probes.end());
  probes.erase(std::unique(probes.begin(), probes.end()), probes.end());
  for (std::size_t pi : probes) {
    const double delta_p = grid[pi];
    const ModeSpace s = convergence_guard(
        params,
        [&](const ModeSpace& candidate) {
          return transmission_linear_response(params, candidate, delta_p);
        },
        options.convergence_tol, options.truncation_ceiling,
        options.grow_photon_first);
    if (first) {
      best = s;
      first = false;
    } else {
      best = ModeSpace(std::max(best.n_photon_levels, s.n_photon_levels),
                       std::max(best.n_phonon_levels, s.n_phonon_levels));
    }
  }
  return best;
}

}  // namespace

std::vector<double> sideband_window_grid(const SystemParams& params,
                                         int sideband) {
  if (sideband < 1) {
    throw InvalidArgumentError("sideband_window_grid: sideband must be >= 1");
  }
  const double center = sideband * params.omega;
  const double half = 20.0 * params.gamma_m;
  const int n = 201;  // step Γ_M/5 across ±20 Γ_M
  return linspace(center - half, center + half, n);
}

std::vector<double> main_dip_grid(const SystemParams& params) {
  const double alpha2 = std::norm(classical_alpha(params));
  const double gamma_opt =
      4.0 * params.g0 * params.g0 * alpha2 / params.kappa;
  double half = 20.0 * params.gamma_m;
  if (gamma_opt > params.gamma_m) {
    half = 5.0 * (params.gamma_m + gamma_opt);
  }
  return linspace(-half, half, 201);
}

ModeSpace convergence_guard(
    const SystemParams& params,
    const std::function<double(const ModeSpace&)>& evaluator, double tol,
    long joint_ceiling, bool grow_photon_first) {
  if (tol <= 0.0) {
    throw InvalidArgumentError("convergence_guard: tol must be > 0");
  }
  std::vector<ModeSpace> spaces;
  spaces.emplace_back(4, 12);
  if (spaces.back().joint_dimension() > joint_ceiling) {
    throw ResourceLimitError(
        "convergence_guard: initial space exceeds the joint-dimension "
        "ceiling " +
        std::to_string(joint_ceiling));
  }
  std::vector<double> values{evaluator(spaces.back())};
  bool grow_photon = grow_photon_first;
  int settled = 0;
  constexpr int kMaxSteps = 64;
  for (int step = 0; step < kMaxSteps; ++step) {
    const ModeSpace& prev = spaces.back();
    const ModeSpace next =
        grow_photon ? ModeSpace(prev.n_photon_levels + 2, prev.n_phonon_levels)
                    : ModeSpace(prev.n_photon_levels, prev.n_phonon_levels + 4);
    grow_photon = !grow_photon;
    if (next.joint_dimension() > joint_ceiling) {
      throw ResourceLimitError(
          "convergence_guard: joint dimension " +
          std::to_string(next.joint_dimension()) + " exceeds the ceiling " +
          std::to_string(joint_ceiling));
    }
    const double value = evaluator(next);
    const double change = std::abs(value - values.back()) /
                          std::max(std::abs(values.back()), 1e-12);
    spaces.push_back(next);
    values.push_back(value);
    if (change < tol) {
      if (++settled == 2) {
        return spaces[spaces.size() - 3];
      }
    } else {
      settled = 0;
    }
  }
  throw ResourceLimitError(
      "convergence_guard: observable did not settle within the step limit");
}

SpectrumResult probe_spectrum(const SystemParams& params,
                              std::span<const double> grid,
                              const PipelineOptions& options) {
  params.validate();
  if (grid.empty()) {
    throw InvalidArgumentError("probe_spectrum: empty grid");
  }
  for (double d : grid) {
    if (d == params.delta_c) {
      throw InvalidArgumentError(
          "probe_spectrum: grid contains delta_p == delta_c (zero beat)");
    }
  }

  const ModeSpace space = converged_space_for_grid(params, grid, options);

  SystemParams probe_off = params;
  probe_off.eps_p = 0.0;
  const LindbladGenerator gen_off = build_generator(probe_off, space);
  const DensityMatrix rho_ss = steady_state(gen_off);
  const ComplexMatrix na = tensor_embed(number_operator(space.n_photon_levels),
                                        space, Mode::Photon);
  const double photon_ss = expectation(na, rho_ss).real();

  SpectrumResult result;
  result.params = params;
  result.method = options.method;
  result.photon_number_ss = photon_ss;
  result.delta_p.assign(grid.begin(), grid.end());
  const std::size_t n = grid.size();
  result.transmission_quantum.resize(n);
  result.transmission_classical.resize(n);
  result.transmission_modified_classical.resize(n);
  result.harmonic2.resize(n);
  result.harmonic_flagged.resize(n);
  result.spaces.assign(n, space);

  std::vector<std::exception_ptr> point_errors(n);
  parallel_for(n, options.threads, [&](std::size_t i) {
    const double delta_p = grid[i];
    try {
      Complex plus, minus;
      double harmonic2 = 0.0;
      bool flagged = false;
      if (options.method == SidebandMethod::LinearResponse) {
        std::tie(plus, minus) = sidebands_linear_response(
            gen_off, rho_ss, delta_p - params.delta_c);
      } else {
        SystemParams point = params;
        point.delta_p = delta_p;
        StationarySidebandOptions sso;
        sso.window_periods = options.window_periods;
        sso.integrator = options.integrator;
        const SidebandDecomposition d =
            stationary_sidebands_time_domain(point, space, sso);
        plus = d.delta_a_plus;
        minus = d.delta_a_minus;
        harmonic2 = d.harmonic_2_magnitude;
        flagged = d.harmonic_flagged;
      }
      result.transmission_quantum[i] =
          normalized_transmission(plus, minus, params.kappa);
      result.transmission_classical[i] =
          classical_transmission(params, delta_p);
      result.transmission_modified_classical[i] =
          modified_classical_transmission(params, delta_p, photon_ss);
      result.harmonic2[i] = harmonic2;
      result.harmonic_flagged[i] = flagged;
    } catch (...) {
      point_errors[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (point_errors[i]) {
      annotate_and_rethrow(point_errors[i],
                           "delta_p = " + std::to_string(grid[i]));
    }
  }
  return result;
}

SpectrumResult omit_signal(const SystemParams& params,
                           std::span<const double> grid,
                           const PipelineOptions& options) {
  SpectrumResult on = probe_spectrum(params, grid, options);
  SystemParams off_params = params;
  off_params.eps_c = 0.0;
  const SpectrumResult off = probe_spectrum(off_params, grid, options);
  on.omit_signal.resize(on.size());
  on.transmission_quantum_off = off.transmission_quantum;
  for (std::size_t i = 0; i < on.size(); ++i) {
    on.omit_signal[i] =
        on.transmission_quantum[i] - off.transmission_quantum[i];
  }
  return on;
}

double fano_amplitude(const SpectrumResult& spectrum, double window_lo,
                      double window_hi) {
  if (spectrum.omit_signal.size() != spectrum.size()) {
    throw InvalidArgumentError(
        "fano_amplitude: OMIT-signal column not populated");
  }
  double lo = 0.0, hi = 0.0;
  int count = 0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double d = spectrum.delta_p[i];
    if (d < window_lo || d > window_hi) continue;
    const double s = spectrum.omit_signal[i];
    if (count == 0) {
      lo = hi = s;
    } else {
      lo = std::min(lo, s);
      hi = std::max(hi, s);
    }
    ++count;
  }
  if (count < 20) {
    throw InsufficientResolutionError(
        "fano_amplitude: only " + std::to_string(count) +
        " grid points inside the window, need >= 20");
  }
  return hi - lo;
}

CrossoverResult crossover_sweep(const SystemParams& base,
                                std::span<const double> ratios, int sideband,
                                const PipelineOptions& options) {
  base.validate();
  if (base.g0 <= 0.0 || base.eps_c <= 0.0) {
    throw InvalidArgumentError(
        "crossover_sweep: base parameters need g0 > 0 and eps_c > 0");
  }
  if (ratios.empty()) {
    throw InvalidArgumentError("crossover_sweep: no ratios given");
  }
  for (double r : ratios) {
    if (r <= 0.0) {
      throw InvalidArgumentError("crossover_sweep: ratios must be > 0");
    }
  }

  CrossoverResult result;
  result.sideband = sideband;
  result.g0_eps_c = base.g0 * base.eps_c;
  result.grid = sideband_window_grid(base, sideband);

  for (double ratio : ratios) {
    SystemParams p = base;
    p.g0 = ratio * base.kappa;
    p.eps_c = result.g0_eps_c / p.g0;
    p.eps_p = p.eps_c / 10.0;
    p.delta_p = result.grid.front();
    try {
      result.entries.push_back({ratio, omit_signal(p, result.grid, options)});
    } catch (const ResourceLimitError& e) {
      throw ResourceLimitError(std::string(e.what()) +
                               " [g0/kappa = " + std::to_string(ratio) + "]");
    }
    const double product =
        result.entries.back().spectrum.params.g0 *
        result.entries.back().spectrum.params.eps_c;
    if (std::abs(product - result.g0_eps_c) > 1e-12) {
      throw InvalidArgumentError(
          "crossover_sweep: g0*eps_c drifted across entries");
    }
  }

  // The classical Eq.-(5) columns depend only on g0|α| and the fixed rates,
  // so they are computed once and shared bitwise by every entry.
  const SystemParams& ref = result.entries.front().spectrum.params;
  SystemParams ref_off = ref;
  ref_off.eps_c = 0.0;
  std::vector<double> classical_on(result.grid.size());
  result.classical_signal.resize(result.grid.size());
  for (std::size_t i = 0; i < result.grid.size(); ++i) {
    classical_on[i] = classical_transmission(ref, result.grid[i]);
    result.classical_signal[i] =
        classical_on[i] - classical_transmission(ref_off, result.grid[i]);
  }
  for (auto& entry : result.entries) {
    entry.spectrum.transmission_classical = classical_on;
  }
  return result;
}

TemperatureSweepResult temperature_sweep(const SystemParams& base,
                                         std::span<const double> n_th_values,
                                         const PipelineOptions& options) {
  base.validate();
  if (n_th_values.empty()) {
    throw InvalidArgumentError("temperature_sweep: no n_th values");
  }
  TemperatureSweepResult result;
  const std::vector<double> grid = sideband_window_grid(base, 2);
  for (double n_th : n_th_values) {
    SystemParams p = base;
    p.n_th = n_th;
    p.delta_p = grid.front();
    result.n_th_values.push_back(n_th);
    result.spectra.push_back(omit_signal(p, grid, options));
    result.fano_amplitudes.push_back(
        fano_amplitude(result.spectra.back(), grid.front(), grid.back()));
  }
  return result;
}

namespace {

ExponentialFit fit_exponential_transient(std::span<const double> times,
                                         std::span<const double> values,
                                         double t_begin, double t_end,
                                         double background) {
  ExponentialFit fit;
  // Locate the transient inside [t_begin, t_end].
  std::vector<std::pair<double, double>> seg;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] >= t_begin && times[i] <= t_end) {
      seg.emplace_back(times[i], values[i] - background);
    }
  }
  if (seg.size() < 8) {
    fit.note = "too few samples in the transient window";
    return fit;
  }
  const double full = std::abs(seg.front().second);
  if (full <= 0.0) {
    fit.note = "transient has no amplitude";
    return fit;
  }
  // Keep the stretch where the remaining swing lies between 90% and 10%.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (const auto& [t, y] : seg) {
    const double mag = std::abs(y);
    if (mag > 0.9 * full || mag < 0.1 * full) continue;
    const double ly = std::log(mag);
    sx += t;
    sy += ly;
    sxx += t * t;
    sxy += t * ly;
    ++n;
  }
  if (n < 5) {
    fit.note = "too few samples between 10% and 90% of the swing";
    return fit;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) {
    fit.note = "degenerate least squares";
    return fit;
  }
  const double slope = (n * sxy - sx * sy) / denom;
  if (slope >= 0.0) {
    fit.note = "signal does not decay toward the background";
    return fit;
  }
  fit.tau = -1.0 / slope;
  fit.ok = true;
  return fit;
}

// Dominant oscillation frequency of a detrended series via a phasor-scanned
// DFT with parabolic peak refinement.
std::pair<double, bool> dominant_frequency(std::span<const double> times,
                                           std::span<const double> values,
                                           double omega_lo, double omega_hi) {
  const std::size_t n = times.size();
  if (n < 16) return {0.0, false};
  // Linear detrend.
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sx += times[i];
    sy += values[i];
    sxx += times[i] * times[i];
    sxy += times[i] * values[i];
  }
  const double denom = n * sxx - sx * sx;
  const double slope = denom != 0.0 ? (n * sxy - sx * sy) / denom : 0.0;
  const double icept = (sy - slope * sx) / n;

  const double span = times.back() - times.front();
  const double stride = times[1] - times[0];
  const double step = 2.0 * M_PI / (4.0 * span);
  const int n_candidates =
      static_cast<int>(std::floor((omega_hi - omega_lo) / step)) + 1;
  double best_omega = 0.0, best_power = -1.0, prev_power = 0.0, next_power = 0.0;
  std::vector<double> powers(n_candidates);
  for (int c = 0; c < n_candidates; ++c) {
    const double omega = omega_lo + c * step;
    const Complex rot = std::exp(-kImag * omega * stride);
    Complex phase = std::exp(-kImag * omega * times.front());
    Complex acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      acc += (values[i] - icept - slope * times[i]) * phase;
      phase *= rot;
    }
    powers[c] = std::norm(acc);
  }
  int best = 0;
  for (int c = 1; c < n_candidates; ++c) {
    if (powers[c] > powers[best]) best = c;
  }
  if (best == 0 || best == n_candidates - 1) {
    return {omega_lo + best * step, true};
  }
  best_power = powers[best];
  prev_power = powers[best - 1];
  next_power = powers[best + 1];
  best_omega = omega_lo + best * step;
  const double curvature = prev_power - 2.0 * best_power + next_power;
  if (curvature < 0.0) {
    best_omega += 0.5 * step * (prev_power - next_power) / curvature;
  }
  return {best_omega, true};
}

}  // namespace

TransistorResult transistor_run(const SystemParams& params,
                                const DriveSchedule& control_schedule,
                                const PipelineOptions& options) {
  params.validate();
  if (params.eps_p <= 0.0) {
    throw InvalidArgumentError("transistor_run: probe must be on (eps_p > 0)");
  }
  const double omega_b = params.omega_beat();
  if (omega_b == 0.0) {
    throw InvalidArgumentError("transistor_run: delta_p == delta_c");
  }

  // Phase boundaries from a 0 -> 1 -> 1 -> 0 pulse; fits are skipped for
  // other shapes.
  TransistorResult result;
  const auto& knots = control_schedule.knots();
  bool pulse_shape = knots.size() == 4 && knots[0].level == 0.0 &&
                     knots[1].level == 1.0 && knots[2].level == 1.0 &&
                     knots[3].level == 0.0;
  if (pulse_shape) {
    result.t_ramp_end = knots[1].time;
    result.t_hold_end = knots[2].time;
    result.t_off_end = knots[3].time;
  }

  const ModeSpace space =
      options.space_override
          ? *options.space_override
          : convergence_guard(
                params,
                [&](const ModeSpace& candidate) {
                  return transmission_linear_response(params, candidate,
                                                      params.delta_p);
                },
                options.convergence_tol, options.truncation_ceiling,
                options.grow_photon_first);
  result.space = space;

  const double period = 2.0 * M_PI / std::abs(omega_b);
  const int samples_per_period = 64;
  const double stride = period / samples_per_period;

  const double schedule_end =
      pulse_shape ? result.t_off_end
                  : (knots.empty() ? 0.0 : knots.back().time);
  const double t_pre =
      std::ceil(std::max(10.0 / params.kappa, 3.0 * period) / stride) * stride;
  const double t_tail =
      std::ceil(std::max(20.0 / params.kappa, 10.0 * period) / stride) * stride;
  const double t_begin = -t_pre;
  const double t_end =
      t_begin +
      std::ceil((schedule_end + t_tail - t_begin) / stride) * stride;

  const LindbladGenerator gen = build_generator(
      params, space, {control_schedule, DriveSchedule(1.0)});

  IntegratorSettings settings = options.integrator;
  settings.sample_stride = stride;

  const PolaronBasis basis(params, space);
  auto observer = [&](double t, const ComplexMatrix& rho) {
    const RealMatrix p = basis.populations(rho);
    result.p00.push_back(p(0, 0));
    result.p01.push_back(space.n_phonon_levels > 1 ? p(0, 1) : 0.0);
    result.p10.push_back(space.n_photon_levels > 1 ? p(1, 0) : 0.0);
    result.p11.push_back(
        space.n_photon_levels > 1 && space.n_phonon_levels > 1 ? p(1, 1) : 0.0);
    result.control_power.push_back(control_schedule.value(t));
  };

  const StateTrajectory traj = evolve(gen, thermal_state(space, params.n_th),
                                      t_begin, t_end, settings, {}, observer);
  result.times = traj.times;
  result.photon_number = traj.photon_number;
  result.phonon_number = traj.phonon_number;

  // Sliding one-beat-period demodulation.
  const int window_samples = samples_per_period;
  result.first_valid = window_samples;
  result.transmission.assign(result.times.size(), 0.0);
  for (std::size_t k = window_samples; k < result.times.size(); ++k) {
    const std::size_t first = k - window_samples;
    const SidebandDecomposition d = demodulate(
        std::span<const double>(traj.times.data() + first, window_samples + 1),
        std::span<const Complex>(traj.a_expectation.data() + first,
                                 window_samples + 1),
        omega_b, 1, params.eps_p, params.kappa);
    result.transmission[k] = d.transmission;
  }

  if (pulse_shape) {
    // Switch-on settling: from ramp end into the hold, background = late-hold
    // mean.
    const double hold_span = result.t_hold_end - result.t_ramp_end;
    double on_bg = 0.0;
    int on_count = 0;
    for (std::size_t i = result.first_valid; i < result.times.size(); ++i) {
      if (result.times[i] >= result.t_hold_end - 0.1 * hold_span &&
          result.times[i] <= result.t_hold_end) {
        on_bg += result.transmission[i];
        ++on_count;
      }
    }
    if (on_count > 0) {
      result.switch_on = fit_exponential_transient(
          result.times, result.transmission, result.t_ramp_end,
          result.t_hold_end, on_bg / on_count);
    } else {
      result.switch_on.note = "hold phase not sampled";
    }

    // Switch-off recovery: background = late-tail mean.
    double off_bg = 0.0;
    int off_count = 0;
    const double tail_begin = result.t_off_end;
    const double tail_span = result.times.back() - tail_begin;
    for (std::size_t i = result.first_valid; i < result.times.size(); ++i) {
      if (result.times[i] >= tail_begin + 0.9 * tail_span) {
        off_bg += result.transmission[i];
        ++off_count;
      }
    }
    if (off_count > 0) {
      result.switch_off = fit_exponential_transient(
          result.times, result.transmission, tail_begin,
          result.times.back(), off_bg / off_count);
    } else {
      result.switch_off.note = "tail not sampled";
    }

    // p10 oscillation during the hold (middle 60%), decimated to ~8 samples
    // per mechanical period for the frequency scan.
    std::vector<double> ht, hv;
    const double lo = result.t_ramp_end + 0.2 * hold_span;
    const double hi = result.t_hold_end - 0.2 * hold_span;
    const double mech_period = 2.0 * M_PI / params.omega;
    const std::size_t decimate = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::floor(mech_period / 8.0 / stride)));
    for (std::size_t i = 0; i < result.times.size(); i += decimate) {
      if (result.times[i] >= lo && result.times[i] <= hi) {
        ht.push_back(result.times[i]);
        hv.push_back(result.p10[i]);
      }
    }
    std::tie(result.p10_frequency, result.p10_frequency_ok) =
        dominant_frequency(ht, hv, 0.3 * params.omega, 2.5 * params.omega);
  } else {
    result.switch_on.note = result.switch_off.note =
        "schedule is not a single 0->1->1->0 pulse";
  }
  return result;
}

}  // namespace omitq
