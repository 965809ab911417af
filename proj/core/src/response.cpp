#include "omitq/response.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace omitq {

double normalized_transmission(Complex delta_a_plus, Complex delta_a_minus,
                               double kappa) {
  return 0.25 * kappa * kappa *
         (std::norm(delta_a_plus) + std::norm(delta_a_minus));
}

SidebandDecomposition SidebandDecomposition::make(Complex alpha, Complex plus,
                                                  Complex minus,
                                                  double harmonic2,
                                                  double kappa) {
  SidebandDecomposition d;
  d.alpha = alpha;
  d.delta_a_plus = plus;
  d.delta_a_minus = minus;
  d.harmonic_2_magnitude = harmonic2;
  d.transmission = normalized_transmission(plus, minus, kappa);
  d.harmonic_flagged =
      harmonic2 > 0.05 * (std::abs(plus) + std::abs(minus));
  return d;
}

namespace {

constexpr double kSteadyStateResidualTol = 1e-10;
constexpr double kNullSpaceAgreementTol = 1e-7;

double stationary_control_level(const LindbladGenerator& gen) {
  if (!gen.control_envelope.is_constant()) {
    throw InvalidArgumentError(
        "steady state requires a constant control envelope");
  }
  return gen.control_envelope.amplitude(0.0);
}

// L with row `pinned_row` replaced by the trace functional. Solving
// M x = e_pinned then enforces L x = 0 on the other rows and Tr x = 1.
SparseMatrixCd with_trace_row(const SparseMatrixCd& l, int dim,
                              int pinned_row) {
  std::vector<Eigen::Triplet<Complex>> triplets;
  triplets.reserve(l.nonZeros() + dim);
  for (int k = 0; k < l.outerSize(); ++k) {
    for (SparseMatrixCd::InnerIterator it(l, k); it; ++it) {
      if (it.row() == pinned_row) continue;
      triplets.emplace_back(it.row(), it.col(), it.value());
    }
  }
  for (int j = 0; j < dim; ++j) {
    triplets.emplace_back(pinned_row, j * dim + j, Complex{1.0, 0.0});
  }
  SparseMatrixCd m(l.rows(), l.cols());
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

std::optional<ComplexMatrix> solve_pinned(const SparseMatrixCd& l, int dim,
                                          int pinned_row) {
  const SparseMatrixCd m = with_trace_row(l, dim, pinned_row);
  Eigen::SparseLU<SparseMatrixCd> lu;
  lu.compute(m);
  if (lu.info() != Eigen::Success) return std::nullopt;
  ComplexVector b = ComplexVector::Zero(l.rows());
  b[pinned_row] = 1.0;
  ComplexVector x = lu.solve(b);
  if (lu.info() != Eigen::Success) return std::nullopt;
  ComplexMatrix rho = unvectorize(x, dim);
  rho = 0.5 * (rho + rho.adjoint()).eval();
  rho /= rho.trace().real();
  return rho;
}

double residual_of(const SparseMatrixCd& l, const ComplexMatrix& rho) {
  const ComplexVector r = l * vectorize(rho);
  return r.cwiseAbs().maxCoeff();
}

}  // namespace

double steady_state_residual(const LindbladGenerator& gen,
                             const DensityMatrix& rho) {
  const Liouvillian liouville = build_liouvillian(gen);
  return residual_of(liouville.stationary(stationary_control_level(gen)),
                     rho.matrix());
}

DensityMatrix steady_state(const LindbladGenerator& gen) {
  if (gen.probe_active()) {
    throw InvalidArgumentError(
        "steady_state: generator must be time-independent (probe off)");
  }
  const double level = stationary_control_level(gen);
  const int dim = gen.space.joint_dimension();
  const Liouvillian liouville = build_liouvillian(gen);
  const SparseMatrixCd l0 = liouville.stationary(level);

  const auto first = solve_pinned(l0, dim, 0);
  const auto second = solve_pinned(l0, dim, dim * dim - 1);
  if (first && second) {
    const double disagreement =
        (first.value() - second.value()).cwiseAbs().maxCoeff();
    if (disagreement > kNullSpaceAgreementTol) {
      throw AmbiguousSteadyStateError(
          "steady_state: null space is degenerate at tolerance (pinned-row "
          "solutions differ by " +
          std::to_string(disagreement) + ")");
    }
  }

  std::optional<ComplexMatrix> rho = first ? first : second;
  if (rho && residual_of(l0, rho.value()) <= kSteadyStateResidualTol) {
    return DensityMatrix::unchecked(std::move(rho.value()), gen.space);
  }

  // Fallback: relax from the thermal reference state, then polish with
  // inverse iteration on a tiny shift.
  const auto& p = gen.params;
  const double slowest =
      std::min(p.kappa, p.gamma_m * (2.0 * p.n_th + 1.0));
  const double t_relax = 20.0 / slowest;
  StateTrajectory traj =
      evolve(gen, thermal_state(gen.space, p.n_th), 0.0, t_relax, {},
             std::array<double, 1>{t_relax});
  ComplexMatrix candidate = traj.snapshots.back().state.matrix();

  SparseMatrixCd shifted = l0;
  SparseMatrixCd eye(l0.rows(), l0.cols());
  eye.setIdentity();
  shifted -= SparseMatrixCd(1e-13 * eye);
  Eigen::SparseLU<SparseMatrixCd> lu;
  lu.compute(shifted);
  if (lu.info() == Eigen::Success) {
    for (int iter = 0; iter < 5; ++iter) {
      if (residual_of(l0, candidate) <= kSteadyStateResidualTol) break;
      ComplexVector x = lu.solve(vectorize(candidate));
      ComplexMatrix next = unvectorize(x, dim);
      next = 0.5 * (next + next.adjoint()).eval();
      next /= next.trace().real();
      candidate = next;
    }
  }
  const double res = residual_of(l0, candidate);
  if (res > kSteadyStateResidualTol) {
    throw IntegrationFailureError(
        "steady_state: residual " + std::to_string(res) +
        " above tolerance after fallback");
  }
  return DensityMatrix::unchecked(std::move(candidate), gen.space);
}

SidebandDecomposition demodulate(std::span<const double> times,
                                 std::span<const Complex> a_trace,
                                 double omega_b, int window_periods,
                                 double eps_p, double kappa) {
  if (eps_p == 0.0) {
    throw InvalidArgumentError("demodulate: eps_p must be nonzero");
  }
  if (omega_b == 0.0) {
    throw InvalidArgumentError("demodulate: omega_b must be nonzero");
  }
  if (window_periods < 1) {
    throw InvalidArgumentError("demodulate: window must cover >= 1 period");
  }
  if (times.size() != a_trace.size() || times.size() < 3) {
    throw InvalidArgumentError("demodulate: degenerate trace");
  }

  const double stride = times[1] - times[0];
  const double period = 2.0 * M_PI / std::abs(omega_b);
  const double window_span = window_periods * period;
  const double intervals_exact = window_span / stride;
  const long intervals = std::lround(intervals_exact);
  if (std::abs(intervals_exact - static_cast<double>(intervals)) >
      1e-6 * intervals_exact) {
    throw WindowAlignmentError(
        "demodulate: " + std::to_string(window_periods) +
        " beat periods do not align with the sample grid (need " +
        std::to_string(intervals_exact) + " intervals)");
  }
  if (intervals + 1 > static_cast<long>(times.size())) {
    throw WindowAlignmentError(
        "demodulate: trace covers fewer than the requested whole periods");
  }
  const std::size_t begin = times.size() - 1 - static_cast<std::size_t>(intervals);

  // Trapezoidal average of a(t) e^{+i h ω_b t} over the window.
  auto harmonic = [&](int h) {
    Complex acc = 0.0;
    for (std::size_t k = begin; k <= times.size() - 1; ++k) {
      const Complex mixed =
          a_trace[k] * std::exp(kImag * (h * omega_b) * times[k]);
      const double weight = (k == begin || k == times.size() - 1) ? 0.5 : 1.0;
      acc += weight * mixed;
    }
    return acc * stride / window_span;
  };

  const Complex alpha = harmonic(0);
  const Complex plus = harmonic(+1) / eps_p;
  const Complex minus = harmonic(-1) / eps_p;
  const double harmonic2 =
      std::hypot(std::abs(harmonic(+2)), std::abs(harmonic(-2))) / eps_p;
  return SidebandDecomposition::make(alpha, plus, minus, harmonic2, kappa);
}

std::pair<Complex, Complex> sidebands_linear_response(
    const LindbladGenerator& gen, const DensityMatrix& rho_ss,
    double omega_b) {
  if (omega_b == 0.0) {
    throw ResonanceDegeneracyError(
        "sidebands_linear_response: omega_b = 0 is degenerate");
  }
  if (rho_ss.space() != gen.space) {
    throw InvalidDimensionError(
        "sidebands_linear_response: state space mismatch");
  }
  const int dim = gen.space.joint_dimension();
  const double level = stationary_control_level(gen);
  const Liouvillian liouville = build_liouvillian(gen);
  const SparseMatrixCd l0 = liouville.stationary(level);

  const ComplexMatrix a = tensor_embed(
      ladder_operator(gen.space.n_photon_levels), gen.space, Mode::Photon);
  // Unit-amplitude probe couplings; results are per unit ε_p.
  const SparseMatrixCd p_plus = commutator_superop(a.adjoint());
  const SparseMatrixCd p_minus = commutator_superop(a);

  SparseMatrixCd eye(dim * dim, dim * dim);
  eye.setIdentity();

  const ComplexVector v_ss = vectorize(rho_ss.matrix());

  auto solve_shifted = [&](const SparseMatrixCd& coupling, Complex shift) {
    SparseMatrixCd m = l0;
    m += SparseMatrixCd(shift * eye);
    Eigen::SparseLU<SparseMatrixCd> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) {
      throw ResonanceDegeneracyError(
          "sidebands_linear_response: shifted system singular at omega_b = " +
          std::to_string(omega_b));
    }
    const ComplexVector rhs = -(coupling * v_ss);
    ComplexVector x = lu.solve(rhs);
    const double resid = (m * x - rhs).cwiseAbs().maxCoeff();
    if (resid > 1e-10) {
      throw ResonanceDegeneracyError(
          "sidebands_linear_response: solve residual " +
          std::to_string(resid) + " at omega_b = " + std::to_string(omega_b));
    }
    return x;
  };

  const ComplexVector rho_plus = solve_shifted(p_plus, kImag * omega_b);
  const ComplexVector rho_minus = solve_shifted(p_minus, -kImag * omega_b);

  const SparseMatrixCd a_sparse = a.sparseView();
  auto trace_a = [&](const ComplexVector& v) {
    Complex sum = 0.0;
    for (int k = 0; k < a_sparse.outerSize(); ++k) {
      for (SparseMatrixCd::InnerIterator it(a_sparse, k); it; ++it) {
        sum += it.value() *
               v[static_cast<Eigen::Index>(it.row()) * dim + it.col()];
      }
    }
    return sum;
  };
  return {trace_a(rho_plus), trace_a(rho_minus)};
}

SidebandDecomposition stationary_sidebands_time_domain(
    const SystemParams& params, const ModeSpace& space,
    const StationarySidebandOptions& options) {
  if (params.eps_p <= 0.0) {
    throw InvalidArgumentError(
        "stationary_sidebands_time_domain: eps_p must be > 0");
  }
  SystemParams probe_off = params;
  probe_off.eps_p = 0.0;
  const LindbladGenerator gen_off = build_generator(probe_off, space);
  const LindbladGenerator gen = build_generator(params, space);

  const double omega_b = gen.omega_beat;
  const double period = 2.0 * M_PI / std::abs(omega_b);
  const double stride = period / options.samples_per_period;
  const int window_samples =
      options.window_periods * options.samples_per_period;

  IntegratorSettings settings = options.integrator;
  settings.sample_stride = stride;

  double t_relax = std::max(10.0 / params.gamma_m, 10.0 / params.kappa);

  DensityMatrix state = steady_state(gen_off);
  double t_begin = 0.0;
  SidebandDecomposition previous{}, current{};
  for (int attempt = 0; attempt <= options.max_doublings; ++attempt) {
    // Cover the relaxation stretch plus two demodulation windows.
    const double span =
        std::ceil((t_relax + 2.0 * options.window_periods * period) / stride) *
        stride;
    const double t_end = t_begin + span;
    StateTrajectory traj =
        evolve(gen, state, t_begin, t_end, settings,
               std::array<double, 1>{t_end});

    const std::size_t n = traj.times.size();
    const std::size_t need = 2 * static_cast<std::size_t>(window_samples) + 1;
    if (n < need) {
      throw IntegrationFailureError(
          "stationary_sidebands_time_domain: trace shorter than two windows");
    }
    auto window = [&](std::size_t last) {
      const std::size_t first = last + 1 - (window_samples + 1);
      return demodulate(
          std::span<const double>(traj.times.data() + first,
                                  window_samples + 1),
          std::span<const Complex>(traj.a_expectation.data() + first,
                                   window_samples + 1),
          omega_b, options.window_periods, params.eps_p, params.kappa);
    };
    previous = window(n - 1 - window_samples);
    current = window(n - 1);

    const double change = std::abs(current.delta_a_plus - previous.delta_a_plus) +
                          std::abs(current.delta_a_minus - previous.delta_a_minus);
    const double scale = std::abs(current.delta_a_plus) +
                         std::abs(current.delta_a_minus) + 1e-300;
    if (change / scale < options.stationarity_tol) {
      return current;
    }
    // Not stationary yet: continue from the final state and double the
    // relaxation stretch.
    state = std::move(traj.snapshots.back().state);
    t_begin = t_end;
    t_relax *= 2.0;
  }
  throw IntegrationFailureError(
      "stationary_sidebands_time_domain: sidebands did not settle after " +
      std::to_string(options.max_doublings) + " doublings");
}

}  // namespace omitq
