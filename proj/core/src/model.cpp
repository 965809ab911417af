#include "omitq/model.hpp"

#include <cmath>
#include <string>

namespace omitq {

void SystemParams::validate() const {
  if (omega != 1.0) {
    throw InvalidArgumentError(
        "SystemParams: omega fixes the unit system and must be 1");
  }
  if (kappa <= 0.0) throw InvalidArgumentError("SystemParams: kappa must be > 0");
  if (gamma_m <= 0.0)
    throw InvalidArgumentError("SystemParams: gamma_m must be > 0");
  if (kappa_out <= 0.0 || kappa_out > kappa) {
    throw InvalidArgumentError(
        "SystemParams: kappa_out must satisfy 0 < kappa_out <= kappa");
  }
  if (g0 < 0.0) throw InvalidArgumentError("SystemParams: g0 must be >= 0");
  if (n_th < 0.0) throw InvalidArgumentError("SystemParams: n_th must be >= 0");
  if (eps_c < 0.0)
    throw InvalidArgumentError("SystemParams: eps_c must be >= 0");
  if (eps_p < 0.0)
    throw InvalidArgumentError("SystemParams: eps_p must be >= 0");
  if (g0 > kCouplingHardLimit * omega) {
    throw InvalidArgumentError(
        "SystemParams: g0 = " + std::to_string(g0) +
        " exceeds the weak-coupling domain g0 <= " +
        std::to_string(kCouplingHardLimit) + " Omega");
  }
}

std::vector<std::string> SystemParams::warnings() const {
  std::vector<std::string> out;
  if (g0 > kCouplingWarnLimit * omega) {
    out.push_back("g0 = " + std::to_string(g0) + " Omega is above " +
                  std::to_string(kCouplingWarnLimit) +
                  " Omega; sideband structure may be distorted");
  }
  return out;
}

bool LindbladGenerator::probe_active() const {
  if (params.eps_p == 0.0) return false;
  if (probe_envelope.is_constant() &&
      probe_envelope.knots().front().level == 0.0) {
    return false;
  }
  return true;
}

ComplexMatrix LindbladGenerator::static_hamiltonian(double level) const {
  return h_frame + level * h_control_drive;
}

ComplexMatrix LindbladGenerator::hamiltonian(double t) const {
  ComplexMatrix h = h_frame + control_envelope.amplitude(t) * h_control_drive;
  const double ep = probe_envelope.amplitude(t);
  if (ep != 0.0 && params.eps_p != 0.0) {
    const Complex phase = std::exp(-kImag * omega_beat * t);
    h += ep * (phase * probe_raise + std::conj(phase) * probe_lower);
  }
  return h;
}

LindbladGenerator build_generator(const SystemParams& params,
                                  const ModeSpace& space,
                                  const DriveSchedules& envelopes) {
  params.validate();

  LindbladGenerator gen{space,
                        params,
                        {},
                        {},
                        {},
                        {},
                        params.omega_beat(),
                        {},
                        envelopes.control,
                        envelopes.probe};

  const ComplexMatrix a =
      tensor_embed(ladder_operator(space.n_photon_levels), space, Mode::Photon);
  const ComplexMatrix b =
      tensor_embed(ladder_operator(space.n_phonon_levels), space, Mode::Phonon);
  const ComplexMatrix na = a.adjoint() * a;
  const ComplexMatrix nb = b.adjoint() * b;

  // Detunings are defined from ω_cav^eff = ω_cav − g0²/Ω; the bare-frame
  // photon coefficient therefore reads −(Δ_c − g0²/Ω).
  const double photon_coeff =
      -(params.delta_c - params.g0 * params.g0 / params.omega);
  gen.h_frame = photon_coeff * na + params.omega * nb -
                params.g0 * ((b.adjoint() + b) * na);
  gen.h_control_drive = params.eps_c * (a.adjoint() + a);
  gen.probe_raise = params.eps_p * a.adjoint();
  gen.probe_lower = params.eps_p * a;

  if (gen.probe_active() && gen.omega_beat == 0.0) {
    throw InvalidArgumentError(
        "build_generator: probe at zero beat frequency (delta_p == delta_c); "
        "the sideband decomposition is undefined");
  }

  gen.channels.push_back({params.kappa, a, "photon loss"});
  gen.channels.push_back(
      {params.gamma_m * (params.n_th + 1.0), b, "phonon decay"});
  if (params.n_th > 0.0) {
    gen.channels.push_back(
        {params.gamma_m * params.n_th, b.adjoint(), "phonon heating"});
  }
  return gen;
}

PolaronLevel eigenenergy(int n_a, int n_b, const SystemParams& params) {
  if (n_a < 0 || n_b < 0) {
    throw InvalidArgumentError("eigenenergy: quantum numbers must be >= 0");
  }
  const double offset =
      params.omega * n_b -
      params.g0 * params.g0 * n_a * (n_a - 1) / params.omega;
  return {n_a, offset};
}

namespace {

// Associated Laguerre L_k^(alpha)(x) by the three-term recurrence.
double associated_laguerre(int k, int alpha, double x) {
  if (k == 0) return 1.0;
  double lm1 = 1.0;
  double l = 1.0 + alpha - x;
  for (int j = 2; j <= k; ++j) {
    const double next =
        ((2.0 * j - 1.0 + alpha - x) * l - (j - 1.0 + alpha) * lm1) / j;
    lm1 = l;
    l = next;
  }
  return l;
}

}  // namespace

double franck_condon(int m, int n, double lambda) {
  if (m < 0 || n < 0) {
    throw InvalidArgumentError("franck_condon: quantum numbers must be >= 0");
  }
  // |<m|D(λ)|n>|² is symmetric in (m, n) for real λ.
  if (m < n) std::swap(m, n);
  const double x = lambda * lambda;
  const int d = m - n;
  // n!/m! * x^d
  double prefactor = 1.0;
  for (int j = n + 1; j <= m; ++j) prefactor *= x / j;
  const double lag = associated_laguerre(n, d, x);
  return std::exp(-x) * prefactor * lag * lag;
}

double franck_condon_numeric(int m, int n, double lambda, int dim) {
  if (m >= dim || n >= dim) {
    throw InvalidDimensionError(
        "franck_condon_numeric: quantum numbers exceed truncation");
  }
  const ComplexMatrix d = displacement_operator(dim, Complex{lambda, 0.0});
  return std::norm(d(m, n));
}

Complex classical_alpha(const SystemParams& params) {
  return kImag * params.eps_c /
         (kImag * params.delta_c - 0.5 * params.kappa);
}

Complex mechanical_susceptibility(double omega, const SystemParams& params) {
  const double w = omega / params.omega;
  const Complex inverse =
      1.0 - w * w - kImag * omega * params.gamma_m / (params.omega * params.omega);
  return 1.0 / inverse;
}

namespace {

double linearized_transmission(const SystemParams& params, double delta_p,
                               double photon_number, double numerator_scale) {
  const double coupling_term =
      2.0 * params.g0 * params.g0 / params.omega * photon_number;
  const Complex chi =
      mechanical_susceptibility(delta_p - params.delta_c, params);
  const Complex denominator =
      -kImag * delta_p + 0.5 * params.kappa - kImag * coupling_term * chi;
  return numerator_scale * 0.25 * params.kappa * params.kappa /
         std::norm(denominator);
}

}  // namespace

double classical_transmission(const SystemParams& params, double delta_p) {
  const double photon_number = std::norm(classical_alpha(params));
  return linearized_transmission(params, delta_p, photon_number, 1.0);
}

double modified_classical_transmission(const SystemParams& params,
                                       double delta_p, double photon_number) {
  if (photon_number < 0.0) {
    throw InvalidArgumentError(
        "modified_classical_transmission: photon_number must be >= 0");
  }
  const double lambda = params.g0 / params.omega;
  return linearized_transmission(params, delta_p, photon_number,
                                 std::exp(-lambda * lambda));
}

}  // namespace omitq
