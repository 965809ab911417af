#include "omitq/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace omitq {

ComplexMatrix apply_generator(const LindbladGenerator& gen,
                              const ComplexMatrix& rho, double t) {
  const int dim = gen.space.joint_dimension();
  if (rho.rows() != dim || rho.cols() != dim) {
    throw InvalidDimensionError("apply_generator: state dimension " +
                                std::to_string(rho.rows()) +
                                " does not match joint dimension " +
                                std::to_string(dim));
  }
  const ComplexMatrix h = gen.hamiltonian(t);
  ComplexMatrix out = -kImag * (h * rho - rho * h);
  for (const auto& ch : gen.channels) {
    if (ch.rate == 0.0) continue;
    const ComplexMatrix cdc = ch.op.adjoint() * ch.op;
    out += ch.rate * (ch.op * rho * ch.op.adjoint() -
                      0.5 * (cdc * rho + rho * cdc));
  }
  return out;
}

namespace {

double gershgorin_radius(const ComplexMatrix& m) {
  double r = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    r = std::max(r, m.row(i).cwiseAbs().sum());
  }
  return r;
}

}  // namespace

double default_time_step(const LindbladGenerator& gen) {
  const auto& p = gen.params;
  // Largest physical frequency of the run.
  double omega_max = p.omega;
  omega_max = std::max(omega_max, std::abs(p.delta_c - p.g0 * p.g0 / p.omega));
  omega_max = std::max(omega_max, p.kappa);
  omega_max = std::max(omega_max, p.gamma_m * (p.n_th + 1.0));
  if (gen.probe_active()) {
    omega_max = std::max(omega_max, std::abs(gen.omega_beat));
  }
  const double dt_accuracy = 2.0 * M_PI / (50.0 * omega_max);

  // RK4 stability: the commutator spectrum spans at most twice the
  // Hamiltonian spectral radius (Gershgorin bound, all drives at maximum),
  // plus the dissipative norm.
  ComplexMatrix h_abs = gen.h_frame.cwiseAbs() +
                        gen.h_control_drive.cwiseAbs() +
                        gen.probe_raise.cwiseAbs() + gen.probe_lower.cwiseAbs();
  double bound = 2.0 * gershgorin_radius(h_abs);
  for (const auto& ch : gen.channels) {
    const double cr = gershgorin_radius(ch.op);
    bound += 2.0 * ch.rate * cr * cr;
  }
  const double dt_stability = bound > 0.0 ? 2.5 / bound : dt_accuracy;

  return std::min(dt_accuracy, dt_stability);
}

namespace {

// Tr(op · ρ) with sparse op and vectorized ρ (column stacking).
Complex sparse_expectation(const SparseMatrixCd& op, const ComplexVector& v,
                           int dim) {
  Complex sum = 0.0;
  for (int k = 0; k < op.outerSize(); ++k) {
    for (SparseMatrixCd::InnerIterator it(op, k); it; ++it) {
      // op(i, j) * rho(j, i); vec index of rho(j, i) is i*dim + j.
      sum += it.value() *
             v[static_cast<Eigen::Index>(it.row()) * dim + it.col()];
    }
  }
  return sum;
}

double hermiticity_defect_of(const ComplexMatrix& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

}  // namespace

StateTrajectory evolve(const LindbladGenerator& gen, const DensityMatrix& rho0,
                       double t_begin, double t_end,
                       const IntegratorSettings& settings,
                       std::span<const double> snapshot_times,
                       const SampleObserver& observer) {
  const int dim = gen.space.joint_dimension();
  if (rho0.space() != gen.space) {
    throw InvalidDimensionError("evolve: state space does not match generator");
  }
  if (!(t_end > t_begin) || !std::isfinite(t_begin) || !std::isfinite(t_end)) {
    throw InvalidArgumentError("evolve: need finite t_end > t_begin");
  }

  const double span = t_end - t_begin;
  const double dt_target =
      settings.dt > 0.0 ? settings.dt : default_time_step(gen);
  double stride = settings.sample_stride > 0.0 ? settings.sample_stride
                                               : span / 1024.0;
  stride = std::max(stride, dt_target);
  const long n_samples = std::max<long>(1, std::lround(span / stride));
  stride = span / static_cast<double>(n_samples);
  const long steps_per_sample =
      std::max<long>(1, static_cast<long>(std::ceil(stride / dt_target - 1e-12)));
  const double dt = stride / static_cast<double>(steps_per_sample);

  const Liouvillian liouville = build_liouvillian(gen);
  const SparseMatrixCd a_op =
      tensor_embed(ladder_operator(gen.space.n_photon_levels), gen.space,
                   Mode::Photon)
          .sparseView();
  const SparseMatrixCd na_op = tensor_embed(
      number_operator(gen.space.n_photon_levels), gen.space, Mode::Photon)
                                   .sparseView();
  const SparseMatrixCd nb_op = tensor_embed(
      number_operator(gen.space.n_phonon_levels), gen.space, Mode::Phonon)
                                   .sparseView();

  // Snapshot bookkeeping: map requested times to sample indices.
  std::vector<std::pair<long, double>> snapshot_index;
  snapshot_index.reserve(snapshot_times.size());
  for (double ts : snapshot_times) {
    long idx = std::lround((ts - t_begin) / stride);
    idx = std::clamp<long>(idx, 0, n_samples);
    snapshot_index.emplace_back(idx, ts);
  }
  std::sort(snapshot_index.begin(), snapshot_index.end());

  StateTrajectory traj;
  traj.dt_used = dt;
  traj.sample_stride_used = stride;
  const long total_samples = n_samples + 1;
  traj.times.reserve(total_samples);
  traj.a_expectation.reserve(total_samples);
  traj.photon_number.reserve(total_samples);
  traj.phonon_number.reserve(total_samples);
  traj.trace.reserve(total_samples);
  traj.hermiticity_defect.reserve(total_samples);

  ComplexVector v = vectorize(rho0.matrix());
  ComplexVector k1(v.size()), k2(v.size()), k3(v.size()), k4(v.size()),
      work(v.size());

  auto envelope_c = [&](double t) { return gen.control_envelope.amplitude(t); };
  auto envelope_p = [&](double t) {
    return gen.params.eps_p == 0.0 ? 0.0 : gen.probe_envelope.amplitude(t);
  };

  auto record = [&](long sample, double t) {
    const Eigen::Map<const ComplexMatrix> rho(v.data(), dim, dim);
    const double tr = rho.trace().real();
    traj.times.push_back(t);
    traj.a_expectation.push_back(sparse_expectation(a_op, v, dim));
    traj.photon_number.push_back(sparse_expectation(na_op, v, dim).real());
    traj.phonon_number.push_back(sparse_expectation(nb_op, v, dim).real());
    traj.trace.push_back(tr);
    traj.hermiticity_defect.push_back(hermiticity_defect_of(rho));
    if (std::abs(tr - 1.0) > settings.trace_tolerance) {
      throw IntegrationFailureError(
          "evolve: trace drift " + std::to_string(std::abs(tr - 1.0)) +
          " at t = " + std::to_string(t) +
          " exceeds tolerance; reduce the time step");
    }
    for (const auto& [idx, ts] : snapshot_index) {
      if (idx == sample) {
        traj.snapshots.push_back(
            {t, DensityMatrix::unchecked(ComplexMatrix(rho), gen.space)});
      }
    }
    if (observer) observer(t, rho);
  };

  record(0, t_begin);
  for (long s = 0; s < n_samples; ++s) {
    double t = t_begin + static_cast<double>(s) * stride;
    for (long k = 0; k < steps_per_sample; ++k) {
      const double th = t + 0.5 * dt;
      const double tf = t + dt;
      liouville.apply(envelope_c(t), envelope_p(t), t, v, k1);
      work = v + (0.5 * dt) * k1;
      liouville.apply(envelope_c(th), envelope_p(th), th, work, k2);
      work = v + (0.5 * dt) * k2;
      liouville.apply(envelope_c(th), envelope_p(th), th, work, k3);
      work = v + dt * k3;
      liouville.apply(envelope_c(tf), envelope_p(tf), tf, work, k4);
      v += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t = tf;
    }
    record(s + 1, t_begin + static_cast<double>(s + 1) * stride);
  }
  return traj;
}

PolaronBasis::PolaronBasis(const SystemParams& params, const ModeSpace& space)
    : space_(space) {
  const double lambda = params.g0 / params.omega;
  sector_displacements_.reserve(space.n_photon_levels);
  for (int na = 0; na < space.n_photon_levels; ++na) {
    if (na == 0 || lambda == 0.0) {
      sector_displacements_.push_back(
          ComplexMatrix::Identity(space.n_phonon_levels, space.n_phonon_levels));
    } else {
      sector_displacements_.push_back(displacement_operator(
          space.n_phonon_levels, Complex{na * lambda, 0.0}));
    }
  }
}

RealMatrix PolaronBasis::populations(const ComplexMatrix& rho) const {
  const int na_levels = space_.n_photon_levels;
  const int nb_levels = space_.n_phonon_levels;
  if (rho.rows() != space_.joint_dimension()) {
    throw InvalidDimensionError("populations: state dimension mismatch");
  }
  RealMatrix p(na_levels, nb_levels);
  for (int na = 0; na < na_levels; ++na) {
    const auto block = rho.block(na * nb_levels, na * nb_levels, nb_levels,
                                 nb_levels);
    const ComplexMatrix& d = sector_displacements_[na];
    for (int nb = 0; nb < nb_levels; ++nb) {
      p(na, nb) = (d.col(nb).adjoint() * block * d.col(nb))(0, 0).real();
    }
  }
  return p;
}

RealMatrix populations_polaron(const ComplexMatrix& rho,
                               const SystemParams& params,
                               const ModeSpace& space) {
  return PolaronBasis(params, space).populations(rho);
}

}  // namespace omitq
