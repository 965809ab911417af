#include "omitq/superop.hpp"

#include <unsupported/Eigen/KroneckerProduct>

namespace omitq {

namespace {

SparseMatrixCd sparse_identity(int dim) {
  SparseMatrixCd id(dim, dim);
  id.setIdentity();
  return id;
}

}  // namespace

ComplexVector vectorize(const ComplexMatrix& x) {
  return Eigen::Map<const ComplexVector>(x.data(), x.size());
}

ComplexMatrix unvectorize(const ComplexVector& v, int dim) {
  if (v.size() != static_cast<Eigen::Index>(dim) * dim) {
    throw InvalidDimensionError("unvectorize: size mismatch");
  }
  return Eigen::Map<const ComplexMatrix>(v.data(), dim, dim);
}

SparseMatrixCd left_multiplication_superop(const ComplexMatrix& a) {
  const int d = static_cast<int>(a.rows());
  return Eigen::kroneckerProduct(sparse_identity(d),
                                 SparseMatrixCd(a.sparseView()));
}

SparseMatrixCd right_multiplication_superop(const ComplexMatrix& b) {
  const int d = static_cast<int>(b.rows());
  return Eigen::kroneckerProduct(
      SparseMatrixCd(b.transpose().sparseView()), sparse_identity(d));
}

SparseMatrixCd commutator_superop(const ComplexMatrix& h) {
  SparseMatrixCd out = left_multiplication_superop(h);
  out -= right_multiplication_superop(h);
  out *= -kImag;
  return out;
}

SparseMatrixCd dissipator_superop(double rate, const ComplexMatrix& c) {
  if (rate < 0.0) {
    throw InvalidArgumentError("dissipator_superop: rate must be >= 0");
  }
  const SparseMatrixCd cs = c.sparseView();
  const SparseMatrixCd cd = SparseMatrixCd(ComplexMatrix(c.adjoint()).sparseView());
  const ComplexMatrix cdc = c.adjoint() * c;
  SparseMatrixCd out =
      Eigen::kroneckerProduct(SparseMatrixCd(ComplexMatrix(c.conjugate()).sparseView()), cs);
  out -= SparseMatrixCd(0.5 * left_multiplication_superop(cdc));
  out -= SparseMatrixCd(0.5 * right_multiplication_superop(cdc));
  out *= rate;
  return out;
}

SparseMatrixCd Liouvillian::stationary(double control_level) const {
  if (control_level == 0.0) return frame_dissipation;
  SparseMatrixCd out = frame_dissipation;
  out += SparseMatrixCd(control_level * control);
  return out;
}

void Liouvillian::apply(double control_level, double probe_level, double t,
                        const ComplexVector& v, ComplexVector& out) const {
  out.noalias() = frame_dissipation * v;
  if (control_level != 0.0) out.noalias() += control_level * (control * v);
  if (probe_level != 0.0) {
    const Complex phase = std::exp(-kImag * omega_beat * t);
    out.noalias() += (probe_level * phase) * (probe_raise * v);
    out.noalias() += (probe_level * std::conj(phase)) * (probe_lower * v);
  }
}

Liouvillian build_liouvillian(const LindbladGenerator& gen) {
  Liouvillian l;
  l.dim = gen.space.joint_dimension();
  l.omega_beat = gen.omega_beat;
  l.frame_dissipation = commutator_superop(gen.h_frame);
  for (const auto& ch : gen.channels) {
    if (ch.rate == 0.0) continue;
    l.frame_dissipation += dissipator_superop(ch.rate, ch.op);
  }
  l.control = commutator_superop(gen.h_control_drive);
  l.probe_raise = commutator_superop(gen.probe_raise);
  l.probe_lower = commutator_superop(gen.probe_lower);
  l.frame_dissipation.makeCompressed();
  l.control.makeCompressed();
  l.probe_raise.makeCompressed();
  l.probe_lower.makeCompressed();
  return l;
}

}  // namespace omitq
