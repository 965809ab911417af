#include <doctest.h>

#include <cmath>
#include <random>

#include "omitq/fock.hpp"

using namespace omitq;

TEST_CASE("ladder operator matches the defining matrix elements") {
  SUBCASE("smallest ladder") {
    const ComplexMatrix a = ladder_operator(2);
    CHECK(a(0, 1) == Complex{1.0, 0.0});
    CHECK(a(0, 0) == Complex{0.0, 0.0});
    CHECK(a(1, 0) == Complex{0.0, 0.0});
    CHECK(a(1, 1) == Complex{0.0, 0.0});
  }

  SUBCASE("number operator from a†a") {
    const ComplexMatrix a = ladder_operator(4);
    const ComplexMatrix n = a.adjoint() * a;
    for (int k = 0; k < 4; ++k) {
      CHECK(n(k, k).real() == doctest::Approx(k).epsilon(1e-15));
    }
    CHECK((n - number_operator(4)).cwiseAbs().maxCoeff() < 1e-14);
  }

  SUBCASE("truncation-aware commutator") {
    const ComplexMatrix a = ladder_operator(10);
    const ComplexMatrix comm = a * a.adjoint() - a.adjoint() * a;
    // identity on the top-left 9x9 block, -(dim-1) in the corner
    CHECK((comm.topLeftCorner(9, 9) - ComplexMatrix::Identity(9, 9))
              .cwiseAbs()
              .maxCoeff() < 1e-14);
  }

  SUBCASE("nonzero entries only on the first superdiagonal, exact integers") {
    const int dim = 12;
    const ComplexMatrix a = ladder_operator(dim);
    for (int m = 0; m < dim; ++m) {
      for (int n = 0; n < dim; ++n) {
        if (m == n - 1) {
          CHECK(a(m, n).real() * a(m, n).real() ==
                doctest::Approx(n).epsilon(1e-15));
        } else {
          CHECK(a(m, n) == Complex{0.0, 0.0});
        }
      }
    }
  }

  CHECK_THROWS_AS(ladder_operator(1), InvalidDimensionError);
}

TEST_CASE("tensor embedding follows the photon-first convention") {
  const ModeSpace space(2, 2);

  SUBCASE("identity embeds to the joint identity") {
    for (Mode m : {Mode::Photon, Mode::Phonon}) {
      const ComplexMatrix id = ComplexMatrix::Identity(2, 2);
      CHECK((tensor_embed(id, space, m) - ComplexMatrix::Identity(4, 4))
                .cwiseAbs()
                .maxCoeff() == 0.0);
    }
  }

  SUBCASE("photon annihilation acts per phonon column") {
    const ComplexMatrix a = tensor_embed(ladder_operator(2), space, Mode::Photon);
    for (int k = 0; k < 2; ++k) {
      CHECK(a(space.index(0, k), space.index(1, k)) == Complex{1.0, 0.0});
    }
    CHECK(a.cwiseAbs().sum() == doctest::Approx(2.0));
  }

  SUBCASE("embedded number operators commute") {
    const ModeSpace s(3, 4);
    const ComplexMatrix na = tensor_embed(number_operator(3), s, Mode::Photon);
    const ComplexMatrix nb = tensor_embed(number_operator(4), s, Mode::Phonon);
    CHECK((na * nb - nb * na).cwiseAbs().maxCoeff() == 0.0);
  }

  CHECK_THROWS_AS(tensor_embed(ComplexMatrix::Identity(3, 3), space, Mode::Photon),
                  InvalidDimensionError);
}

TEST_CASE("expectation values on reference states") {
  const ModeSpace space(3, 2);
  const ComplexMatrix n_photon =
      tensor_embed(number_operator(3), space, Mode::Photon);

  CHECK(std::abs(expectation(n_photon, vacuum_state(space))) < 1e-15);
  CHECK(expectation(n_photon, fock_state(space, 1, 0)).real() ==
        doctest::Approx(1.0));

  // coherence of (|0,0> + |1,0>)/sqrt(2)
  ComplexMatrix rho = ComplexMatrix::Zero(6, 6);
  const int i00 = space.index(0, 0), i10 = space.index(1, 0);
  rho(i00, i00) = rho(i10, i10) = 0.5;
  rho(i00, i10) = rho(i10, i00) = 0.5;
  const ComplexMatrix a = tensor_embed(ladder_operator(3), space, Mode::Photon);
  CHECK(expectation(a, rho).real() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(std::abs(expectation(a, rho).imag()) < 1e-14);

  CHECK_THROWS_AS(expectation(ComplexMatrix::Identity(4, 4), rho),
                  InvalidDimensionError);
}

TEST_CASE("expectation of a Hermitian operator is real on valid states") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const ModeSpace space(3, 3);
  const int d = space.joint_dimension();
  for (int trial = 0; trial < 20; ++trial) {
    // random Hermitian operator and random valid density matrix
    ComplexMatrix h(d, d), g(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        h(i, j) = Complex{u(rng), u(rng)};
        g(i, j) = Complex{u(rng), u(rng)};
      }
    h = 0.5 * (h + h.adjoint()).eval();
    ComplexMatrix rho = g * g.adjoint();
    rho /= rho.trace().real();
    CHECK(std::abs(expectation(h, rho).imag()) <= 1e-12);
  }
}

TEST_CASE("displacement operator") {
  SUBCASE("zero displacement is the identity") {
    CHECK((displacement_operator(8, 0.0) - ComplexMatrix::Identity(8, 8))
              .cwiseAbs()
              .maxCoeff() == 0.0);
  }

  SUBCASE("vacuum survival probability e^{-|beta|^2}") {
    for (double beta : {0.05, 0.1, 0.2, 0.3}) {
      const ComplexMatrix d = displacement_operator(24, beta);
      CHECK(std::norm(d(0, 0)) ==
            doctest::Approx(std::exp(-beta * beta)).epsilon(1e-10));
    }
  }

  SUBCASE("one-phonon transfer |<1|D|0>|^2 = |beta|^2 e^{-|beta|^2}") {
    // frozen against the series evaluation of the exponential at dim = 60
    const double beta = 0.1;
    const ComplexMatrix d = displacement_operator(60, beta);
    CHECK(std::norm(d(1, 0)) ==
          doctest::Approx(0.01 * std::exp(-0.01)).epsilon(1e-8));
  }

  SUBCASE("unitary on the truncated space") {
    const int dim = 20;
    const ComplexMatrix d = displacement_operator(dim, Complex{0.2, 0.1});
    CHECK((d.adjoint() * d - ComplexMatrix::Identity(dim, dim))
              .cwiseAbs()
              .maxCoeff() < 1e-13);
  }

  SUBCASE("column norms on the well-resolved block") {
    const int dim = 30;
    const double beta = 0.3;
    const ComplexMatrix d = displacement_operator(dim, beta);
    for (int n = 0; n < dim; ++n) {
      if (n + 4.0 * beta * std::sqrt(static_cast<double>(dim)) < dim) {
        CHECK(std::abs(d.col(n).norm() - 1.0) < 1e-8);
      }
    }
  }

  SUBCASE("row completeness for n below dim/2") {
    const int dim = 24;
    const double beta = 0.3;
    const ComplexMatrix d = displacement_operator(dim, beta);
    for (int n = 0; n <= dim / 2; ++n) {
      double total = 0.0;
      for (int m = 0; m < dim; ++m) total += std::norm(d(m, n));
      CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("density matrix validation") {
  const ModeSpace space(2, 2);
  CHECK_NOTHROW(DensityMatrix(vacuum_state(space).matrix(), space));

  ComplexMatrix bad_trace = 0.5 * ComplexMatrix::Identity(4, 4);
  CHECK_THROWS_AS(DensityMatrix(bad_trace, space), InvalidArgumentError);

  ComplexMatrix not_hermitian = ComplexMatrix::Zero(4, 4);
  not_hermitian(0, 0) = 1.0;
  not_hermitian(0, 1) = Complex{0.0, 1e-3};
  CHECK_THROWS_AS(DensityMatrix(not_hermitian, space), InvalidArgumentError);

  ComplexMatrix negative = ComplexMatrix::Zero(4, 4);
  negative(0, 0) = 1.5;
  negative(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix(negative, space), InvalidArgumentError);

  CHECK_THROWS_AS(DensityMatrix(ComplexMatrix::Identity(3, 3), space),
                  InvalidDimensionError);
}

TEST_CASE("thermal state has the truncation-renormalized occupancy") {
  const ModeSpace space(2, 40);
  const DensityMatrix rho = thermal_state(space, 0.5);
  const ComplexMatrix nb = tensor_embed(number_operator(40), space, Mode::Phonon);
  CHECK(expectation(nb, rho).real() == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rho.matrix().trace().real() == doctest::Approx(1.0).epsilon(1e-14));
}
