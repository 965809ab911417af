#include <doctest.h>

#include <cmath>

#include "omitq/model.hpp"

using namespace omitq;

namespace {

SystemParams fig2_params() {
  SystemParams p;
  p.kappa = 1.0 / 40.0;
  p.kappa_out = p.kappa / 2.0;
  p.gamma_m = 1e-3;
  p.g0 = 4.0 * p.kappa;  // 0.1
  p.eps_c = 1e-2;
  p.eps_p = 1e-3;
  p.delta_c = -1.0;
  p.delta_p = 0.0;
  return p;
}

}  // namespace

TEST_CASE("parameter validation") {
  SystemParams p = fig2_params();
  CHECK_NOTHROW(p.validate());
  CHECK(p.warnings().empty());

  SUBCASE("kappa_out above kappa") {
    p.kappa_out = 2.0 * p.kappa;
    CHECK_THROWS_AS(p.validate(), InvalidArgumentError);
  }
  SUBCASE("negative rates") {
    p.gamma_m = 0.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgumentError);
  }
  SUBCASE("coupling hard limit") {
    p.g0 = 0.6;
    CHECK_THROWS_AS(p.validate(), InvalidArgumentError);
  }
  SUBCASE("coupling advisory") {
    p.g0 = 0.3;
    CHECK_NOTHROW(p.validate());
    CHECK(p.warnings().size() == 1);
  }
  SUBCASE("omega is the unit") {
    p.omega = 2.0;
    CHECK_THROWS_AS(p.validate(), InvalidArgumentError);
  }
}

TEST_CASE("build_generator assembles the rotating-frame pieces") {
  const ModeSpace space(3, 4);

  SUBCASE("decoupled oscillators spectrum") {
    SystemParams p = fig2_params();
    p.g0 = 0.0;
    p.eps_c = 0.0;
    p.eps_p = 0.0;
    const LindbladGenerator gen = build_generator(p, space);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gen.static_hamiltonian());
    // spectrum must be {-delta_c*n_a + n_b}
    std::vector<double> expected;
    for (int na = 0; na < 3; ++na)
      for (int nb = 0; nb < 4; ++nb)
        expected.push_back(-p.delta_c * na + p.omega * nb);
    std::sort(expected.begin(), expected.end());
    for (int k = 0; k < space.joint_dimension(); ++k) {
      CHECK(es.eigenvalues()(k) ==
            doctest::Approx(expected[k]).epsilon(1e-12));
    }
  }

  SUBCASE("photon coefficient carries the polaron frame shift") {
    const LindbladGenerator gen = build_generator(fig2_params(), space);
    // -(delta_c - g0^2/Omega) = -(-1 - 0.01) = 1.01
    const int i10 = space.index(1, 0);
    const int i00 = space.index(0, 0);
    CHECK(gen.h_frame(i10, i10).real() - gen.h_frame(i00, i00).real() ==
          doctest::Approx(1.01).epsilon(1e-12));
  }

  SUBCASE("channel list matches the dissipators") {
    SystemParams p = fig2_params();
    p.n_th = 0.0;
    LindbladGenerator gen = build_generator(p, space);
    REQUIRE(gen.channels.size() == 2);
    CHECK(gen.channels[0].rate == doctest::Approx(p.kappa));
    CHECK(gen.channels[1].rate == doctest::Approx(p.gamma_m));

    p.n_th = 0.5;
    gen = build_generator(p, space);
    REQUIRE(gen.channels.size() == 3);
    CHECK(gen.channels[1].rate == doctest::Approx(p.gamma_m * 1.5));
    CHECK(gen.channels[2].rate == doctest::Approx(p.gamma_m * 0.5));
  }

  SUBCASE("static Hamiltonian is Hermitian") {
    const LindbladGenerator gen = build_generator(fig2_params(), space);
    CHECK((gen.static_hamiltonian() - gen.static_hamiltonian().adjoint())
              .cwiseAbs()
              .maxCoeff() < 1e-12);
  }

  SUBCASE("zero beat frequency is rejected for sideband runs") {
    SystemParams p = fig2_params();
    p.delta_p = p.delta_c;
    CHECK_THROWS_AS(build_generator(p, space), InvalidArgumentError);
    p.eps_p = 0.0;  // probe off: fine
    CHECK_NOTHROW(build_generator(p, space));
  }
}

TEST_CASE("polaron eigenenergies") {
  SystemParams p = fig2_params();

  SUBCASE("bare mechanical ladder") {
    for (int nb = 0; nb < 5; ++nb) {
      const PolaronLevel diff = eigenenergy(0, nb, p) - eigenenergy(0, 0, p);
      CHECK(diff.cavity_quanta == 0);
      CHECK(diff.offset == doctest::Approx(p.omega * nb));
    }
  }

  SUBCASE("single-photon line sits at the effective cavity resonance") {
    const PolaronLevel diff = eigenenergy(1, 0, p) - eigenenergy(0, 0, p);
    CHECK(diff.cavity_quanta == 1);
    CHECK(diff.offset == doctest::Approx(0.0));
  }

  SUBCASE("two-photon line picks up the Kerr-like shift") {
    const PolaronLevel diff = eigenenergy(2, 0, p) - eigenenergy(0, 0, p);
    CHECK(diff.cavity_quanta == 2);
    CHECK(diff.offset == doctest::Approx(-2.0 * p.g0 * p.g0).epsilon(1e-12));
  }

  CHECK_THROWS_AS(eigenenergy(-1, 0, p), InvalidArgumentError);
}

TEST_CASE("Franck-Condon factors") {
  SUBCASE("0-0 overlap") {
    for (double lambda : {0.05, 0.1, 0.3}) {
      CHECK(franck_condon(0, 0, lambda) ==
            doctest::Approx(std::exp(-lambda * lambda)).epsilon(1e-12));
    }
  }

  SUBCASE("no displacement is the identity") {
    for (int m = 0; m < 4; ++m)
      for (int n = 0; n < 4; ++n)
        CHECK(franck_condon(m, n, 0.0) == doctest::Approx(m == n ? 1.0 : 0.0));
  }

  SUBCASE("1-0 overlap, frozen brute-force value") {
    CHECK(franck_condon(1, 0, 0.1) ==
          doctest::Approx(0.01 * std::exp(-0.01)).epsilon(1e-10));
  }

  SUBCASE("analytic and displacement-matrix routes agree") {
    for (int m = 0; m <= 5; ++m) {
      for (int n = 0; n <= 5; ++n) {
        for (double lambda : {0.05, 0.15, 0.3}) {
          CHECK(franck_condon(m, n, lambda) ==
                doctest::Approx(franck_condon_numeric(m, n, lambda, 60))
                    .epsilon(1e-8));
        }
      }
    }
  }

  SUBCASE("completeness over the final state") {
    for (int n = 0; n <= 4; ++n) {
      double total = 0.0;
      for (int m = 0; m < 60; ++m) total += franck_condon(m, n, 0.3);
      CHECK(total == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("classical intracavity amplitude") {
  SystemParams p = fig2_params();

  SUBCASE("resonant drive") {
    p.delta_c = 0.0;
    const Complex alpha = classical_alpha(p);
    CHECK(std::abs(alpha) == doctest::Approx(2.0 * p.eps_c / p.kappa));
    CHECK(alpha.real() == doctest::Approx(0.0));
    CHECK(alpha.imag() < 0.0);  // alpha = -2i eps_c / kappa
  }

  SUBCASE("crossover operating point") {
    // kappa = 1/8, g0 = kappa/2, eps_c chosen so g0*eps_c = 1.25e-3
    SystemParams q = p;
    q.kappa = 1.0 / 8.0;
    q.kappa_out = q.kappa / 2.0;
    q.g0 = q.kappa / 2.0;
    q.eps_c = 1.25e-3 / q.g0;
    q.delta_c = 0.0;
    CHECK(std::abs(classical_alpha(q)) == doctest::Approx(0.32).epsilon(1e-12));
  }

  SUBCASE("no drive, no field") {
    p.eps_c = 0.0;
    CHECK(std::abs(classical_alpha(p)) == 0.0);
  }
}

TEST_CASE("classical transmission formula") {
  SystemParams p = fig2_params();

  SUBCASE("empty cavity on resonance") {
    SystemParams q = p;
    q.g0 = 0.0;
    CHECK(classical_transmission(q, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("red-detuned control dip depth (1 + Gamma_opt/Gamma_M)^-2") {
    const double alpha2 = std::norm(classical_alpha(p));
    const double gamma_opt = 4.0 * p.g0 * p.g0 * alpha2 / p.kappa;
    const double expected = std::pow(1.0 + gamma_opt / p.gamma_m, -2.0);
    CHECK(classical_transmission(p, 0.0) ==
          doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("Lorentzian tail") {
    SystemParams q = p;
    q.g0 = 0.0;
    const double delta_p = 30.0 * q.kappa;
    CHECK(classical_transmission(q, delta_p) ==
          doctest::Approx(q.kappa * q.kappa / (4.0 * delta_p * delta_p))
              .epsilon(2e-3));
  }

  SUBCASE("invariant under g0 -> g0/s, eps_c -> s*eps_c") {
    for (double s : {2.0, 5.0, 10.0}) {
      SystemParams q = p;
      q.g0 = p.g0 / s;
      q.eps_c = p.eps_c * s;
      for (double delta_p : {-0.01, 0.0, 0.013, 1.0}) {
        CHECK(classical_transmission(q, delta_p) ==
              doctest::Approx(classical_transmission(p, delta_p))
                  .epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("modified classical transmission") {
  SystemParams p = fig2_params();
  const double alpha2 = std::norm(classical_alpha(p));

  SUBCASE("g0 -> 0 with the classical photon number reduces to Eq. (5)") {
    SystemParams q = p;
    q.g0 = 0.0;
    const double a2 = std::norm(classical_alpha(q));
    for (double delta_p : {-0.005, 0.0, 0.02}) {
      CHECK(modified_classical_transmission(q, delta_p, a2) ==
            doctest::Approx(classical_transmission(q, delta_p))
                .epsilon(1e-14));
    }
  }

  SUBCASE("numerator carries e^{-(g0/Omega)^2}") {
    const double bare = classical_transmission(p, 0.0);
    const double modified = modified_classical_transmission(p, 0.0, alpha2);
    CHECK(modified / bare == doctest::Approx(std::exp(-0.01)).epsilon(1e-12));
  }

  SUBCASE("zero photons leaves the scaled empty-cavity Lorentzian") {
    const double value = modified_classical_transmission(p, 0.0, 0.0);
    const double lorentzian =
        0.25 * p.kappa * p.kappa /
        std::norm(Complex{0.5 * p.kappa, 0.0});
    CHECK(value == doctest::Approx(std::exp(-0.01) * lorentzian).epsilon(1e-12));
  }

  CHECK_THROWS_AS(modified_classical_transmission(p, 0.0, -1.0),
                  InvalidArgumentError);
}
