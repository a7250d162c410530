#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "helpers.hpp"
#include "nvsim/dynamics.hpp"
#include "nvsim/error.hpp"
#include "nvsim/metrics.hpp"
#include "nvsim/tolerances.hpp"

using namespace nvsim;
using testing_support::max_abs;

namespace {

constexpr double kPi = std::numbers::pi;

SpaceLabel electron() { return SpaceLabel{{kElectron, 2}}; }

DensityMatrix plus_x() { return DensityMatrix(electron(), Matrix::Constant(2, 2, 0.5)); }

// exp(-i 2 pi t w.I) for a spin 1/2, by the Rodrigues formula.
Eigen::Matrix2cd su2(const Vec3& w, double t) {
  const double n = std::sqrt(w[0] * w[0] + w[1] * w[1] + w[2] * w[2]);
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();
  if (n == 0.0) return u;
  const double c = std::cos(kPi * n * t), s = std::sin(kPi * n * t);
  const cplx i(0, 1);
  u(0, 0) = c - i * s * w[2] / n;
  u(1, 1) = c + i * s * w[2] / n;
  u(0, 1) = -i * s * (w[0] - i * w[1]) / n;
  u(1, 0) = -i * s * (w[0] + i * w[1]) / n;
  return u;
}

// One-spin echo coherence: free tau, flip, free tau.
cplx one_spin_echo(const Vec3& w0, const Vec3& w1, double tau) {
  const Eigen::Matrix2cd end0 = su2(w0, tau) * su2(w1, tau);  // +1 then 0
  const Eigen::Matrix2cd end1 = su2(w1, tau) * su2(w0, tau);  // 0 then +1
  return (end0 * end1.adjoint()).trace() / 2.0;
}

}  // namespace

TEST_CASE("sequence constructors") {
  const auto fid = make_fid(1e-6);
  CHECK(fid.pulses().empty());
  CHECK(fid.duration() == 1e-6);
  const double t = 8e-6;
  const auto hahn = make_pdd(1, t);
  REQUIRE(hahn.pulses().size() == 1);
  CHECK(hahn.pulses()[0].time_s == doctest::Approx(t / 2));
  const auto pdd2 = make_pdd(2, t);
  REQUIRE(pdd2.pulses().size() == 2);
  CHECK(pdd2.pulses()[0].time_s == doctest::Approx(t / 4));
  CHECK(pdd2.pulses()[1].time_s == doctest::Approx(3 * t / 4));
  CHECK(pdd2.pulses()[0].target == kElectron);
  CHECK(pdd2.pulses()[0].angle_rad == kPi);
  CHECK(make_hahn(t).pulses()[0].time_s == hahn.pulses()[0].time_s);
  const SequenceShape shape{SequenceKind::Pdd, 4};
  CHECK(shape.build(t).pulses().size() == 4);

  CHECK_THROWS_AS(make_fid(0.0), InvalidArgument);
  CHECK_THROWS_AS(make_pdd(0, t), InvalidArgument);
  CHECK_THROWS_AS(make_pdd(2, -1), InvalidArgument);
  CHECK_THROWS_AS(PulseSequence(1.0, {{0.5, kElectron, {1, 1, 0}, kPi}}, "bad axis"), InvalidArgument);
  CHECK_THROWS_AS(PulseSequence(1.0, {{1.5, kElectron, {1, 0, 0}, kPi}}, "late"), InvalidArgument);
  CHECK_THROWS_AS(PulseSequence(1.0, {{0.5, kElectron, {1, 0, 0}, kPi}, {0.5, kElectron, {1, 0, 0}, kPi}}, "tie"),
                  InvalidArgument);
}

TEST_CASE("free evolution and pulses") {
  std::mt19937_64 rng(3);
  const SpaceLabel two = two_qubit_space();
  const DensityMatrix rho0(two, testing_support::random_state_matrix(rng, 4));
  const Operator zero = Operator::zero(two);
  const auto out = evolve(rho0, zero, make_fid(1e-6), {0, 5e-7, 1e-6});
  for (const auto& r : out) CHECK(max_abs(r.matrix() - rho0.matrix()) < 1e-15);

  SUBCASE("pi pulse swaps populations") {
    Vector z = Vector::Zero(2);
    z(1) = 1.0;
    const DensityMatrix ground = DensityMatrix::pure(electron(), z);
    const PulseSequence flip(1.0, {{0.5, kElectron, {1, 0, 0}, kPi}}, "flip");
    const auto states = evolve(ground, Operator::zero(electron()), flip, {0.25, 0.5, 1.0});
    CHECK(states[0](1, 1).real() == doctest::Approx(1.0));
    CHECK(states[1](0, 0).real() == doctest::Approx(1.0));
    CHECK(states[2](1, 1).real() == doctest::Approx(0.0).epsilon(1e-15));
  }
  SUBCASE("stationary state under FID") {
    const Operator h(two, testing_support::random_hermitian(rng, 4) * 1e5);
    const auto e = eig_hermitian(h);
    const RealVector w = RealVector::LinSpaced(4, 0.4, 0.1) / 1.0;
    const Matrix stat = e.vectors * (w / w.sum()).cast<cplx>().asDiagonal() * e.vectors.adjoint();
    const DensityMatrix rho(two, 0.5 * (stat + stat.adjoint()));
    for (const auto& r : evolve(rho, h, make_fid(1e-4), {3e-5, 1e-4})) CHECK(max_abs(r.matrix() - rho.matrix()) < 1e-10);
  }
  SUBCASE("purity conservation and concatenation") {
    const Operator h(two, testing_support::random_hermitian(rng, 4) * 1e5);
    const auto seq = make_pdd(2, 4e-5);
    std::vector<double> times;
    for (int k = 0; k <= 40; ++k) times.push_back(k * 1e-6);
    const auto states = evolve(rho0, h, seq, times);
    for (const auto& r : states) CHECK(std::abs(purity(r) - purity(rho0)) < 1e-10);
    // Pulse-free stretch [12, 28] us: restart from the state at 12 us.
    const auto seg = evolve(states[12], h, make_fid(1.6e-5), {1.6e-5});
    CHECK(max_abs(seg[0].matrix() - states[28].matrix()) < 1e-10);
  }
  SUBCASE("even PDD refocuses static dephasing") {
    for (double b : {1.3e3, -4.7e4, 2.2e5}) {
      const Operator h = spin_operators(0.5, kElectron).z * cplx(b);
      for (int n : {2, 4, 6}) {
        const auto last = evolve(plus_x(), h, make_pdd(n, 3.7e-5), {3.7e-5}).back();
        CHECK(std::abs(2.0 * last(1, 0) - 1.0) < 1e-10);
      }
    }
  }
  CHECK_THROWS_AS(evolve(rho0, zero, make_fid(1.0), {0.5, 0.2}), InvalidArgument);
  CHECK_THROWS_AS(evolve(rho0, zero, make_fid(1.0), {2.0}), InvalidArgument);
  CHECK_THROWS_AS(evolve(plus_x(), zero, make_fid(1.0), {0.5}), InvalidArgument);
}

TEST_CASE("Bell preparation") {
  const DensityMatrix phi = bell_phi_minus();
  CHECK(phi(two_qubit_index(0, 0), two_qubit_index(1, 1)).real() == doctest::Approx(-0.5));
  const DensityMatrix ideal = prepare_bell({1.0, 0.0});
  CHECK(std::abs(concurrence(ideal) - 1.0) < 1e-12);
  CHECK(std::abs(fidelity(ideal, phi) - 1.0) < 1e-12);

  // p = 0.8: (1+p)/2 of the population ends in phi-, the |01> remainder is
  // untouched by both conditional gates and has no overlap with phi-.
  const DensityMatrix partial = prepare_bell({0.8, 0.0});
  CHECK(fidelity(partial, phi) == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(partial(two_qubit_index(0, 1), two_qubit_index(0, 1)).real() == doctest::Approx(0.1));
  // X-state: C = 2 max(0, |rho_{00,11}| - sqrt(rho_{01,01} rho_{10,10})) = 2 * 0.45.
  CHECK(concurrence(partial) == doctest::Approx(0.9).epsilon(1e-10));

  CHECK_THROWS_AS(prepare_bell({1.2, 0.0}), InvalidArgument);

  SUBCASE("two-qubit states never have C < 2F - 1") {
    for (double p : {0.0, 0.3, 0.8, 1.0}) {
      for (double e : {-1.0, -0.3, 0.0, 0.2, 0.9}) {
        const DensityMatrix rho = prepare_bell({p, e});
        CHECK(concurrence(rho) >= 2 * fidelity(rho, phi) - 1 - 1e-12);
      }
    }
  }
}

TEST_CASE("preparation calibration") {
  const CalibrationResult r = calibrate_preparation(0.88, 0.67);
  // The targets violate C >= 2F - 1, so the optimum is a compromise.
  CHECK(r.cost > 0.0);
  CHECK(r.spec.polarization == doctest::Approx(1.0));
  CHECK(r.spec.pulse_angle_error_rad == doctest::Approx(-kPi / 2 + kPi * 235 / 360.0));
  CHECK(r.fidelity == doctest::Approx(fidelity(prepare_bell(r.spec), bell_phi_minus())));
  CHECK(r.concurrence == doctest::Approx(concurrence(prepare_bell(r.spec))));
  CHECK(r.fidelity == doctest::Approx(0.80).epsilon(0.01));
  CHECK(r.concurrence == doctest::Approx(0.72).epsilon(0.01));

  SUBCASE("a feasible target is hit on the grid") {
    const CalibrationResult f = calibrate_preparation(0.9, 0.9);
    CHECK(f.cost < 1e-20);
    CHECK(f.spec.polarization == doctest::Approx(0.8));
    CHECK(f.spec.pulse_angle_error_rad == doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("exact system + bath evolution") {
  const SystemParams params;
  SUBCASE("empty bath reduces to plain evolution") {
    std::mt19937_64 rng(5);
    const DensityMatrix rho0(two_qubit_space(), testing_support::random_state_matrix(rng, 4));
    const auto seq = make_pdd(2, 2e-5);
    const std::vector<double> times{0, 5e-6, 1e-5, 2e-5};
    const auto a = evolve_with_bath(rho0, params, BathConfiguration{}, seq, times);
    const auto b = evolve(rho0, build_system_hamiltonian(params, true, false), seq, times);
    for (std::size_t k = 0; k < times.size(); ++k) CHECK(max_abs(a[k].matrix() - b[k].matrix()) < 1e-12);
  }
  SUBCASE("one bath spin against the closed-form echo") {
    BathConfiguration bath;
    bath.spins = {{{2, 1, 4}, {2.1e4, -0.8e4, 3.5e4}}};
    const Vec3 w0{0, 0, params.larmor_hz()};
    const Vec3& a = bath.spins[0].hyperfine_hz;
    const Vec3 w1{a[0], a[1], a[2] + params.larmor_hz()};
    for (double total : {3e-6, 1.1e-5, 2.9e-5}) {
      const cplx l = exact_bath_coherence(params, bath, make_hahn(total), {total}).front();
      CHECK(std::abs(l - one_spin_echo(w0, w1, total / 2)) < 1e-9);
    }
    // Echo delay equal to the Larmor period: the Ms=0 propagator is -1 and
    // the coherence returns to one.
    const double tl = 1.0 / params.larmor_hz();
    const cplx revived = exact_bath_coherence(params, bath, make_hahn(2 * tl), {2 * tl}).front();
    CHECK(std::abs(revived - 1.0) < 1e-6);
    const cplx dipped = exact_bath_coherence(params, bath, make_hahn(tl), {tl}).front();
    CHECK(std::abs(dipped) < 0.999);
  }
  SUBCASE("maximally mixed electron is a fixed point") {
    const auto bath = sample_bath(4, 0.05, 2.0, 8.0, params).subset({0, 1, 2});
    const auto out = evolve_with_bath(DensityMatrix::maximally_mixed(electron()), params, bath, make_pdd(2, 3e-5),
                                      {1e-6, 1.5e-5, 3e-5});
    for (const auto& r : out) CHECK(max_abs(r.matrix() - Matrix::Identity(2, 2) * 0.5) < 1e-12);
  }
  SUBCASE("evolution stays physical and coherence matches the reduced state") {
    const auto bath = sample_bath(9, 0.05, 2.0, 9.0, params).subset({0, 1, 2, 3});
    const ExactBathEvolver ev(electron(), params, bath);
    const auto seq = make_pdd(2, 4e-5);
    const std::vector<double> times{0, 1e-5, 2e-5, 3e-5, 4e-5};
    const auto states = ev.run(plus_x(), seq, times);
    const auto l = ev.coherence(seq, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      CHECK(density_matrix_violation(states[k].matrix()).empty());
      CHECK(std::abs(l[k] - 2.0 * states[k](1, 0)) == 0.0);
      CHECK(std::abs(l[k]) <= 1.0 + 1e-12);
    }
    CHECK(std::abs(l[0] - 1.0) < 1e-15);
  }
  BathConfiguration big;
  big.spins.resize(9);
  big.pair_couplings_hz.assign(36, 0.0);
  CHECK_THROWS_AS(exact_bath_coherence(params, big, make_fid(1e-6), {1e-6}), InvalidArgument);
}
