#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <random>

#include "aqrm/dissipator.hpp"
#include "support/oracles.hpp"

using namespace aqrm;

namespace {

Operator random_density(int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Operator m(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) m(r, c) = Complex(g(rng), g(rng));
  Operator rho = m * m.adjoint();
  rho /= rho.trace().real();
  return rho;
}

Operator random_hermitian(int d, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  Operator m(d, d);
  for (int c = 0; c < d; ++c)
    for (int r = 0; r < d; ++r) m(r, c) = Complex(g(rng), g(rng));
  return hermitize(m);
}

const RateEntry& entry(const RateTable& t, int upper, int lower) {
  for (const auto& e : t.entries) {
    if (e.upper == upper && e.lower == lower) return e;
  }
  throw std::logic_error("missing rate entry");
}

// Slowest nonzero relaxation rate of the population block; sets the horizon
// needed to reach stationarity.
double slowest_rate(const RealMatrix& w, double scale) {
  Eigen::EigenSolver<RealMatrix> es(w);
  double slow = std::numeric_limits<double>::infinity();
  for (int i = 0; i < w.rows(); ++i) {
    const double re = -es.eigenvalues()[i].real();
    if (re > 1e-10 * scale) slow = std::min(slow, re);
  }
  REQUIRE(std::isfinite(slow));
  return slow;
}

}  // namespace

TEST_CASE("bose occupation and ohmic rate", "[dissipator]") {
  CHECK(bose_einstein(1.0, 1.0) == Catch::Approx(oracle::kBoseGap1T1).epsilon(1e-15));
  CHECK(bose_einstein(1.0, 10.0) == Catch::Approx(oracle::kBoseGap1T10).epsilon(1e-15));
  CHECK(bose_einstein(1.0, 0.2) == Catch::Approx(oracle::kNbarT02).epsilon(1e-15));
  CHECK(bose_einstein(1.0, 0.0) == 0.0);
  CHECK(bose_einstein(5000.0, 1.0) == 0.0);  // underflow is clean
  CHECK_THROWS_AS(bose_einstein(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bose_einstein(-1.0, 1.0), std::invalid_argument);

  CHECK(ohmic_rate(0.01, 1.0, 50.0) == Catch::Approx(oracle::kOhmicGap1).epsilon(1e-15));
  CHECK(ohmic_rate(0.0, 1.0, 50.0) == 0.0);
  CHECK_THROWS_AS(ohmic_rate(0.01, 0.0, 50.0), std::invalid_argument);
  CHECK_THROWS_AS(ohmic_rate(0.01, 1.0, 0.0), std::invalid_argument);
}

TEST_CASE("bath parameter validation", "[dissipator]") {
  CHECK_THROWS_AS((BathParams{-0.1, 0, 1, 0, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((BathParams{0.1, 0.1, 0, 1, 1}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((BathParams{0.1, 0.1, 1, -1, 1}.validate()), std::invalid_argument);
  CHECK_NOTHROW((BathParams{0, 0, 0, 0, 0}.validate()));  // fully decoupled is legal
  const BathParams b = BathParams::symmetric(0.05, 20.0, 0.7);
  CHECK(b.alpha_boson == 0.05);
  CHECK(b.alpha_qubit == 0.05);
  CHECK(b.temp_qubit == 0.7);
}

TEST_CASE("decoupled rate table has the two-ladder structure", "[dissipator]") {
  // delta != omega keeps every gap nondegenerate, so eigenstates alternate
  // g0, e0, g1, e1, ... in energy order.
  ModelParams p{1.0, 0.7, 0.0, 0.0, 6};
  const SpectralData s = eigensolve(p);
  const RateTable t = build_rate_table(s, BathParams::symmetric(0.01, 50.0, 0.5));

  CHECK(t.entries.size() == static_cast<size_t>(12 * 11 / 2));

  for (int n = 0; n + 1 < 6; ++n) {
    const auto& gg = entry(t, 2 * (n + 1), 2 * n);  // |g,n+1> -> |g,n>
    CHECK(gg.gap == Catch::Approx(1.0).margin(1e-10));
    CHECK(gg.s_sq_boson == Catch::Approx(n + 1.0).margin(1e-10));
    CHECK(gg.s_sq_qubit == Catch::Approx(0.0).margin(1e-20));

    const auto& ee = entry(t, 2 * n + 3, 2 * n + 1);  // |e,n+1> -> |e,n>
    CHECK(ee.s_sq_boson == Catch::Approx(n + 1.0).margin(1e-10));
  }
  const auto& qubit_flip = entry(t, 1, 0);  // |e,0> -> |g,0>
  CHECK(qubit_flip.gap == Catch::Approx(0.7).margin(1e-12));
  CHECK(qubit_flip.s_sq_qubit == Catch::Approx(1.0).margin(1e-12));
  CHECK(qubit_flip.s_sq_boson == Catch::Approx(0.0).margin(1e-20));

  const auto& forbidden = entry(t, 2, 1);  // |g,1> -> |e,0> flips both
  CHECK(forbidden.s_sq_qubit == 0.0);
  CHECK(forbidden.s_sq_boson == 0.0);
  CHECK(forbidden.rate_down == 0.0);
}

TEST_CASE("equal-parity matrix elements vanish identically", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.8, 0.4, 0};
  const SpectralData s = eigensolve(p);
  const RateTable t = build_rate_table(s, BathParams::symmetric(0.02, 20.0, 1.0));
  int forbidden = 0;
  for (const auto& e : t.entries) {
    if (s.parities[e.upper] == s.parities[e.lower]) {
      CHECK(e.s_sq_qubit == 0.0);
      CHECK(e.s_sq_boson == 0.0);
      ++forbidden;
    }
  }
  CHECK(forbidden > 0);
}

TEST_CASE("dense superoperator matches the structured action", "[dissipator]") {
  ModelParams p{1.0, 0.9, 0.5, 0.25, 4};
  const LindbladGenerator gen(eigensolve(p), BathParams::symmetric(0.03, 30.0, 0.8));
  const Operator sup = gen.superoperator();
  const int d = gen.dim();

  for (unsigned seed : {11u, 12u, 13u}) {
    const Operator x = random_hermitian(d, seed);
    const Operator direct = gen.apply(x);
    const Eigen::VectorXcd mapped =
        sup * Eigen::Map<const Eigen::VectorXcd>(x.data(), d * d);
    const Operator via_sup = Eigen::Map<const Operator>(mapped.data(), d, d);
    CHECK(max_abs(direct - via_sup) <= 1e-12 * std::max(1.0, max_abs(direct)));
  }
}

TEST_CASE("uncoupled baths leave the pure commutator", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.7, 0.35, 12};
  const Operator h = build_hamiltonian(p);
  const LindbladGenerator gen(eigensolve(h, p), BathParams{});
  const Operator rho = random_density(gen.dim(), 31);
  const Operator expected = Complex(0, -1) * (h * rho - rho * h);
  CHECK(max_abs(gen.apply(rho) - expected) <= 1e-8 * std::max(1.0, max_abs(h)));
}

TEST_CASE("zero temperature only relaxes downward", "[dissipator]") {
  ModelParams p{1.0, 1.0, 1.2, 0.6, 0};
  const RateTable t = build_rate_table(eigensolve(p), BathParams::symmetric(0.05, 20.0, 0.0));
  for (const auto& e : t.entries) {
    CHECK(e.rate_up == 0.0);
    CHECK(e.n_boson == 0.0);
  }
}

TEST_CASE("equal bath temperatures satisfy detailed balance per pair", "[dissipator]") {
  ModelParams p{1.0, 1.0, 1.0, 0.5, 0};
  const double temp = 0.9;
  const RateTable t = build_rate_table(eigensolve(p), BathParams::symmetric(0.02, 25.0, temp));
  int checked = 0;
  for (const auto& e : t.entries) {
    if (e.rate_down > 0 && e.rate_up > 1e-290) {
      CHECK(e.rate_up / e.rate_down ==
            Catch::Approx(std::exp(-e.gap / temp)).epsilon(1e-12));
      ++checked;
    }
  }
  CHECK(checked > 20);
}

TEST_CASE("Gibbs state is a fixed point at equal temperatures", "[dissipator]") {
  for (double l1 : {0.3, 1.0, 2.0}) {
    for (double temp : {0.5, 2.0}) {
      ModelParams p{1.0, 1.0, l1, 0.5 * l1, 0};
      const SpectralData s = eigensolve(p);
      const LindbladGenerator gen(s, BathParams::symmetric(0.02, 20.0, temp));
      const Operator rho = gibbs_state(s, temp);
      const double span = s.energies[s.dim() - 1] - s.energies[0];
      const double scale = std::max({1.0, span, gen.rates().max_rate});
      CHECK(max_abs(gen.apply(rho)) <= 1e-9 * scale);
    }
  }
}

TEST_CASE("generator output is traceless and hermiticity-preserving", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.9, 0.45, 10};
  const LindbladGenerator gen(eigensolve(p), BathParams::symmetric(0.04, 15.0, 1.2));
  for (unsigned seed : {41u, 42u, 43u}) {
    const Operator x = random_hermitian(gen.dim(), seed);
    const Operator lx = gen.apply(x);
    CHECK(std::abs(lx.trace()) <= 1e-10 * std::max(1.0, max_abs(lx)));
    CHECK(is_hermitian(lx, 1e-10 * std::max(1.0, max_abs(lx))));
  }
}

TEST_CASE("steady state of the decoupled model is the thermal product", "[dissipator]") {
  const int nc = 14;
  ModelParams p{1.0, 0.7, 0.0, 0.0, nc};
  const double temp = 0.8;
  const SpectralData s = eigensolve(p);
  const LindbladGenerator gen(s, BathParams::symmetric(0.01, 40.0, temp));
  const Operator rho = steady_state(gen);

  const double pe = std::exp(-p.delta / temp) / (1.0 + std::exp(-p.delta / temp));
  Operator qubit = Operator::Zero(2, 2);
  qubit(kExcited, kExcited) = pe;
  qubit(kGround, kGround) = 1.0 - pe;
  const Operator expected =
      embed(qubit, oracle::thermal_boson(bose_einstein(1.0, temp), nc), s.config);
  CHECK(max_abs(rho - expected) <= 1e-10);
}

TEST_CASE("steady state equals Gibbs at equal temperatures", "[dissipator]") {
  ModelParams p{1.0, 1.0, 1.0, 0.5, 0};
  const double temp = 0.6;
  const SpectralData s = eigensolve(p);
  const LindbladGenerator gen(s, BathParams::symmetric(0.02, 20.0, temp));
  const Operator rho = steady_state(gen);
  CHECK(trace_distance(rho, gibbs_state(s, temp)) <= 1e-8);

  // The equilibrium state does not depend on the coupling strength or the
  // spectral cutoff of the baths.
  const LindbladGenerator gen2(s, BathParams::symmetric(0.2, 40.0, temp));
  CHECK(trace_distance(steady_state(gen2), rho) <= 1e-7);
}

TEST_CASE("unequal bath temperatures give a nonequilibrium steady state", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.8, 0.4, 0};
  const SpectralData s = eigensolve(p);
  const BathParams bath{0.02, 0.02, 20.0, 0.2, 1.0};
  const LindbladGenerator gen(s, bath);
  const Operator rho = steady_state(gen);
  CHECK(max_abs(gen.apply(rho)) <= 1e-9 * std::max(1.0, gen.rates().max_rate));
  CHECK(trace_distance(rho, gibbs_state(s, 0.2)) > 1e-3);
  CHECK(trace_distance(rho, gibbs_state(s, 1.0)) > 1e-3);
}

TEST_CASE("steady state requires a connected dissipative structure", "[dissipator]") {
  ModelParams p{1.0, 0.7, 0.0, 0.0, 6};
  const SpectralData s = eigensolve(p);

  // no bath at all: every population is stationary
  CHECK_THROWS_AS(steady_state(LindbladGenerator(s, BathParams{})), numerical_error);

  // boson bath alone cannot flip the decoupled qubit, so the two qubit
  // branches are separately conserved
  CHECK_THROWS_AS(
      (steady_state(LindbladGenerator(s, BathParams{0.02, 0.0, 20.0, 0.5, 0.5}))),
      numerical_error);

  // with both baths the kernel is one-dimensional; verified independently on
  // the dense superoperator
  ModelParams small{1.0, 0.9, 0.4, 0.2, 4};
  const LindbladGenerator gen(eigensolve(small), BathParams::symmetric(0.03, 25.0, 0.7));
  const Operator sup = gen.superoperator();
  Eigen::BDCSVD<Operator> svd(sup);
  const auto& sv = svd.singularValues();
  const double smax = sv[0];
  CHECK(sv[sv.size() - 1] <= 1e-10 * smax);
  CHECK(sv[sv.size() - 2] >= 1e-8 * smax);
  CHECK_NOTHROW(steady_state(gen));
}

TEST_CASE("gibbs state limits", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.9, 0.45, 0};
  const SpectralData s = eigensolve(p);

  const Operator ground = s.states.col(0) * s.states.col(0).adjoint();
  CHECK(trace_distance(gibbs_state(s, 0.0), ground) <= 1e-12);

  const int d = s.dim();
  const Operator uniform = Operator::Identity(d, d) / static_cast<double>(d);
  CHECK(max_abs(gibbs_state(s, 1e9) - uniform) <= 1e-6);

  ModelParams dec{1.0, 1.0, 0.0, 0.0, 12};
  const SpectralData sd = eigensolve(dec);
  const Operator qubit = partial_trace(gibbs_state(sd, 1.0), sd.config, Keep::qubit);
  CHECK(qubit(kExcited, kExcited).real() ==
        Catch::Approx(oracle::kQubitPopDeltaEqT).epsilon(1e-10));

  CHECK_THROWS_AS(gibbs_state(s, -0.5), std::invalid_argument);
}

TEST_CASE("evolution at time zero returns the input", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.5, 0.25, 6};
  const LindbladGenerator gen(eigensolve(p), BathParams::symmetric(0.02, 20.0, 0.5));
  const Operator rho = random_density(gen.dim(), 7);
  CHECK(max_abs(evolve(gen, rho, 0.0) - rho) <= 1e-12);
}

TEST_CASE("eigenprojectors are stationary without baths", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.8, 0.4, 8};
  const SpectralData s = eigensolve(p);
  const LindbladGenerator gen(s, BathParams{});
  const Operator proj = s.states.col(2) * s.states.col(2).adjoint();
  CHECK(max_abs(evolve(gen, proj, 3.0) - proj) <= 1e-9);
}

TEST_CASE("relaxation from the ground state reaches the Gibbs state", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.6, 0.3, 8};
  const double temp = 0.5;
  const SpectralData s = eigensolve(p);
  const LindbladGenerator gen(s, BathParams::symmetric(0.02, 20.0, temp));

  const double slow = slowest_rate(gen.population_rates(), gen.rates().max_rate);
  const double horizon = 20.0 / slow;
  const Operator rho0 = s.states.col(0) * s.states.col(0).adjoint();
  const Operator rho = evolve(gen, rho0, horizon);
  CHECK(trace_distance(rho, gibbs_state(s, temp)) <= 1e-7);
}

TEST_CASE("evolution converges to the nonequilibrium steady state", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.7, 0.35, 6};
  const SpectralData s = eigensolve(p);
  const LindbladGenerator gen(s, BathParams{0.03, 0.03, 20.0, 0.3, 1.2});
  const double slow = slowest_rate(gen.population_rates(), gen.rates().max_rate);
  const int d = gen.dim();
  const Operator mixed = Operator::Identity(d, d) / static_cast<double>(d);
  const Operator rho = evolve(gen, mixed, 20.0 / slow);
  CHECK(trace_distance(rho, steady_state(gen)) <= 1e-6);
}

TEST_CASE("trajectories preserve trace and positivity", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.6, 0.3, 6};
  const LindbladGenerator gen(eigensolve(p), BathParams::symmetric(0.05, 15.0, 0.7));
  const std::vector<double> times{0.5, 1.5, 4.0};
  for (unsigned seed : {61u, 62u, 63u, 64u, 65u}) {
    const Operator rho0 = random_density(gen.dim(), seed);
    const auto traj = evolve_trajectory(gen, rho0, times);
    REQUIRE(traj.size() == times.size());
    for (const Operator& r : traj) {
      CHECK(std::abs(r.trace().real() - 1.0) <= 1e-8);
      CHECK(is_hermitian(r, 1e-9));
      Eigen::SelfAdjointEigenSolver<Operator> es(hermitize(r));
      CHECK(es.eigenvalues().minCoeff() >= -1e-8);
    }
  }
}

TEST_CASE("evolution input contracts", "[dissipator]") {
  ModelParams p{1.0, 1.0, 0.5, 0.25, 4};
  const LindbladGenerator gen(eigensolve(p), BathParams::symmetric(0.02, 20.0, 0.5));
  const Operator rho = random_density(gen.dim(), 9);
  CHECK_THROWS_AS(evolve(gen, rho, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(evolve_trajectory(gen, rho, {1.0, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(evolve(gen, 2.0 * rho, 1.0), std::invalid_argument);
  Operator bad = rho;
  bad(0, 1) += Complex(0, 1e-3);
  CHECK_THROWS_AS(evolve(gen, bad, 1.0), std::invalid_argument);
}
