#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "thermopress/recode.hpp"
#include "thermopress/transfer.hpp"

using namespace thermopress;

namespace {

/// Entropy of the golden-mean Markov(1) family as a function of a = p(0->0);
/// p(1->0) is forced to 1. Used to locate the maximal-entropy chain without
/// any spectral machinery.
double gm_markov_entropy(double a) {
  double pi0 = 1.0 / (2.0 - a);
  double h_row0 = -(a * std::log(a) + (1 - a) * std::log(1 - a));
  return pi0 * h_row0;
}

}  // namespace

TEST_CASE("transfer matrix construction") {
  SftModel full = fixtures::full_shift(2);
  Matrix L = transfer_matrix(full, LocallyConstantFn::constant(full, 0.0));
  CHECK(L(0, 0) == 1.0);
  CHECK(L(0, 1) == 1.0);
  CHECK(L(1, 0) == 1.0);
  CHECK(L(1, 1) == 1.0);

  SftModel blk = fixtures::ones_block_plus_fixed_point();
  Matrix Lb = transfer_matrix(blk, LocallyConstantFn::constant(blk, 0.0));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      CHECK(Lb(i, j) == ((i < 3 && j < 3) || (i == 3 && j == 3) ? 1.0 : 0.0));

  // rank-1 Bernoulli weights: columns are (w_0, w_1)
  LocallyConstantFn phiw = fixtures::log_weight_second_symbol(full, {0.3, 0.7});
  Matrix Lw = transfer_matrix(full, phiw);
  CHECK(Lw(0, 0) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(Lw(1, 0) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(Lw(0, 1) == doctest::Approx(0.7).epsilon(1e-14));
  CHECK(Lw(1, 1) == doctest::Approx(0.7).epsilon(1e-14));

  LocallyConstantFn f3 = fixtures::random_table(full, 3, 31);
  CHECK_THROWS_AS(transfer_matrix(full, f3), std::invalid_argument);
}

TEST_CASE("perron eigendata") {
  SftModel full = fixtures::full_shift(2);
  PerronData d = perron(transfer_matrix(full, LocallyConstantFn::constant(full, 0.0)));
  CHECK(d.lambda == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(d.res_right < 1e-11);
  CHECK(d.res_left < 1e-11);

  SftModel gm = fixtures::golden_mean();
  PerronData dg = perron(transfer_matrix(gm, LocallyConstantFn::constant(gm, 0.0)));
  CHECK(dg.lambda == doctest::Approx((1.0 + std::sqrt(5.0)) / 2.0).epsilon(1e-13));

  // non-primitive support is refused by perron but fine for pressure
  SftModel blk = fixtures::ones_block_plus_fixed_point();
  Matrix Lb = transfer_matrix(blk, LocallyConstantFn::constant(blk, 0.0));
  CHECK_THROWS_AS(perron(Lb), not_mixing_error);
}

TEST_CASE("topological pressure") {
  SftModel full = fixtures::full_shift(2);
  SftModel gm = fixtures::golden_mean();
  SftModel blk = fixtures::ones_block_plus_fixed_point();
  LocallyConstantFn z2 = LocallyConstantFn::constant(full, 0.0);

  CHECK(pressure(full, z2) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(pressure(gm, LocallyConstantFn::constant(gm, 0.0)) ==
        doctest::Approx(std::log((1.0 + std::sqrt(5.0)) / 2.0)).epsilon(1e-12));
  CHECK(pressure(blk, LocallyConstantFn::constant(blk, 0.0)) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));

  SUBCASE("axioms: shift, monotonicity, Lipschitz") {
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      SftModel model = seed % 2 ? fixtures::full_shift(3) : fixtures::golden_mean();
      LocallyConstantFn phi = fixtures::random_table(model, 2, seed * 101);
      LocallyConstantFn psi = fixtures::random_table(model, 2, seed * 103);
      double p = pressure(model, phi);
      CHECK(pressure(model, phi.shifted(0.37)) == doctest::Approx(p + 0.37).epsilon(1e-11));
      // monotone: phi <= phi' entrywise
      LocallyConstantFn bigger = LocallyConstantFn::lincomb(
          model, phi, 1.0, fixtures::random_table(model, 2, seed * 107, 0.0, 1.0), 1.0);
      CHECK(pressure(model, bigger) >= p - 1e-12);
      // Lipschitz in sup norm
      double q = pressure(model, psi);
      LocallyConstantFn diff = LocallyConstantFn::lincomb(model, phi, 1.0, psi, -1.0);
      double gap = std::max(std::abs(diff.max_value()), std::abs(diff.min_value()));
      CHECK(std::abs(p - q) <= gap + 1e-11);
    }
  }

  SUBCASE("invariant under the block presentation") {
    for (std::uint64_t seed = 3; seed <= 9; seed += 3) {
      SftModel model = fixtures::golden_mean();
      LocallyConstantFn phi3 = fixtures::random_table(model, 3, seed * 977);
      auto [rec, fns] = recode_to_depth2(model, {phi3});
      double p2 = pressure(rec.target, fns[0]);
      // independent presentation: one block longer
      BlockRecoding rec3 = higher_block(model, 3);
      double p3 = pressure(rec3.target, rec3.recode_fn(phi3));
      CHECK(p2 == doctest::Approx(p3).epsilon(1e-11));
      // coarse growth-rate oracle
      double z20 = 0.0, z21 = 0.0;
      for (const Word& w : enumerate_words(model, 20)) z20 += std::exp(birkhoff_sum(phi3, w));
      for (const Word& w : enumerate_words(model, 21)) z21 += std::exp(birkhoff_sum(phi3, w));
      CHECK(std::log(z21 / z20) == doctest::Approx(p2).epsilon(2e-2));
    }
  }
}

TEST_CASE("equilibrium states") {
  SftModel full = fixtures::full_shift(2);

  SUBCASE("fair coin at zero potential") {
    EquilibriumMeasure eq = equilibrium(full, LocallyConstantFn::constant(full, 0.0));
    CHECK(eq.pi()[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(eq.pi()[1] == doctest::Approx(0.5).epsilon(1e-12));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(eq.p()(i, j) == doctest::Approx(0.5).epsilon(1e-12));
  }

  SUBCASE("rank-1 weights give the Bernoulli chain") {
    LocallyConstantFn phiw =
        fixtures::log_weight_second_symbol(full, {1.0 / 3.0, 2.0 / 3.0});
    EquilibriumMeasure eq = equilibrium(full, phiw);
    CHECK(eq.pressure == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(eq.pi()[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-11));
    CHECK(eq.p()(0, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
    CHECK(eq.p()(1, 1) == doctest::Approx(2.0 / 3.0).epsilon(1e-11));
  }

  SUBCASE("golden mean maximal-entropy chain against the direct oracle") {
    SftModel gm = fixtures::golden_mean();
    EquilibriumMeasure eq = equilibrium(gm, LocallyConstantFn::constant(gm, 0.0));
    // golden-section maximisation of the 1-parameter entropy
    double lo = 1e-6, hi = 1.0 - 1e-6;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 200; ++it) {
      double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
      if (gm_markov_entropy(x1) < gm_markov_entropy(x2))
        lo = x1;
      else
        hi = x2;
    }
    double a_star = 0.5 * (lo + hi);
    CHECK(eq.p()(0, 0) == doctest::Approx(a_star).epsilon(1e-7));
    CHECK(eq.p()(1, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(eq.pi()[0] == doctest::Approx(1.0 / (2.0 - a_star)).epsilon(1e-7));
    CHECK(entropy_rate(eq.chain) ==
          doctest::Approx(gm_markov_entropy(a_star)).epsilon(1e-9));

    // lambda^2/(1+lambda^2) closed form; maximal entropy equals the pressure
    double lam = (1.0 + std::sqrt(5.0)) / 2.0;
    CHECK(eq.pi()[0] == doctest::Approx(lam * lam / (1 + lam * lam)).epsilon(1e-12));
    CHECK(entropy_rate(eq.chain) == doctest::Approx(std::log(lam)).epsilon(1e-11));
  }

  SUBCASE("non-primitive models are refused") {
    SftModel blk = fixtures::ones_block_plus_fixed_point();
    CHECK_THROWS_AS(equilibrium(blk, LocallyConstantFn::constant(blk, 0.0)),
                    not_mixing_error);
  }

  SUBCASE("cylinder masses are a probability vector at each depth") {
    SftModel gm = fixtures::golden_mean();
    LocallyConstantFn phi = fixtures::random_table(gm, 2, 41);
    EquilibriumMeasure eq = equilibrium(gm, phi);
    for (int n = 1; n <= 12; ++n) {
      KahanSum total;
      enumerate_words(gm, n, [&](std::span<const Symbol> w) {
        total.add(eq.cylinder_mass(w));
      });
      CHECK(std::abs(total.value() - 1.0) < 1e-12);
    }
  }
}

TEST_CASE("entropy and integrals") {
  SftModel full = fixtures::full_shift(2);
  EquilibriumMeasure eq = equilibrium(full, LocallyConstantFn::constant(full, 0.0));
  auto [h, ints] = entropy_and_integrals(eq.chain, std::vector<LocallyConstantFn>{});
  CHECK(h == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  // point mass on the loop at symbol 0
  MarkovMeasure dirac{{1.0, 0.0}, Matrix(2, 2, 0.0)};
  dirac.p(0, 0) = 1.0;
  dirac.p(1, 0) = 1.0;  // row off the support of pi; stationarity unaffected
  LocallyConstantFn f2 = fixtures::random_table(full, 2, 43);
  auto [h0, ints0] = entropy_and_integrals(dirac, std::vector<LocallyConstantFn>{f2});
  CHECK(h0 == 0.0);
  std::vector<Symbol> w00{0, 0};
  CHECK(ints0[0] == doctest::Approx(f2.value(w00)).epsilon(1e-15));

  // non-stationary input rejected
  MarkovMeasure bad{{0.9, 0.1}, Matrix(2, 2, 0.5)};
  CHECK_THROWS_AS(entropy_and_integrals(bad, std::vector<LocallyConstantFn>{}),
                  std::invalid_argument);
}

TEST_CASE("variational identity on random models") {
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 34; ++seed) {
    SftModel model = fixtures::random_primitive_model(2 + static_cast<int>(seed % 4),
                                                      seed * 1009);
    for (int k = 0; k < 3; ++k) {
      LocallyConstantFn phi = fixtures::random_table(model, 2, seed * 31 + k);
      EquilibriumMeasure eq = equilibrium(model, phi);
      auto [h, ints] = entropy_and_integrals(eq.chain, std::vector<LocallyConstantFn>{phi});
      CHECK(std::abs(h + ints[0] - eq.pressure) < 1e-9);
      ++checked;
    }
  }
  CHECK(checked >= 100);
}

TEST_CASE("gibbs certification") {
  SftModel full = fixtures::full_shift(2);

  SUBCASE("zero potential: ratio identically one") {
    EquilibriumMeasure eq = equilibrium(full, LocallyConstantFn::constant(full, 0.0));
    GibbsCertificate cert = gibbs_certify(full, eq, LocallyConstantFn::constant(full, 0.0),
                                          eq.pressure, 8);
    CHECK(cert.K == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cert.analytic_K == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("depth-1 Bernoulli potential: stabilised K matches the prediction") {
    LocallyConstantFn phi1(full, 1, 0.0);
    std::vector<Symbol> s0{0}, s1{1};
    phi1.set(s0, std::log(0.3));
    phi1.set(s1, std::log(0.7));
    EquilibriumMeasure eq = equilibrium(full, phi1);
    GibbsCertificate cert = gibbs_certify(full, eq, phi1, eq.pressure, 12);
    CHECK(std::abs(cert.K - cert.analytic_K) < 1e-9);
    for (std::size_t n = 1; n + 1 < cert.per_n_K.size(); ++n)
      CHECK(cert.per_n_K[n + 1] <= cert.per_n_K[n] * (1.0 + 1e-10));
    // enumeration cross-check of the worst ratio at n = 6
    double worst = 0.0;
    enumerate_words(full, 6, [&](std::span<const Symbol> w) {
      std::vector<Symbol> ext(w.begin(), w.end());
      ext.push_back(full.first_successor(w.back()));
      double num = eq.log_cylinder_mass(w);
      double den = -6.0 * eq.pressure +
                   birkhoff_sum(eq.potential, std::span<const Symbol>(ext));
      worst = std::max(worst, std::abs(num - den));
    });
    CHECK(cert.per_n_K[5] == doctest::Approx(std::exp(worst)).epsilon(1e-12));
  }

  SUBCASE("random depth-2 potential: stabilisation and prediction") {
    LocallyConstantFn phi = fixtures::random_table(full, 2, 47);
    EquilibriumMeasure eq = equilibrium(full, phi);
    GibbsCertificate cert = gibbs_certify(full, eq, phi, eq.pressure, 10);
    CHECK(std::abs(cert.K - cert.analytic_K) < 1e-9);
    // on the full shift every symbol pair is reachable from n = 2 on
    for (std::size_t n = 1; n + 1 < cert.per_n_K.size(); ++n)
      CHECK(cert.per_n_K[n + 1] == doctest::Approx(cert.per_n_K[n]).epsilon(1e-10));
  }

  SUBCASE("golden mean: constant beyond the positivity index") {
    SftModel gm = fixtures::golden_mean();
    EquilibriumMeasure eq = equilibrium(gm, LocallyConstantFn::constant(gm, 0.0));
    GibbsCertificate cert = gibbs_certify(gm, eq, LocallyConstantFn::constant(gm, 0.0),
                                          eq.pressure, 10);
    CHECK(std::isfinite(cert.K));
    CHECK(std::abs(cert.K - cert.analytic_K) < 1e-9);
    for (std::size_t n = 2; n + 1 < cert.per_n_K.size(); ++n)
      CHECK(cert.per_n_K[n + 1] == doctest::Approx(cert.per_n_K[n]).epsilon(1e-10));
  }

  SUBCASE("budget enforcement") {
    EquilibriumMeasure eq = equilibrium(full, LocallyConstantFn::constant(full, 0.0));
    CHECK_THROWS_AS(gibbs_certify(full, eq, LocallyConstantFn::constant(full, 0.0),
                                  eq.pressure, 40, 1000),
                    resource_limit_error);
  }
}
