#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "test_designs.hpp"

using namespace tcdesign;
using tcdesign::testing::bibd_plus_control_v3;
using tcdesign::testing::two_block_v2;
using tcdesign::testing::unequal_blocks_v2;

TEST_CASE("design enumeration") {
  SECTION("counts match the stars-and-bars formula") {
    CHECK(enumeration_space(2, 2, {2, 2}).total == 36);
    CHECK(enumeration_space(2, 3, {2, 2, 4}).total == 540);
    CHECK(enumeration_space(1, 1, {1}).total == 2);
    CHECK(enumeration_space(3, 3, {3, 3, 3}).total == 8000);
  }
  SECTION("every design appears exactly once") {
    std::set<std::vector<Count>> seen;
    long long count = 0;
    for_each_design(2, 2, {2, 2}, 1000, [&](const ExactDesign& design) {
      ++count;
      seen.insert(design.allocation().data());
    });
    CHECK(count == 36);
    CHECK(seen.size() == 36);
  }
  SECTION("streamed designs satisfy the exact-design invariants") {
    for_each_design(2, 3, {2, 2, 4}, 1000, [&](const ExactDesign& design) {
      CHECK(design.n() == 8);
      CHECK(design.block_sizes() == std::vector<Count>{2, 2, 4});
    });
  }
  SECTION("budget guard") {
    CHECK_THROWS_AS(DesignEnumerator(3, 3, {3, 3, 3}, 100), BudgetExceededError);
  }
  SECTION("enumeration order is deterministic") {
    DesignEnumerator a(2, 2, {2, 2}, 1000), b(2, 2, {2, 2}, 1000);
    while (true) {
      auto da = a.next();
      auto db = b.next();
      REQUIRE(da.has_value() == db.has_value());
      if (!da) break;
      CHECK(*da == *db);
    }
  }
}

TEST_CASE("brute force optima") {
  SECTION("E over D(2,3,(2,2,4))") {
    auto opt = brute_force_optimum(2, 3, {2, 2, 4}, Criterion::E);
    REQUIRE(opt.value.has_value());
    CHECK(*opt.value == Rational(1));  // E value = 1/lambda_min = 1
    CHECK(opt.design_count == 540);
    bool has_reference = false;
    for (const auto& design : opt.optimizers) has_reference = has_reference || design == unequal_blocks_v2();
    CHECK(has_reference);
  }
  SECTION("varcov over D(2,3,(2,2,4))") {
    auto opt = brute_force_optimum(2, 3, {2, 2, 4}, Criterion::VarCovSum);
    CHECK(*opt.value == Rational(2));
    for (const auto& design : opt.optimizers)
      CHECK(verify_conditions(design, Family::Thm3).satisfied);
  }
  SECTION("A over D(3,3,(3,3,3))") {
    auto opt = brute_force_optimum(3, 3, {3, 3, 3}, Criterion::A);
    CHECK(*opt.value == make_rational(27, 10));
    CHECK(opt.design_count == 8000);
    bool has_bibd = false;
    for (const auto& design : opt.optimizers) has_bibd = has_bibd || design == bibd_plus_control_v3();
    CHECK(has_bibd);
  }
  SECTION("phiR rides on the R optimizer set") {
    auto phi = brute_force_optimum(3, 3, {3, 3, 3}, Criterion::PhiR);
    auto r = brute_force_optimum(3, 3, {3, 3, 3}, Criterion::R);
    CHECK(phi.optimizer_count == r.optimizer_count);
    REQUIRE(phi.value.has_value());
    CHECK(*phi.value == make_rational(10, 9));  // (729/1000)^(-1/3)
  }
  SECTION("rejects criteria without a brute-force route") {
    CHECK_THROWS_AS(brute_force_optimum(2, 2, {2, 2}, Criterion::C), std::invalid_argument);
  }
}

TEST_CASE("certificates") {
  SECTION("e-exact on (2,3,(2,2,4))") {
    auto cert = certify(Claim::E_opt_exact, 2, 3, {2, 2, 4});
    CHECK(cert.holds);
    CHECK_FALSE(cert.vacuous);
    CHECK(*cert.optimum == Rational(1));
    CHECK(cert.extra.at("lambda_min_optimum") == "1");
  }
  SECTION("e-exact is vacuous when the family is empty") {
    auto cert = certify(Claim::E_opt_exact, 2, 2, {3, 2});
    CHECK(cert.vacuous);
    CHECK(cert.holds);
  }
  SECTION("varcov on (2,3,(2,2,4))") {
    auto cert = certify(Claim::VarCovSum_min, 2, 3, {2, 2, 4});
    CHECK(cert.holds);
    CHECK(*cert.optimum == Rational(2));
  }
  SECTION("prop1 on (2,2,(2,2))") {
    auto cert = certify(Claim::Prop1_E_opt, 2, 2, {2, 2});
    CHECK(cert.holds);
    CHECK(cert.extra.at("lambda_min_optimum") == "1/2");
    CHECK(cert.extra.at("varcovsum_minimum") == "4");
    CHECK(cert.extra.at("prop1_members") == "2");
  }
  SECTION("a-implies-r on (3,3,q=3)") {
    auto cert = certify(Claim::A_opt_is_R_opt, 3, 3, {3, 3, 3});
    CHECK(cert.holds);
    CHECK(cert.extra.at("a_optimum") == "27/10");
    CHECK(cert.extra.at("r_optimum") == "729/1000");
    CHECK(cert.extra.at("R") == "3");
  }
  SECTION("e-c on (2,3,(2,2,4))") {
    CertifyOptions opt;
    opt.samples = 200;
    auto cert = certify(Claim::E_opt_c_opt, 2, 3, {2, 2, 4}, opt);
    CHECK(cert.holds);
    CHECK(*cert.optimum == Rational(4));
  }
}

TEST_CASE("random feasible designs") {
  SECTION("same seed, same design") {
    auto a = random_feasible_approx(2, 2, 7);
    auto b = random_feasible_approx(2, 2, 7);
    CHECK(a == b);
    CHECK(is_feasible(a).feasible);
  }
  SECTION("different seeds differ") {
    CHECK_FALSE(random_feasible_approx(2, 2, 7) == random_feasible_approx(2, 2, 8));
  }
  SECTION("single block designs cover every treatment") {
    auto design = random_feasible_approx(2, 1, 0);
    CHECK(is_feasible(design).feasible);
    for (int i = 0; i <= 2; ++i) CHECK(design(i, 0) > 0);
  }
}

TEST_CASE("structural sweeps over small spaces") {
  SECTION("off-diagonals of N and entries of its inverse have fixed signs") {
    for_each_design(2, 2, {2, 2}, 1000, [](const ExactDesign& design) {
      auto n = contrast_info(design);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
          if (i != j) CHECK(n(i, j) <= Rational(0));
      if (!is_feasible(design).feasible) return;
      auto inv = inverse_info(n);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) CHECK(inv(i, j) >= Rational(0));
    });
  }
  SECTION("lambda_min never exceeds n/(4v)") {
    for_each_design(2, 2, {2, 2}, 1000, [](const ExactDesign& design) {
      double lmin = spectrum(to_double(contrast_info(design))).lambda_min;
      CHECK(lmin <= 4.0 / 8.0 + 1e-9);
    });
  }
  SECTION("equal-block bound 1'N^-1 1 >= q v^2 / sum(mu_0i)") {
    for_each_design(2, 2, {2, 2}, 1000, [](const ExactDesign& design) {
      if (!is_feasible(design).feasible) return;
      Rational mu_sum(0);
      for (int i = 1; i <= 2; ++i) mu_sum += make_rational(concurrence(design, 0, i));
      REQUIRE(mu_sum > Rational(0));
      Rational lhs = entry_sum(inverse_info(contrast_info(design)));
      CHECK(lhs >= make_rational(2L * 4) / mu_sum);  // q v^2 = 2*4
    });
  }
}

TEST_CASE("A-optimal proportions maximize phiR over sampled designs") {
  for (int v : {2, 3, 4, 5}) {
    // phiR of the product design does not depend on the block weights
    auto reference = a_opt_approx(v, {1.0});
    double best = evaluate(reference, Criterion::PhiR).value;
    SplitMix64 rng(900 + v);
    for (int i = 0; i < 10'000; ++i) {
      int d = 1 + static_cast<int>(rng.next_u64() % 4);
      auto sample = random_feasible_approx(v, d, rng.next_u64());
      double phi = evaluate(sample, Criterion::PhiR).value;
      REQUIRE(phi <= best + 1e-9);
    }
  }
}

TEST_CASE("perturbing an optimal design off the family strictly lowers lambda_min") {
  std::vector<Rational> s{make_rational(1, 3), make_rational(2, 3)};
  auto design = e_opt_approx(2, 2, s);
  const double bound = to_double(e_opt_bound(2));
  SplitMix64 rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    int i = static_cast<int>(rng.next_u64() % 3);
    int k = static_cast<int>(rng.next_u64() % 2);
    Matrix<double> alloc(3, 2);
    double total = 0;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c) {
        alloc(r, c) = to_double(design(r, c));
        total += alloc(r, c);
      }
    alloc(i, k) += 1e-3;
    total += 1e-3;
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 2; ++c) alloc(r, c) /= total;
    ApproxDesign<double> perturbed(alloc);
    double lmin = spectrum(contrast_info(perturbed)).lambda_min;
    CHECK(lmin < bound - 1e-9);
  }
}
