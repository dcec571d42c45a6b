#include <doctest.h>

#include <cmath>

#include "sf/analysis.hpp"

using namespace sf;

namespace {
constexpr double kEps = 1e-4;
constexpr double kCornerTol = 10 * kEps;
constexpr double kRichardson = 1e-4;
constexpr double kFit = 1e-8;
}  // namespace

TEST_CASE("corner formulas at 0.5") {
    Table4 t = corner_formulas(0.5, 1.0);
    CHECK(t[0][0] == doctest::Approx(2.0 / 3 * 2.5 / 1.75).epsilon(1e-14));
    CHECK(t[0][3] == doctest::Approx(4.0 / 3).epsilon(1e-14));
    Table4 e = corner_formulas(0.3, 1e-3);
    Table4 u = corner_formulas(0.3, 1.0);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            CHECK(u[a][b] > 0);
            CHECK(e[a][b] == doctest::Approx(1e-3 * u[a][b]).epsilon(1e-14));
        }
}

TEST_CASE("corner tables: fifteen entries match, V2R1 corner 3 follows the recomputed form") {
    for (double b : {0.3, 0.7}) {
        CornerTable ct = verify_corner_tables(b, kEps);
        int good = 0;
        for (int t = 0; t < 4; ++t)
            for (int m = 0; m < 4; ++m) {
                CHECK(!ct.flagged[t][m]);
                if (ct.rel_error[t][m] <= kCornerTol) ++good;
            }
        CHECK(good == 15);
        CHECK(ct.rel_error[3][2] > 0.3);
        CHECK(std::abs(ct.measured[3][2] - ct.derived_v2r1_3) / ct.derived_v2r1_3 <= kCornerTol);
    }
    CHECK_THROWS_AS(verify_corner_tables(0.5, kEps), Error);
}

TEST_CASE("property: corner errors scale linearly in epsilon over a decade") {
    CornerTable a = verify_corner_tables(0.3, 1e-3), b = verify_corner_tables(0.3, 1e-4);
    for (int t = 0; t < 4; ++t)
        for (int m = 0; m < 4; ++m) {
            if (t == 3 && m == 2) continue;
            if (a.rel_error[t][m] < 1e-9) continue;
            double r = b.rel_error[t][m] / a.rel_error[t][m];
            CHECK(r > 0.08);
            CHECK(r < 0.12);
        }
}

TEST_CASE("ratio tables") {
    RatioTables r = ratio_tables(0.5);
    CHECK(r.set1[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(r.set1[2] == doctest::Approx(4.0).epsilon(1e-14));
    RatioClaims c = check_ratio_claims(50);
    CHECK(c.set1_third_ge_3p5);
    CHECK(c.set1_third_min >= 3.5);
    CHECK(c.set1_fourth_le_1_low);
    CHECK(c.set1_first_le_1_high);
    CHECK(c.set2_max23_ge_1p2);
    CHECK(c.set2_last_lt_0p8_high);
    CHECK(c.lambda < c.mu);
}

TEST_CASE("classification from moduli") {
    CHECK(classify_moduli(0.5, 0.9) == Stability::attracting);
    CHECK(classify_moduli(0.5, 1.5) == Stability::saddle);
    CHECK(classify_moduli(1.5, 1.1) == Stability::repelling);
}

TEST_CASE("finite-difference Jacobian agrees with the exact cycle linearization") {
    for (double b : {0.3, 0.7, 0.95})
        for (OrbitId o : {OrbitId::shapley, OrbitId::anti_shapley}) {
            GamePair g = shapley_family(b);
            StabilityReport r = classify_stability(g, o);
            CycleLinearization lin = cycle_linearization(g, cycle_of(o));
            CHECK(r.richardson_consistency <= kRichardson);
            double fd = std::max(std::abs(r.eigenvalues[0]), std::abs(r.eigenvalues[1]));
            double ex = std::max(std::abs(lin.multipliers[0]), std::abs(lin.multipliers[1]));
            CHECK(std::abs(fd - ex) / ex < 1e-5);
            CHECK(r.classification == classify_moduli(std::abs(lin.multipliers[0]), std::abs(lin.multipliers[1])));
        }
    CHECK(classify_stability(shapley_family(0.3), OrbitId::shapley).classification == Stability::attracting);
    CHECK(classify_stability(shapley_family(0.95), OrbitId::anti_shapley).classification == Stability::attracting);
    CHECK(classify_stability(shapley_family(0.5), OrbitId::gamma).classification == Stability::jitter);
}

TEST_CASE("tau estimate") {
    TauEstimate t = estimate_tau();
    CHECK(std::abs(t.tau - 0.915) <= 0.005);
    CHECK(t.hi - t.lo <= 1e-4);
    CHECK(std::abs(leading_modulus(t.tau, OrbitId::anti_shapley) - 1) < 1e-3);
    TauEstimate other = estimate_tau(1);
    CHECK(std::abs(other.tau - t.tau) <= 1e-3);
    // Sampled monotonicity of the anti-Shapley leading modulus on the bracket.
    double prev = leading_modulus(kSigma + 0.01, OrbitId::anti_shapley);
    for (int k = 1; k <= 40; ++k) {
        double b = kSigma + 0.01 + (0.99 - kSigma - 0.01) * k / 40;
        double m = leading_modulus(b, OrbitId::anti_shapley);
        CHECK(m < prev);
        prev = m;
    }
}

TEST_CASE("Moebius cone map") {
    MoebiusCone lo = moebius_cone_map(shapley_family(0.3));
    CHECK(lo.E_attracting);
    CHECK(lo.derivative_at_E < 1);
    CHECK(!lo.has_fixed_point);
    CHECK(lo.fit_residual <= kFit);
    CHECK(lo.iterate_max_rel_error <= kFit);
    GamePair g = shapley_family(0.8);
    MoebiusCone hi = moebius_cone_map(g);
    CHECK(!hi.E_attracting);
    REQUIRE(hi.has_fixed_point);
    CHECK(hi.fixed_point_residual <= kFit);
    CHECK(std::abs(hi.t_star - gamma_orbit(g).t_star) <= kFit);
}

TEST_CASE("property: Moebius fit holds across beta") {
    for (double b : {0.1, 0.25, 0.45, 0.55, 0.7, 0.85, 0.95}) {
        MoebiusCone m = moebius_cone_map(shapley_family(b));
        CHECK(m.fit_residual <= kFit);
        CHECK(m.E_attracting == (b < kSigma));
    }
}

TEST_CASE("two-strategy spiral obeys r/(1+n a r)") {
    SpiralCheck s = moebius_spiral(shapley_family(0.5), 1e-2, 50);
    CHECK(s.max_rel_error <= 1e-8);
    CHECK(s.theta == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s.a > 0);
}

TEST_CASE("winding scales like 1/r") {
    GamePair g = shapley_family(0.5);
    int w3 = measure_winding(g, 1e-3, 0.95, 0.7), w4 = measure_winding(g, 1e-4, 0.95, 0.7);
    CHECK(std::abs(w4 - 10 * w3) <= 20);
    int big = measure_winding(g, 0.2, 0.95, 0.7);
    CHECK(big <= 1);
    WindingCheck w = verify_winding(g, {1e-2, 1e-3, 1e-4});
    CHECK(w.within2);
    CHECK(w.c0 > 0);
    CHECK(w.c0 < 1);
}

TEST_CASE("cone lift") {
    GamePair lo = shapley_family(0.3), hi = shapley_family(0.8);
    ConeLift a = cone_lift(lo, gamma_seed(lo), 6);
    CHECK(a.reaches_E);
    CHECK(a.time_to_E > 0);
    ConeLift b = cone_lift(hi, gamma_seed(hi), 6);
    CHECK(b.periodic);
    CHECK(b.closure <= 1e-8);
}

TEST_CASE("robustness: zero perturbation reproduces the family") {
    GamePair g = perturbed_family(0.3, 0.0, 1, 0);
    GamePair f = shapley_family(0.3);
    CHECK((g.A - f.A).cwiseAbs().maxCoeff() == 0);
    CHECK((g.B - f.B).cwiseAbs().maxCoeff() == 0);
    GamePair p = perturbed_family(0.3, 1e-3, 1, 5);
    CHECK((p.A - f.A).cwiseAbs().maxCoeff() <= 1e-3);
    CHECK((p.B - f.B).cwiseAbs().maxCoeff() <= 1e-3);
    RobustnessReport r = robustness_sweep(0.3, 10, 1e-3, 9);
    CHECK(r.all_ok == 10);
    CHECK(r.shapley_class == Stability::attracting);
}
