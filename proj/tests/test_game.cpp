#include <doctest.h>

#include <cmath>

#include "sf/game.hpp"
#include "sf/rng.hpp"
#include "sf/sampling.hpp"

using namespace sf;

namespace {
constexpr double kExact = 1e-12;
constexpr double kEq = 1e-10;
}  // namespace

TEST_CASE("family matrices") {
    GamePair g = shapley_family(0.5);
    CHECK(g.A(0, 0) == 1.0);
    CHECK(g.A(0, 1) == 0.0);
    CHECK(g.A(0, 2) == 0.5);
    CHECK(g.B(0, 0) == -0.5);
    CHECK(g.B(0, 1) == 1.0);
    CHECK(g.B(0, 2) == 0.0);
    CHECK(g.beta.value() == 0.5);
}

TEST_CASE("zero-sum rescaling at sigma") {
    GamePair g = shapley_family(kSigma);
    Mat3 S = g.A + kSigma * (g.B - Mat3::Ones());
    CHECK(S.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("family domain") {
    CHECK_THROWS_AS(shapley_family(0.0), Error);
    CHECK_THROWS_AS(shapley_family(1.0), Error);
    CHECK_THROWS_AS(shapley_family(-0.2), Error);
}

TEST_CASE("payoff vectors") {
    JointState s;
    s.pB = Vec3(1, 0, 0);
    auto v = payoff_vectors(shapley_family(0.5), s);
    CHECK((v.vA - Vec3(1, 0.5, 0)).norm() < kExact);
    s.pB = Vec3(0.5, 0.5, 0);
    v = payoff_vectors(shapley_family(0.3), s);
    CHECK((v.vA - Vec3(0.5, 0.65, 0.15)).norm() < kExact);
    s.pB = Vec3::Constant(1.0 / 3);
    v = payoff_vectors(shapley_family(0.7), s);
    CHECK(v.vA.maxCoeff() - v.vA.minCoeff() < kExact);
}

TEST_CASE("best responses") {
    CHECK(best_response_set(Vec3(1, 0.5, 0)) == std::vector<int>{0});
    CHECK(best_response_set(Vec3(0.7, 0.7, 0.1)) == std::vector<int>{0, 1});
    CHECK(best_response_set(Vec3(2, 2, 2)) == std::vector<int>{0, 1, 2});
}

TEST_CASE("property: argmax invariant under shift and positive scale") {
    CounterRng rng(11);
    for (int n = 0; n < 200; ++n) {
        Vec3 v(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
        double c = rng.uniform(-5, 5), a = rng.uniform(0.1, 10);
        auto base = best_response_set(v);
        CHECK(best_response_set((v.array() + c).matrix()) == base);
        CHECK(best_response_set(a * v) == base);
    }
}

TEST_CASE("property: family equilibrium is the barycenter") {
    CounterRng rng(12);
    for (int n = 0; n < 50; ++n) {
        double b = rng.uniform(0.01, 0.99);
        GamePair g = shapley_family(b);
        JointState e = nash_equilibrium(g.A, g.B);
        CHECK((e.pA - Vec3::Constant(1.0 / 3)).cwiseAbs().maxCoeff() < kExact);
        CHECK((e.pB - Vec3::Constant(1.0 / 3)).cwiseAbs().maxCoeff() < kExact);
    }
}

TEST_CASE("perturbed equilibrium") {
    GamePair f = shapley_family(0.3);
    Mat3 A = f.A;
    A(0, 0) += 1e-3;
    GamePair g = game_from_matrices(A, f.B);
    CHECK((g.equilibrium.pB - Vec3::Constant(1.0 / 3)).cwiseAbs().maxCoeff() < 1e-2);
    Vec3 vA = g.A * g.equilibrium.pB;
    Vec3 vB = g.B.transpose() * g.equilibrium.pA;
    CHECK(vA.maxCoeff() - vA.minCoeff() < kEq);
    CHECK(vB.maxCoeff() - vB.minCoeff() < kEq);
    GamePair same = game_from_matrices(f.A, f.B);
    CHECK((same.equilibrium.stacked() - f.equilibrium.stacked()).norm() < kExact);
}

TEST_CASE("no interior equilibrium") {
    Mat3 A = Mat3::Identity(), B = Mat3::Identity();
    A(0, 0) = 10;  // dominant strategy
    A(0, 1) = 10;
    A(0, 2) = 10;
    CHECK_THROWS_AS(game_from_matrices(A, B), Error);
}

TEST_CASE("landmarks") {
    for (double b : {0.2, 0.5, 0.8}) {
        GamePair g = shapley_family(b);
        Landmarks L = landmarks(g);
        // R^B_13 and Q^B_13 (pair index 2 = (3,1)).
        if (b == 0.5) CHECK((L.RB[2] - Vec3(1.0 / 3, 0, 2.0 / 3)).norm() < kExact);
        CHECK((L.QB[2] - Vec3(b / (b + 1), 1 / (b + 1), 0)).norm() < kExact);
        for (int p = 0; p < 3; ++p) {
            auto [i, j] = kPairs[p];
            // Points of Sigma_A on Z^B_ij and points of Sigma_B on Z^A_ij.
            for (const Vec3& x : {L.RA[p], L.QA[p]}) {
                Vec3 vB = g.B.transpose() * x;
                CHECK(std::abs(vB[i] - vB[j]) < kExact);
                CHECK(x.minCoeff() < kExact);
            }
            for (const Vec3& y : {L.RB[p], L.QB[p]}) {
                Vec3 vA = g.A * y;
                CHECK(std::abs(vA[i] - vA[j]) < kExact);
                CHECK(y.minCoeff() < kExact);
            }
            // R and Q straddle E: E lies on the segment between them.
            Vec3 E = Vec3::Constant(1.0 / 3);
            Vec3 d1 = L.RA[p] - E, d2 = L.QA[p] - E;
            CHECK(d1.dot(d2) < 0);
        }
    }
}

TEST_CASE("simplex hygiene") {
    SimplexPoint p = SimplexPoint::make(Vec3(0.5, 0.5 + 1e-13, -1e-13));
    CHECK(p.c.minCoeff() >= 0);
    CHECK(std::abs(p.c.sum() - 1) < 1e-15);
    CHECK_THROWS_AS(SimplexPoint::make(Vec3(0.5, 0.6, -0.1)), Error);
}

TEST_CASE("random interior samples") {
    CounterRng rng(3);
    for (int n = 0; n < 100; ++n) {
        JointState s = random_interior_state(rng);
        CHECK(s.pA.minCoeff() > 0);
        CHECK(std::abs(s.pA.sum() - 1) < 1e-15);
        CHECK(std::abs(s.pB.sum() - 1) < 1e-15);
    }
}

TEST_CASE("counter rng splits are reproducible and distinct") {
    CounterRng a(5), b(5);
    CHECK(a.next() == b.next());
    CounterRng s1 = a.split(1), s1b = b.split(1), s2 = a.split(2);
    std::uint64_t x = s1.next();
    CHECK(x == s1b.next());
    CHECK(x != s2.next());
}
