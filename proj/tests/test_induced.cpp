#include <doctest.h>

#include <cmath>

#include "sf/analysis.hpp"
#include "sf/induced.hpp"
#include "sf/sampling.hpp"

using namespace sf;

namespace {
constexpr double kCommute = 1e-9;
constexpr double kClosure = 1e-9;

double six_min(const JointState& s) { return std::min(s.pA.minCoeff(), s.pB.minCoeff()); }
}  // namespace

TEST_CASE("projection along a single-coordinate ray") {
    GamePair g = shapley_family(0.4);
    const double d = 0.01;
    JointState s;
    s.pB = Vec3(1.0 / 3 + d, 1.0 / 3, 1.0 / 3 - d);
    JointState b = project_to_boundary(s, g.equilibrium);
    CHECK(std::abs(b.pB[2]) < 1e-15);
    CHECK(std::abs(b.pB[0] - (1.0 / 3 + (1.0 / 3) / d * d)) < 1e-12);
    CHECK(on_boundary(b));
    JointState again = project_to_boundary(b, g.equilibrium);
    CHECK((again.stacked() - b.stacked()).norm() < 1e-15);
    CHECK_THROWS_AS(project_to_boundary(g.equilibrium, g.equilibrium), Error);
}

TEST_CASE("property: projection keeps best responses") {
    CounterRng rng(41);
    GamePair g = shapley_family(0.7);
    for (int n = 0; n < 500; ++n) {
        JointState p = random_interior_state(rng);
        JointState b = project_to_boundary(p, g.equilibrium);
        CHECK(std::abs(six_min(b)) < 1e-12);
        TargetPair tp = choose_targets(g, p), tb = choose_targets(g, b);
        CHECK(tp.iA == tb.iA);
        CHECK(tp.iB == tb.iB);
    }
}

TEST_CASE("property: projection commutes with the flow") {
    CounterRng rng(42);
    for (double beta : {0.3, 0.8}) {
        GamePair g = shapley_family(beta);
        double worst = 0;
        for (int n = 0; n < 1000; ++n) {
            JointState p = random_interior_state(rng);
            JointState lhs = project_to_boundary(step(g, p).end, g.equilibrium);
            JointState rhs = induced_step(g, project_to_boundary(p, g.equilibrium));
            worst = std::max(worst, (lhs.stacked() - rhs.stacked()).cwiseAbs().maxCoeff());
        }
        CHECK(worst < kCommute);
    }
}

TEST_CASE("Gamma-tilde closes for every tested beta") {
    for (int k = 1; k <= 9; ++k) {
        double b = k / 10.0;
        GammaOrbit o = gamma_orbit(shapley_family(b));
        CHECK(o.closure_residual <= kClosure);
        REQUIRE(o.boundary_points.size() == 7);
        REQUIRE(o.itinerary.entries.size() == 6);
        for (const auto& e : o.itinerary.entries) {
            CHECK(e.i.mixed);
            CHECK(e.j.mixed);
        }
        CHECK(o.has_gamma == (b > kSigma));
    }
}

TEST_CASE("Gamma at 0.8 has the mixed hexagon itinerary and lies on J") {
    GamePair g = shapley_family(0.8);
    GammaOrbit o = gamma_orbit(g);
    REQUIRE(o.has_gamma);
    std::vector<std::string> labels;
    for (const auto& e : o.itinerary.entries) labels.push_back(label_string(e.i) + label_string(e.j));
    // Cyclic rotation of (1b,1b),(1b,2b),(2b,2b),(2b,3b),(3b,3b),(3b,1b).
    std::vector<std::string> want = {"1b1b", "1b2b", "2b2b", "2b3b", "3b3b", "3b1b"};
    bool rot = false;
    for (int r = 0; r < 6; ++r) {
        bool ok = true;
        for (int k = 0; k < 6; ++k) ok = ok && labels[k] == want[(k + r) % 6];
        rot = rot || ok;
    }
    CHECK(rot);
    for (const auto& p : o.gamma_points) {
        PayoffVectors v = payoff_vectors(g, p);
        CHECK(best_response_set(v.vA, 1e-9).size() >= 2);
        CHECK(best_response_set(v.vB, 1e-9).size() >= 2);
    }
}

TEST_CASE("constrained induced flow stays on J and closes") {
    GamePair g = shapley_family(0.3);
    JointState b = gamma_seed(g);
    JointState start = b;
    for (int k = 0; k < 6; ++k) {
        b = induced_step(g, b, true);
        CHECK(on_boundary(b));
    }
    CHECK((b.stacked() - start.stacked()).cwiseAbs().sum() <= kClosure);
}

TEST_CASE("Shapley induced cycle at 0.7 persists") {
    GamePair g = shapley_family(0.7);
    CycleLinearization lin = cycle_linearization(g, cycle_of(OrbitId::shapley));
    JointState b = lin.boundary_point;
    JointState start = b;
    for (int k = 0; k < 6; ++k) b = induced_step(g, b);
    CHECK((b.stacked() - start.stacked()).cwiseAbs().sum() < 1e-9);
}

TEST_CASE("global section returns") {
    GamePair g = shapley_family(0.3);
    SectionSpec sec = make_section(g, SectionKind::GlobalS);
    CounterRng rng(43);
    JointState b = project_to_boundary(random_interior_state(rng), g.equilibrium);
    auto hits = first_return(g, sec, b, 60);
    REQUIRE(hits.size() == 60);
    for (const auto& h : hits) {
        CHECK(h.piece >= 0);
        CHECK(h.piece < 4);
        CHECK(on_boundary(h.point));
    }
    // Attracting Shapley cycle: one circuit crosses the four pieces, and returns to a piece settle.
    const auto& a = hits[hits.size() - 1];
    const auto& c = hits[hits.size() - 1 - 4];
    CHECK(a.piece == c.piece);
    CHECK(std::abs(a.x - c.x) + std::abs(a.y - c.y) < 1e-6);
}

TEST_CASE("chart round trip on V-sections") {
    GamePair g = shapley_family(0.6);
    for (SectionKind k : {SectionKind::V0xB31, SectionKind::A12xV1, SectionKind::V2xB12}) {
        SectionSpec s = make_section(g, k);
        for (auto [x, y] : {std::pair{1e-3, 0.0}, {0.0, -2e-3}, {-1e-3, 5e-4}, {3e-4, 3e-4}}) {
            JointState q = chart_point(g, s, x, y);
            auto xy = chart_coords(s, q);
            CHECK(std::abs(xy[0] - x) < 1e-12);
            CHECK(std::abs(xy[1] - y) < 1e-12);
        }
    }
    CHECK(half_line(1, 0.5) == 1);
    CHECK(half_line(0.1, -1) == 2);
    CHECK(half_line(-1, 0.5) == 3);
    CHECK(half_line(0.1, 1) == 4);
}

TEST_CASE("entry maps shrink to the origin") {
    GamePair g = shapley_family(0.5);
    EntryMaps big = leg_entry_maps(g, 1e-3, 8), small = leg_entry_maps(g, 1e-5, 8);
    auto mean = [](const std::vector<EntrySample>& v) {
        double s = 0;
        int n = 0;
        for (const auto& e : v)
            if (!e.flagged) {
                s += std::abs(e.x_out) + std::abs(e.y_out);
                ++n;
            }
        CHECK(2 * n >= int(v.size()));
        return s / n;
    };
    REQUIRE(!big.R0.empty());
    CHECK(mean(small.R0) < mean(big.R0) / 50);
    CHECK(mean(small.R1) < mean(big.R1) / 50);
}
