#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "sf/analysis.hpp"
#include "sf/jitter.hpp"
#include "sf/rng.hpp"

using namespace sf;

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kNorm = 1e-14;
constexpr double kCompose = 1e-12;
constexpr double kIdentity = 1e-14;

JitterModel identity_model() {
    JitterModel m;
    m.lambda = 0.5;
    m.mu = 2.0;
    return m;
}

// Identity on A0 with a shear-like quadrant map on A1.
JitterModel shear_model() {
    JitterModel m;
    m.A1.scales = {0.5, 1, 2, 1};
    m.lambda = 0.6;
    m.mu = 1.8;
    return m;
}

double dist(const Point2<double>& a, const Point2<double>& b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }
}  // namespace

TEST_CASE("quadrilateral polar round trip") {
    CounterRng rng(51);
    for (int n = 0; n < 500; ++n) {
        Point2<double> z{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        auto q = to_quad_polar(z);
        CHECK(q.phi >= 0);
        CHECK(q.phi < 2 * kPi);
        CHECK(dist(from_quad_polar(q), z) < 1e-12);
    }
    CHECK_THROWS_AS(to_quad_polar(Point2<double>{0, 0}), Error);
}

TEST_CASE("quadrilateral rotation") {
    Point2<double> half = quad_rotate(Point2<double>{1, 0}, kPi);
    CHECK(dist(half, {-1, 0}) < 1e-15);
    Point2<double> quarter = quad_rotate(Point2<double>{1, 0}, kPi / 2);
    CHECK(dist(quarter, {0, -1}) < 1e-15);  // clockwise
    CounterRng rng(52);
    for (int n = 0; n < 500; ++n) {
        Point2<double> z{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        double s = rng.uniform(-10, 10), t = rng.uniform(-10, 10);
        CHECK(std::abs(quad_norm(quad_rotate(z, t)) - quad_norm(z)) <= kNorm);
        CHECK(dist(quad_rotate(quad_rotate(z, t), s), quad_rotate(z, s + t)) < kCompose);
        CHECK(dist(quad_rotate(z, 0.0), z) < kIdentity);
    }
}

TEST_CASE("quadrant-linear maps") {
    QuadrantLinearMap a{{0.5, 2, 3, 0.25}};
    CounterRng rng(53);
    for (int n = 0; n < 200; ++n) {
        Point2<double> z{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        CHECK(dist(a.apply_inverse(a.apply(z)), z) < 1e-15);
        CHECK(dist(a.inverse().apply(a.apply(z)), z) < 1e-15);
        // Relative arclength on the diamond is preserved up to the central projection of each quadrant.
        auto w = a.apply(z);
        double phi = to_quad_polar(z).phi;
        CHECK(std::abs(wrap_angle(a.image_angle(phi)) - to_quad_polar(w).phi) < 1e-12);
        CHECK(std::abs(quad_norm(w) / quad_norm(z) - a.ratio_at(phi)) < 1e-12);
    }
    auto axis = a.apply(Point2<double>{0, 1});
    CHECK(dist(axis, {0, 0.25}) == 0);
}

TEST_CASE("identity model: full and half turns") {
    JitterModel m = identity_model();
    for (int k : {3, 10, 50}) {
        Point2<double> z{1.0 / k, 0};
        CHECK(dist(jitter_map(m, z), z) < 1e-12);
        Point2<double> h{2.0 / (2 * k + 1), 0};
        CHECK(dist(jitter_map(m, h), quad_rotate(h, kPi)) < 1e-12);
    }
    CHECK_THROWS_AS(jitter_map(m, Point2<double>{0, 0}), Error);
}

TEST_CASE("identity model fixed points") {
    // Whole circles of radius 1/j are fixed and sit on shell boundaries, so a shell may report 1/k or 1/(k+1).
    JitterModel m = identity_model();
    auto fps = find_fixed_points(m, 5, 12);
    REQUIRE(fps.size() == 8);
    int found = 0;
    for (const auto& f : fps) {
        if (!f.found) continue;
        ++found;
        CHECK(f.residual <= 1e-9);
        double j = 1 / quad_norm(f.point);
        CHECK(std::abs(j - std::round(j)) < 1e-9);
        CHECK((std::lround(j) == f.k || std::lround(j) == f.k + 1));
        CHECK(std::abs(f.point.y) < 1e-15);
    }
    CHECK(found >= 6);
}

TEST_CASE("annulus index") {
    CHECK(annulus_index(1.0 / 50) == 49);
    CHECK(annulus_index(0.0199) == 50);
    CHECK(annulus_index(1.0 / 50.5) == 50);
    CHECK_THROWS_AS(annulus_index(0.0), Error);
}

TEST_CASE("game-derived model") {
    JitterModel m = game_jitter_model(0.5);
    CHECK(m.stage_count() == 2);
    CHECK_NOTHROW(check_contraction_range(m));
    CHECK(m.N0 >= 1);
    // Bracket from the ratio tables: one iterate is a set-1 stage followed by a set-2 stage.
    RatioTables t = ratio_tables(0.5);
    double lo = *std::min_element(t.set1.begin(), t.set1.end()) * *std::min_element(t.set2.begin(), t.set2.end());
    double hi = *std::max_element(t.set1.begin(), t.set1.end()) * *std::max_element(t.set2.begin(), t.set2.end());
    CHECK(radial_ratio_range(m)[0] == doctest::Approx(lo).epsilon(1e-12));
    CHECK(radial_ratio_range(m)[1] == doctest::Approx(hi).epsilon(1e-12));
    CounterRng rng(54);
    for (int n = 0; n < 300; ++n) {
        double r = rng.uniform(0.005, 0.05), phi = rng.uniform(0, 2 * kPi);
        Point2<double> z = from_quad_polar(QuadPolar<double>{r, phi});
        double ratio = quad_norm(jitter_map(m, z)) / r;
        CHECK(ratio >= lo * (1 - 1e-12));
        CHECK(ratio <= hi * (1 + 1e-12));
    }
    auto fps = find_fixed_points(m, 50, 59);
    double prev = 1;
    for (const auto& f : fps) {
        REQUIRE(f.found);
        CHECK(f.residual <= 1e-9);
        CHECK(quad_norm(f.point) < prev);
        prev = quad_norm(f.point);
    }
}

TEST_CASE("model JSON") {
    JitterModel m = game_jitter_model(0.5);
    JitterModel back = model_from_json(model_to_json(m));
    CHECK(back.A1.scales == m.A1.scales);
    CHECK(back.A3->scales == m.A3->scales);
    CHECK(back.N0 == m.N0);
    CHECK_THROWS_AS(model_from_json("{\"A0\":[1,1,1,1]}"), Error);
    CHECK_THROWS_AS(model_from_json("not json"), Error);
    CHECK_THROWS_AS(model_from_json(R"({"A0":[1,1,1,1],"A1":[1,1,1,1],"lambda":2,"mu":1})"), Error);
}

TEST_CASE("period-3 orbit on the shear model") {
    JitterModel m = shear_model();
    PeriodicOrbit po = find_periodic_orbit(m, {1.2, 1.2, 1 / 1.44}, 40);
    REQUIRE(po.points.size() == 3);
    CHECK(po.residual <= 1e-8);
    CHECK(po.radius_ratio_error <= 1e-6);
}

TEST_CASE("periodic orbits of period 1..8 in the game model") {
    JitterModel m = game_jitter_model(0.5);
    for (int n = 1; n <= 8; ++n) {
        std::vector<double> a;
        for (int i = 0; i < n - (n % 2); ++i) a.push_back(i % 2 ? 1 / 1.1 : 1.1);
        if (n % 2) {
            if (n == 1) a = {1.0};
            else {
                a.resize(n - 3);
                a.insert(a.end(), {1.1, 1.1, 1 / 1.21});
            }
        }
        PeriodicOrbit po = find_periodic_orbit(m, a, 50);
        CHECK(po.points.size() == std::size_t(n));
        CHECK(po.residual <= 1e-8);
    }
    CHECK_THROWS_AS(find_periodic_orbit(m, {1.1, 1.1}, 50), Error);
    CHECK_THROWS_AS(find_periodic_orbit(m, {4.0, 0.25}, 50), Error);
}

TEST_CASE("itinerary realization") {
    JitterModel m = game_jitter_model(0.5);
    std::vector<long> alt;
    for (int i = 0; i < 20; ++i) alt.push_back(i % 2 ? 52 : 50);
    Realization r = realize_itinerary(m, alt);
    CHECK(r.verified);
    CHECK(r.realized == alt);
    CHECK(annulus_itinerary(m, r.z, 20) == alt);
    for (double d : r.delta) {
        CHECK(d > 0);
        CHECK(d < 1);
    }

    Realization c = realize_itinerary(m, std::vector<long>(10, 60));
    CHECK(c.verified);

    // Steps near both ends of the admissible ratio range.
    std::vector<long> edge = {60, 18, 22, 27, 33, 41, 50, 62, 77, 22};
    Realization e = realize_itinerary(m, edge);
    CHECK(e.verified);
    CHECK(e.realized == edge);

    CHECK_THROWS_AS(realize_itinerary(m, {60, 10}), Error);       // ratio above mu
    CHECK_THROWS_AS(realize_itinerary(m, {2, 2}), Error);         // below N0
}

TEST_CASE("sensitivity of the identity model matches the angular derivative") {
    // One step at radius r shifts the angle by 2 pi delta / r^2, i.e. 8 delta / r in sum-distance.
    JitterModel m = identity_model();
    for (double k : {20.0, 50.0}) {
        double r = 1 / k;
        double s = sensitivity_estimate(m, Point2<double>{r, 0}, 1e-11, 1);
        CHECK(s == doctest::Approx(8 / r).epsilon(1e-2));
    }
}

TEST_CASE("divergence in the game model") {
    DivergenceReport d = itinerary_divergence(game_jitter_model(0.5), 50, 100, 3);
    CHECK(d.starts == 100);
    CHECK(d.diverged >= 80);
    CHECK(d.first_disagreement.size() == 100);
}
