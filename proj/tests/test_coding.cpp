#include <doctest.h>

#include "sf/analysis.hpp"
#include "sf/coding.hpp"
#include "sf/sampling.hpp"

using namespace sf;

namespace {
std::vector<std::pair<int, int>> repeat(const std::vector<std::pair<int, int>>& c, int times) {
    std::vector<std::pair<int, int>> out;
    for (int r = 0; r < times; ++r) out.insert(out.end(), c.begin(), c.end());
    return out;
}
const std::vector<std::pair<int, int>> kSeven = {{1, 2}, {2, 2}, {2, 3}, {3, 3}, {3, 2}, {3, 1}, {1, 1}};
}  // namespace

TEST_CASE("itinerary validation") {
    CHECK_THROWS_AS(itinerary_from_labels({{1, 2}, {1, 2}}), Error);
    std::vector<ItineraryEntry> bad = {{0.5, {0, false}, {1, false}}, {1.0, {1, false}, {1, false}}};
    CHECK_THROWS_AS(make_itinerary(bad), Error);
    std::vector<ItineraryEntry> back = {{0.0, {0, false}, {1, false}}, {0.0, {1, false}, {1, false}}};
    CHECK_THROWS_AS(make_itinerary(back), Error);
}

TEST_CASE("Shapley cycle never dithers") {
    Itinerary it = itinerary_from_labels(repeat(kShapleyCycle, 4));
    DitherCode c = dither_code(it);
    CHECK(c.str().find('I') == std::string::npos);
    CHECK(essential_period(it, 6) == 6);
    Gaps g = decisive_gaps(c);
    for (int x : g.consecutive) CHECK(x == 1);
}

TEST_CASE("period-7 cycle dithers at the 5th step") {
    Itinerary it = itinerary_from_labels(repeat(kSeven, 4));
    CHECK(essential_period(it, 7) == 6);
    DitherCode c = dither_code(it);
    // Flag at step k (k >= 3) is c.flags[k-3]. Within the first period only step 4 dithers; the repeated
    // cycle also dithers at steps 7, 14, ..., whose window straddles the period boundary.
    for (std::size_t n = 0; n < c.flags.size(); ++n) {
        int k = int(n) + 3;
        CHECK((c.flags[n] == 'I') == (k % 7 == 4 || k % 7 == 0));
    }
}

TEST_CASE("essential period of a doubled cycle") {
    Itinerary it = itinerary_from_labels(repeat(kShapleyCycle, 4));
    CHECK(essential_period(it, 12) == 12);
    CHECK_THROWS_AS(essential_period(itinerary_from_labels(kSeven), 5), Error);
}

TEST_CASE("property: essential period bounded by period, equal iff all decisive") {
    for (const auto& cyc : {kShapleyCycle, kAntiShapleyCycle, kSeven}) {
        Itinerary it = itinerary_from_labels(repeat(cyc, 3));
        int n = int(cyc.size());
        int e = essential_period(it, n);
        CHECK(e <= n);
        std::string flags = dither_code(it).str().substr(0, n - 3);
        bool any_i = flags.find('I') != std::string::npos;
        CHECK((e == n) == !any_i);
    }
}

TEST_CASE("property: shift equivariance of flags") {
    CounterRng rng(31);
    GamePair g = shapley_family(0.8);
    SimLimits lim;
    lim.max_events = 200;
    Itinerary it = extract_itinerary(simulate(g, random_interior_state(rng), lim));
    Itinerary sh = it;
    sh.entries.erase(sh.entries.begin());
    double t0 = sh.entries.front().t;
    for (auto& e : sh.entries) e.t -= t0;
    std::string a = dither_code(it).str(), b = dither_code(sh).str();
    // Flag for k >= 4 of the original equals flag k-1 of the shifted sequence.
    CHECK(a.substr(1) == b);
}

TEST_CASE("flags do not depend on times") {
    Itinerary it = itinerary_from_labels(repeat(kSeven, 3));
    Itinerary warped = it;
    for (std::size_t n = 0; n < warped.entries.size(); ++n) warped.entries[n].t = double(n * n);
    CHECK(dither_code(it).str() == dither_code(warped).str());
}

TEST_CASE("literal variant differs only through the j window") {
    Itinerary it = itinerary_from_labels(repeat(kShapleyCycle, 3));
    CHECK(dither_code(it, DitherVariant::Literal).flags.size() == dither_code(it).flags.size());
}

TEST_CASE("mixed labels are rejected") {
    std::vector<ItineraryEntry> e;
    for (int n = 0; n < 6; ++n) e.push_back({double(n), {n % 3, true}, {(n + 1) % 3, true}});
    CHECK_THROWS_AS(dither_code(make_itinerary(e)), Error);
}

TEST_CASE("cycle detection") {
    auto labels = repeat(kShapleyCycle, 3);
    labels.insert(labels.begin(), {3, 2});
    Itinerary it = itinerary_from_labels(labels);
    auto c = detect_cycle(it, 2);
    REQUIRE(c);
    CHECK(c->period == 6);
    CHECK(c->offset == 1);
    CHECK(follows_cycle(it, 1, kShapleyCycle));
    CHECK(!follows_cycle(it, 0, kShapleyCycle));
    CHECK(!detect_cycle(itinerary_from_labels({{1, 2}, {2, 2}, {2, 3}, {3, 3}}), 2));
}

TEST_CASE("anti-Shapley cycle at 0.95") {
    GamePair g = shapley_family(0.95);
    CycleLinearization lin = cycle_linearization(g, kAntiShapleyCycle);
    JointState s = lin.boundary_point;
    // Pull slightly inside along the ray and simulate: the attracting cycle keeps its labels.
    s.pA = g.equilibrium.pA + 0.9 * (s.pA - g.equilibrium.pA);
    s.pB = g.equilibrium.pB + 0.9 * (s.pB - g.equilibrium.pB);
    SimLimits lim;
    lim.max_events = 60;
    Itinerary it = extract_itinerary(simulate(g, sanitize(s), lim));
    auto c = detect_cycle(it, 3);
    REQUIRE(c);
    CHECK(c->period == 6);
    CHECK(follows_cycle(it, c->offset, kAntiShapleyCycle));
}

TEST_CASE("gaps of D I I I D I I I D") {
    DitherCode c;
    std::string f = "DIIIDIIID";
    for (std::size_t n = 0; n < f.size(); ++n) {
        c.flags.push_back(f[n]);
        if (f[n] == 'D') c.decisive_times.push_back(int(n) + 3);
    }
    CHECK(c.decisive_times == std::vector<int>{3, 7, 11});
    Gaps g = decisive_gaps(c);
    CHECK(g.consecutive == std::vector<int>{4, 4});
    CHECK(g.even_indexed == std::vector<int>{8});
}
