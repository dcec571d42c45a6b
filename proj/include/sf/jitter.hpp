#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

#include "sf/common.hpp"

namespace sf {

using Big = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

template <class T>
struct Point2 {
    T x = 0, y = 0;
};

template <class T>
T two_pi() {
    return boost::math::constants::two_pi<T>();
}

template <class T>
T quad_norm(const Point2<T>& p) {
    using std::abs;
    return abs(p.x) + abs(p.y);
}

// Half-axes in clockwise order starting at +x.
inline constexpr int kAxisX[4] = {1, 0, -1, 0};
inline constexpr int kAxisY[4] = {0, -1, 0, 1};

// Quadrilateral polar coordinates: r = |x|+|y|, phi runs clockwise along the diamond, linear on each side.
template <class T>
struct QuadPolar {
    T r = 0, phi = 0;
};

template <class T>
QuadPolar<T> to_quad_polar(const Point2<T>& p) {
    T r = quad_norm(p);
    if (r == 0) throw Error(Errc::invalid_argument, "origin has no angle");
    int m;
    T f;
    if (p.x > 0 && p.y <= 0) {
        m = 0;
        f = -p.y / r;
    } else if (p.x <= 0 && p.y < 0) {
        m = 1;
        f = -p.x / r;
    } else if (p.x < 0 && p.y >= 0) {
        m = 2;
        f = p.y / r;
    } else {
        m = 3;
        f = p.x / r;
    }
    return {r, (m + f) * two_pi<T>() / 4};
}

template <class T>
T wrap_angle(const T& phi) {
    using std::floor;
    T tp = two_pi<T>();
    T w = phi - tp * floor(phi / tp);
    return w >= tp ? T(0) : w;
}

template <class T>
Point2<T> from_quad_polar(const QuadPolar<T>& q) {
    using std::floor;
    T s = wrap_angle(q.phi) / (two_pi<T>() / 4);
    int m = int(floor(s));
    if (m > 3) m = 3;
    T f = s - m;
    int n = (m + 1) % 4;
    return {q.r * ((1 - f) * kAxisX[m] + f * kAxisX[n]), q.r * ((1 - f) * kAxisY[m] + f * kAxisY[n])};
}

template <class T>
Point2<T> quad_rotate(const Point2<T>& z, const T& t) {
    QuadPolar<T> q = to_quad_polar(z);
    q.phi += t;
    return from_quad_polar(q);
}

// Axis-preserving map, linear on each closed quadrant; scales[m] is the image length of half-axis m.
struct QuadrantLinearMap {
    std::array<double, 4> scales{1, 1, 1, 1};

    template <class T>
    Point2<T> apply(const Point2<T>& p) const {
        return {p.x * T(p.x >= 0 ? scales[0] : scales[2]), p.y * T(p.y <= 0 ? scales[1] : scales[3])};
    }
    template <class T>
    Point2<T> apply_inverse(const Point2<T>& p) const {
        return {p.x / T(p.x >= 0 ? scales[0] : scales[2]), p.y / T(p.y <= 0 ? scales[1] : scales[3])};
    }
    QuadrantLinearMap inverse() const { return {{1 / scales[0], 1 / scales[1], 1 / scales[2], 1 / scales[3]}}; }
    // this after other
    QuadrantLinearMap after(const QuadrantLinearMap& o) const {
        return {{scales[0] * o.scales[0], scales[1] * o.scales[1], scales[2] * o.scales[2], scales[3] * o.scales[3]}};
    }
    // |A z| / |z| for z at quadrilateral angle phi.
    template <class T>
    T ratio_at(const T& phi) const {
        using std::floor;
        T s = wrap_angle(phi) / (two_pi<T>() / 4);
        int m = std::min(3, int(floor(s)));
        T f = s - m;
        return (1 - f) * T(scales[m]) + f * T(scales[(m + 1) % 4]);
    }
    // Angle of the image of the ray at phi.
    template <class T>
    T image_angle(const T& phi) const {
        using std::floor;
        T s = wrap_angle(phi) / (two_pi<T>() / 4);
        int m = std::min(3, int(floor(s)));
        T f = s - m;
        T a = (1 - f) * T(scales[m]), b = f * T(scales[(m + 1) % 4]);
        return (m + b / (a + b)) * two_pi<T>() / 4;
    }
    double min_scale() const { return *std::min_element(scales.begin(), scales.end()); }
    double max_scale() const { return *std::max_element(scales.begin(), scales.end()); }
};

struct JitterModel {
    QuadrantLinearMap A0, A1;
    // Optional second stage; F becomes (A3 R A2^-1) after (A1 R A0^-1).
    std::optional<QuadrantLinearMap> A2, A3;
    double lambda = 0.8, mu = 3.5;  // admissible contraction range
    int N0 = 1;
    // Phase correction B is identically zero.

    int stage_count() const { return A2 ? 2 : 1; }
    // Map between consecutive rotations of stage s: next stage's entry inverse after this stage's exit.
    QuadrantLinearMap contraction(int s = 0) const {
        if (stage_count() == 1) return A0.inverse().after(A1);
        return s == 0 ? A2->inverse().after(A1) : A0.inverse().after(*A3);
    }
};

JitterModel model_from_json(const std::string& text);
std::string model_to_json(const JitterModel& m);

// Two-stage model of one full return built from the corner quadrangles: stage 1 enters through V0R0 and
// leaves through V1R0, stage 2 enters through V1R1 and leaves through V2R1. Conjugated by the V0R0 map, so
// A0 and A2 are identities and A1, A3 carry the two ratio sets.
JitterModel game_jitter_model(double beta);

// Range of radial ratios of one full iterate: products of the per-stage contraction extremes.
std::array<double, 2> radial_ratio_range(const JitterModel& m);
// Verifies that the radial ratios cover (lambda, mu).
void check_contraction_range(const JitterModel& m);

template <class T>
Point2<T> jitter_stage(const QuadrantLinearMap& enter, const QuadrantLinearMap& leave, const Point2<T>& z) {
    Point2<T> w = enter.apply_inverse(z);
    T r = quad_norm(w);
    if (r == 0) throw Error(Errc::invalid_argument, "jitter map is singular at the origin");
    return leave.apply(quad_rotate(w, two_pi<T>() / r));
}

template <class T>
Point2<T> jitter_map(const JitterModel& m, const Point2<T>& z) {
    Point2<T> y = jitter_stage(m.A0, m.A1, z);
    if (m.A2 && m.A3) y = jitter_stage(*m.A2, *m.A3, y);
    return y;
}

// k with 1/(k+1) <= r < 1/k; ties go to the smaller k.
template <class T>
long annulus_index(const T& r) {
    using std::ceil;
    if (!(r > 0)) throw Error(Errc::invalid_argument, "orbit reached the origin");
    T k = ceil(1 / r) - 1;
    return static_cast<long>(k);
}

template <class T>
std::vector<long> annulus_itinerary(const JitterModel& m, Point2<T> z, int steps) {
    std::vector<long> out;
    for (int i = 0; i < steps; ++i) {
        out.push_back(annulus_index(quad_norm(z)));
        if (i + 1 < steps) z = jitter_map(m, z);
    }
    return out;
}

struct FixedPoint {
    long k = 0;
    bool found = false;
    Point2<double> point;
    double residual = 0;
    std::string note;
};
std::vector<FixedPoint> find_fixed_points(const JitterModel& m, long k_lo, long k_hi);

struct PeriodicOrbit {
    std::vector<Point2<Big>> points;  // x_0 .. x_{n-1}
    std::vector<long> annuli;         // annulus index of each point
    std::vector<double> ratios;       // radial ratio of each rotation step, pre-rotation radii
    std::vector<long> windings;       // full turns of each rotation step
    double residual = 0;              // |F^n(x) - x|, sum norm
    double radius_ratio_error = 0;    // pre-rotation radii of the simulated orbit vs products of ratios
    int iterations = 0;
};
// a_seed: radial ratios per iterate, product 1; annulus targets k_{i+1} = k_i / a_{i+1} from k_0 = k_base.
PeriodicOrbit find_periodic_orbit(const JitterModel& m, const std::vector<double>& a_seed, long k_base);

struct Realization {
    Point2<Big> z;
    std::vector<long> requested, realized;
    std::vector<double> delta;
    std::vector<double> radii;
    bool verified = false;
    int iterations = 0;
};
Realization realize_itinerary(const JitterModel& m, const std::vector<long>& ks);

double sensitivity_estimate(const JitterModel& m, const Point2<double>& z, double delta, int steps);

struct DivergenceReport {
    int starts = 0, diverged = 0;
    std::vector<int> first_disagreement;  // -1 when never
};
// Pairs of starts delta apart in Ann_k; counts pairs whose annulus itineraries differ within steps.
DivergenceReport itinerary_divergence(const JitterModel& m, long k, int starts, std::uint64_t seed, int steps = 50,
                                      double delta = 1e-12);

// Smallest k in [1, k_max] from which `span` consecutive annuli all carry fixed points.
int scan_N0(const JitterModel& m, int span = 10, int k_max = 200);

std::string big_to_string(const Big& v);

}  // namespace sf
