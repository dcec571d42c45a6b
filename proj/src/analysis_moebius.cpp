#include <algorithm>
#include <cmath>

#include "sf/analysis.hpp"

namespace sf {

namespace {

constexpr unsigned kSubA = 0b101;  // A mixes strategies 1 and 3
constexpr unsigned kSubB = 0b011;  // B mixes strategies 1 and 2

struct SpiralCenter {
    Vec3 TA, TB;
    Vec3 dirA;  // unit sum-norm direction along A's edge, toward strategy 3
};

SpiralCenter spiral_center(const GamePair& g) {
    auto ta = edge_point(indifference_B(g, 0, 1), 0, 2);
    auto tb = edge_point(indifference_A(g, 0, 2), 0, 1);
    if (!ta || !tb) throw Error(Errc::precondition, "two-strategy sub-game has no mixed centre");
    return {*ta, *tb, 0.5 * (vertex(2) - vertex(0))};
}

// Radii r_0, r_1, ... on the half-line pA - T_A parallel to +dirA, at A-switch events.
std::vector<double> spiral_radii(const GamePair& g, double r0, int circuits) {
    SpiralCenter c = spiral_center(g);
    StepOptions opt{kSubA, kSubB};
    JointState s;
    s.pA = c.TA + r0 * c.dirA;
    s.pB = c.TB;
    std::vector<double> radii{r0};
    int guard = 0;
    while (int(radii.size()) <= circuits) {
        if (++guard > 8 * (circuits + 1)) throw Error(Errc::model_violation, "spiral does not return");
        TrajectoryLeg leg = step(g, s, opt);
        s = leg.end;
        if (leg.reason.player != 'A') continue;
        Vec3 w = s.pA - c.TA;
        if (w.dot(c.dirA) > 0) radii.push_back(sum_norm(w));
    }
    return radii;
}

}  // namespace

SpiralCheck moebius_spiral(const GamePair& g, double r0, int circuits) {
    SpiralCheck out;
    out.radii = spiral_radii(g, r0, circuits);
    out.a = (r0 / out.radii[1] - 1.0) / r0;
    for (int n = 1; n <= circuits; ++n) {
        double pred = r0 / (1.0 + n * out.a * r0);
        out.max_rel_error = std::max(out.max_rel_error, std::abs(out.radii[n] - pred) / pred);
    }
    // Least-squares slope of 1/r_{n+1} against 1/r_n.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = circuits;
    for (int n = 0; n < m; ++n) {
        double x = 1.0 / out.radii[n], y = 1.0 / out.radii[n + 1];
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    out.theta = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    return out;
}

double spiral_coefficient(const GamePair& g, double r0) {
    auto r = spiral_radii(g, r0, 1);
    return (r0 / r[1] - 1.0) / r0;
}

MoebiusCone moebius_cone_map(const GamePair& g, int iterates) {
    GammaOrbit orb = gamma_orbit(g);
    MoebiusCone out;
    out.kappa = orb.kappa;
    out.d = orb.d;
    out.fit_residual = orb.fit_residual;
    out.derivative_at_E = orb.kappa;
    out.E_attracting = orb.kappa < 1.0;
    out.has_fixed_point = orb.has_gamma;
    JointState seed = gamma_seed(g);
    if (orb.has_gamma) {
        out.t_star = orb.t_star;
        out.fixed_point_residual = std::abs(cone_circuit(g, seed, orb.t_star) - orb.t_star);
    }
    // Below this the ray coordinate is a difference of nearly equal states and loses relative precision.
    constexpr double kRayFloor = 1e-6;
    double t_direct = 0.5, t_map = 0.5;
    for (int n = 0; n < iterates && t_direct > kRayFloor; ++n) {
        t_direct = cone_circuit(g, seed, t_direct);
        t_map = out.kappa * t_map / (1.0 + out.d * t_map);
        out.iterate_max_rel_error = std::max(out.iterate_max_rel_error, std::abs(t_map - t_direct) / t_direct);
    }
    return out;
}

namespace {

struct WindingFrame {
    Vec6 T, L;
    Vec3 dirA;
};

WindingFrame winding_frame(const GamePair& g) {
    Landmarks lm = landmarks(g);
    JointState T{lm.RA[0], lm.QB[2]}, X{g.equilibrium.pA, lm.RB[2]};
    return {T.stacked(), X.stacked() - T.stacked(), 0.5 * (vertex(2) - vertex(0))};
}

}  // namespace

int measure_winding(const GamePair& g, double r, double s0, double s1, bool* third_strategy) {
    WindingFrame f = winding_frame(g);
    Vec6 z = f.T + s0 * f.L;
    z.head<3>() += r * f.dirA;
    JointState s = JointState::from_stacked(z);
    double along = s0;
    int count = 0;
    bool third = false;
    for (int guard = 0; guard < 50000000; ++guard) {
        TrajectoryLeg leg = step(g, s);
        if (leg.targets.iA.k == 1 || leg.targets.iB.k == 2) {
            third = true;
            break;
        }
        along *= 1.0 - leg.duration_u;
        s = leg.end;
        if (along < s1) break;
        if (leg.reason.player != 'A') continue;
        Vec3 w = s.pA - (f.T.head<3>() + along * f.L.head<3>());
        if (w.dot(f.dirA) > 0) ++count;
    }
    if (third_strategy) *third_strategy = third;
    return count;
}

WindingCheck verify_winding(const GamePair& g, const std::vector<double>& radii,
                            const std::array<double, 2>& fit_radii, double s0, double s1) {
    WindingCheck out;
    out.a = spiral_coefficient(g, 1e-3);
    out.c0 = s1 / s0;
    out.radii = radii;
    bool third = false, any_third = false;
    int n0 = measure_winding(g, fit_radii[0], s0, s1, &third);
    any_third |= third;
    int n1 = measure_winding(g, fit_radii[1], s0, s1, &third);
    any_third |= third;
    out.K_fit = (n1 - n0) / (1.0 / fit_radii[1] - 1.0 / fit_radii[0]);
    out.B0_fit = n0 - out.K_fit / fit_radii[0];
    std::vector<std::pair<double, int>> seen{{fit_radii[0], n0}, {fit_radii[1], n1}};
    out.within2 = true;
    for (double r : radii) {
        int m = measure_winding(g, r, s0, s1, &third);
        any_third |= third;
        out.measured.push_back(m);
        out.predicted.push_back(int(std::lround(out.K_fit / r + out.B0_fit)));
        int th = int(std::floor((1.0 - out.c0) / (out.a * out.c0 * r)));
        out.theory.push_back(th);
        if (r <= 1e-2 && std::abs(m - th) > 2) out.within2 = false;
        seen.push_back({r, m});
    }
    std::sort(seen.begin(), seen.end(), [](auto& x, auto& y) { return x.first > y.first; });
    for (size_t k = 1; k < seen.size(); ++k)
        if (seen[k].second < seen[k - 1].second - 1)
            throw Error(Errc::model_violation, "winding is not monotone in 1/r");
    out.third_strategy = any_third;
    if (any_third) out.within2 = false;
    return out;
}

namespace {

double lifted_circuit(const GamePair& g, const Vec6& dir, double t, int n, double* off_ray) {
    Vec6 e = g.equilibrium.stacked();
    JointState s = JointState::from_stacked(e + t * dir);
    for (int k = 0; k < n; ++k) s = constrained_step(g, s).end;
    Vec6 d = s.stacked() - e;
    double tp = d.dot(dir) / dir.dot(dir);
    if (off_ray) *off_ray = sum_norm(Vec6(d - tp * dir));
    return tp;
}

}  // namespace

ConeLift cone_lift(const GamePair& g, const JointState& x, int n) {
    ConeLift out;
    Vec6 e = g.equilibrium.stacked();
    Vec6 dir = x.stacked() - e;
    const double ts[4] = {0.25, 0.5, 0.75, 1.0};
    Eigen::Matrix<double, 4, 2> M;
    Eigen::Vector4d rhs;
    double tp[4];
    for (int k = 0; k < 4; ++k) {
        double off = 0;
        tp[k] = lifted_circuit(g, dir, ts[k], n, &off);
        if (off > 1e-9) throw Error(Errc::model_violation, "lifted orbit leaves the cone line");
        M(k, 0) = 1.0 / ts[k];
        M(k, 1) = 1.0;
        rhs[k] = 1.0 / tp[k];
    }
    Eigen::Vector2d ab = M.colPivHouseholderQr().solve(rhs);
    out.kappa = 1.0 / ab[0];
    out.d = ab[1] / ab[0];
    for (int k = 0; k < 4; ++k) {
        double fit = out.kappa * ts[k] / (1.0 + out.d * ts[k]);
        out.fit_residual = std::max(out.fit_residual, std::abs(fit - tp[k]) / tp[k]);
    }
    if (out.kappa < 1.0) {
        SimLimits lim;
        lim.max_events = 200000;
        Trajectory tr = simulate_constrained(g, JointState::from_stacked(e + 0.5 * dir), lim);
        out.reaches_E = tr.terminated_at_E;
        for (const auto& leg : tr.legs) out.time_to_E += leg.duration_t;
    } else if (out.d > 0) {
        out.t_star = (out.kappa - 1.0) / out.d;
        if (out.t_star > 0 && out.t_star < 1) {
            out.periodic = true;
            Vec6 start = e + out.t_star * dir;
            JointState s = JointState::from_stacked(start);
            for (int k = 0; k < n; ++k) s = constrained_step(g, s).end;
            out.closure = sum_norm(Vec6(s.stacked() - start));
        }
    }
    return out;
}

}  // namespace sf
