#include "sf/flow.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace sf {

namespace {

constexpr double kTieTol = 1e-10;
constexpr double kSlopeTol = 1e-13;

double tie_slack(const Vec3& v) { return kTieTol * std::max(1.0, std::abs(v.maxCoeff())); }

bool allowed(unsigned mask, int k) { return (mask >> k) & 1u; }

// Is strategy i strictly best on the outgoing side, given payoff v and its rate of change d.
bool leads(const Vec3& v, const Vec3& d, int i, unsigned mask, double slack) {
    for (int k = 0; k < 3; ++k) {
        if (k == i || !allowed(mask, k)) continue;
        double gap = v[i] - v[k];
        if (gap > slack) continue;
        if (gap < -slack) return false;
        if (!(d[i] - d[k] > kSlopeTol)) return false;
    }
    return true;
}

JointState moved(const JointState& s, const Vec3& tA, const Vec3& tB, double u) {
    JointState r;
    r.pA = (1 - u) * s.pA + u * tA;
    r.pB = (1 - u) * s.pB + u * tB;
    r.time_t = s.time_t - std::log1p(-u);
    r.time_s = s.time_s / (1 - u);
    return r;
}

}  // namespace

std::string label_string(const Label& l) {
    std::string s = std::to_string(l.k + 1);
    if (l.mixed) s += "b";
    return s;
}

double distance_to_E(const GamePair& g, const JointState& s) {
    return sum_norm(Vec6(s.stacked() - g.equilibrium.stacked()));
}

TargetPair pure_targets(int i, int j) { return {{i, false}, {j, false}, vertex(i), vertex(j)}; }

TargetPair choose_targets(const GamePair& g, const JointState& s, const StepOptions& o) {
    auto [vA, vB] = payoff_vectors(g, s);
    double sa = tie_slack(vA), sb = tie_slack(vB);
    for (int i = 0; i < 3; ++i) {
        if (!allowed(o.maskA, i)) continue;
        for (int j = 0; j < 3; ++j) {
            if (!allowed(o.maskB, j)) continue;
            Vec3 dA = g.A.col(j) - vA;
            Vec3 dB = g.B.row(i).transpose() - vB;
            if (leads(vA, dA, i, o.maskA, sa) && leads(vB, dB, j, o.maskB, sb)) return pure_targets(i, j);
        }
    }
    // Degenerate slopes: probe just past the state along each candidate leg.
    for (int i = 0; i < 3; ++i) {
        if (!allowed(o.maskA, i)) continue;
        for (int j = 0; j < 3; ++j) {
            if (!allowed(o.maskB, j)) continue;
            JointState q = moved(s, vertex(i), vertex(j), 1e-10);
            auto [wA, wB] = payoff_vectors(g, q);
            bool ok = true;
            for (int k = 0; k < 3 && ok; ++k) {
                if (k != i && allowed(o.maskA, k) && !(wA[i] > wA[k])) ok = false;
                if (k != j && allowed(o.maskB, k) && !(wB[j] > wB[k])) ok = false;
            }
            if (ok) return pure_targets(i, j);
        }
    }
    throw Error(Errc::integration, "no consistent best-response pair");
}

HitEvent hitting_event(const GamePair& g, const JointState& s, const TargetPair& t, const StepOptions& o) {
    auto [vA, vB] = payoff_vectors(g, s);
    Vec3 dA = g.A * t.targetB - vA;
    Vec3 dB = (t.targetA.transpose() * g.B).transpose() - vB;
    HitEvent h;
    h.u = std::numeric_limits<double>::infinity();
    auto scan = [&](const Vec3& v, const Vec3& d, const Label& lab, unsigned mask, char who) {
        if (lab.mixed) {
            // Only the excluded strategy can join a sliding mix.
            int m = lab.k;
            int i = (m + 1) % 3;
            double g0 = v[i] - v[m];
            double g1 = d[i] - d[m];
            if (g1 < 0 && g0 > -tie_slack(v)) {
                double u = std::max(0.0, g0) / -g1;
                if (u < h.u) h = {u, {who, m}};
            }
            return;
        }
        int i = lab.k;
        for (int k = 0; k < 3; ++k) {
            if (k == i || !allowed(mask, k)) continue;
            double g0 = v[i] - v[k];
            double g1 = d[i] - d[k];
            if (g1 < 0) {
                double u = std::max(0.0, g0) / -g1;
                if (u < h.u) h = {u, {who, k}};
            }
        }
    };
    scan(vA, dA, t.iA, o.maskA, 'A');
    scan(vB, dB, t.iB, o.maskB, 'B');
    if (!(h.u <= 1.0)) throw Error(Errc::integration, "no switching event before the targets are reached");
    if (h.u <= 0.0) throw Error(Errc::integration, "zero-length leg");
    return h;
}

TrajectoryLeg advance(const GamePair&, const JointState& s, const TargetPair& t, const HitEvent& h) {
    if (h.u >= 1.0) throw Error(Errc::integration, "vertex reached");
    TrajectoryLeg leg;
    leg.start = s;
    leg.targets = t;
    leg.duration_u = h.u;
    leg.duration_t = -std::log1p(-h.u);
    leg.reason = h.reason;
    leg.end = sanitize(moved(s, t.targetA, t.targetB, h.u));
    return leg;
}

TrajectoryLeg step(const GamePair& g, const JointState& s, const StepOptions& o) {
    if (distance_to_E(g, s) <= 1e-10) throw Error(Errc::absorbed, "absorbed at equilibrium");
    TargetPair t = choose_targets(g, s, o);
    return advance(g, s, t, hitting_event(g, s, t, o));
}

namespace {

template <class StepFn>
Trajectory run(const GamePair& g, const JointState& init, const SimLimits& lim, StepFn next) {
    Trajectory tr;
    JointState s = init;
    if (distance_to_E(g, s) <= std::max(lim.stop_radius_at_E, 1e-10)) {
        tr.terminated_at_E = true;
        return tr;
    }
    for (int n = 0; n < lim.max_events; ++n) {
        TrajectoryLeg leg = next(s);
        tr.legs.push_back(leg);
        s = leg.end;
        if (distance_to_E(g, s) <= std::max(lim.stop_radius_at_E, 1e-10)) {
            tr.terminated_at_E = true;
            break;
        }
        if (s.time_t >= lim.max_time_t) break;
    }
    return tr;
}

}  // namespace

Trajectory simulate(const GamePair& g, const JointState& init, const SimLimits& lim, const StepOptions& o) {
    return run(g, sanitize(init), lim, [&](const JointState& s) { return step(g, s, o); });
}

TargetPair constrained_target(const GamePair& g, const JointState& s) {
    auto [vA, vB] = payoff_vectors(g, s);
    double sa = tie_slack(vA), sb = tie_slack(vB);
    if (distance_to_E(g, s) <= 1e-10) throw Error(Errc::absorbed, "absorbed at equilibrium");
    bool on_J = false;
    for (int pa = 0; pa < 3; ++pa) {
        auto [i, j] = kPairs[pa];
        if (std::abs(vA[i] - vA[j]) > sa) continue;
        int m = 3 - i - j;
        if (vA[m] > vA[i] + sa) continue;
        for (int pb = 0; pb < 3; ++pb) {
            auto [k, l] = kPairs[pb];
            if (std::abs(vB[k] - vB[l]) > sb) continue;
            int n = 3 - k - l;
            if (vB[n] > vB[k] + sb) continue;
            on_J = true;
            auto TA = edge_point(indifference_B(g, k, l), i, j);
            auto TB = edge_point(indifference_A(g, i, j), k, l);
            if (!TA || !TB) continue;
            Vec3 dA = g.A * *TB - vA;
            Vec3 dB = (TA->transpose() * g.B).transpose() - vB;
            bool okA = vA[i] - vA[m] > sa || (dA[i] - dA[m] > kSlopeTol);
            bool okB = vB[k] - vB[n] > sb || (dB[k] - dB[n] > kSlopeTol);
            if (okA && okB) return {{m, true}, {n, true}, *TA, *TB};
        }
    }
    if (!on_J) throw Error(Errc::precondition, "state is not on a double-indifference plane");
    throw Error(Errc::integration, "no sliding mixed pair at this point of J");
}

TrajectoryLeg constrained_step(const GamePair& g, const JointState& s) {
    TargetPair t = constrained_target(g, s);
    return advance(g, s, t, hitting_event(g, s, t));
}

Trajectory simulate_constrained(const GamePair& g, const JointState& init, const SimLimits& lim) {
    return run(g, init, lim, [&](const JointState& s) { return constrained_step(g, s); });
}

std::string trajectory_csv(const Trajectory& tr) {
    std::ostringstream os;
    os.precision(17);
    os << "t,u,pA1,pA2,pA3,pB1,pB2,pB3,iA,iB\n";
    auto row = [&](const JointState& s, double u, const std::string& a, const std::string& b) {
        os << s.time_t << ',' << u;
        for (int k = 0; k < 3; ++k) os << ',' << s.pA[k];
        for (int k = 0; k < 3; ++k) os << ',' << s.pB[k];
        os << ',' << a << ',' << b << '\n';
    };
    for (const auto& leg : tr.legs)
        row(leg.start, leg.duration_u, label_string(leg.targets.iA), label_string(leg.targets.iB));
    if (!tr.legs.empty()) row(tr.legs.back().end, 0.0, "", "");
    return os.str();
}

}  // namespace sf
