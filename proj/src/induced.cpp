#include "sf/induced.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace sf {

JointState project_to_boundary(const JointState& s, const JointState& E) {
    Vec6 e = E.stacked();
    Vec6 d = s.stacked() - e;
    if (sum_norm(d) <= 1e-12) throw Error(Errc::precondition, "cannot project the equilibrium");
    double lam = std::numeric_limits<double>::infinity();
    int arg = -1;
    for (int k = 0; k < 6; ++k)
        if (d[k] < 0 && e[k] / -d[k] < lam) {
            lam = e[k] / -d[k];
            arg = k;
        }
    if (arg < 0) throw Error(Errc::precondition, "direction has no negative coordinate");
    Vec6 q = e + lam * d;
    q[arg] = 0.0;
    JointState r = JointState::from_stacked(q.cwiseMax(0.0), s.time_t);
    r.time_s = s.time_s;
    return r;
}

bool on_boundary(const JointState& s, double tol) {
    return std::min(s.pA.minCoeff(), s.pB.minCoeff()) <= tol;
}

JointState induced_step(const GamePair& g, const JointState& b, bool constrained) {
    TrajectoryLeg leg = constrained ? constrained_step(g, b) : step(g, b);
    return project_to_boundary(leg.end, g.equilibrium);
}

JointState gamma_seed(const GamePair& g) {
    Landmarks L = landmarks(g);
    JointState s;
    s.pA = g.equilibrium.pA;
    s.pB = L.RB[2];
    return s;
}

double cone_circuit(const GamePair& g, const JointState& seed, double t, double* collinearity) {
    Vec6 e = g.equilibrium.stacked();
    Vec6 dir = seed.stacked() - e;
    JointState s = JointState::from_stacked(e + t * dir);
    for (int n = 0; n < 6; ++n) s = constrained_step(g, s).end;
    Vec6 d = s.stacked() - e;
    double tp = d.dot(dir) / dir.dot(dir);
    if (collinearity) *collinearity = sum_norm(Vec6(d - tp * dir));
    return tp;
}

GammaOrbit gamma_orbit(const GamePair& g) {
    GammaOrbit out;
    out.landmarks = landmarks(g);
    JointState seed = gamma_seed(g);
    JointState b = seed;
    std::vector<ItineraryEntry> entries;
    double clock = 0.0;
    out.boundary_points.push_back(b);
    for (int n = 0; n < 6; ++n) {
        TrajectoryLeg leg = constrained_step(g, b);
        out.targets.push_back(leg.targets);
        entries.push_back({clock, leg.targets.iA, leg.targets.iB});
        clock += leg.duration_t;
        b = project_to_boundary(leg.end, g.equilibrium);
        out.boundary_points.push_back(b);
    }
    out.itinerary = make_itinerary(entries);
    out.closure_residual = sum_norm(Vec6(b.stacked() - seed.stacked()));
    if (out.closure_residual > 1e-9) throw Error(Errc::non_closure, "Gamma-tilde does not close");

    // Fit 1/t' = alpha/t + gamma on the seed ray.
    const std::array<double, 4> ts{0.25, 0.5, 0.75, 1.0};
    std::array<double, 4> tp{};
    Eigen::Matrix<double, 4, 2> M;
    Eigen::Vector4d rhs;
    for (int k = 0; k < 4; ++k) {
        double col = 0;
        tp[k] = cone_circuit(g, seed, ts[k], &col);
        if (col > 1e-9) throw Error(Errc::model_violation, "circuit leaves the seed ray");
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
    if (out.kappa > 1.0 && out.d > 0.0) {
        out.t_star = (out.kappa - 1.0) / out.d;
        out.has_gamma = out.t_star > 0.0 && out.t_star < 1.0;
    }
    if (out.has_gamma) {
        Vec6 e = g.equilibrium.stacked();
        JointState s = JointState::from_stacked(e + out.t_star * (seed.stacked() - e));
        out.gamma_points.push_back(s);
        for (int n = 0; n < 6; ++n) {
            TrajectoryLeg leg = constrained_step(g, s);
            s = leg.end;
            out.gamma_points.push_back(s);
            const TargetPair& tg = leg.targets;
            if (leg.reason.player == 'A') {
                int n3 = tg.iB.k;
                out.landmarks.fA[pair_index((n3 + 1) % 3, (n3 + 2) % 3)] = s.pA;
            } else {
                int m3 = tg.iA.k;
                out.landmarks.fB[pair_index((m3 + 1) % 3, (m3 + 2) % 3)] = s.pB;
            }
        }
    }
    return out;
}

int half_line(double x, double y) {
    if (std::abs(x) > std::abs(y)) return x > 0 ? 1 : 3;
    return y > 0 ? 4 : 2;
}

SectionSpec make_section(const GamePair& g, SectionKind kind) {
    Landmarks L = landmarks(g);
    const JointState& E = g.equilibrium;
    SectionSpec s;
    s.kind = kind;
    switch (kind) {
        case SectionKind::V0xB31:
        case SectionKind::TransversalAtGamma:
            s.hyper = 'A';
            s.c = indifference_B(g, 1, 2);
            s.face = 'B';
            s.face_coord = 1;
            s.origin.pA = E.pA;
            s.origin.pB = L.RB[2];
            s.axisA = L.QA[1];
            s.axisB = vertex(2);
            break;
        case SectionKind::A12xV1:
            s.hyper = 'B';
            s.c = indifference_A(g, 1, 2);
            s.face = 'A';
            s.face_coord = 1;
            s.origin.pA = L.RA[0];
            s.origin.pB = E.pB;
            s.axisA = vertex(2);
            s.axisB = L.RB[1];
            break;
        case SectionKind::V2xB12:
            s.hyper = 'A';
            s.c = indifference_B(g, 0, 2);
            s.face = 'B';
            s.face_coord = 2;
            s.origin.pA = E.pA;
            s.origin.pB = L.RB[0];
            s.axisA = L.QA[2];
            s.axisB = vertex(0);
            break;
        case SectionKind::GlobalS:
            s.pieces = {{indifference_A(g, 0, 2), 2},
                        {indifference_A(g, 1, 2), 2},
                        {indifference_A(g, 0, 1), 0},
                        {indifference_A(g, 2, 0), 0}};
            s.origin = E;
            break;
    }
    return s;
}

std::array<double, 2> chart_coords(const SectionSpec& s, const JointState& q) {
    Vec3 dA = q.pA - s.origin.pA, dB = q.pB - s.origin.pB;
    if (s.kind == SectionKind::GlobalS) return {sum_norm(dA), sum_norm(dB)};
    double x = sum_norm(dA), y = sum_norm(dB);
    if (dA.dot(s.axisA - s.origin.pA) < 0) x = -x;
    if (dB.dot(s.axisB - s.origin.pB) < 0) y = -y;
    return {x, y};
}

JointState chart_point(const GamePair&, const SectionSpec& s, double x, double y) {
    if (s.kind == SectionKind::GlobalS) throw Error(Errc::invalid_argument, "GlobalS has no linear chart");
    Vec3 wA = s.axisA - s.origin.pA, wB = s.axisB - s.origin.pB;
    JointState p;
    p.pA = s.origin.pA + x * wA / sum_norm(wA);
    p.pB = s.origin.pB + y * wB / sum_norm(wB);
    return sanitize(p);
}

namespace {

struct Crossing {
    double u;
    int piece;
    int dir;
};

void leg_crossings(const SectionSpec& sec, const JointState& s, const TargetPair& t, double u_end,
                   std::vector<Crossing>& out) {
    auto root = [&](const Vec3& c, const Vec3& x, const Vec3& target, int piece) {
        double f0 = c.dot(x), fT = c.dot(target);
        if (f0 == fT) return;
        double u = f0 / (f0 - fT);
        if (u > 1e-12 && u <= u_end) out.push_back({u, piece, fT > f0 ? 1 : -1});
    };
    if (sec.kind == SectionKind::GlobalS) {
        for (int p = 0; p < int(sec.pieces.size()); ++p)
            if (!t.iB.mixed && t.iB.k == sec.pieces[p].second) root(sec.pieces[p].first, s.pB, t.targetB, p);
    } else if (sec.hyper == 'A') {
        root(sec.c, s.pA, t.targetA, -1);
    } else {
        root(sec.c, s.pB, t.targetB, -1);
    }
    std::sort(out.begin(), out.end(), [](const Crossing& a, const Crossing& b) { return a.u < b.u; });
}

bool face_ok(const SectionSpec& sec, const JointState& q) {
    if (sec.kind == SectionKind::GlobalS) return true;
    const Vec3& p = sec.face == 'A' ? q.pA : q.pB;
    return p[sec.face_coord] <= 1e-12;
}

}  // namespace

std::vector<SectionHit> first_return(const GamePair& g, const SectionSpec& sec, const JointState& b, int count,
                                     int max_events) {
    std::vector<SectionHit> hits;
    JointState cur = on_boundary(b) ? sanitize(b) : project_to_boundary(b, g.equilibrium);
    std::vector<std::pair<Label, Label>> transit;
    int events = 0;
    std::vector<Crossing> cr;
    while (int(hits.size()) < count) {
        if (events >= max_events) throw Error(Errc::not_found, "orbit does not cross the section (on J?)");
        TargetPair t = choose_targets(g, cur);
        HitEvent h = hitting_event(g, cur, t);
        transit.push_back({t.iA, t.iB});
        cr.clear();
        leg_crossings(sec, cur, t, h.u, cr);
        for (const Crossing& c : cr) {
            if (sec.orientation != 0 && c.dir != sec.orientation) continue;
            JointState p;
            p.pA = (1 - c.u) * cur.pA + c.u * t.targetA;
            p.pB = (1 - c.u) * cur.pB + c.u * t.targetB;
            JointState q = project_to_boundary(p, g.equilibrium);
            if (!face_ok(sec, q)) continue;
            SectionHit hit;
            hit.point = q;
            auto xy = chart_coords(sec, q);
            hit.x = xy[0];
            hit.y = xy[1];
            hit.piece = c.piece;
            hit.direction = c.dir;
            hit.events_between = int(transit.size()) - 1;
            hit.slice = transit;
            for (size_t k = 1; k < transit.size(); ++k)
                if (transit[k] == transit[0]) ++hit.winding;
            hits.push_back(hit);
            transit.assign(1, {t.iA, t.iB});
            if (int(hits.size()) == count) break;
        }
        cur = project_to_boundary(advance(g, cur, t, h).end, g.equilibrium);
        ++events;
    }
    return hits;
}

namespace {

std::array<double, 2> diamond_point(double r, double phi) {
    // Clockwise from (r,0): (0,-r) sits at pi/2.
    double f = std::fmod(phi / (2 * std::numbers::pi), 1.0);
    if (f < 0) f += 1.0;
    int q = std::min(3, int(f * 4));
    double s = f * 4 - q;
    static const double cx[5] = {1, 0, -1, 0, 1}, cy[5] = {0, -1, 0, 1, 0};
    return {r * ((1 - s) * cx[q] + s * cx[q + 1]), r * ((1 - s) * cy[q] + s * cy[q + 1])};
}

bool within(const std::vector<std::pair<Label, Label>>& slice, unsigned maskA, unsigned maskB) {
    for (auto& [a, b] : slice)
        if (!((maskA >> a.k) & 1u) || !((maskB >> b.k) & 1u)) return false;
    return true;
}

}  // namespace

EntryMaps leg_entry_maps(const GamePair& g, double epsilon, int samples) {
    EntryMaps out;
    SectionSpec s0 = make_section(g, SectionKind::V0xB31);
    SectionSpec s1 = make_section(g, SectionKind::A12xV1);
    SectionSpec s2 = make_section(g, SectionKind::V2xB12);
    auto run = [&](const SectionSpec& from, const SectionSpec& to, unsigned mA, unsigned mB, std::vector<EntrySample>& dst) {
        for (int m = 0; m < samples; ++m) {
            auto xy = diamond_point(epsilon, 2 * std::numbers::pi * (m + 0.5) / samples);
            EntrySample e;
            e.x_in = xy[0];
            e.y_in = xy[1];
            try {
                auto hits = first_return(g, to, chart_point(g, from, xy[0], xy[1]), 1);
                e.x_out = hits[0].x;
                e.y_out = hits[0].y;
                e.flagged = !within(hits[0].slice, mA, mB);
            } catch (const Error&) {
                e.flagged = true;
            }
            dst.push_back(e);
        }
    };
    run(s0, s1, 0b101, 0b011, out.R0);
    run(s1, s2, 0b011, 0b011, out.R1);
    return out;
}

}  // namespace sf
