#include <algorithm>
#include <cmath>

#include "sf/analysis.hpp"

namespace sf {

const char* to_string(OrbitId o) {
    switch (o) {
        case OrbitId::shapley: return "shapley";
        case OrbitId::anti_shapley: return "anti_shapley";
        default: return "gamma";
    }
}

const char* to_string(Stability s) {
    switch (s) {
        case Stability::attracting: return "attracting";
        case Stability::saddle: return "saddle";
        case Stability::repelling: return "repelling";
        default: return "jitter";
    }
}

std::vector<std::pair<int, int>> cycle_of(OrbitId o) {
    if (o == OrbitId::shapley) return kShapleyCycle;
    if (o == OrbitId::anti_shapley) return kAntiShapleyCycle;
    throw Error(Errc::invalid_argument, "Gamma is not a pure cycle");
}

Stability classify_moduli(double m0, double m1) {
    if (m0 < 1 && m1 < 1) return Stability::attracting;
    if (m0 > 1 && m1 > 1) return Stability::repelling;
    return Stability::saddle;
}

namespace {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Cyc = std::vector<std::pair<int, int>>;

// Switching functional between consecutive cycle entries (0-based pairs); zero at E.
Vec6 switch_functional(const GamePair& g, std::pair<int, int> cur, std::pair<int, int> nxt) {
    Vec6 l = Vec6::Zero();
    if (nxt.first != cur.first) {
        if (nxt.second != cur.second) throw Error(Errc::invalid_argument, "both players switch at once");
        l.tail<3>() = (g.A.row(nxt.first) - g.A.row(cur.first)).transpose();
    } else {
        l.head<3>() = g.B.col(nxt.second) - g.B.col(cur.second);
    }
    return l;
}

Cyc zero_based(const Cyc& c, int rotate) {
    Cyc out;
    int n = int(c.size());
    for (int k = 0; k < n; ++k) {
        auto p = c[(k + rotate) % n];
        out.push_back({p.first - 1, p.second - 1});
    }
    return out;
}

bool realizes(const GamePair& g, const JointState& start, const Cyc& cyc) {
    try {
        JointState s = start;
        int n = int(cyc.size());
        for (int k = 0; k <= n; ++k) {
            TrajectoryLeg leg = step(g, s);
            auto want = cyc[k % n];
            if (leg.targets.iA.k != want.first || leg.targets.iB.k != want.second) return false;
            s = leg.end;
        }
        return true;
    } catch (const Error&) {
        return false;
    }
}

JointState midpoint_on_ray(const GamePair& g, const JointState& b, double t) {
    Vec6 e = g.equilibrium.stacked();
    return JointState::from_stacked(e + t * (b.stacked() - e));
}

}  // namespace

CycleLinearization cycle_linearization(const GamePair& g, const Cyc& cycle, int rotate) {
    Cyc cyc = zero_based(cycle, rotate);
    int n = int(cyc.size());
    Mat6 M = Mat6::Identity();
    for (int k = 0; k < n; ++k) {
        Vec6 l = switch_functional(g, cyc[k], cyc[(k + 1) % n]);
        Vec6 P = Vec6::Zero();
        P[cyc[k].first] = 1;
        P[3 + cyc[k].second] = 1;
        M = (Mat6::Identity() - P * l.transpose() / l.dot(P)) * M;
    }
    Vec6 llast = switch_functional(g, cyc[n - 1], cyc[0]);
    Eigen::Matrix<double, 2, 6> C;
    C.row(0) << 1, 1, 1, -1, -1, -1;
    C.row(1) = llast.transpose();
    Eigen::JacobiSVD<Eigen::Matrix<double, 2, 6>> svd(C, Eigen::ComputeFullV);
    Eigen::Matrix<double, 6, 4> N = svd.matrixV().rightCols<4>();
    Vec6 e = g.equilibrium.stacked().normalized();
    Eigen::Matrix<double, 6, 4> Ne = N - e * (e.transpose() * N);
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 4>> svd2(Ne, Eigen::ComputeFullU);
    Eigen::Matrix<double, 6, 3> Q = svd2.matrixU().leftCols<3>();
    Eigen::Matrix3d R = Q.transpose() * (Mat6::Identity() - e * e.transpose()) * M * Q;
    Eigen::EigenSolver<Eigen::Matrix3d> es(R);
    auto w = es.eigenvalues();
    auto V = es.eigenvectors();
    Vec6 E = g.equilibrium.stacked();
    for (int k = 0; k < 3; ++k) {
        if (std::abs(w[k].imag()) > 1e-12 * std::abs(w[k])) continue;
        Vec6 q = Q * V.col(k).real();
        q -= q.head<3>().sum() * E;  // representative with zero coordinate sums
        for (double sgn : {1.0, -1.0}) {
            Vec6 d = sgn * q;
            double lam = std::numeric_limits<double>::infinity();
            for (int c = 0; c < 6; ++c)
                if (d[c] < -1e-14) lam = std::min(lam, E[c] / -d[c]);
            if (!std::isfinite(lam)) continue;
            JointState bp = JointState::from_stacked((E + lam * d).cwiseMax(0.0));
            if (!realizes(g, midpoint_on_ray(g, bp, 0.5), cyc)) continue;
            CycleLinearization out;
            out.boundary_point = bp;
            int o = 0;
            for (int j = 0; j < 3; ++j)
                if (j != k) out.multipliers[o++] = w[j] / w[k].real();
            return out;
        }
    }
    throw Error(Errc::not_found, "cycle has no realizable fixed ray");
}

namespace {

struct RayChart {
    Vec6 E, dstar, v1, v2;
    Cyc cyc;
};

RayChart make_chart(const GamePair& g, const CycleLinearization& lin, const Cyc& cyc) {
    RayChart c;
    c.cyc = cyc;
    c.E = g.equilibrium.stacked();
    c.dstar = lin.boundary_point.stacked() - c.E;
    int n = int(cyc.size());
    Vec6 l = switch_functional(g, cyc[n - 1], cyc[0]);
    Eigen::Matrix<double, 3, 6> C;
    C.row(0) << 1, 1, 1, 0, 0, 0;
    C.row(1) << 0, 0, 0, 1, 1, 1;
    C.row(2) = l.transpose();
    Eigen::JacobiSVD<Eigen::Matrix<double, 3, 6>> svd(C, Eigen::ComputeFullV);
    Eigen::Matrix<double, 6, 3> N = svd.matrixV().rightCols<3>();
    Vec6 dn = c.dstar.normalized();
    Eigen::Matrix<double, 6, 3> Np = N - dn * (dn.transpose() * N);
    Eigen::JacobiSVD<Eigen::Matrix<double, 6, 3>> svd2(Np, Eigen::ComputeFullU);
    c.v1 = svd2.matrixU().col(0);
    c.v2 = svd2.matrixU().col(1);
    return c;
}

Eigen::Vector2d ray_return(const GamePair& g, const RayChart& c, double x, double y) {
    Vec6 d = c.dstar + x * c.v1 + y * c.v2;
    JointState s = JointState::from_stacked(c.E + 0.5 * d);
    int n = int(c.cyc.size());
    for (int k = 0; k < n; ++k) {
        TrajectoryLeg leg = step(g, s);
        if (leg.targets.iA.k != c.cyc[k].first || leg.targets.iB.k != c.cyc[k].second)
            throw Error(Errc::not_found, "perturbed start leaves the cycle");
        s = leg.end;
    }
    Vec6 dp = s.stacked() - c.E;
    double alpha = dp.dot(c.dstar) / c.dstar.dot(c.dstar);
    return {dp.dot(c.v1) / alpha, dp.dot(c.v2) / alpha};
}

Eigen::Matrix2d central_jacobian(const GamePair& g, const RayChart& c, double h) {
    Eigen::Matrix2d J;
    J.col(0) = (ray_return(g, c, h, 0) - ray_return(g, c, -h, 0)) / (2 * h);
    J.col(1) = (ray_return(g, c, 0, h) - ray_return(g, c, 0, -h)) / (2 * h);
    return J;
}

}  // namespace

StabilityReport classify_stability(const GamePair& g, OrbitId orbit) {
    StabilityReport rep;
    rep.orbit = orbit;
    if (orbit == OrbitId::gamma) {
        gamma_orbit(g);
        rep.classification = Stability::jitter;
        rep.section_point = gamma_seed(g);
        return rep;
    }
    Cyc cyc = zero_based(cycle_of(orbit), 0);
    CycleLinearization lin = cycle_linearization(g, cycle_of(orbit));
    RayChart chart = make_chart(g, lin, cyc);
    rep.section_point = lin.boundary_point;
    rep.fixed_point_residual = ray_return(g, chart, 0, 0).norm();
    const double h = 1e-6;
    Eigen::Matrix2d Jh = central_jacobian(g, chart, h);
    Eigen::Matrix2d Jh2 = central_jacobian(g, chart, h / 2);
    Eigen::Matrix2d J = (4 * Jh2 - Jh) / 3;
    rep.richardson_consistency = (Jh - Jh2).norm() / J.norm();
    Eigen::EigenSolver<Eigen::Matrix2d> es(J);
    rep.eigenvalues = {es.eigenvalues()[0], es.eigenvalues()[1]};
    rep.classification = classify_moduli(std::abs(rep.eigenvalues[0]), std::abs(rep.eigenvalues[1]));
    return rep;
}

double leading_modulus(double beta, OrbitId orbit, int rotate) {
    CycleLinearization lin = cycle_linearization(shapley_family(beta), cycle_of(orbit), rotate);
    return std::max(std::abs(lin.multipliers[0]), std::abs(lin.multipliers[1]));
}

TauEstimate estimate_tau(int rotate, double width) {
    double lo = kSigma + 0.01, hi = 0.99;
    double flo = leading_modulus(lo, OrbitId::anti_shapley, rotate) - 1;
    double fhi = leading_modulus(hi, OrbitId::anti_shapley, rotate) - 1;
    if (flo * fhi > 0) throw Error(Errc::not_found, "no stability exchange on the bracket");
    while (hi - lo > width) {
        double mid = 0.5 * (lo + hi);
        double fm = leading_modulus(mid, OrbitId::anti_shapley, rotate) - 1;
        if ((fm > 0) == (flo > 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return {0.5 * (lo + hi), lo, hi};
}

}  // namespace sf
