#include "sf/game.hpp"

#include <algorithm>
#include <cmath>

namespace sf {

namespace {
constexpr double kNegTol = 1e-12;
}

SimplexPoint SimplexPoint::make(const Vec3& v) {
    Vec3 w = v;
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(w[i])) throw Error(Errc::domain, "non-finite simplex coordinate");
        if (w[i] < -kNegTol) throw Error(Errc::domain, "negative simplex coordinate");
        if (w[i] < 0) w[i] = 0;
    }
    double s = w.sum();
    if (std::abs(s - 1.0) > 1e-9) throw Error(Errc::domain, "simplex coordinates do not sum to 1");
    return SimplexPoint{w / s};
}

Vec6 JointState::stacked() const {
    Vec6 p;
    p << pA, pB;
    return p;
}

JointState JointState::from_stacked(const Vec6& p, double t) {
    JointState s;
    s.pA = p.head<3>();
    s.pB = p.tail<3>();
    s.time_t = t;
    s.time_s = std::exp(t);
    return s;
}

JointState sanitize(const JointState& s) {
    JointState r = s;
    r.pA = SimplexPoint::make(s.pA).c;
    r.pB = SimplexPoint::make(s.pB).c;
    return r;
}

Vec3 vertex(int i) { return Vec3::Unit(i); }

int pair_index(int i, int j) {
    for (int k = 0; k < 3; ++k) {
        auto [a, b] = kPairs[k];
        if ((a == i && b == j) || (a == j && b == i)) return k;
    }
    throw Error(Errc::invalid_argument, "not a strategy pair");
}

GamePair shapley_family(double beta) {
    if (!(beta > 0.0 && beta < 1.0)) throw Error(Errc::domain, "beta must lie in (0,1)");
    GamePair g;
    g.A << 1, 0, beta, beta, 1, 0, 0, beta, 1;
    g.B << -beta, 1, 0, 0, -beta, 1, 1, 0, -beta;
    g.beta = beta;
    g.equilibrium = JointState{};
    return g;
}

JointState nash_equilibrium(const Mat3& A, const Mat3& B) {
    Mat3 MA, MB;
    MA.row(0) = A.row(0) - A.row(1);
    MA.row(1) = A.row(1) - A.row(2);
    MA.row(2) = Eigen::RowVector3d::Ones();
    MB.row(0) = (B.col(0) - B.col(1)).transpose();
    MB.row(1) = (B.col(1) - B.col(2)).transpose();
    MB.row(2) = Eigen::RowVector3d::Ones();
    Vec3 rhs(0, 0, 1);
    auto solve = [&](const Mat3& M) {
        Eigen::FullPivLU<Mat3> lu(M);
        if (lu.rank() < 3) throw Error(Errc::no_equilibrium, "no interior equilibrium: singular system");
        Vec3 x = lu.solve(rhs);
        if ((x.array() <= 1e-12).any()) throw Error(Errc::no_equilibrium, "no interior equilibrium");
        return x;
    };
    JointState e;
    e.pB = solve(MA);
    e.pA = solve(MB);
    return e;
}

GamePair game_from_matrices(const Mat3& A, const Mat3& B) {
    if (!A.allFinite() || !B.allFinite()) throw Error(Errc::invalid_argument, "non-finite payoff entry");
    GamePair g;
    g.A = A;
    g.B = B;
    g.equilibrium = nash_equilibrium(A, B);
    return g;
}

PayoffVectors payoff_vectors(const GamePair& g, const JointState& s) {
    return {g.A * s.pB, (s.pA.transpose() * g.B).transpose()};
}

std::vector<int> best_response_set(const Vec3& v, double tol) {
    double m = v.maxCoeff();
    double slack = tol * std::max(1.0, std::abs(m));
    std::vector<int> out;
    for (int i = 0; i < 3; ++i)
        if (v[i] >= m - slack) out.push_back(i);
    return out;
}

Vec3 indifference_B(const GamePair& g, int i, int j) { return g.B.col(i) - g.B.col(j); }
Vec3 indifference_A(const GamePair& g, int i, int j) { return (g.A.row(i) - g.A.row(j)).transpose(); }

std::optional<Vec3> edge_point(const Vec3& c, int i, int j) {
    double den = c[i] - c[j];
    if (std::abs(den) < 1e-300) return std::nullopt;
    double s = -c[j] / den;  // weight on P_i
    if (!(s > 0.0 && s < 1.0)) return std::nullopt;
    Vec3 p = Vec3::Zero();
    p[i] = s;
    p[j] = 1.0 - s;
    return p;
}

namespace {

// Boundary crossings of the line c.p = 0, keyed by the vanishing coordinate.
std::array<std::optional<Vec3>, 3> side_hits(const Vec3& c) {
    std::array<std::optional<Vec3>, 3> out;
    for (int k = 0; k < 3; ++k) {
        int a = (k + 1) % 3, b = (k + 2) % 3;
        double den = c[a] - c[b];
        if (std::abs(den) < 1e-300) continue;
        double s = -c[b] / den;
        if (s < -1e-12 || s > 1 + 1e-12) continue;
        s = std::clamp(s, 0.0, 1.0);
        Vec3 p = Vec3::Zero();
        p[a] = s;
        p[b] = 1.0 - s;
        out[k] = p;
    }
    return out;
}

std::pair<Vec3, Vec3> r_and_q(const Vec3& c, int r_side, const Vec3& center) {
    if (std::abs(c.dot(center)) > 1e-9 * std::max(1.0, c.cwiseAbs().maxCoeff()))
        throw Error(Errc::degenerate, "indifference line misses the equilibrium");
    auto hits = side_hits(c);
    if (!hits[r_side]) throw Error(Errc::degenerate, "indifference line misses its labelled side");
    Vec3 R = *hits[r_side];
    std::optional<Vec3> Q;
    double best = -1;
    for (int k = 0; k < 3; ++k) {
        if (k == r_side || !hits[k]) continue;
        double d = sum_norm(Vec3(*hits[k] - R));
        if (d > best) {
            best = d;
            Q = hits[k];
        }
    }
    if (!Q || best < 1e-9) throw Error(Errc::degenerate, "indifference line does not cross the interior");
    return {R, *Q};
}

}  // namespace

Landmarks landmarks(const GamePair& g) {
    Landmarks L;
    Vec3 nan = Vec3::Constant(std::numeric_limits<double>::quiet_NaN());
    for (int p = 0; p < 3; ++p) {
        auto [i, j] = kPairs[p];
        int third = 3 - i - j;
        auto [ra, qa] = r_and_q(indifference_B(g, i, j), j, g.equilibrium.pA);
        auto [rb, qb] = r_and_q(indifference_A(g, i, j), third, g.equilibrium.pB);
        L.RA[p] = ra;
        L.QA[p] = qa;
        L.RB[p] = rb;
        L.QB[p] = qb;
        L.fA[p] = nan;
        L.fB[p] = nan;
    }
    return L;
}

}  // namespace sf
