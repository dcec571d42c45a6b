#pragma once

#include <array>
#include <limits>
#include <optional>
#include <vector>

#include "sf/common.hpp"

namespace sf {

// Probability vector on a 2-simplex. make() clamps tiny negatives and renormalizes.
struct SimplexPoint {
    Vec3 c = Vec3::Constant(1.0 / 3.0);

    static SimplexPoint make(const Vec3& v);
    double operator[](int i) const { return c[i]; }
};

struct JointState {
    Vec3 pA = Vec3::Constant(1.0 / 3.0);
    Vec3 pB = Vec3::Constant(1.0 / 3.0);
    double time_t = 0.0;
    double time_s = 1.0;

    Vec6 stacked() const;
    static JointState from_stacked(const Vec6& p, double t = 0.0);
};

JointState sanitize(const JointState& s);

struct GamePair {
    Mat3 A;
    Mat3 B;
    std::optional<double> beta;
    JointState equilibrium;
};

GamePair shapley_family(double beta);
GamePair game_from_matrices(const Mat3& A, const Mat3& B);

struct PayoffVectors {
    Vec3 vA;
    Vec3 vB;
};
PayoffVectors payoff_vectors(const GamePair& g, const JointState& s);

// 0-based indices within tol*max(1,|max|) of the maximum.
std::vector<int> best_response_set(const Vec3& v, double tol = 1e-10);

JointState nash_equilibrium(const Mat3& A, const Mat3& B);

// Pair index: 0 -> (1,2), 1 -> (2,3), 2 -> (3,1).
inline constexpr std::array<std::array<int, 2>, 3> kPairs{{{0, 1}, {1, 2}, {2, 0}}};
int pair_index(int i, int j);

struct Landmarks {
    std::array<Vec3, 3> RA, QA, fA, RB, QB, fB;
    double sigma = kSigma;
    double tau_estimate = std::numeric_limits<double>::quiet_NaN();
};

// f-points are left NaN here; gamma_orbit fills them.
Landmarks landmarks(const GamePair& g);

// Linear functional c with c.pA = 0 on Z^B_ij (B indifferent between i and j).
Vec3 indifference_B(const GamePair& g, int i, int j);
// Linear functional c with c.pB = 0 on Z^A_ij (A indifferent between i and j).
Vec3 indifference_A(const GamePair& g, int i, int j);

// Point of the segment [P_i,P_j] on the line c.p = 0; nullopt unless it is strictly inside.
std::optional<Vec3> edge_point(const Vec3& c, int i, int j);

Vec3 vertex(int i);

}  // namespace sf
