#include <algorithm>
#include <cmath>

#include "sf/analysis.hpp"

namespace sf {

Table4 corner_formulas(double b, double e) {
    double b2 = b * b, b3 = b2 * b, b4 = b3 * b;
    bool low = b < 0.5;
    double D = 1 + 3 * b + 3 * b2 + 2 * b3;
    Table4 t;
    t[0] = {2.0 / 3 * (2 + b) / (1 + b + b2), 2 / ((2 - b) * (1 + b)), 2.0 / 3 * (2 + b) / (b * (1 + b + b2)),
            2 / (2 - b)};
    t[1] = {2 * (2 - b) / ((1 + b) * (2 + b)),
            low ? 2.0 / 3 * (4 - 4 * b + b2) / (1 + b3 + b + b4) : 2.0 / 3 * (2 - b) / (1 + b3),
            2 * (2 - b) / (b * (1 + b) * (2 + b)),
            low ? 2.0 / 3 * (4 - 4 * b + b2) / (1 + b3) : 2.0 / 3 * (2 - b) / (1 - b + b2)};
    t[2] = {2 / (2 + b), low ? 2.0 / 3 * (2 - 3 * b + b2) / (1 + b3) : 2.0 / 3 * (1 - b) / (1 - b + b2),
            2 * (1 - b) / (2 + b),
            low ? 2.0 / 3 * (2 - 3 * b + b2) / (b * (1 - b + b2)) : 2.0 / 3 * (1 - b2) / (b * (1 - b + b2))};
    t[3] = {2.0 / 3 * (4 - 3 * b2 - b3) / D, 2 * (2 - b - b2) / ((1 + 2 * b) * (2 - b) * b),
            2.0 / 3 * (11 + 21 * b + 15 * b2 + 7 * b3) / (D * (2 + b)),
            2 * (2 - b - b2) / ((1 + 2 * b) * (1 + b) * (2 - b))};
    for (auto& row : t)
        for (double& v : row) v *= e;
    return t;
}

double derived_v2r1_corner3(double b, double e) {
    return 2.0 / 3 * (2 + b) * (2 + b) / ((1 + 2 * b) * (1 + b + b * b)) * e;
}

namespace {

// Cone-axis corners of one stage: lines from the cone-target through the four event points, cut by a section.
void stage_corners(const GamePair& g, const JointState& seed, const JointState& apex, const SectionSpec& sec,
                   std::array<double, 4>& value, std::array<bool, 4>& flag) {
    value.fill(std::numeric_limits<double>::quiet_NaN());
    flag.fill(true);
    std::array<int, 4> seen{};
    JointState s = seed;
    Vec6 T = apex.stacked();
    int off = sec.hyper == 'A' ? 0 : 3;
    for (int k = 0; k < 4; ++k) {
        s = step(g, s).end;
        Vec6 X = s.stacked();
        double den = sec.c.dot(X.segment<3>(off) - T.segment<3>(off));
        double lam = -sec.c.dot(T.segment<3>(off)) / den;
        JointState Y = JointState::from_stacked(T + lam * (X - T));
        JointState q = project_to_boundary(Y, g.equilibrium);
        auto xy = chart_coords(sec, q);
        int m = half_line(xy[0], xy[1]) - 1;
        const Vec3& face = sec.face == 'A' ? q.pA : q.pB;
        ++seen[m];
        value[m] = std::abs(xy[0]) + std::abs(xy[1]);
        flag[m] = face[sec.face_coord] > 1e-12;
    }
    for (int m = 0; m < 4; ++m)
        if (seen[m] != 1) flag[m] = true;
}

}  // namespace

CornerTable verify_corner_tables(double beta, double epsilon) {
    if (!(beta > 0 && beta < 1) || beta == 0.5) throw Error(Errc::domain, "beta must lie in (0,1) minus 1/2");
    if (!(epsilon > 0 && epsilon <= 1e-3)) throw Error(Errc::domain, "epsilon must lie in (0,1e-3]");
    GamePair g = shapley_family(beta);
    Landmarks L = landmarks(g);
    const double b = beta, e = epsilon;
    CornerTable ct;
    ct.beta = beta;
    ct.epsilon = epsilon;
    ct.predicted = corner_formulas(beta, epsilon);
    ct.derived_v2r1_3 = derived_v2r1_corner3(beta, epsilon);

    JointState seed0;
    seed0.pB = Vec3(1 - b - e, 0, 1 + e) / (2 - b);
    JointState apex0;
    apex0.pA = L.RA[0];
    apex0.pB = L.QB[2];
    JointState seed1;
    seed1.pA = Vec3(1 - e, 0, 1 + b + e) / (2 + b);
    JointState apex1;
    apex1.pA = L.QA[0];
    apex1.pB = L.RB[0];

    stage_corners(g, seed0, apex0, make_section(g, SectionKind::V0xB31), ct.measured[0], ct.flagged[0]);
    stage_corners(g, seed0, apex0, make_section(g, SectionKind::A12xV1), ct.measured[1], ct.flagged[1]);
    stage_corners(g, seed1, apex1, make_section(g, SectionKind::A12xV1), ct.measured[2], ct.flagged[2]);
    stage_corners(g, seed1, apex1, make_section(g, SectionKind::V2xB12), ct.measured[3], ct.flagged[3]);
    for (int t = 0; t < 4; ++t)
        for (int m = 0; m < 4; ++m)
            ct.rel_error[t][m] = std::abs(ct.measured[t][m] - ct.predicted[t][m]) / ct.predicted[t][m];
    return ct;
}

RatioTables ratio_tables(double b) {
    if (!(b > 0 && b < 1)) throw Error(Errc::domain, "beta must lie in (0,1)");
    RatioTables r;
    r.beta = b;
    double b2 = b * b, b3 = b2 * b;
    r.set1 = {(2 - b) / (b + 1), (2 - b) / (1 - b2), (2 - b) / ((b + 1) * b * (1 - b)), (2 - b) * b / (1 - b2)};
    double q = 2 - b - b2;
    r.set2 = {q / (1 + 2 * b), q * (1 + b) / ((1 + 2 * b) * b),
              b * (11 + 21 * b + 15 * b2 + 7 * b3) / ((2 + b) * (2 + b) * (1 + 2 * b)), q / ((1 + 2 * b) * (1 + b))};
    return r;
}

RatioClaims check_ratio_claims(int grid) {
    RatioClaims c;
    c.grid = grid;
    c.set1_third_min = c.set2_max23_min = c.mu = std::numeric_limits<double>::infinity();
    c.lambda = -c.mu;
    c.set1_third_ge_3p5 = c.set1_fourth_le_1_low = c.set1_first_le_1_high = true;
    c.set2_max23_ge_1p2 = c.set2_first_lt_0p8_low = c.set2_last_lt_0p8_high = true;
    for (int k = 1; k <= grid; ++k) {
        double b = double(k) / (grid + 1);
        RatioTables r = ratio_tables(b);
        c.set1_third_min = std::min(c.set1_third_min, r.set1[2]);
        if (r.set1[2] < 3.5) c.set1_third_ge_3p5 = false;
        if (b < 0.5 && r.set1[3] > 1) c.set1_fourth_le_1_low = false;
        if (b > 0.5 && r.set1[0] > 1) c.set1_first_le_1_high = false;
        double m23 = std::max(r.set2[1], r.set2[2]);
        c.set2_max23_min = std::min(c.set2_max23_min, m23);
        if (m23 < 1.2) c.set2_max23_ge_1p2 = false;
        if (b < 0.35) {
            c.set2_first_max_low = std::max(c.set2_first_max_low, r.set2[0]);
            if (!(r.set2[0] < 0.8)) c.set2_first_lt_0p8_low = false;
        }
        if (b > 0.35 && !(r.set2[3] < 0.8)) c.set2_last_lt_0p8_high = false;
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto* set : {&r.set1, &r.set2})
            for (double v : *set) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        c.lambda = std::max(c.lambda, lo);
        c.mu = std::min(c.mu, hi);
    }
    return c;
}

}  // namespace sf
