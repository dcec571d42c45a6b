#pragma once

#include <array>
#include <optional>
#include <vector>

#include "sf/coding.hpp"
#include "sf/flow.hpp"

namespace sf {

JointState project_to_boundary(const JointState& s, const JointState& E);
bool on_boundary(const JointState& s, double tol = 1e-12);

JointState induced_step(const GamePair& g, const JointState& b, bool constrained = false);

struct GammaOrbit {
    std::vector<JointState> boundary_points;  // 7 points, last equals first within tolerance
    std::vector<TargetPair> targets;           // 6 mixed target pairs
    Itinerary itinerary;
    double closure_residual = 0.0;
    // Radial return on the seed ray, t -> kappa t/(1 + d t), t measured from E (t=1 on the boundary).
    double kappa = 0.0;
    double d = 0.0;
    double fit_residual = 0.0;
    bool has_gamma = false;  // true when the ray carries an attracting fixed point t*
    double t_star = 0.0;
    std::vector<JointState> gamma_points;  // 7 event points of Gamma on J when has_gamma
    Landmarks landmarks;
};

JointState gamma_seed(const GamePair& g);
GammaOrbit gamma_orbit(const GamePair& g);

// One constrained circuit (6 legs) from E + t (seed - E); returns t' with end - E = t' (seed - E).
double cone_circuit(const GamePair& g, const JointState& seed, double t, double* collinearity = nullptr);

enum class SectionKind { GlobalS, V0xB31, A12xV1, V2xB12, TransversalAtGamma };

struct SectionSpec {
    SectionKind kind = SectionKind::V0xB31;
    // V-sections: hyperplane c.pX = 0 on player `hyper` (through E), face coordinate zero on player `face`.
    char hyper = 'A';
    Vec3 c = Vec3::Zero();
    char face = 'B';
    int face_coord = 0;
    JointState origin;
    Vec3 axisA = Vec3::Zero();  // horizontal axis direction point for pA
    Vec3 axisB = Vec3::Zero();  // vertical axis direction point for pB
    // GlobalS: four pieces U_b x Z^A_ij, given as (functional on pB, B target strategy).
    std::vector<std::pair<Vec3, int>> pieces;
    int orientation = 0;  // 0 accepts both crossing directions
};

SectionSpec make_section(const GamePair& g, SectionKind kind);

struct SectionHit {
    JointState point;
    double x = 0.0, y = 0.0;
    int piece = -1;
    int events_between = 0;
    int winding = 0;
    int direction = 0;
    std::vector<std::pair<Label, Label>> slice;
};

std::array<double, 2> chart_coords(const SectionSpec& s, const JointState& q);
// Inverse chart for the V-sections: boundary point with chart coordinates (x,y).
JointState chart_point(const GamePair& g, const SectionSpec& s, double x, double y);
// Half-line (1)..(4): |x|>|y| gives 1 (x>0) or 3, otherwise 4 (y>0) or 2.
int half_line(double x, double y);

std::vector<SectionHit> first_return(const GamePair& g, const SectionSpec& sec, const JointState& b, int count,
                                     int max_events = 2000000);

struct EntrySample {
    double x_in = 0, y_in = 0, x_out = 0, y_out = 0;
    bool flagged = false;
};
struct EntryMaps {
    std::vector<EntrySample> R0, R1;
};
EntryMaps leg_entry_maps(const GamePair& g, double epsilon, int samples = 16);

}  // namespace sf
