#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <vector>

#include "sf/induced.hpp"

namespace sf {

// Tables: 0 = V0R0, 1 = V1R0, 2 = V1R1, 3 = V2R1; entries are corners (1)..(4).
using Table4 = std::array<std::array<double, 4>, 4>;

Table4 corner_formulas(double beta, double epsilon);
// Corner (3) of the V2R1 table as recomputed from the construction.
double derived_v2r1_corner3(double beta, double epsilon);

struct CornerTable {
    double beta = 0, epsilon = 0;
    Table4 predicted{}, measured{}, rel_error{};
    std::array<std::array<bool, 4>, 4> flagged{};
    double derived_v2r1_3 = 0;
};
CornerTable verify_corner_tables(double beta, double epsilon);

struct RatioTables {
    double beta = 0;
    std::array<double, 4> set1{}, set2{};
};
RatioTables ratio_tables(double beta);

struct RatioClaims {
    int grid = 0;
    double set1_third_min = 0;
    bool set1_third_ge_3p5 = false;
    bool set1_fourth_le_1_low = false;
    bool set1_first_le_1_high = false;
    double set2_max23_min = 0;
    bool set2_max23_ge_1p2 = false;
    bool set2_first_lt_0p8_low = false;
    double set2_first_max_low = 0;
    bool set2_last_lt_0p8_high = false;
    double lambda = 0, mu = 0;  // range covered by the ratios at every grid point
    bool all() const {
        return set1_third_ge_3p5 && set1_fourth_le_1_low && set1_first_le_1_high && set2_max23_ge_1p2 &&
               set2_first_lt_0p8_low && set2_last_lt_0p8_high;
    }
};
// Grid beta_k = k/(grid+1), k = 1..grid.
RatioClaims check_ratio_claims(int grid = 50);

enum class OrbitId { shapley, anti_shapley, gamma };
enum class Stability { attracting, saddle, repelling, jitter };
const char* to_string(OrbitId o);
const char* to_string(Stability s);

std::vector<std::pair<int, int>> cycle_of(OrbitId o);

// Exact linearization of a pure cycle: the return map on rays is projective-linear.
struct CycleLinearization {
    JointState boundary_point;  // fixed ray, on the boundary
    std::array<std::complex<double>, 2> multipliers{};
};
CycleLinearization cycle_linearization(const GamePair& g, const std::vector<std::pair<int, int>>& cycle,
                                       int rotate = 0);

struct StabilityReport {
    OrbitId orbit = OrbitId::shapley;
    std::array<std::complex<double>, 2> eigenvalues{};
    Stability classification = Stability::jitter;
    double richardson_consistency = 0;  // relative gap between step h and h/2 Jacobians
    double fixed_point_residual = 0;
    JointState section_point;
};
Stability classify_moduli(double m0, double m1);
StabilityReport classify_stability(const GamePair& g, OrbitId orbit);

double leading_modulus(double beta, OrbitId orbit, int rotate = 0);
struct TauEstimate {
    double tau = 0, lo = 0, hi = 0;
};
TauEstimate estimate_tau(int rotate = 0, double width = 1e-7);

// Two-strategy spiral of the sub-game around a J-leg; radii measured on one half-line.
struct SpiralCheck {
    double a = 0;
    double theta = 0;  // fitted per-circuit linear factor, 1 for an exact r/(1+ar) law
    double max_rel_error = 0;
    std::vector<double> radii;
};
SpiralCheck moebius_spiral(const GamePair& g, double r0, int circuits);
double spiral_coefficient(const GamePair& g, double r0);

struct MoebiusCone {
    double kappa = 0, d = 0, fit_residual = 0;
    double derivative_at_E = 0;
    bool E_attracting = false;
    bool has_fixed_point = false;
    double t_star = 0;
    double fixed_point_residual = 0;  // |rho(t*) - t*|
    double iterate_max_rel_error = 0;  // n-fold composition vs n direct circuits
};
MoebiusCone moebius_cone_map(const GamePair& g, int iterates = 10);

struct WindingCheck {
    double a = 0, c0 = 0, K_fit = 0, B0_fit = 0;
    std::vector<double> radii;
    std::vector<int> measured, predicted, theory;
    bool third_strategy = false;
    bool within2 = false;
};
WindingCheck verify_winding(const GamePair& g, const std::vector<double>& radii,
                            const std::array<double, 2>& fit_radii = {5e-2, 5e-3}, double s0 = 0.95,
                            double s1 = 0.7);
// Completed circuits around the J-leg between the planes at s0 and s1 for start radius r.
int measure_winding(const GamePair& g, double r, double s0, double s1, bool* third_strategy = nullptr);

struct ConeLift {
    double kappa = 0, d = 0, fit_residual = 0;
    bool reaches_E = false;
    double time_to_E = 0;
    bool periodic = false;
    double t_star = 0;
    double closure = 0;
};
// x is an induced periodic point of period n legs; J points use the constrained flow.
ConeLift cone_lift(const GamePair& g, const JointState& x, int n);

struct RobustnessReport {
    int trials = 0;
    int interior = 0, gamma_closes = 0, shapley_persists = 0, anti_shapley_persists = 0, cone_lift_ok = 0;
    int all_ok = 0;
    Stability shapley_class = Stability::jitter, anti_shapley_class = Stability::jitter;
};
GamePair perturbed_family(double beta, double norm, std::uint64_t seed, std::uint64_t trial);
RobustnessReport robustness_sweep(double beta, int n_trials, double perturb_norm, std::uint64_t seed = 1);

}  // namespace sf
