#include "sf/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>

#include "sf/analysis.hpp"
#include "sf/coding.hpp"
#include "sf/jitter.hpp"
#include "sf/parallel.hpp"
#include "sf/sampling.hpp"

namespace sf {

using nlohmann::json;

namespace {

// Tolerances and sizes of the suite.
constexpr int kAttractStarts = 100, kAttractEvents = 300, kAttractNeeded = 95;
constexpr int kZeroSumStarts = 50;
constexpr double kZeroSumRadius = 1e-3, kZeroSumTime = 60;
constexpr double kHitBeta = 0.5, kHitEps = 1e-3, kHitTol = 1e-10;
constexpr double kCornerEps = 1e-4, kCornerTolFactor = 10, kCornerExact = 1e-9;
constexpr double kHalvingLo = 0.4, kHalvingHi = 0.6;
constexpr double kSpiralTol = 1e-8;
constexpr double kTauTarget = 0.915, kTauTol = 0.005, kTauSectionTol = 1e-3;
constexpr double kFixedTol = 1e-9, kPeriodicTol = 1e-8, kClosureTol = 1e-8;
constexpr int kRobustTrials = 100, kRobustNeeded = 99;
constexpr double kRobustNorm = 1e-3;
constexpr int kDivergenceStarts = 400;
constexpr long kDivergenceAnnulus = 50;
constexpr double kDivergenceNeeded = 0.9;

struct Entry {
    int id;
    const char* name;
    double limit;
    std::function<bool(json&, std::uint64_t)> run;
};

bool shapley_attraction(json& d, std::uint64_t seed) {
    GamePair g = shapley_family(0.3);
    CounterRng root(seed, 1);
    std::vector<int> entry(kAttractStarts, -1);
    parallel_for(kAttractStarts, [&](int i) {
        CounterRng rng = root.split(i);
        SimLimits lim;
        lim.max_events = kAttractEvents;
        Itinerary it = extract_itinerary(simulate(g, random_interior_state(rng), lim));
        int n = int(it.entries.size());
        // Locked in: the last two periods and everything before them back to the entry index.
        for (int from = 0; from + 2 * int(kShapleyCycle.size()) <= n; ++from)
            if (follows_cycle(it, from, kShapleyCycle)) {
                entry[i] = from;
                break;
            }
    });
    int reached = 0, latest = 0;
    for (int e : entry)
        if (e >= 0) ++reached, latest = std::max(latest, e);
    d = {{"beta", 0.3}, {"starts", kAttractStarts}, {"max_events", kAttractEvents}, {"reached", reached},
         {"required", kAttractNeeded}, {"latest_entry_event", latest}};
    return reached >= kAttractNeeded;
}

bool zero_sum(json& d, std::uint64_t seed) {
    const double sigma = (std::sqrt(5.0) - 1) / 2;
    GamePair g = shapley_family(sigma);
    CounterRng root(seed, 2);
    std::vector<double> dist(kZeroSumStarts), when(kZeroSumStarts);
    parallel_for(kZeroSumStarts, [&](int i) {
        CounterRng rng = root.split(i);
        SimLimits lim;
        lim.max_events = 1000000;
        lim.max_time_t = kZeroSumTime;
        lim.stop_radius_at_E = kZeroSumRadius;
        Trajectory tr = simulate(g, random_interior_state(rng), lim);
        const JointState& last = tr.legs.empty() ? JointState{} : tr.legs.back().end;
        dist[i] = tr.legs.empty() ? 1.0 : distance_to_E(g, last);
        when[i] = tr.legs.empty() ? 0.0 : last.time_t;
    });
    int ok = 0;
    double worst = 0, tmax = 0;
    for (int i = 0; i < kZeroSumStarts; ++i) {
        if (dist[i] < kZeroSumRadius && when[i] <= kZeroSumTime) ++ok;
        worst = std::max(worst, dist[i]);
        tmax = std::max(tmax, when[i]);
    }
    d = {{"beta", sigma}, {"starts", kZeroSumStarts}, {"converged", ok}, {"max_final_distance", worst},
         {"max_time_t", tmax}, {"radius", kZeroSumRadius}, {"time_limit_t", kZeroSumTime}};
    return ok == kZeroSumStarts;
}

bool hitting_times(json& d, std::uint64_t) {
    const double b = kHitBeta, e = kHitEps;
    GamePair g = shapley_family(b);
    JointState s;
    s.pA = Vec3::Constant(1.0 / 3);
    s.pB = Vec3(1 - b - e, 0, 1 + e) / (2 - b);
    const double expect[4] = {e / (1 + e), e / (b + b * e + 1 + 2 * e), e / (b * b + b * b * e + b + 2 * b * e + e),
                              e / (b + b * e + 2 * e)};
    const int targets[4][2] = {{2, 0}, {0, 0}, {0, 1}, {2, 1}};
    bool ok = true;
    double worst = 0;
    json legs = json::array();
    for (int k = 0; k < 4; ++k) {
        TrajectoryLeg leg = step(g, s);
        double rel = std::abs(leg.duration_u - expect[k]) / expect[k];
        bool tgt = !leg.targets.iA.mixed && !leg.targets.iB.mixed && leg.targets.iA.k == targets[k][0] &&
                   leg.targets.iB.k == targets[k][1];
        ok = ok && tgt && rel <= kHitTol;
        worst = std::max(worst, rel);
        legs.push_back({{"simulated", leg.duration_u}, {"closed_form", expect[k]}, {"rel_error", rel},
                        {"targets", {leg.targets.iA.k + 1, leg.targets.iB.k + 1}}, {"targets_ok", tgt}});
        s = leg.end;
    }
    d = {{"beta", b}, {"epsilon", e}, {"tolerance", kHitTol}, {"max_rel_error", worst}, {"legs", legs}};
    return ok;
}

const char* kTableNames[4] = {"V0R0", "V1R0", "V1R1", "V2R1"};

bool corner_tables(json& d, std::uint64_t) {
    bool ok = true;
    d = json::object();
    d["epsilon"] = kCornerEps;
    d["tolerance"] = kCornerTolFactor * kCornerEps;
    json failing = json::array();
    for (double b : {0.3, 0.7}) {
        CornerTable ct = verify_corner_tables(b, kCornerEps);
        CornerTable half = verify_corner_tables(b, kCornerEps / 2);
        json rows = json::array();
        for (int t = 0; t < 4; ++t)
            for (int m = 0; m < 4; ++m) {
                double rel = ct.rel_error[t][m], rel2 = half.rel_error[t][m];
                double ratio = rel2 / rel;
                bool halves = rel < kCornerExact || (ratio >= kHalvingLo && ratio <= kHalvingHi);
                bool pass = !ct.flagged[t][m] && rel <= kCornerTolFactor * kCornerEps && halves;
                if (!pass) failing.push_back({{"beta", b}, {"table", kTableNames[t]}, {"corner", m + 1}});
                ok = ok && pass;
                rows.push_back({{"table", kTableNames[t]}, {"corner", m + 1}, {"predicted", ct.predicted[t][m]},
                                {"measured", ct.measured[t][m]}, {"rel_error", rel}, {"halving_ratio", ratio},
                                {"pass", pass}});
            }
        d["tables"].push_back({{"beta", b}, {"entries", rows}, {"derived_V2R1_corner3", ct.derived_v2r1_3}});
    }
    // Branch switch at 1/2: largest relative jump of the formulas across it.
    Table4 lo = corner_formulas(0.5 - 1e-3, 1.0), hi = corner_formulas(0.5 + 1e-3, 1.0);
    double jump = 0;
    for (int t = 0; t < 4; ++t)
        for (int m = 0; m < 4; ++m) jump = std::max(jump, std::abs(lo[t][m] - hi[t][m]) / std::abs(hi[t][m]));
    d["branch_jump_at_half"] = jump;
    d["failing"] = failing;
    return ok;
}

bool moebius(json& d, std::uint64_t) {
    SpiralCheck sp = moebius_spiral(shapley_family(0.5), 1e-2, 50);
    d = {{"beta", 0.5}, {"r0", 1e-2}, {"circuits", 50}, {"a", sp.a}, {"theta", sp.theta},
         {"max_rel_error", sp.max_rel_error}, {"tolerance", kSpiralTol}};
    return sp.max_rel_error <= kSpiralTol;
}

bool winding(json& d, std::uint64_t) {
    WindingCheck w = verify_winding(shapley_family(0.5), {1e-2, 1e-3, 1e-4});
    d = {{"beta", 0.5}, {"a", w.a}, {"c0", w.c0}, {"K_fit", w.K_fit}, {"B0_fit", w.B0_fit},
         {"radii", w.radii}, {"measured", w.measured}, {"two_point_fit", w.predicted}, {"formula", w.theory},
         {"third_strategy", w.third_strategy}};
    return w.within2 && !w.third_strategy;
}

bool stability(json& d, std::uint64_t) {
    struct Row {
        double beta;
        OrbitId orbit;
        Stability expected;
    };
    const Row rows[] = {{0.3, OrbitId::shapley, Stability::attracting},
                        {0.7, OrbitId::shapley, Stability::attracting},
                        {0.95, OrbitId::shapley, Stability::saddle},
                        {0.3, OrbitId::anti_shapley, Stability::saddle},
                        {0.7, OrbitId::anti_shapley, Stability::saddle},
                        {0.95, OrbitId::anti_shapley, Stability::attracting}};
    bool ok = true;
    json table = json::array();
    for (const Row& r : rows) {
        StabilityReport rep = classify_stability(shapley_family(r.beta), r.orbit);
        bool match = rep.classification == r.expected;
        ok = ok && match;
        table.push_back({{"beta", r.beta}, {"orbit", to_string(r.orbit)}, {"expected", to_string(r.expected)},
                         {"measured", to_string(rep.classification)},
                         {"moduli", {std::abs(rep.eigenvalues[0]), std::abs(rep.eigenvalues[1])}},
                         {"richardson_consistency", rep.richardson_consistency},
                         {"match", match}});
    }
    TauEstimate t0 = estimate_tau(0), t1 = estimate_tau(1);
    bool tau_ok = std::abs(t0.tau - kTauTarget) <= kTauTol;
    bool section_ok = std::abs(t0.tau - t1.tau) <= kTauSectionTol;
    d = {{"table", table}, {"tau", t0.tau}, {"tau_other_section", t1.tau}, {"tau_target", kTauTarget},
         {"tau_tolerance", kTauTol}, {"tau_ok", tau_ok}, {"section_agreement", section_ok}};
    return ok && tau_ok && section_ok;
}

bool ratios(json& d, std::uint64_t) {
    RatioClaims c = check_ratio_claims(50);
    d = {{"grid", c.grid},
         {"set1_third_min", c.set1_third_min},
         {"set1_third_ge_3.5", c.set1_third_ge_3p5},
         {"set1_fourth_le_1_low", c.set1_fourth_le_1_low},
         {"set1_first_le_1_high", c.set1_first_le_1_high},
         {"set2_max23_min", c.set2_max23_min},
         {"set2_max23_ge_1.2", c.set2_max23_ge_1p2},
         {"set2_first_lt_0.8_low", c.set2_first_lt_0p8_low},
         {"set2_first_max_low", c.set2_first_max_low},
         {"set2_last_lt_0.8_high", c.set2_last_lt_0p8_high},
         {"covered_range", {c.lambda, c.mu}}};
    return c.all();
}

bool jitter(json& d, std::uint64_t) {
    JitterModel m = game_jitter_model(0.5);
    auto fps = find_fixed_points(m, 50, 59);
    bool fp_ok = fps.size() == 10;
    double fp_worst = 0;
    for (const auto& f : fps) {
        fp_ok = fp_ok && f.found && f.residual <= kFixedTol;
        fp_worst = std::max(fp_worst, f.residual);
    }
    PeriodicOrbit po = find_periodic_orbit(m, {1.1, 1.1, 1 / 1.21}, 50);
    bool po_ok = po.residual <= kPeriodicTol && po.points.size() == 3;
    std::vector<long> seq;
    for (int i = 0; i < 20; ++i) seq.push_back(i % 2 ? 52 : 50);
    Realization rz = realize_itinerary(m, seq);
    bool rz_ok = rz.verified && rz.realized == rz.requested;
    d = {{"beta", 0.5},
         {"N0", m.N0},
         {"fixed_points", {{"annuli", {50, 59}}, {"count", fps.size()}, {"max_residual", fp_worst}, {"ok", fp_ok}}},
         {"period3", {{"annuli", po.annuli}, {"ratios", po.ratios}, {"residual", po.residual}, {"ok", po_ok}}},
         {"itinerary", {{"requested", rz.requested}, {"realized", rz.realized}, {"ok", rz_ok}}}};
    return fp_ok && po_ok && rz_ok;
}

bool lift(json& d, std::uint64_t) {
    GamePair lo = shapley_family(0.3), hi = shapley_family(0.8);
    ConeLift a = cone_lift(lo, gamma_seed(lo), 6);
    ConeLift b = cone_lift(hi, gamma_seed(hi), 6);
    bool ok_a = a.reaches_E, ok_b = b.periodic && b.closure <= kClosureTol;
    d = {{"beta_0.3", {{"reaches_E", a.reaches_E}, {"time_to_E", a.time_to_E}, {"kappa", a.kappa}, {"d", a.d}}},
         {"beta_0.8",
          {{"periodic", b.periodic}, {"t_star", b.t_star}, {"closure", b.closure}, {"kappa", b.kappa}, {"d", b.d}}},
         {"closure_tolerance", kClosureTol}};
    return ok_a && ok_b;
}

bool robustness(json& d, std::uint64_t seed) {
    bool ok = true;
    d = json::object();
    for (double b : {0.3, 0.8}) {
        RobustnessReport r = robustness_sweep(b, kRobustTrials, kRobustNorm, seed);
        ok = ok && r.all_ok >= kRobustNeeded;
        d["runs"].push_back({{"beta", b},
                             {"trials", r.trials},
                             {"interior", r.interior},
                             {"gamma_closes", r.gamma_closes},
                             {"shapley_persists", r.shapley_persists},
                             {"anti_shapley_persists", r.anti_shapley_persists},
                             {"cone_lift_ok", r.cone_lift_ok},
                             {"all_ok", r.all_ok}});
    }
    d["required"] = kRobustNeeded;
    d["perturb_norm"] = kRobustNorm;
    return ok;
}

bool sensitivity(json& d, std::uint64_t seed) {
    JitterModel m = game_jitter_model(0.5);
    DivergenceReport r = itinerary_divergence(m, kDivergenceAnnulus, kDivergenceStarts, seed);
    double frac = double(r.diverged) / r.starts;
    d = {{"beta", 0.5}, {"annulus", kDivergenceAnnulus}, {"starts", r.starts}, {"diverged", r.diverged},
         {"fraction", frac}, {"required", kDivergenceNeeded}};
    return frac >= kDivergenceNeeded;
}

const std::vector<Entry>& entries() {
    static const std::vector<Entry> s = {
        {1, "shapley-attraction", 10, shapley_attraction}, {2, "zero-sum", 10, zero_sum},
        {3, "hitting-times", 1, hitting_times},           {4, "corner-tables", 30, corner_tables},
        {5, "moebius", 5, moebius},                       {6, "winding", 30, winding},
        {7, "stability", 60, stability},                  {8, "ratios", 5, ratios},
        {9, "jitter", 60, jitter},                        {10, "cone-lift", 30, lift},
        {11, "robustness", 120, robustness},              {12, "sensitivity", 30, sensitivity},
    };
    return s;
}

}  // namespace

int criterion_id(const std::string& key) {
    for (const Entry& s : entries())
        if (key == s.name || key == std::to_string(s.id)) return s.id;
    throw Error(Errc::invalid_argument, "unknown criterion: " + key);
}

std::vector<std::string> criterion_names() {
    std::vector<std::string> out;
    for (const Entry& s : entries()) out.push_back(s.name);
    return out;
}

CriterionResult run_criterion(int id, std::uint64_t seed) {
    for (const Entry& s : entries()) {
        if (s.id != id) continue;
        CriterionResult r;
        r.id = s.id;
        r.name = s.name;
        r.time_limit = s.limit;
        auto t0 = std::chrono::steady_clock::now();
        bool ok = false;
        try {
            ok = s.run(r.details, seed);
        } catch (const std::exception& e) {
            r.details["error"] = e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        r.details["within_time_limit"] = r.seconds < r.time_limit;
        r.passed = ok && r.seconds < r.time_limit;
        return r;
    }
    throw Error(Errc::invalid_argument, "unknown criterion id " + std::to_string(id));
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& only, std::uint64_t seed) {
    std::vector<CriterionResult> out;
    for (const Entry& s : entries())
        if (only.empty() || std::find(only.begin(), only.end(), s.id) != only.end())
            out.push_back(run_criterion(s.id, seed));
    return out;
}

}  // namespace sf
