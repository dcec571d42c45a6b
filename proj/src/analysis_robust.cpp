#include <cmath>

#include "sf/analysis.hpp"
#include "sf/parallel.hpp"
#include "sf/rng.hpp"

namespace sf {

GamePair perturbed_family(double beta, double norm, std::uint64_t seed, std::uint64_t trial) {
    GamePair base = shapley_family(beta);
    CounterRng rng = CounterRng(seed).split(trial);
    Mat3 A = base.A, B = base.B;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) A(r, c) += rng.uniform(-norm, norm);
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) B(r, c) += rng.uniform(-norm, norm);
    GamePair g = game_from_matrices(A, B);
    g.beta = beta;
    return g;
}

namespace {

Stability exact_class(const GamePair& g, OrbitId o) {
    CycleLinearization lin = cycle_linearization(g, cycle_of(o));
    return classify_moduli(std::abs(lin.multipliers[0]), std::abs(lin.multipliers[1]));
}

struct TrialResult {
    bool interior = false, closes = false, sh = false, as = false, lift = false;
};

}  // namespace

RobustnessReport robustness_sweep(double beta, int n_trials, double perturb_norm, std::uint64_t seed) {
    if (n_trials < 0 || !(perturb_norm >= 0)) throw Error(Errc::invalid_argument, "bad sweep parameters");
    GamePair base = shapley_family(beta);
    RobustnessReport rep;
    rep.trials = n_trials;
    rep.shapley_class = exact_class(base, OrbitId::shapley);
    rep.anti_shapley_class = exact_class(base, OrbitId::anti_shapley);
    bool base_gamma = gamma_orbit(base).has_gamma;
    std::vector<TrialResult> res(n_trials);
    parallel_for(n_trials, [&](int k) {
        TrialResult& r = res[k];
        GamePair g;
        try {
            g = perturbed_family(beta, perturb_norm, seed, std::uint64_t(k));
            r.interior = true;
        } catch (const Error&) {
            return;
        }
        try {
            GammaOrbit orb = gamma_orbit(g);
            r.closes = true;
            if (base_gamma) {
                ConeLift lift = cone_lift(g, gamma_seed(g), 6);
                r.lift = orb.has_gamma && lift.periodic && lift.closure <= 1e-8;
            } else {
                r.lift = !orb.has_gamma;
            }
        } catch (const Error&) {
        }
        try {
            r.sh = exact_class(g, OrbitId::shapley) == rep.shapley_class;
        } catch (const Error&) {
        }
        try {
            r.as = exact_class(g, OrbitId::anti_shapley) == rep.anti_shapley_class;
        } catch (const Error&) {
        }
    });
    for (const auto& r : res) {
        rep.interior += r.interior;
        rep.gamma_closes += r.closes;
        rep.shapley_persists += r.sh;
        rep.anti_shapley_persists += r.as;
        rep.cone_lift_ok += r.lift;
        rep.all_ok += r.interior && r.closes && r.sh && r.as && r.lift;
    }
    return rep;
}

}  // namespace sf
