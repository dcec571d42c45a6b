#pragma once

#include <cmath>

#include "sf/game.hpp"
#include "sf/rng.hpp"

namespace sf {

// Uniform point of the open simplex (normalized exponentials).
inline Vec3 random_simplex_point(CounterRng& rng) {
    Vec3 v;
    for (int k = 0; k < 3; ++k) v[k] = -std::log1p(-rng.uniform()) + 1e-300;
    return v / v.sum();
}

inline JointState random_interior_state(CounterRng& rng) {
    JointState s;
    s.pA = random_simplex_point(rng);
    s.pB = random_simplex_point(rng);
    return s;
}

}  // namespace sf
