#pragma once

#include <limits>
#include <string>
#include <vector>

#include "sf/game.hpp"

namespace sf {

// Strategy label: pure k (0-based) or mixed k-bar (the strategy excluded from the mix).
struct Label {
    int k = 0;
    bool mixed = false;
    bool operator==(const Label&) const = default;
};
std::string label_string(const Label& l);  // "1".."3", mixed as "1b".."3b"

struct TargetPair {
    Label iA, iB;
    Vec3 targetA, targetB;
};

// Which indifference fired: player 'A' or 'B', and the strategy that newly ties.
struct EventReason {
    char player = 'A';
    int strategy = 0;
};

struct HitEvent {
    double u = 1.0;
    EventReason reason;
};

struct TrajectoryLeg {
    JointState start, end;
    TargetPair targets;
    double duration_t = 0.0;
    double duration_u = 0.0;
    EventReason reason;
};

struct Trajectory {
    std::vector<TrajectoryLeg> legs;
    bool terminated_at_E = false;
};

struct SimLimits {
    int max_events = 10000;
    double max_time_t = std::numeric_limits<double>::infinity();
    double stop_radius_at_E = 1e-9;
};

// Strategy masks restrict play to a sub-game (bit k set = strategy k allowed).
struct StepOptions {
    unsigned maskA = 7;
    unsigned maskB = 7;
};

HitEvent hitting_event(const GamePair& g, const JointState& s, const TargetPair& t, const StepOptions& o = {});

TargetPair pure_targets(int i, int j);
// Pure best-response pair valid on the outgoing side of any tie at s.
TargetPair choose_targets(const GamePair& g, const JointState& s, const StepOptions& o = {});

TrajectoryLeg advance(const GamePair& g, const JointState& s, const TargetPair& t, const HitEvent& h);
TrajectoryLeg step(const GamePair& g, const JointState& s, const StepOptions& o = {});
Trajectory simulate(const GamePair& g, const JointState& init, const SimLimits& lim = {}, const StepOptions& o = {});

// Mixed cone-targets on a double-indifference plane Z^B_kl x Z^A_ij.
TargetPair constrained_target(const GamePair& g, const JointState& s);
TrajectoryLeg constrained_step(const GamePair& g, const JointState& s);
Trajectory simulate_constrained(const GamePair& g, const JointState& init, const SimLimits& lim = {});

double distance_to_E(const GamePair& g, const JointState& s);

std::string trajectory_csv(const Trajectory& tr);

}  // namespace sf
