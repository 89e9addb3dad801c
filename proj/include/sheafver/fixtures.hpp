#pragma once

#include "sheafver/system.hpp"

#include <vector>

namespace sheafver {

// Parameterized train family: n consecutive trains on a linear track with a
// radio controller. Positions live in 0..pos_max, movement modes in
// 0..max_mode; a train in mode j may advance by dt*min_speed .. dt*maxSpeed(j)
// per step. Mode thresholds are strictly increasing gap bounds l_0 < ... ;
// the controller assigns mode j+1 to a follower whose reported gap lies in
// (l_j, l_{j+1}].
struct TrainParams {
    int n = 2;
    int k = 1;
    int l = 1;
    Value pos_max = 4;
    int max_mode = 1;
    int min_speed = 1;
    std::vector<int> max_speeds = {1};  // indexed by mode 1..max_mode
    std::vector<int> thresholds = {1};  // l_0..l_{m-1}
    int dt = 1;
    Value safety_gap = 1;  // L in the collision-freeness constraints
    bool all_or_none_modes = false;  // extend Gamma with (all modes 0) or (all modes > 0)
    bool force_activity = false;     // extend C with update | move = 1
    Semantics semantics = Semantics::Disj;
    std::vector<int> fast_trains;  // sabotage: these trains may always move up to fast_speed
    int fast_speed = 2;
};

// Trains a..b of the full system (a > b yields the empty system).
System make_train_window(const TrainParams& p, int a, int b);
inline System make_train_system(const TrainParams& p) { return make_train_window(p, 1, p.n); }

// Collision-freeness generators for the window a..b:
//   succ(TrainIndex_i) = TrainIndex_j  =>  ActualPos_i < ActualPos_j - L.
std::vector<ExprPtr> train_safe_constraints(const TrainParams& p, int a, int b);
// Mode_i `op` 0 for every train in the window (CanMove / CannotMove shapes).
std::vector<ExprPtr> train_mode_constraints(const TrainParams& p, int a, int b, CmpOp op);

struct NamedFamily {
    std::vector<SystemPtr> members;
    SystemPtr ambient;
};

// {S_k^n, S_1^l, S_k^l} with ambient S (S_k^l degenerates to the empty
// system when l < k).
NamedFamily trains_family(const TrainParams& p);

// The 2-train cover: windows {i,i+1} for i=1..n-1 plus their single-train
// overlaps, ambient S.
NamedFamily train_pair_cover_family(const TrainParams& p);

// Three systems sharing pairwise one action (a-b-c triangle of exclusions),
// plus pairwise pullbacks and the empty system.
NamedFamily trio_family();

// Two disjoint simplified train systems with actions update_i / move_i and
// exclusion constraints only.
NamedFamily two_train_trace_family();

// Two disjoint one-train systems (reports and moves, no controller) plus the
// empty system; the word-projection non-injectivity example.
NamedFamily example8_family();

// Two independent forced mod-2 counters sharing only the empty system; every
// component hits zero, the interconnection never hits zero simultaneously.
NamedFamily mod2_clock_family();

// Two overlapping actions whose sequential executions do not commute.
System indep_violator_system();

// Controllerless train variant: reports and moves only, all-together
// constraints, (Indep) semantics.
System example4_system(const TrainParams& p);

}  // namespace sheafver
