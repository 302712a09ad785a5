#pragma once
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "matchid/grid.hpp"
#include "matchid/indices.hpp"
#include "matchid/market.hpp"
#include "matchid/oracle.hpp"

namespace matchid {

// Constraint structure the fluid runs on. Every constraint has exactly one
// leader pair, so challengers group under leaders.
struct FluidModel {
    ConstraintSet cs;
    RewardModel model;
    Mat mu;
    std::optional<Mat> eta;

    static FluidModel one_sided(const MarketInstance& inst, ChallengerRule rule = ChallengerRule::Blocking);
    // Throws when B3 is nonempty.
    static FluidModel two_sided_serial(const MarketInstance& inst);

    Means means() const { return {&mu, eta ? &*eta : nullptr}; }
    int leader_of(const Constraint& c) const;  // player owning the leader pair
};

enum class FluidClass { Idle, Plus, Minus, Zero };  // Idle: not in P_min
char to_char(FluidClass c);

struct FluidPartition {
    double C_min = kInf;
    std::vector<double> index;            // per constraint
    std::vector<double> anchor;           // per player, NaN without constraints
    std::vector<FluidClass> cls;          // per player
    std::vector<std::vector<int>> A_min;  // per player, constraint ids at the minimum
    std::vector<int> k_t;                 // per player, constraint driving a P+ leader
};

struct FluidOptions {
    double eps_part = 1e-7;   // relative membership tolerance
    double hysteresis = 10;   // merged pairs leave above hysteresis * eps_part
    double rel_step = 1e-3;   // step as a fraction of the budget
    double event_tol = 1e-10; // relative time tolerance for event location
    long long max_steps = 10000000;
    int record_every = 1;
};

// `prev` enables hysteresis on membership.
FluidPartition classify(const FluidModel& fm, const Mat& alloc, const FluidOptions& opt = {},
                        const FluidPartition* prev = nullptr);

struct FluidRates {
    double C_dot = 0;
    Mat alloc_dot;                     // sums to 1
    std::vector<double> budget_per_C;  // per player: d t^(i) / d C_min, 0 off P_min
};

FluidRates fluid_rhs(const FluidModel& fm, const Mat& alloc, const FluidPartition& part);
FluidRates one_sided_rhs(const FluidModel& fm, const Mat& alloc, const FluidPartition& part);
// Requires a serial-dictatorship model (see FluidModel::two_sided_serial).
FluidRates two_sided_serial_rhs(const FluidModel& fm, const Mat& alloc, const FluidPartition& part);

enum class FluidEventKind { IndexCatchUp, AnchorZero, AnchorSeparation, Steady };
std::string to_string(FluidEventKind k);

struct FluidEvent {
    FluidEventKind kind = FluidEventKind::IndexCatchUp;
    double time = 0;
    int player = -1;
    int arm = -1;
};

struct FluidRow {
    double t = 0;
    Mat alloc;
    std::vector<double> anchor;
    double C_min = 0;
    std::string labels;  // per player class chars
    std::string event;   // empty unless an event fired at this row
};

struct FluidTrajectory {
    std::vector<FluidRow> rows;
    std::vector<FluidEvent> events;
    std::optional<double> t_star;  // first time all constraints share the minimum
    bool ok = true;
    std::string error;
    Mat final_alloc;
};

FluidTrajectory integrate(const FluidModel& fm, const Mat& alloc0, double horizon, const FluidOptions& opt = {});
FluidTrajectory integrate_one_sided(const MarketInstance& inst, const Mat& alloc0, double horizon,
                                    ChallengerRule rule = ChallengerRule::Blocking, const FluidOptions& opt = {});

// Harmonic-sum relation between local and global time scales.
struct LocalGlobalReport {
    double global_rate = 0;         // C_dot from the fluid RHS
    double harmonic_local = 0;      // (sum_i 1 / local_rate_i)^-1, local rates by finite differences
    double max_share_error = 0;     // max_i |t_dot^(i) - C_dot / local_rate_i|
    std::vector<double> local_rate; // per player, NaN off P_min
    double discrepancy() const;
};

LocalGlobalReport local_global_check(const FluidModel& fm, const Mat& alloc, const FluidOptions& opt = {});

// 2x2 distinct-preference case machine.
struct TwoByTwoStep {
    int case_id = 0;
    std::string label;
    Mat rates;                 // t_dot, sums to 1
    std::array<double, 2> g{}, a{}, b{}, c{}, d{};
    double I12 = 0, I21 = 0;
    // Divergence table: d11..d22 player side, b11..b22 arm side.
    double dd11 = 0, dd12 = 0, dd21 = 0, dd22 = 0;
    double bb11 = 0, bb12 = 0, bb21 = 0, bb22 = 0;
    std::array<double, 2> g_dot{};
    double I12_dot = 0, I21_dot = 0;
};

TwoByTwoStep two_sided_2x2_step(const MarketInstance& inst, const Mat& alloc, double eps = 1e-9);

}  // namespace matchid
