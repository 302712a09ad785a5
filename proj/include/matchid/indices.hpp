#pragma once
#include <limits>
#include <optional>
#include <vector>

#include "matchid/grid.hpp"
#include "matchid/market.hpp"
#include "matchid/spef.hpp"

namespace matchid {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct AllocationState {
    int M = 0;
    int K = 0;
    bool two_sided = false;
    Grid<long long> N;
    Mat sum_x;
    Mat sum_y;
    long long t = 0;

    AllocationState() = default;
    AllocationState(int M, int K, bool two_sided);

    void update(int i, int k, double x, std::optional<double> y = std::nullopt);
    long long player_count(int i) const;
    // Empirical means; entries with zero count are NaN.
    Mat means_x() const;
    Mat means_y() const;
    Mat counts() const;
};

// GLR index between a leader (weight n_m, mean mu_m) and a challenger.
double player_index(RewardModel f, double n_m, double n_k, double mu_m, double mu_k);
// Arm-side index: incumbent j (n_jk, eta_j) against proposing player i (n_ik, eta_i).
double arm_index(RewardModel f, double n_jk, double n_ik, double eta_j, double eta_i);

double anchor_one_sided(RewardModel f, const std::vector<double>& means_row, int matched, const std::vector<int>& E,
                        const std::vector<double>& counts_row);

// One constraint of the lower-bound program, attached to the pair (i, k).
enum class ConstraintKind { Player, B1, B2, B3, Unmatched };

struct Constraint {
    int i = 0;
    int k = 0;
    int incumbent = -1;  // m^{-1}(k), -1 for unmatched arms
    ConstraintKind kind = ConstraintKind::Player;

    bool player_term() const { return kind != ConstraintKind::B2; }
    bool arm_term() const { return kind == ConstraintKind::B2 || kind == ConstraintKind::B3; }
};

struct ConstraintSet {
    int M = 0;
    int K = 0;
    bool two_sided = false;
    Matching matching;
    std::vector<Constraint> items;  // sorted by (i, k)
};

ConstraintSet one_sided_constraints(const Matching& m, const BlockingSets& b, int K);
// Arms the player ranks below its match, regardless of arm preferences.
ConstraintSet one_sided_full_constraints(const PreferenceProfile& p, const Matching& m);
// Every arm except the match.
ConstraintSet one_sided_all_constraints(const Matching& m, int K);
ConstraintSet two_sided_constraints(const Matching& m, const B123Partition& part, int K);

struct Means {
    const Mat* mu = nullptr;
    const Mat* eta = nullptr;
};

// Per-constraint quantities at weights w. Partials follow the envelope theorem.
struct ConstraintEval {
    double value = 0;          // index (summed for B3); +inf if a needed weight is zero
    double challenger_d = 0;   // d value / d w(i,k)
    double leader_d = 0;       // d value / d w(i, m(i)), player term
    double incumbent_d = 0;    // d value / d w(j, k), arm term
};

struct Evaluation {
    std::vector<ConstraintEval> items;
    std::vector<double> anchor;  // per player
    double min_value = kInf;
    int argmin = -1;  // into items
};

ConstraintEval evaluate_constraint(const Constraint& c, const Matching& m, RewardModel f, const Mat& w, Means means);
// `zero_is_inf` maps constraints with an empty side to +inf (pre-warmup convention).
Evaluation evaluate(const ConstraintSet& cs, RewardModel f, const Mat& w, Means means, bool zero_is_inf = true);

double anchor_two_sided(const MarketInstance& inst, const Matching& m, const B123Partition& part, const Mat& w,
                        int player);

struct MinIndex {
    double value = kInf;
    int i = -1;
    int k = -1;
    ConstraintKind kind = ConstraintKind::Player;
    bool empty = true;  // no constraint at all: nothing to verify
};

MinIndex min_index_one_sided(const AllocationState& s, const Matching& m, const BlockingSets& b, RewardModel f,
                             const Mat& mu);
MinIndex ts_min_index(const AllocationState& s, const Matching& m, const B123Partition& part, RewardModel f, const Mat& mu,
                      const Mat& eta);
MinIndex min_index(const ConstraintSet& cs, const Evaluation& ev);

// d anchor_l / d w(p, q) for every player l, flattened over (p, q).
Mat anchor_jacobian(const ConstraintSet& cs, RewardModel f, const Mat& w, Means means);

}  // namespace matchid
