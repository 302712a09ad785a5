#pragma once
#include <string>
#include <vector>

#include "matchid/grid.hpp"
#include "matchid/indices.hpp"
#include "matchid/market.hpp"

namespace matchid {

// Which pairs a one-sided player must verify.
enum class ChallengerRule {
    Blocking,  // E-sets: arms that prefer the player, plus unmatched arms
    Full,      // every arm the player ranks below its match
    AllOthers, // every arm except the match
};

struct OracleSolution {
    Mat w;                        // simplex-normalized
    double T_star = 0;            // 1 / D(w)
    double level = 0;             // common index level at w, equals 1 / T_star
    double residual = 0;          // max first-order-condition violation
    std::vector<double> anchors;  // per player at w
    std::string method;
};

struct LocalBai {
    std::vector<double> w;  // per arm, sums to 1
    double level = 0;       // common challenger index at unit budget
};

LocalBai solve_local_bai(RewardModel f, const std::vector<double>& mu_row, int matched, const std::vector<int>& E);
// Leader fixed at beta of the unit budget, challengers equalized.
LocalBai solve_local_bai_beta(RewardModel f, const std::vector<double>& mu_row, int matched, const std::vector<int>& E,
                              double beta);

ConstraintSet true_constraints(const MarketInstance& inst, ChallengerRule rule = ChallengerRule::Blocking);

OracleSolution solve_one_sided(const MarketInstance& inst, ChallengerRule rule = ChallengerRule::Blocking);

enum class TwoSidedMethod {
    Reduced,       // convex program over leader weights, projected Newton
    Supergradient  // projected supergradient ascent with Polyak averaging
};

struct SupergradientOptions {
    int iterations = 100000;
    double step = 0.5;
};

OracleSolution solve_two_sided(const MarketInstance& inst, TwoSidedMethod method = TwoSidedMethod::Reduced);
// General solver over any constraint set (one-sided sets included).
OracleSolution solve_constraints(const ConstraintSet& cs, RewardModel f, Means means);
OracleSolution solve_supergradient(const ConstraintSet& cs, RewardModel f, Means means,
                                   const SupergradientOptions& opt = {});

// D(w) = min over the constraint indices at weights w, i.e. 1 / T(w).
double characteristic_time(const ConstraintSet& cs, RewardModel f, const Mat& w, Means means);
double characteristic_time(const MarketInstance& inst, const Mat& w, ChallengerRule rule = ChallengerRule::Blocking);

// D_beta for a one-sided instance; beta[i] is player i's leader fraction.
double beta_characteristic_time(const MarketInstance& inst, const std::vector<double>& beta,
                                ChallengerRule rule = ChallengerRule::Blocking);
// Leader fractions w(i, m(i)) / sum_k w(i, k) of a solution.
std::vector<double> leader_fractions(const ConstraintSet& cs, const Mat& w);

// Index spread and anchor condition residual of w against cs.
struct FocReport {
    double index_spread = 0;  // (max - min) / min over constraints
    double max_abs_anchor = 0;
    double max_slackness = 0;  // max |w_leader * g|
    double max_positive_anchor = 0;
};
FocReport first_order_report(const ConstraintSet& cs, RewardModel f, const Mat& w, Means means);

}  // namespace matchid
