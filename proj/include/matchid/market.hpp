#pragma once
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "matchid/grid.hpp"
#include "matchid/spef.hpp"

namespace matchid {

using Ordering = std::vector<std::vector<int>>;

struct PreferenceProfile {
    int M = 0;
    int K = 0;
    Ordering player_prefs;  // player_prefs[i] lists arms best first
    Ordering arm_prefs;     // arm_prefs[k] lists players best first
    Grid<int> player_rank;  // player_rank(i, k): position of arm k in i's list
    Grid<int> arm_rank;     // arm_rank(k, i): position of player i in k's list

    // Validates permutations and M <= K.
    static PreferenceProfile make(Ordering player_prefs, Ordering arm_prefs);

    bool player_prefers(int i, int a, int b) const { return player_rank(i, a) < player_rank(i, b); }
    bool arm_prefers(int k, int i, int j) const { return arm_rank(k, i) < arm_rank(k, j); }
};

struct Matching {
    std::vector<int> arm_of;     // player -> arm, -1 if unmatched
    std::vector<int> player_of;  // arm -> player, -1 if unmatched

    Matching() = default;
    Matching(int M, int K) : arm_of(M, -1), player_of(K, -1) {}
    static Matching from_assignment(const std::vector<int>& arm_of, int K);

    void assign(int i, int k) {
        arm_of[i] = k;
        player_of[k] = i;
    }
    bool operator==(const Matching& o) const { return arm_of == o.arm_of; }
};

struct MarketInstance {
    std::string kind = "custom";
    int M = 0;
    int K = 0;
    Mat mu;                            // mu(i, k): player i's mean for arm k
    std::optional<Mat> eta;            // eta(i, k): arm k's mean for player i
    std::optional<Ordering> arm_prefs; // known arm preferences (one-sided)
    Family family = Family::Gaussian;
    double variance = 1.0;  // Gaussian noise variance

    RewardModel model() const { return RewardModel(family, variance); }
    bool two_sided() const { return eta.has_value(); }
    void validate() const;
};

enum class Side { Players, Arms };

PreferenceProfile prefs_from_means(const MarketInstance& inst);
// Same orderings built from estimates; equal values are ordered by index.
PreferenceProfile prefs_from_estimates(const Mat& mu, const Mat* eta, const Ordering* arm_prefs);

Matching deferred_acceptance(const PreferenceProfile& p, Side proposing);
std::vector<std::pair<int, int>> blocking_pairs(const PreferenceProfile& p, const Matching& m);
bool is_stable(const PreferenceProfile& p, const Matching& m);
bool is_unique_stable(const PreferenceProfile& p);

struct BlockingSets {
    std::vector<std::vector<int>> D;
    std::vector<int> A_UM;
    std::vector<std::vector<int>> E;
};

BlockingSets probable_blocking_sets(const PreferenceProfile& p, const Matching& m);

enum class PairClass { B1, B2, B3 };

struct B123Partition {
    std::vector<std::pair<int, int>> B1, B2, B3;
};

// Classification by the preference profile; throws on the blocking pattern.
B123Partition partition_B123(const PreferenceProfile& p, const Matching& m);
B123Partition partition_B123(const MarketInstance& inst, const Matching& m);

enum class ProfileKind { Distinct, Serial, Spc };
ProfileKind profile_kind_from_string(const std::string& s);
std::string to_string(ProfileKind k);

// Two-sided instance (mu and eta). Seed 0 at 5x5 returns the canonical fixture.
MarketInstance generate_instance(ProfileKind kind, int M, int K, const std::vector<double>& mean_levels,
                                 std::uint64_t seed, Family family = Family::Gaussian);
// Drops eta and keeps the arm orderings it induces.
MarketInstance to_one_sided(const MarketInstance& inst);
// Example 1: mu = ((mu11, 1), (1, 2)), eta = ((eta11, 1), (1, 2)).
MarketInstance example1(double mu11, double eta11);

// Number of injective player -> arm assignments, K!/(K-M)!.
double matching_count(int M, int K);

}  // namespace matchid
