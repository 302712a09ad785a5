#pragma once
// Test-only generators and brute-force oracles.
#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

#include "matchid/market.hpp"

namespace testsupport {

using matchid::Matching;
using matchid::Ordering;
using matchid::PreferenceProfile;

inline std::vector<int> random_perm(int n, std::mt19937_64& rng) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

inline PreferenceProfile random_profile(int M, int K, std::mt19937_64& rng) {
    Ordering pp(M), ap(K);
    for (auto& o : pp) o = random_perm(K, rng);
    for (auto& o : ap) o = random_perm(M, rng);
    return PreferenceProfile::make(pp, ap);
}

// Distinct means in [lo, hi), rows shuffled independently.
inline matchid::Mat random_means(int M, int K, std::mt19937_64& rng, double lo = 1.0, double hi = 4.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    matchid::Mat m(M, K);
    for (double& v : m.data) v = u(rng);
    return m;
}

// Visits every injective assignment player -> arm.
inline void for_each_assignment(int M, int K, const std::function<void(const Matching&)>& f) {
    std::vector<int> arm_of(M, -1);
    std::vector<char> used(K, 0);
    std::function<void(int)> rec = [&](int i) {
        if (i == M) {
            f(Matching::from_assignment(arm_of, K));
            return;
        }
        for (int k = 0; k < K; ++k) {
            if (used[k]) continue;
            used[k] = 1;
            arm_of[i] = k;
            rec(i + 1);
            used[k] = 0;
        }
    };
    rec(0);
}

inline std::vector<Matching> brute_force_stable(const PreferenceProfile& p) {
    std::vector<Matching> out;
    for_each_assignment(p.M, p.K, [&](const Matching& m) {
        if (matchid::blocking_pairs(p, m).empty()) out.push_back(m);
    });
    return out;
}

}  // namespace testsupport
