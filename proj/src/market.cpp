#include "matchid/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace matchid {

namespace {

void check_permutation(const std::vector<int>& order, int n, const char* what) {
    if (static_cast<int>(order.size()) != n) throw std::invalid_argument(std::string(what) + ": wrong length");
    std::vector<char> seen(n, 0);
    for (int v : order) {
        if (v < 0 || v >= n || seen[v]) throw std::invalid_argument(std::string(what) + ": not a permutation");
        seen[v] = 1;
    }
}

std::vector<int> order_desc(const std::vector<double>& v, bool strict) {
    std::vector<int> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
    if (strict)
        for (std::size_t r = 1; r < idx.size(); ++r)
            if (v[idx[r]] == v[idx[r - 1]]) throw std::invalid_argument("non-strict preferences");
    return idx;
}

PreferenceProfile profile_from(const Mat& mu, const Mat* eta, const Ordering* arm_prefs, bool strict) {
    int M = mu.rows, K = mu.cols;
    Ordering pp(M), ap(K);
    for (int i = 0; i < M; ++i) {
        std::vector<double> row(K);
        for (int k = 0; k < K; ++k) row[k] = mu(i, k);
        pp[i] = order_desc(row, strict);
    }
    if (eta) {
        for (int k = 0; k < K; ++k) {
            std::vector<double> col(M);
            for (int i = 0; i < M; ++i) col[i] = (*eta)(i, k);
            ap[k] = order_desc(col, strict);
        }
    } else if (arm_prefs) {
        ap = *arm_prefs;
    } else {
        throw std::invalid_argument("instance needs eta or arm_prefs");
    }
    return PreferenceProfile::make(std::move(pp), std::move(ap));
}

}  // namespace

PreferenceProfile PreferenceProfile::make(Ordering player_prefs, Ordering arm_prefs) {
    PreferenceProfile p;
    p.M = static_cast<int>(player_prefs.size());
    p.K = static_cast<int>(arm_prefs.size());
    if (p.M == 0 || p.K == 0) throw std::invalid_argument("empty market");
    if (p.M > p.K) throw std::invalid_argument("M > K is not supported");
    p.player_rank = Grid<int>(p.M, p.K);
    p.arm_rank = Grid<int>(p.K, p.M);
    for (int i = 0; i < p.M; ++i) {
        check_permutation(player_prefs[i], p.K, "player preference");
        for (int r = 0; r < p.K; ++r) p.player_rank(i, player_prefs[i][r]) = r;
    }
    for (int k = 0; k < p.K; ++k) {
        check_permutation(arm_prefs[k], p.M, "arm preference");
        for (int r = 0; r < p.M; ++r) p.arm_rank(k, arm_prefs[k][r]) = r;
    }
    p.player_prefs = std::move(player_prefs);
    p.arm_prefs = std::move(arm_prefs);
    return p;
}

Matching Matching::from_assignment(const std::vector<int>& arm_of, int K) {
    Matching m(static_cast<int>(arm_of.size()), K);
    for (int i = 0; i < static_cast<int>(arm_of.size()); ++i) {
        int k = arm_of[i];
        if (k < 0) continue;
        if (k >= K || m.player_of[k] != -1) throw std::invalid_argument("assignment is not injective");
        m.assign(i, k);
    }
    return m;
}

void MarketInstance::validate() const {
    if (M <= 0 || K <= 0) throw std::invalid_argument("empty market");
    if (M > K) throw std::invalid_argument("M > K is not supported");
    if (mu.rows != M || mu.cols != K) throw std::invalid_argument("mu has wrong shape");
    if (eta.has_value() == arm_prefs.has_value())
        throw std::invalid_argument("exactly one of eta and arm_prefs must be present");
    RewardModel model = this->model();
    for (double v : mu.data) model.check_mean(v);
    if (eta) {
        if (eta->rows != M || eta->cols != K) throw std::invalid_argument("eta has wrong shape");
        for (double v : eta->data) model.check_mean(v);
    }
    prefs_from_means(*this);
}

PreferenceProfile prefs_from_means(const MarketInstance& inst) {
    return profile_from(inst.mu, inst.eta ? &*inst.eta : nullptr, inst.arm_prefs ? &*inst.arm_prefs : nullptr, true);
}

PreferenceProfile prefs_from_estimates(const Mat& mu, const Mat* eta, const Ordering* arm_prefs) {
    return profile_from(mu, eta, arm_prefs, false);
}

Matching deferred_acceptance(const PreferenceProfile& p, Side proposing) {
    Matching m(p.M, p.K);
    if (proposing == Side::Players) {
        std::vector<int> next(p.M, 0);
        bool active = true;
        while (active) {
            active = false;
            for (int i = 0; i < p.M; ++i) {
                if (m.arm_of[i] != -1 || next[i] >= p.K) continue;
                active = true;
                int k = p.player_prefs[i][next[i]++];
                int cur = m.player_of[k];
                if (cur == -1) {
                    m.assign(i, k);
                } else if (p.arm_prefers(k, i, cur)) {
                    m.arm_of[cur] = -1;
                    m.assign(i, k);
                }
            }
        }
    } else {
        // Arms propose; a player holds the best proposal seen so far.
        std::vector<int> next(p.K, 0);
        bool active = true;
        while (active) {
            active = false;
            for (int k = 0; k < p.K; ++k) {
                if (m.player_of[k] != -1 || next[k] >= p.M) continue;
                active = true;
                int i = p.arm_prefs[k][next[k]++];
                int cur = m.arm_of[i];
                if (cur == -1) {
                    m.assign(i, k);
                } else if (p.player_prefers(i, k, cur)) {
                    m.player_of[cur] = -1;
                    m.assign(i, k);
                }
            }
        }
    }
    return m;
}

std::vector<std::pair<int, int>> blocking_pairs(const PreferenceProfile& p, const Matching& m) {
    std::vector<std::pair<int, int>> out;
    for (int i = 0; i < p.M; ++i) {
        int mine = m.arm_of[i];
        for (int k = 0; k < p.K; ++k) {
            if (k == mine) continue;
            bool player_wants = mine == -1 || p.player_prefers(i, k, mine);
            if (!player_wants) continue;
            int holder = m.player_of[k];
            if (holder == -1 || p.arm_prefers(k, i, holder)) out.emplace_back(i, k);
        }
    }
    return out;
}

bool is_stable(const PreferenceProfile& p, const Matching& m) { return blocking_pairs(p, m).empty(); }

bool is_unique_stable(const PreferenceProfile& p) {
    return deferred_acceptance(p, Side::Arms) == deferred_acceptance(p, Side::Players);
}

BlockingSets probable_blocking_sets(const PreferenceProfile& p, const Matching& m) {
    BlockingSets b;
    b.D.assign(p.M, {});
    b.E.assign(p.M, {});
    for (int k = 0; k < p.K; ++k)
        if (m.player_of[k] == -1) b.A_UM.push_back(k);
    for (int i = 0; i < p.M; ++i) {
        for (int k = 0; k < p.K; ++k) {
            int holder = m.player_of[k];
            if (holder == -1 || holder == i) continue;
            if (p.arm_prefers(k, i, holder)) b.D[i].push_back(k);
        }
        std::vector<int> e = b.D[i];
        e.insert(e.end(), b.A_UM.begin(), b.A_UM.end());
        std::sort(e.begin(), e.end());
        b.E[i] = std::move(e);
    }
    return b;
}

B123Partition partition_B123(const PreferenceProfile& p, const Matching& m) {
    B123Partition out;
    for (int i = 0; i < p.M; ++i) {
        int mine = m.arm_of[i];
        for (int k = 0; k < p.K; ++k) {
            int j = m.player_of[k];
            if (j == -1 || j == i) continue;
            bool player_keeps = p.player_prefers(i, mine, k);
            bool arm_keeps = p.arm_prefers(k, j, i);
            if (player_keeps && !arm_keeps)
                out.B1.emplace_back(i, k);
            else if (!player_keeps && arm_keeps)
                out.B2.emplace_back(i, k);
            else if (player_keeps && arm_keeps)
                out.B3.emplace_back(i, k);
            else
                throw std::invalid_argument("input matching not stable");
        }
    }
    return out;
}

B123Partition partition_B123(const MarketInstance& inst, const Matching& m) {
    if (!inst.two_sided()) throw std::invalid_argument("partition_B123 needs a two-sided instance");
    return partition_B123(prefs_from_means(inst), m);
}

ProfileKind profile_kind_from_string(const std::string& s) {
    if (s == "distinct") return ProfileKind::Distinct;
    if (s == "serial") return ProfileKind::Serial;
    if (s == "spc") return ProfileKind::Spc;
    throw std::invalid_argument("invalid kind: " + s);
}

std::string to_string(ProfileKind k) {
    switch (k) {
        case ProfileKind::Distinct: return "distinct";
        case ProfileKind::Serial: return "serial";
        case ProfileKind::Spc: return "spc";
    }
    return "?";
}

namespace {

Ordering one_based(std::vector<std::vector<int>> rows) {
    for (auto& r : rows)
        for (int& v : r) --v;
    return rows;
}

// Appendix I preference lists, 1-based as printed.
struct Canonical {
    Ordering players, arms;
};

Canonical canonical(ProfileKind kind) {
    switch (kind) {
        case ProfileKind::Distinct:
            return {one_based({{1, 2, 3, 4, 5}, {2, 3, 4, 5, 1}, {3, 4, 5, 1, 2}, {4, 5, 1, 2, 3}, {5, 1, 2, 3, 4}}),
                    one_based({{1, 5, 3, 4, 2}, {2, 3, 1, 5, 4}, {3, 4, 2, 1, 5}, {4, 5, 3, 2, 1}, {5, 1, 4, 3, 2}})};
        case ProfileKind::Serial:
            return {one_based({{3, 2, 4, 1, 5}, {1, 3, 2, 4, 5}, {3, 4, 2, 5, 1}, {2, 5, 3, 1, 4}, {1, 5, 2, 3, 4}}),
                    one_based({{1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}, {1, 2, 3, 4, 5}})};
        case ProfileKind::Spc:
            return {one_based({{1, 3, 2, 5, 4}, {1, 2, 4, 3, 5}, {1, 3, 5, 2, 4}, {2, 4, 5, 1, 3}, {1, 5, 4, 2, 3}}),
                    one_based({{1, 4, 2, 3, 5}, {1, 2, 5, 3, 4}, {1, 3, 2, 4, 5}, {2, 4, 5, 1, 3}, {3, 1, 2, 4, 5}})};
    }
    throw std::invalid_argument("invalid kind");
}

std::vector<int> random_perm(int n, Rng& rng) {
    std::vector<int> v(n);
    std::iota(v.begin(), v.end(), 0);
    std::shuffle(v.begin(), v.end(), rng);
    return v;
}

// Moves item `self` ahead of every item with a larger label.
void promote(std::vector<int>& order, int self) {
    auto it = std::find(order.begin(), order.end(), self);
    order.erase(it);
    auto pos = std::find_if(order.begin(), order.end(), [&](int v) { return v > self; });
    order.insert(pos, self);
}

bool has_property(ProfileKind kind, const PreferenceProfile& p) {
    if (kind == ProfileKind::Distinct) {
        std::vector<char> seen(p.K, 0);
        for (int i = 0; i < p.M; ++i) {
            int top = p.player_prefs[i][0];
            if (seen[top]) return false;
            seen[top] = 1;
        }
        if (p.M == p.K) {
            std::vector<char> seen_p(p.M, 0);
            for (int k = 0; k < p.K; ++k) {
                int top = p.arm_prefs[k][0];
                if (seen_p[top]) return false;
                seen_p[top] = 1;
            }
        }
    }
    return true;
}

}  // namespace

MarketInstance generate_instance(ProfileKind kind, int M, int K, const std::vector<double>& mean_levels,
                                 std::uint64_t seed, Family family) {
    if (M <= 0 || M > K) throw std::invalid_argument("need 0 < M <= K");
    if (static_cast<int>(mean_levels.size()) < K) throw std::invalid_argument("insufficient levels");
    for (std::size_t r = 1; r < mean_levels.size(); ++r)
        if (!(mean_levels[r] > mean_levels[r - 1])) throw std::invalid_argument("levels must be strictly increasing");

    Ordering pp, ap;
    if (seed == 0 && M == 5 && K == 5) {
        auto c = canonical(kind);
        pp = c.players;
        ap = c.arms;
    } else {
        Rng rng(splitmix64(seed) ^ hash_string(to_string(kind)));
        for (int attempt = 0;; ++attempt) {
            if (attempt > 100000) throw std::runtime_error("instance generation failed");
            pp.assign(M, {});
            ap.assign(K, {});
            for (int i = 0; i < M; ++i) pp[i] = random_perm(K, rng);
            for (int k = 0; k < K; ++k) ap[k] = random_perm(M, rng);
            if (kind == ProfileKind::Serial) {
                for (int k = 0; k < K; ++k) std::iota(ap[k].begin(), ap[k].end(), 0);
            } else if (kind == ProfileKind::Spc) {
                // p_i ranks a_i above a_{i+1..}; a_i ranks p_i above p_{i+1..}.
                for (int i = 0; i < M; ++i) promote(pp[i], i);
                for (int k = 0; k < M; ++k) promote(ap[k], k);
            } else {
                // Each top arm ranks its proposer first, which makes the matching unique.
                for (int i = 0; i < M; ++i) {
                    auto& o = ap[pp[i][0]];
                    o.erase(std::find(o.begin(), o.end(), i));
                    o.insert(o.begin(), i);
                }
            }
            auto prof = PreferenceProfile::make(pp, ap);
            if (has_property(kind, prof) && is_unique_stable(prof)) break;
        }
    }

    auto level = [&](int rank) { return mean_levels[mean_levels.size() - 1 - rank]; };
    MarketInstance inst;
    inst.kind = to_string(kind);
    inst.M = M;
    inst.K = K;
    inst.family = family;
    inst.mu = Mat(M, K);
    Mat eta(M, K);
    for (int i = 0; i < M; ++i)
        for (int r = 0; r < K; ++r) inst.mu(i, pp[i][r]) = level(r);
    for (int k = 0; k < K; ++k)
        for (int r = 0; r < M; ++r) eta(ap[k][r], k) = level(r);
    inst.eta = eta;
    inst.validate();
    return inst;
}

MarketInstance to_one_sided(const MarketInstance& inst) {
    if (!inst.two_sided()) return inst;
    MarketInstance out = inst;
    out.arm_prefs = prefs_from_means(inst).arm_prefs;
    out.eta.reset();
    return out;
}

MarketInstance example1(double mu11, double eta11) {
    MarketInstance inst;
    inst.kind = "example1";
    inst.M = 2;
    inst.K = 2;
    inst.mu = Mat::from_rows({{mu11, 1.0}, {1.0, 2.0}});
    inst.eta = Mat::from_rows({{eta11, 1.0}, {1.0, 2.0}});
    inst.validate();
    return inst;
}

double matching_count(int M, int K) {
    double c = 1.0;
    for (int r = 0; r < M; ++r) c *= static_cast<double>(K - r);
    return c;
}

}  // namespace matchid
