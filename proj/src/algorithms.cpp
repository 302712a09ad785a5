#include "matchid/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace matchid {

double threshold(double t, double delta, double M_count, int P, int A, ThresholdVariant v) {
    if (t < 1) throw std::invalid_argument("threshold needs t >= 1");
    double loglog = std::log(1.0 + std::log(t));
    if (v == ThresholdVariant::Light) return std::log((1.0 + std::log(t)) / delta);
    return std::log((M_count - 1.0) / delta) + 3.0 * P * A * loglog;
}

void RunConfig::validate() const {
    if (!(gamma >= 0 && gamma < 1)) throw std::invalid_argument("gamma must lie in [0,1)");
    if (!(delta > 0 && delta < 1)) throw std::invalid_argument("delta must lie in (0,1)");
    if (max_rounds < 1) throw std::invalid_argument("max_rounds must be positive");
}

bool stopping_check(bool unique, double min_index, double t, const RunConfig& cfg, double M_count, int P, int A) {
    return unique && min_index > threshold(std::max(t, 1.0), cfg.delta, M_count, P, A, cfg.threshold_variant);
}

Algo algo_from_string(const std::string& s) {
    if (s == "att1") return Algo::Att1;
    if (s == "att2") return Algo::Att2;
    if (s == "btt") return Algo::BetaTopTwo;
    if (s == "abd") return Algo::AlphaBetaDelta;
    throw std::invalid_argument("unknown algorithm: " + s);
}

std::string to_string(Algo a) {
    switch (a) {
        case Algo::Att1: return "att1";
        case Algo::Att2: return "att2";
        case Algo::BetaTopTwo: return "btt";
        case Algo::AlphaBetaDelta: return "abd";
    }
    return "?";
}

namespace {

struct Snapshot {
    Matching m;
    bool unique = false;
    ConstraintSet cs;
    Evaluation ev;
    MinIndex mi;
};

// Pair choice given the round's snapshot; returns (player, arm).
using Policy = std::function<std::pair<int, int>(const Snapshot&, int player, bool explored_player)>;

class Runner {
public:
    Runner(const MarketInstance& inst, const RunConfig& cfg)
        : inst_(inst), cfg_(cfg), noise_(inst.model()), model_(inst.family, cfg.model_variance.value_or(inst.variance)), two_(inst.two_sided()), st_(inst.M, inst.K, inst.two_sided()) {
        cfg.validate();
        inst.validate();
        auto prof = prefs_from_means(inst);
        if (!is_unique_stable(prof)) throw std::invalid_argument("instance has more than one stable matching");
        truth_ = deferred_acceptance(prof, Side::Arms);
        M_count_ = matching_count(inst.M, inst.K);
        pair_rng_.reserve(inst.M * inst.K);
        for (int p = 0; p < inst.M * inst.K; ++p) pair_rng_.emplace_back(splitmix64(cfg.seed ^ splitmix64(p + 1)));
        coin_rng_.seed(splitmix64(cfg.seed ^ 0x5eedc0175ULL));
        mu_hat_ = Mat(inst.M, inst.K, 0.0);
        eta_hat_ = Mat(inst.M, inst.K, 0.0);
    }

    double coin() { return std::uniform_real_distribution<double>(0.0, 1.0)(coin_rng_); }

    RunResult run(const Policy& policy) {
        RunResult res;
        const int M = inst_.M, K = inst_.K;
        const long long warm = static_cast<long long>(M) * K;
        while (true) {
            if (st_.t >= cfg_.max_rounds) {
                res.hit_cap = true;
                break;
            }
            if (st_.t < warm) {
                draw(static_cast<int>(st_.t / K), static_cast<int>(st_.t % K));
                continue;
            }
            Snapshot s = snapshot();
            if (!cfg_.disable_stopping && stopping_check(s.unique, s.mi.value, static_cast<double>(st_.t), cfg_,
                                                         M_count_, M, K)) {
                last_ = std::move(s);
                break;
            }
            auto [i, explored] = choose_player(s);
            auto [pi, pk] = choose_arm(s, i, explored, policy);
            if (cfg_.trace_period > 0 && st_.t % cfg_.trace_period == 0) record(res, s, pi, pk);
            draw(pi, pk);
        }
        if (last_.cs.M == 0) last_ = snapshot();
        res.tau = st_.t;
        res.announced = last_.m;
        res.correct = last_.m == truth_;
        res.counts = st_.N;
        return res;
    }

private:
    void draw(int i, int k) {
        auto& rng = pair_rng_[i * inst_.K + k];
        double mu = inst_.mu(i, k);
        double x = cfg_.noise_free ? mu : noise_.sample(mu, rng);
        std::optional<double> y;
        if (two_) {
            double eta = (*inst_.eta)(i, k);
            y = cfg_.noise_free ? eta : noise_.sample(eta, rng);
        }
        st_.update(i, k, x, y);
        double n = static_cast<double>(st_.N(i, k));
        mu_hat_(i, k) = model_.clamp(st_.sum_x(i, k) / n);
        if (two_) eta_hat_(i, k) = model_.clamp(st_.sum_y(i, k) / n);
    }

    Snapshot snapshot() const {
        Snapshot s;
        const Mat* eta = two_ ? &eta_hat_ : nullptr;
        const Ordering* ap = two_ ? nullptr : &*inst_.arm_prefs;
        auto prof = prefs_from_estimates(mu_hat_, eta, ap);
        s.m = deferred_acceptance(prof, Side::Arms);
        s.unique = s.m == deferred_acceptance(prof, Side::Players);
        if (two_)
            s.cs = two_sided_constraints(s.m, partition_B123(prof, s.m), inst_.K);
        else if (cfg_.challengers == ChallengerRule::Full)
            s.cs = one_sided_full_constraints(prof, s.m);
        else if (cfg_.challengers == ChallengerRule::AllOthers)
            s.cs = one_sided_all_constraints(s.m, inst_.K);
        else
            s.cs = one_sided_constraints(s.m, probable_blocking_sets(prof, s.m), inst_.K);
        s.ev = evaluate(s.cs, model_, st_.counts(), {&mu_hat_, eta}, true);
        s.mi = min_index(s.cs, s.ev);
        return s;
    }

    std::pair<int, bool> choose_player(const Snapshot& s) const {
        const int M = inst_.M;
        double t = static_cast<double>(st_.t);
        int low = 0;
        for (int i = 1; i < M; ++i)
            if (st_.player_count(i) < st_.player_count(low)) low = i;
        double n_low = static_cast<double>(st_.player_count(low));
        bool explore = false;
        switch (cfg_.exploration) {
            case Exploration::Gamma: explore = n_low < std::pow(t, cfg_.gamma); break;
            case Exploration::GammaSq: explore = n_low <= std::pow(t, cfg_.gamma); break;
            case Exploration::SqrtPlayer: explore = n_low <= std::sqrt(t); break;
        }
        if (explore || s.mi.i < 0) return {low, true};
        return {s.mi.i, false};
    }

    std::pair<int, int> choose_arm(const Snapshot& s, int i, bool explored_player, const Policy& policy) const {
        const int K = inst_.K;
        int low = 0;
        for (int k = 1; k < K; ++k)
            if (st_.N(i, k) < st_.N(i, low)) low = k;
        double n_low = static_cast<double>(st_.N(i, low));
        double ni = static_cast<double>(st_.player_count(i));
        switch (cfg_.exploration) {
            case Exploration::Gamma:
                if (n_low < std::pow(ni, cfg_.gamma)) return {i, low};
                break;
            case Exploration::GammaSq:
                if (n_low <= std::pow(static_cast<double>(st_.t), cfg_.gamma * cfg_.gamma)) return {i, low};
                break;
            case Exploration::SqrtPlayer:
                if (explored_player) return {i, low};
                break;
        }
        return policy(s, i, explored_player);
    }

    void record(RunResult& res, const Snapshot& s, int i, int k) const {
        TraceRow r;
        r.t = st_.t;
        r.i = i;
        r.k = k;
        r.min_index = s.mi.value;
        r.anchors = s.ev.anchor;
        r.alloc.resize(st_.N.data.size());
        for (std::size_t p = 0; p < r.alloc.size(); ++p)
            r.alloc[p] = static_cast<double>(st_.N.data[p]) / static_cast<double>(st_.t);
        res.trace.push_back(std::move(r));
    }

    const MarketInstance& inst_;
    RunConfig cfg_;
    RewardModel noise_;
    RewardModel model_;
    bool two_;
    AllocationState st_;
    Matching truth_;
    double M_count_ = 0;
    std::vector<Rng> pair_rng_;
    Rng coin_rng_;
    Mat mu_hat_, eta_hat_;
    Snapshot last_;
};

// Minimum-index constraint owned by player i, or -1.
int player_argmin(const Snapshot& s, int i) {
    if (s.mi.i == i && s.ev.argmin >= 0) return s.ev.argmin;
    int best = -1;
    for (std::size_t n = 0; n < s.cs.items.size(); ++n) {
        if (s.cs.items[n].i != i) continue;
        if (best < 0 || s.ev.items[n].value < s.ev.items[best].value) best = static_cast<int>(n);
    }
    return best;
}

}  // namespace

RunResult run_att1(const MarketInstance& inst, const RunConfig& cfg) {
    if (inst.two_sided()) throw std::invalid_argument("ATT1 needs a one-sided instance");
    Runner r(inst, cfg);
    return r.run([](const Snapshot& s, int i, bool) -> std::pair<int, int> {
        int lead = s.m.arm_of[i];
        int c = player_argmin(s, i);
        if (c < 0 || s.ev.anchor[i] > 0) return {i, lead};
        return {i, s.cs.items[c].k};
    });
}

RunResult run_att2(const MarketInstance& inst, const RunConfig& cfg) {
    if (!inst.two_sided()) throw std::invalid_argument("ATT2 needs a two-sided instance");
    Runner r(inst, cfg);
    return r.run([](const Snapshot& s, int i, bool) -> std::pair<int, int> {
        int c = player_argmin(s, i);
        if (c < 0) return {i, s.m.arm_of[i]};
        const auto& con = s.cs.items[c];
        const auto& g = s.ev.anchor;
        switch (con.kind) {
            case ConstraintKind::B2: {
                int j = con.incumbent;
                if (g[j] > 0) return {j, con.k};
                return {i, con.k};
            }
            case ConstraintKind::B3: {
                int j = con.incumbent;
                if (std::max(g[i], g[j]) < 0) return {i, con.k};
                if (g[i] > g[j]) return {i, s.m.arm_of[i]};
                return {j, con.k};
            }
            default:
                if (g[i] > 0) return {i, s.m.arm_of[i]};
                return {i, con.k};
        }
    });
}

RunResult run_beta_top_two(const MarketInstance& inst, const std::vector<double>& beta, const RunConfig& cfg) {
    if (inst.two_sided()) throw std::invalid_argument("beta top-two needs a one-sided instance");
    if (static_cast<int>(beta.size()) != inst.M) throw std::invalid_argument("beta needs one entry per player");
    for (double b : beta)
        if (!(b > 0 && b < 1)) throw std::invalid_argument("beta must lie in (0,1)");
    Runner r(inst, cfg);
    return r.run([&](const Snapshot& s, int i, bool) -> std::pair<int, int> {
        int c = player_argmin(s, i);
        if (c < 0) return {i, s.m.arm_of[i]};
        // Leader with probability beta_i.
        if (r.coin() < beta[i]) return {i, s.m.arm_of[i]};
        return {i, s.cs.items[c].k};
    });
}

RunResult run_alpha_beta_delta(const MarketInstance& inst, const std::vector<double>& alpha,
                               const std::vector<double>& beta, const Grid<double>& delta_coins,
                               const RunConfig& cfg) {
    if (!inst.two_sided()) throw std::invalid_argument("(alpha, beta, delta) needs a two-sided instance");
    if (static_cast<int>(alpha.size()) != inst.K || static_cast<int>(beta.size()) != inst.M ||
        delta_coins.rows != inst.M || delta_coins.cols != inst.K)
        throw std::invalid_argument("coin parameters have the wrong shape");
    auto in01 = [](double v) { return v > 0 && v < 1; };
    if (!std::all_of(alpha.begin(), alpha.end(), in01) || !std::all_of(beta.begin(), beta.end(), in01) ||
        !std::all_of(delta_coins.data.begin(), delta_coins.data.end(), in01))
        throw std::invalid_argument("coin parameters must lie in (0,1)");
    Runner r(inst, cfg);
    return r.run([&](const Snapshot& s, int i, bool) -> std::pair<int, int> {
        int c = player_argmin(s, i);
        if (c < 0) return {i, s.m.arm_of[i]};
        const auto& con = s.cs.items[c];
        auto sub1 = [&]() -> std::pair<int, int> {
            if (r.coin() < beta[i]) return {i, s.m.arm_of[i]};
            return {i, con.k};
        };
        auto sub2 = [&]() -> std::pair<int, int> {
            if (r.coin() < alpha[con.k]) return {con.incumbent, con.k};
            return {i, con.k};
        };
        switch (con.kind) {
            case ConstraintKind::B2: return sub2();
            case ConstraintKind::B3: return r.coin() < delta_coins(i, con.k) ? sub1() : sub2();
            default: return sub1();
        }
    });
}

RunResult run_algorithm(Algo a, const MarketInstance& inst, const RunConfig& cfg) {
    switch (a) {
        case Algo::Att1: return run_att1(inst, cfg);
        case Algo::Att2: return run_att2(inst, cfg);
        case Algo::BetaTopTwo: return run_beta_top_two(inst, std::vector<double>(inst.M, 0.5), cfg);
        case Algo::AlphaBetaDelta:
            return run_alpha_beta_delta(inst, std::vector<double>(inst.K, 0.5), std::vector<double>(inst.M, 0.5),
                                        Grid<double>(inst.M, inst.K, 0.5), cfg);
    }
    throw std::invalid_argument("unknown algorithm");
}

}  // namespace matchid
