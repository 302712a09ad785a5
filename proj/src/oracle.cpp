#include "matchid/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace matchid {

namespace {

// Solves value(x) = y for x in (bot, top), value decreasing in x, by bisection.
// value(x) = D(top, x) + w(x) D(bot, x) with w(x) = (top - x) / (x - bot).
double challenger_weight_for_level(const RewardModel& model, double top, double bot, double y) {
    double lo = std::min(top, bot), hi = std::max(top, bot);
    auto value = [&](double x) {
        double w = (top - x) / (x - bot);
        return model.kl(top, x) + w * model.kl(bot, x);
    };
    // value falls from D(top, bot) at x = bot to 0 at x = top.
    for (int it = 0; it < 400; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        bool move_toward_top = value(mid) > y;
        bool raise_lo = (top > bot) == move_toward_top;
        (raise_lo ? lo : hi) = mid;
    }
    double x = 0.5 * (lo + hi);
    return (top - x) / (x - bot);
}

struct LocalAtLevel {
    std::vector<double> w;
    double anchor = 0;
};

LocalAtLevel local_at_level(const RewardModel& model, const std::vector<double>& mu, int m,
                            const std::vector<int>& E, double leader, double y) {
    LocalAtLevel r;
    r.w.assign(mu.size(), 0.0);
    r.w[m] = leader;
    r.anchor = -1.0;
    for (int k : E) {
        double wk = leader * challenger_weight_for_level(model, mu[m], mu[k], y / leader);
        r.w[k] = wk;
        double x = mixture_mean(leader, mu[m], wk, mu[k]);
        double den = model.kl(mu[k], x);
        r.anchor += den > 0 ? model.kl(mu[m], x) / den : kInf;
    }
    return r;
}

void check_local(const std::vector<double>& mu, int matched, const std::vector<int>& E) {
    if (E.empty()) throw std::invalid_argument("local problem needs a nonempty challenger set");
    for (int k : E) {
        if (k == matched) throw std::invalid_argument("challenger equals leader");
        if (!(mu[matched] > mu[k])) throw std::invalid_argument("challenger mean not below leader mean");
    }
}

double min_gap(const RewardModel& model, const std::vector<double>& mu, int m, const std::vector<int>& E) {
    double g = kInf;
    for (int k : E) g = std::min(g, model.kl(mu[m], mu[k]));
    return g;
}

}  // namespace

LocalBai solve_local_bai(RewardModel f, const std::vector<double>& mu_row, int matched, const std::vector<int>& E) {
    check_local(mu_row, matched, E);
    RewardModel model{f};
    // Anchor is increasing in the level y on (0, min_k D(mu_m, mu_k)).
    double lo = 0.0, hi = min_gap(model, mu_row, matched, E);
    for (int it = 0; it < 300; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (local_at_level(model, mu_row, matched, E, 1.0, mid).anchor < 0 ? lo : hi) = mid;
    }
    double y = 0.5 * (lo + hi);
    auto r = local_at_level(model, mu_row, matched, E, 1.0, y);
    double s = std::accumulate(r.w.begin(), r.w.end(), 0.0);
    LocalBai out;
    out.w = r.w;
    for (double& v : out.w) v /= s;
    out.level = y / s;
    return out;
}

LocalBai solve_local_bai_beta(RewardModel f, const std::vector<double>& mu_row, int matched, const std::vector<int>& E,
                              double beta) {
    check_local(mu_row, matched, E);
    if (!(beta > 0 && beta < 1)) throw std::invalid_argument("beta must lie in (0,1)");
    RewardModel model{f};
    // Challenger mass needed is increasing in the level.
    double lo = 0.0, hi = beta * min_gap(model, mu_row, matched, E);
    auto mass = [&](double y) {
        auto r = local_at_level(model, mu_row, matched, E, beta, y);
        return std::accumulate(r.w.begin(), r.w.end(), 0.0) - beta;
    };
    for (int it = 0; it < 300; ++it) {
        double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        (mass(mid) < 1.0 - beta ? lo : hi) = mid;
    }
    double y = 0.5 * (lo + hi);
    LocalBai out;
    out.w = local_at_level(model, mu_row, matched, E, beta, y).w;
    out.level = y;
    return out;
}

ConstraintSet true_constraints(const MarketInstance& inst, ChallengerRule rule) {
    auto prof = prefs_from_means(inst);
    if (!is_unique_stable(prof)) throw std::invalid_argument("instance has more than one stable matching");
    auto m = deferred_acceptance(prof, Side::Arms);
    if (inst.two_sided()) return two_sided_constraints(m, partition_B123(prof, m), inst.K);
    if (rule == ChallengerRule::Full) return one_sided_full_constraints(prof, m);
    if (rule == ChallengerRule::AllOthers) return one_sided_all_constraints(m, inst.K);
    return one_sided_constraints(m, probable_blocking_sets(prof, m), inst.K);
}

namespace {

std::vector<std::vector<int>> challengers_by_player(const ConstraintSet& cs) {
    std::vector<std::vector<int>> E(cs.M);
    for (const auto& c : cs.items) E[c.i].push_back(c.k);
    return E;
}

std::vector<double> row(const Mat& m, int i) {
    std::vector<double> r(m.cols);
    for (int k = 0; k < m.cols; ++k) r[k] = m(i, k);
    return r;
}

}  // namespace

OracleSolution solve_one_sided(const MarketInstance& inst, ChallengerRule rule) {
    if (inst.two_sided()) throw std::invalid_argument("solve_one_sided needs a one-sided instance");
    auto cs = true_constraints(inst, rule);
    if (cs.items.empty()) throw std::invalid_argument("nothing to verify: all challenger sets are empty");
    auto E = challengers_by_player(cs);
    for (const auto& c : cs.items)
        if (!(inst.mu(c.i, cs.matching.arm_of[c.i]) > inst.mu(c.i, c.k)))
            return solve_constraints(cs, inst.model(), {&inst.mu, nullptr});
    // Local index levels are 1-homogeneous in the player budget, so equalizing
    // budget * level across players is a harmonic split.
    std::vector<LocalBai> local(cs.M);
    double T = 0.0;
    for (int i = 0; i < cs.M; ++i) {
        if (E[i].empty()) continue;
        local[i] = solve_local_bai(inst.model(), row(inst.mu, i), cs.matching.arm_of[i], E[i]);
        T += 1.0 / local[i].level;
    }
    OracleSolution sol;
    sol.method = "nested-bisection";
    sol.w = Mat(inst.M, inst.K, 0.0);
    for (int i = 0; i < cs.M; ++i) {
        if (E[i].empty()) continue;
        double budget = (1.0 / local[i].level) / T;
        for (int k = 0; k < inst.K; ++k) sol.w(i, k) = budget * local[i].w[k];
    }
    sol.T_star = T;
    sol.level = 1.0 / T;
    auto rep = first_order_report(cs, inst.model(), sol.w, {&inst.mu, nullptr});
    sol.residual = std::max(rep.index_spread, rep.max_abs_anchor);
    sol.anchors = evaluate(cs, inst.model(), sol.w, {&inst.mu, nullptr}, false).anchor;
    return sol;
}

namespace {

// Reduced program: fix leader weights L, each challenger weight is the unique
// value that lifts its constraint to 1; minimize total mass F(L) over L >= 0.
// dF/dL_l equals minus player l's anchor.
class Reduced {
public:
    Reduced(const ConstraintSet& cs, RewardModel f, Means means) : cs_(cs), model_{f}, means_(means) {
        involved_.assign(cs.M, 0);
        for (const auto& c : cs.items) {
            if (c.player_term()) involved_[c.i] = 1;
            if (c.arm_term()) involved_[c.incumbent] = 1;
        }
    }

    const std::vector<char>& involved() const { return involved_; }

    // Fills W from L; returns false if some constraint cannot reach 1.
    bool fill(const std::vector<double>& L, Mat& W) const {
        W = Mat(cs_.M, cs_.K, 0.0);
        for (int i = 0; i < cs_.M; ++i) W(i, cs_.matching.arm_of[i]) = L[i];
        for (const auto& c : cs_.items) {
            double cap = 0;
            int lead = cs_.matching.arm_of[c.i];
            if (c.player_term()) cap += L[c.i] * model_.kl((*means_.mu)(c.i, lead), (*means_.mu)(c.i, c.k));
            if (c.arm_term())
                cap += L[c.incumbent] * model_.kl((*means_.eta)(c.incumbent, c.k), (*means_.eta)(c.i, c.k));
            if (!(cap > 1.0)) return false;
            // value(w) is concave increasing: Newton from the left never overshoots.
            double w = 0.0;
            for (int it = 0; it < 500; ++it) {
                W(c.i, c.k) = w;
                auto e = evaluate_constraint(c, cs_.matching, model_, W, means_);
                double fval = e.value - 1.0;
                if (fval >= 0 || !(e.challenger_d > 0)) break;
                double step = -fval / e.challenger_d;
                double next = w + step;
                if (!(next > w) || step <= 1e-16 * next) {
                    w = next;
                    break;
                }
                w = next;
            }
            W(c.i, c.k) = w;
        }
        return true;
    }

    double total(const std::vector<double>& L, Mat* out = nullptr) const {
        Mat W;
        if (!fill(L, W)) return kInf;
        double s = std::accumulate(W.data.begin(), W.data.end(), 0.0);
        if (out) *out = std::move(W);
        return s;
    }

    std::vector<double> gradient(const Mat& W) const {
        auto ev = evaluate(cs_, model_, W, means_, false);
        std::vector<double> g(cs_.M, 0.0);
        for (int i = 0; i < cs_.M; ++i) g[i] = involved_[i] ? -ev.anchor[i] : 0.0;
        return g;
    }

private:
    const ConstraintSet& cs_;
    RewardModel model_;
    Means means_;
    std::vector<char> involved_;
};

// Dense Cholesky solve with diagonal shift on failure.
std::vector<double> solve_spd(std::vector<std::vector<double>> H, std::vector<double> b) {
    int n = static_cast<int>(b.size());
    double shift = 0;
    for (int attempt = 0; attempt < 60; ++attempt) {
        auto A = H;
        for (int i = 0; i < n; ++i) A[i][i] += shift;
        bool ok = true;
        for (int j = 0; j < n && ok; ++j) {
            double s = A[j][j];
            for (int k = 0; k < j; ++k) s -= A[j][k] * A[j][k];
            if (!(s > 0)) {
                ok = false;
                break;
            }
            A[j][j] = std::sqrt(s);
            for (int i = j + 1; i < n; ++i) {
                double t = A[i][j];
                for (int k = 0; k < j; ++k) t -= A[i][k] * A[j][k];
                A[i][j] = t / A[j][j];
            }
        }
        if (ok) {
            std::vector<double> y(n), x(n);
            for (int i = 0; i < n; ++i) {
                double t = b[i];
                for (int k = 0; k < i; ++k) t -= A[i][k] * y[k];
                y[i] = t / A[i][i];
            }
            for (int i = n - 1; i >= 0; --i) {
                double t = y[i];
                for (int k = i + 1; k < n; ++k) t -= A[k][i] * x[k];
                x[i] = t / A[i][i];
            }
            return x;
        }
        double diag = 0;
        for (int i = 0; i < n; ++i) diag = std::max(diag, std::abs(H[i][i]));
        shift = shift == 0 ? 1e-10 * std::max(diag, 1.0) : shift * 10;
    }
    return b;
}

}  // namespace

OracleSolution solve_constraints(const ConstraintSet& cs, RewardModel f, Means means) {
    if (cs.items.empty()) throw std::invalid_argument("nothing to verify: constraint set is empty");
    Reduced red(cs, f, means);
    const auto& inv = red.involved();
    int M = cs.M;

    std::vector<double> L(M, 0.0);
    for (int i = 0; i < M; ++i) L[i] = inv[i] ? 1.0 : 0.0;
    {
        // Scale so every constraint can reach level 1 with room to spare.
        RewardModel model{f};
        double worst = kInf;
        for (const auto& c : cs.items) {
            int lead = cs.matching.arm_of[c.i];
            double cap = 0;
            if (c.player_term()) cap += model.kl((*means.mu)(c.i, lead), (*means.mu)(c.i, c.k));
            if (c.arm_term()) cap += model.kl((*means.eta)(c.incumbent, c.k), (*means.eta)(c.i, c.k));
            worst = std::min(worst, cap);
        }
        if (!(worst > 0)) throw std::invalid_argument("degenerate constraint: equal means");
        for (double& v : L) v *= 4.0 / worst;
    }

    Mat W;
    double F = red.total(L, &W);
    for (int iter = 0; iter < 500; ++iter) {
        auto grad = red.gradient(W);
        std::vector<int> free;
        double pg = 0;
        for (int i = 0; i < M; ++i) {
            if (!inv[i]) continue;
            if (L[i] > 0 || grad[i] < 0) {
                free.push_back(i);
                pg = std::max(pg, std::abs(grad[i]));
            }
        }
        if (pg < 1e-14) break;

        int n = static_cast<int>(free.size());
        std::vector<std::vector<double>> H(n, std::vector<double>(n, 0.0));
        for (int a = 0; a < n; ++a) {
            int i = free[a];
            double h = 1e-6 * std::max(L[i], 1e-6 * F);
            auto Lp = L, Lm = L;
            Lp[i] += h;
            Lm[i] = std::max(0.0, L[i] - h);
            Mat Wp, Wm;
            double fp = red.total(Lp, &Wp), fm = red.total(Lm, &Wm);
            if (!std::isfinite(fp) || !std::isfinite(fm)) {
                H[a][a] = 1.0;
                continue;
            }
            auto gp = red.gradient(Wp), gm = red.gradient(Wm);
            double span = Lp[i] - Lm[i];
            for (int b = 0; b < n; ++b) H[b][a] = (gp[free[b]] - gm[free[b]]) / span;
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) H[a][b] = H[b][a] = 0.5 * (H[a][b] + H[b][a]);
        std::vector<double> rhs(n);
        for (int a = 0; a < n; ++a) rhs[a] = -grad[free[a]];
        auto d = solve_spd(H, rhs);

        bool moved = false;
        for (int pass = 0; pass < 2 && !moved; ++pass) {
            if (pass == 1)
                for (int a = 0; a < n; ++a) d[a] = rhs[a] * std::max(L[free[a]], 1e-3 * F) / F;
            double alpha = 1.0;
            for (int ls = 0; ls < 80; ++ls, alpha *= 0.5) {
                auto Ln = L;
                double decrease = 0;
                for (int a = 0; a < n; ++a) {
                    int i = free[a];
                    Ln[i] = std::max(0.0, L[i] + alpha * d[a]);
                    decrease += grad[i] * (Ln[i] - L[i]);
                }
                Mat Wn;
                double Fn = red.total(Ln, &Wn);
                if (std::isfinite(Fn) && Fn <= F + 1e-4 * decrease + 1e-15 * F) {
                    bool changed = Ln != L;
                    L = Ln;
                    W = std::move(Wn);
                    F = Fn;
                    moved = changed;
                    break;
                }
            }
        }
        if (!moved) break;
    }

    OracleSolution sol;
    sol.method = "reduced-newton";
    sol.w = W;
    for (double& v : sol.w.data) v /= F;
    sol.T_star = F;
    sol.level = 1.0 / F;
    auto rep = first_order_report(cs, f, sol.w, means);
    sol.residual = std::max({rep.index_spread, rep.max_slackness, rep.max_positive_anchor});
    sol.anchors = evaluate(cs, f, sol.w, means, false).anchor;
    return sol;
}

namespace {

void project_simplex(std::vector<double>& v) {
    std::vector<double> u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    double css = 0, theta = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        css += u[j];
        double t = (css - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0) theta = t;
    }
    for (double& x : v) x = std::max(0.0, x - theta);
}

}  // namespace

OracleSolution solve_supergradient(const ConstraintSet& cs, RewardModel f, Means means, const SupergradientOptions& opt) {
    if (cs.items.empty()) throw std::invalid_argument("nothing to verify: constraint set is empty");
    // Coordinates: every pair named by some constraint.
    std::vector<int> coords;
    {
        std::vector<char> used(cs.M * cs.K, 0);
        for (const auto& c : cs.items) {
            used[c.i * cs.K + c.k] = 1;
            if (c.player_term()) used[c.i * cs.K + cs.matching.arm_of[c.i]] = 1;
            if (c.arm_term()) used[c.incumbent * cs.K + c.k] = 1;
        }
        for (int p = 0; p < cs.M * cs.K; ++p)
            if (used[p]) coords.push_back(p);
    }
    int n = static_cast<int>(coords.size());
    std::vector<double> x(n, 1.0 / n), avg(n, 0.0);
    Mat W(cs.M, cs.K, 0.0);
    auto load = [&](const std::vector<double>& v) {
        for (int a = 0; a < n; ++a) W.data[coords[a]] = v[a];
    };
    long long averaged = 0;
    for (int t = 1; t <= opt.iterations; ++t) {
        load(x);
        auto ev = evaluate(cs, f, W, means, false);
        const auto& c = cs.items[ev.argmin];
        const auto& e = ev.items[ev.argmin];
        std::vector<double> g(cs.M * cs.K, 0.0);
        g[c.i * cs.K + c.k] += e.challenger_d;
        if (c.player_term()) g[c.i * cs.K + cs.matching.arm_of[c.i]] += e.leader_d;
        if (c.arm_term()) g[c.incumbent * cs.K + c.k] += e.incumbent_d;
        double norm = 0;
        for (int a = 0; a < n; ++a) norm += g[coords[a]] * g[coords[a]];
        norm = std::sqrt(norm);
        if (norm == 0) break;
        double eta = opt.step / std::sqrt(static_cast<double>(t)) / norm;
        for (int a = 0; a < n; ++a) x[a] += eta * g[coords[a]];
        project_simplex(x);
        if (t > opt.iterations / 2) {
            for (int a = 0; a < n; ++a) avg[a] += x[a];
            ++averaged;
        }
    }
    for (double& v : avg) v /= static_cast<double>(std::max<long long>(averaged, 1));
    W = Mat(cs.M, cs.K, 0.0);
    load(avg);
    OracleSolution sol;
    sol.method = "supergradient";
    sol.w = W;
    sol.level = characteristic_time(cs, f, W, means);
    sol.T_star = 1.0 / sol.level;
    auto rep = first_order_report(cs, f, W, means);
    sol.residual = std::max({rep.index_spread, rep.max_slackness, rep.max_positive_anchor});
    sol.anchors = evaluate(cs, f, W, means, false).anchor;
    return sol;
}

OracleSolution solve_two_sided(const MarketInstance& inst, TwoSidedMethod method) {
    if (!inst.two_sided()) throw std::invalid_argument("solve_two_sided needs a two-sided instance");
    auto cs = true_constraints(inst);
    Means means{&inst.mu, &*inst.eta};
    if (method == TwoSidedMethod::Supergradient) return solve_supergradient(cs, inst.model(), means);
    return solve_constraints(cs, inst.model(), means);
}

double characteristic_time(const ConstraintSet& cs, RewardModel f, const Mat& w, Means means) {
    auto ev = evaluate(cs, f, w, means, false);
    return ev.min_value;
}

double characteristic_time(const MarketInstance& inst, const Mat& w, ChallengerRule rule) {
    auto cs = true_constraints(inst, rule);
    return characteristic_time(cs, inst.model(), w, {&inst.mu, inst.eta ? &*inst.eta : nullptr});
}

double beta_characteristic_time(const MarketInstance& inst, const std::vector<double>& beta, ChallengerRule rule) {
    if (inst.two_sided()) throw std::invalid_argument("beta_characteristic_time needs a one-sided instance");
    auto cs = true_constraints(inst, rule);
    auto E = challengers_by_player(cs);
    double inv = 0;
    for (int i = 0; i < cs.M; ++i) {
        if (E[i].empty()) continue;
        auto loc = solve_local_bai_beta(inst.model(), row(inst.mu, i), cs.matching.arm_of[i], E[i], beta.at(i));
        inv += 1.0 / loc.level;
    }
    if (inv == 0) throw std::invalid_argument("nothing to verify: all challenger sets are empty");
    return 1.0 / inv;
}

std::vector<double> leader_fractions(const ConstraintSet& cs, const Mat& w) {
    std::vector<double> beta(cs.M, 0.0);
    for (int i = 0; i < cs.M; ++i) {
        double s = 0;
        for (int k = 0; k < cs.K; ++k) s += w(i, k);
        beta[i] = s > 0 ? w(i, cs.matching.arm_of[i]) / s : 0.0;
    }
    return beta;
}

FocReport first_order_report(const ConstraintSet& cs, RewardModel f, const Mat& w, Means means) {
    FocReport r;
    auto ev = evaluate(cs, f, w, means, false);
    double lo = kInf, hi = 0;
    for (const auto& e : ev.items) {
        lo = std::min(lo, e.value);
        hi = std::max(hi, e.value);
    }
    r.index_spread = lo > 0 ? (hi - lo) / lo : kInf;
    std::vector<char> involved(cs.M, 0);
    for (const auto& c : cs.items) {
        if (c.player_term()) involved[c.i] = 1;
        if (c.arm_term()) involved[c.incumbent] = 1;
    }
    for (int i = 0; i < cs.M; ++i) {
        if (!involved[i]) continue;
        double g = ev.anchor[i];
        double lead = w(i, cs.matching.arm_of[i]);
        if (lead > 0) r.max_abs_anchor = std::max(r.max_abs_anchor, std::abs(g));
        r.max_slackness = std::max(r.max_slackness, std::abs(lead * g));
        r.max_positive_anchor = std::max(r.max_positive_anchor, g);
    }
    return r;
}

}  // namespace matchid
